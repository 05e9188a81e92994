//! Scalar abstraction and angle helpers.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar for all kinematic and classification math:
/// f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
    /// Convert an f64 literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts into any Real")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + core::fmt::Debug
        + core::fmt::Display
        + 'static
{
}

/// Wrap an angle to [-pi, pi).
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let pi = T::PI();
    let mut x = (a + pi) % tau;
    if x < T::zero() {
        x = x + tau;
    }
    x - pi
}

/// Distance between two angles on the circle, in [0, pi].
pub fn circle_dist<T: Real>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

/// Euclidean distance between two (theta2, theta3) pairs on the torus.
pub fn torus_dist2<T: Real>(a: (T, T), b: (T, T)) -> T {
    let d2 = circle_dist(a.0, b.0);
    let d3 = circle_dist(a.1, b.1);
    d2.hypot(d3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_idempotent_and_in_range() {
        for k in -20..20 {
            let a = 0.37_f64 * k as f64;
            let w = wrap_angle(a);
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w), "{w}");
            assert_eq!(w, wrap_angle(w));
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), -std::f64::consts::PI);
    }

    #[test]
    fn circle_dist_handles_seam() {
        let pi = std::f64::consts::PI;
        assert!(circle_dist(pi - 1e-3, -pi + 1e-3) < 2.1e-3);
        assert!((circle_dist(0.0, 1.0) - 1.0).abs() < 1e-15);
    }
}
