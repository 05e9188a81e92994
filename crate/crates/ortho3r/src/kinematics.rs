//! Forward and inverse kinematics of the orthogonal 3R family.
//!
//! The family is parametrized by the four lengths (d2, d3, d4, r2) with
//! twists alpha2 = -90 deg, alpha3 = +90 deg and no offset on the last
//! joint. With the abbreviations
//!
//! ```text
//! g = d3 + c3*d4,   v = s3*d4 + r2,   u = c2*g + d2,
//! ```
//!
//! the end-point position is
//!
//! ```text
//! x = c1*u - s1*v,   y = s1*u + c1*v,   z = -s2*g,
//! ```
//!
//! so the half cross-section coordinates are rho = sqrt(u^2 + v^2) and z.
//! Eliminating theta2 from u^2 + v^2 = rho^2 and (u - d2)^2 + z^2 = g^2
//! gives u as a linear expression in cos(theta3), sin(theta3); the
//! half-angle substitution t = tan(theta3/2) then turns the remaining
//! equation into a quartic in t whose real roots are exactly the inverse
//! kinematic solutions.

use crate::num::{circle_dist, wrap_angle, Real};
use crate::roots::{self, RealRoots, RootError};
use crate::tol;

/// The four design lengths of one manipulator of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhParams<T: Real> {
    pub(crate) d2: T,
    pub(crate) d3: T,
    pub(crate) d4: T,
    pub(crate) r2: T,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("length {name} must be strictly positive and finite")]
    NonPositiveLength { name: &'static str },
    #[error("offset r2 must be nonnegative and finite")]
    NegativeOffset,
}

impl<T: Real> DhParams<T> {
    pub fn new(d2: T, d3: T, d4: T, r2: T) -> Result<Self, ParamError> {
        for (name, v) in [("d2", d2), ("d3", d3), ("d4", d4)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(ParamError::NonPositiveLength { name });
            }
        }
        if !(r2.is_finite() && r2 >= T::zero()) {
            return Err(ParamError::NegativeOffset);
        }
        Ok(Self { d2, d3, d4, r2 })
    }

    pub fn d2(&self) -> T {
        self.d2
    }
    pub fn d3(&self) -> T {
        self.d3
    }
    pub fn d4(&self) -> T {
        self.d4
    }
    pub fn r2(&self) -> T {
        self.r2
    }

    /// All lengths multiplied by lambda > 0. Classification outputs are
    /// invariant under this map.
    pub fn scaled(&self, lambda: T) -> Self {
        Self {
            d2: self.d2 * lambda,
            d3: self.d3 * lambda,
            d4: self.d4 * lambda,
            r2: self.r2 * lambda,
        }
    }

    /// Rescaled so that d2 = 1.
    pub fn normalized(&self) -> Self {
        self.scaled(T::one() / self.d2)
    }

    /// Upper bound on the distance from the base to any reachable point.
    pub fn reach(&self) -> T {
        self.d2 + self.d3 + self.d4 + self.r2
    }
}

/// Joint angles, each wrapped to [-pi, pi). Joints are unlimited, so
/// equality is torus equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig<T: Real> {
    pub(crate) theta1: T,
    pub(crate) theta2: T,
    pub(crate) theta3: T,
}

impl<T: Real> JointConfig<T> {
    pub fn new(theta1: T, theta2: T, theta3: T) -> Self {
        Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            theta3: wrap_angle(theta3),
        }
    }

    pub fn theta1(&self) -> T {
        self.theta1
    }
    pub fn theta2(&self) -> T {
        self.theta2
    }
    pub fn theta3(&self) -> T {
        self.theta3
    }

    /// Euclidean distance on the 3-torus.
    pub fn torus_distance(&self, other: &Self) -> T {
        let a = circle_dist(self.theta1, other.theta1);
        let b = circle_dist(self.theta2, other.theta2);
        let c = circle_dist(self.theta3, other.theta3);
        (a * a + b * b + c * c).sqrt()
    }
}

/// End-point position in base-frame Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint<T: Real> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> CartesianPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Point of the workspace half cross-section: rho = sqrt(x^2 + y^2) >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSectionPoint<T: Real> {
    pub rho: T,
    pub z: T,
}

impl<T: Real> CrossSectionPoint<T> {
    pub fn new(rho: T, z: T) -> Self {
        debug_assert!(rho >= T::zero());
        Self { rho, z }
    }

    pub fn from_cartesian(p: &CartesianPoint<T>) -> Self {
        Self { rho: p.x.hypot(p.y), z: p.z }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.rho - other.rho).hypot(self.z - other.z)
    }
}

/// End-point position for the given joint configuration.
pub fn forward_kinematics<T: Real>(p: DhParams<T>, q: JointConfig<T>) -> CartesianPoint<T> {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let g = p.d3 + c3 * p.d4;
    let v = s3 * p.d4 + p.r2;
    let u = c2 * g + p.d2;
    CartesianPoint { x: c1 * u - s1 * v, y: s1 * u + c1 * v, z: -s2 * g }
}

/// The factored Jacobian determinant
/// (d3 + c3 d4) * (s3 d2 + c2 (s3 d3 - c3 r2)).
///
/// Independent of theta1 and 2*pi-periodic in theta2, theta3. The full
/// 3x3 position Jacobian determinant equals d4 times this expression.
pub fn det_jacobian_analytic<T: Real>(p: DhParams<T>, q: JointConfig<T>) -> T {
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let _ = s2;
    (p.d3 + c3 * p.d4) * (s3 * p.d2 + c2 * (s3 * p.d3 - c3 * p.r2))
}

/// Determinant of the 3x3 matrix of central finite differences of
/// [`forward_kinematics`] with respect to the joint angles.
///
/// Validation oracle for the factored determinant: the two agree up to the
/// constant factor d4 (in this row/column convention, exactly +d4).
pub fn det_jacobian_numeric<T: Real>(p: DhParams<T>, q: JointConfig<T>) -> T {
    let h = T::lit(tol::FD_STEP);
    let mut cols = [[T::zero(); 3]; 3];
    for (i, col) in cols.iter_mut().enumerate() {
        let bump = |delta: T| {
            let mut a = [q.theta1, q.theta2, q.theta3];
            a[i] = a[i] + delta;
            JointConfig { theta1: a[0], theta2: a[1], theta3: a[2] }
        };
        let plus = forward_kinematics(p, bump(h));
        let minus = forward_kinematics(p, bump(-h));
        let inv = T::one() / (T::two() * h);
        *col = [(plus.x - minus.x) * inv, (plus.y - minus.y) * inv, (plus.z - minus.z) * inv];
    }
    let m = cols;
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[1][0] * (m[0][1] * m[2][2] - m[0][2] * m[2][1])
        + m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1])
}

/// Quartic in t = tan(theta3/2) whose real roots are the inverse
/// kinematic solutions for a cross-section target.
#[derive(Debug, Clone)]
pub struct IkQuartic<T: Real> {
    /// Descending coefficients [a4, a3, a2, a1, a0].
    pub coeffs: [T; 5],
    /// Squared radial coordinate of the target.
    pub rho2: T,
    pub z: T,
    pub params: DhParams<T>,
    /// |a4| is tiny relative to the largest coefficient: theta3 = pi is a
    /// candidate solution (deflated by the half-angle substitution) or the
    /// parameters are non-generic.
    pub degenerate_leading: bool,
}

impl<T: Real> IkQuartic<T> {
    pub fn eval(&self, t: T) -> T {
        roots::eval_poly(&self.coeffs, t)
    }

    /// Coefficient magnitude, for residual scaling.
    pub fn scale(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn real_roots(&self) -> Result<RealRoots<T>, RootError> {
        roots::real_roots(&self.coeffs)
    }

    /// Residual of the pre-substitution equation at theta3 = pi, i.e.
    /// u^2 + v^2 - rho^2 evaluated on the theta3 = pi slice. Zero iff
    /// theta3 = pi is an exact solution (the root the half-angle
    /// substitution pushes to infinity).
    pub fn residual_at_pi(&self) -> T {
        let p = self.params;
        let w = T::two() * p.d2;
        let big_r = self.rho2 + self.z * self.z + p.d2 * p.d2
            - (p.d3 * p.d3 + p.d4 * p.d4 + p.r2 * p.r2);
        let u = (big_r + T::two() * p.d3 * p.d4) / w;
        u * u + p.r2 * p.r2 - self.rho2
    }

    /// True when theta3 = pi solves the inverse kinematics of the target.
    pub fn has_pi_root(&self) -> bool {
        if !self.degenerate_leading {
            return false;
        }
        let scale = self.rho2.max(self.params.reach().powi(2));
        self.residual_at_pi().abs() < T::lit(1e-9) * scale
    }

    /// Roots (with multiplicity) of the quartic and of its first two
    /// derivatives, mapped to theta3 = 2 atan(t) and sorted by theta.
    ///
    /// Near theta3 = +-pi the half-angle chart is violently compressed, so
    /// for |tan(theta3/2)| > 1 everything is computed on the reversed
    /// polynomial in u = 1/t (a Moebius change that preserves root
    /// multiplicities) and mapped back. A trimmed leading coefficient is
    /// the root at infinity of the working chart.
    pub fn theta_root_sets(&self, near_theta3: T) -> [Vec<(T, usize)>; 3] {
        let t_star = (near_theta3 * T::lit(0.5)).tan();
        let reversed = t_star.abs() > T::one();
        let mut coeffs: Vec<T> = if reversed {
            let mut c = self.coeffs.to_vec();
            c.reverse();
            c
        } else {
            self.coeffs.to_vec()
        };
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for set in out.iter_mut() {
            if let Ok(rr) = roots::real_roots(&coeffs) {
                for c in &rr.clusters {
                    let t = if reversed { T::one() / c.value } else { c.value };
                    set.push((T::two() * t.atan(), c.multiplicity));
                }
                if rr.trimmed_leading {
                    set.push((if reversed { T::zero() } else { T::PI() }, 1));
                }
            }
            coeffs = roots::derivative(&coeffs);
        }
        out
    }
}

/// Build the inverse-kinematics quartic for a cross-section target.
pub fn ik_quartic<T: Real>(p: DhParams<T>, target: CrossSectionPoint<T>) -> IkQuartic<T> {
    let rho2 = target.rho * target.rho;
    let z = target.z;
    let w = T::two() * p.d2;
    let w2 = w * w;
    let two = T::two();
    let four = T::lit(4.0);

    // u(theta3) = (R - 2 d4 (d3 c3 + r2 s3)) / (2 d2)
    let big_r = rho2 + z * z + p.d2 * p.d2 - (p.d3 * p.d3 + p.d4 * p.d4 + p.r2 * p.r2);
    let pp = big_r - two * p.d3 * p.d4;
    let qq = big_r + two * p.d3 * p.d4;

    // (Q t^2 - 4 d4 r2 t + P)^2 + W^2 (r2 t^2 + 2 d4 t + r2)^2
    //   - W^2 rho^2 (1 + t^2)^2 = 0
    let d4r2 = p.d4 * p.r2;
    let a4 = qq * qq + w2 * (p.r2 * p.r2 - rho2);
    let a3 = four * d4r2 * (w2 - two * qq);
    let a2 = T::lit(16.0) * d4r2 * d4r2
        + two * pp * qq
        + w2 * (two * p.r2 * p.r2 + four * p.d4 * p.d4 - two * rho2);
    let a1 = four * d4r2 * (w2 - two * pp);
    let a0 = pp * pp + w2 * (p.r2 * p.r2 - rho2);

    let coeffs = [a4, a3, a2, a1, a0];
    let max_mag = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let degenerate_leading = a4.abs() < T::lit(tol::LEADING_COEFF_REL) * max_mag;
    IkQuartic { coeffs, rho2, z, params: p, degenerate_leading }
}

/// Inverse kinematic solutions for a Cartesian target.
#[derive(Debug, Clone)]
pub struct IkSolutions<T: Real> {
    /// Distinct solutions; 0, 2 or 4 entries for generic targets.
    pub configs: Vec<JointConfig<T>>,
    /// Some root has |d3 + c3 d4| small: the target is at or near an
    /// isolated singular point and theta2 is poorly determined there.
    pub near_singular: bool,
    /// Two roots coincide within the cluster tolerance: the target lies on
    /// a workspace boundary.
    pub double_root: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum KinematicsError {
    #[error("inverse kinematics polynomial is degenerate: {0}")]
    DegeneratePolynomial(#[from] RootError),
}

/// Residual and Jacobian of the (rho, z) cross-section map at a
/// (theta2, theta3) pair; shared by the inverse-kinematics polish and the
/// grid-seeded oracle.
pub(crate) fn cross_section_system<T: Real>(
    p: DhParams<T>,
    theta2: T,
    theta3: T,
    target: CrossSectionPoint<T>,
) -> ((T, T), [[T; 2]; 2]) {
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let g = p.d3 + c3 * p.d4;
    let u = c2 * g + p.d2;
    let v = s3 * p.d4 + p.r2;
    let rho = u.hypot(v).max(T::lit(1e-300));
    let res = (rho - target.rho, -s2 * g - target.z);
    let jac = [
        [-u * s2 * g / rho, (v * c3 * p.d4 - u * c2 * s3 * p.d4) / rho],
        [-c2 * g, s2 * s3 * p.d4],
    ];
    (res, jac)
}

/// All inverse kinematic solutions reaching `target`.
///
/// Every returned configuration satisfies |fk(q) - target| below the
/// roundtrip tolerance; there is exactly one theta1 per (theta2, theta3)
/// root. Root errors are amplified into theta2 near workspace boundaries
/// (coalescing solutions), so each branch gets a short Newton polish on
/// the cross-section system before theta1 is recovered.
pub fn solve_ik<T: Real>(
    p: DhParams<T>,
    target: CartesianPoint<T>,
) -> Result<IkSolutions<T>, KinematicsError> {
    let cs = CrossSectionPoint::from_cartesian(&target);
    let quartic = ik_quartic(p, cs);
    let roots = quartic.real_roots()?;

    let mut out = IkSolutions { configs: Vec::new(), near_singular: false, double_root: false };
    let mut theta3s: Vec<T> = Vec::new();
    for c in &roots.clusters {
        if c.multiplicity >= 2 {
            out.double_root = true;
        }
        if c.multiplicity == 2 {
            // A touching pair close to a workspace boundary: seed both
            // members, t = c +- sqrt(2 |p| / |p''|), and let the Newton
            // polish below separate them (they collapse back to one
            // configuration when the root is exactly double).
            let dd = roots::eval_poly(&roots::derivative(&roots::derivative(&quartic.coeffs)), c.value);
            if dd.abs() > T::zero() {
                let split = (T::two() * quartic.eval(c.value).abs() / dd.abs()).sqrt();
                theta3s.push(T::two() * (c.value - split).atan());
                theta3s.push(T::two() * (c.value + split).atan());
                continue;
            }
        }
        theta3s.push(T::two() * c.value.atan());
    }
    if quartic.has_pi_root() {
        theta3s.push(T::PI());
    }

    let g_scale = p.d3 + p.d4;
    let fk_tol = T::lit(tol::FK_ROUNDTRIP) * p.reach().max(cs.rho.hypot(cs.z));
    for &theta3 in &theta3s {
        let (s3, c3) = theta3.sin_cos();
        let g = p.d3 + c3 * p.d4;
        if g.abs() < T::lit(tol::NEAR_SINGULAR_G_REL) * g_scale {
            out.near_singular = true;
        }
        if g.abs() < T::lit(tol::HARD_SINGULAR_G_REL) * g_scale {
            // theta2 is indeterminate: the whole theta2 circle maps to one
            // isolated point.
            continue;
        }
        let big_r = quartic.rho2 + cs.z * cs.z + p.d2 * p.d2
            - (p.d3 * p.d3 + p.d4 * p.d4 + p.r2 * p.r2);
        let u = (big_r - T::two() * p.d4 * (p.d3 * c3 + p.r2 * s3)) / (T::two() * p.d2);
        let mut theta2 = (-cs.z / g).atan2((u - p.d2) / g);
        let mut theta3_ref = theta3;
        // Monitored polish: near an isolated point the system is badly
        // conditioned and a raw Newton step can leave the solution, so
        // steps that fail to shrink the residual are rolled back.
        for _ in 0..3 {
            let (r, m) = cross_section_system(p, theta2, theta3_ref, cs);
            let before = r.0.hypot(r.1);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() < T::lit(1e-12) * p.reach().powi(2) {
                break;
            }
            let cand2 = theta2 + (-r.0 * m[1][1] + r.1 * m[0][1]) / det;
            let cand3 = theta3_ref + (-m[0][0] * r.1 + m[1][0] * r.0) / det;
            let (r_new, _) = cross_section_system(p, cand2, cand3, cs);
            if r_new.0.hypot(r_new.1) >= before {
                break;
            }
            theta2 = cand2;
            theta3_ref = cand3;
        }
        let (s3r, c3r) = theta3_ref.sin_cos();
        let (_, c2r) = theta2.sin_cos();
        let u = c2r * (p.d3 + c3r * p.d4) + p.d2;
        let v = s3r * p.d4 + p.r2;
        let theta1 = target.y.atan2(target.x) - v.atan2(u);
        let q = JointConfig::new(theta1, theta2, theta3_ref);
        if forward_kinematics(p, q).distance(&target) <= fk_tol {
            // Split seeds of an exactly-double root converge to the same
            // configuration; keep one.
            let duplicate = out
                .configs
                .iter()
                .any(|s| s.torus_distance(&q) < T::lit(1e-10));
            if !duplicate {
                out.configs.push(q);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(d2: f64, d3: f64, d4: f64, r2: f64) -> DhParams<f64> {
        DhParams::new(d2, d3, d4, r2).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(DhParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(DhParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(DhParams::new(1.0, 1.0, 1.0, -0.1).is_err());
        assert!(DhParams::new(1.0, 1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn works_in_single_precision() {
        let p = DhParams::<f32>::new(1.0, 2.0, 1.5, 1.0).unwrap();
        let e = forward_kinematics(p, JointConfig::new(0.0f32, 0.0, 0.0));
        assert!((e.x - 4.5).abs() < 1e-6);
        let s = crate::classification::surfaces(1.0f32, 2.0, 1.0);
        assert!((s.c2 - 2.108_185).abs() < 1e-5);
    }

    #[test]
    fn normalized_sets_d2_to_one() {
        let p = params(2.0, 4.0, 3.0, 2.0).normalized();
        assert_eq!(p.d2(), 1.0);
        assert_eq!(p.d3(), 2.0);
        assert_eq!(p.d4(), 1.5);
        assert_eq!(p.r2(), 1.0);
    }

    #[test]
    fn fk_zero_configuration() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let e = forward_kinematics(p, JointConfig::new(0.0, 0.0, 0.0));
        assert!((e.x - 4.5).abs() < 1e-14);
        assert!((e.y - 1.0).abs() < 1e-14);
        assert!(e.z.abs() < 1e-14);
    }

    #[test]
    fn fk_theta1_half_turn_negates_xy() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let e = forward_kinematics(p, JointConfig::new(PI, 0.0, 0.0));
        assert!((e.x + 4.5).abs() < 1e-12);
        assert!((e.y + 1.0).abs() < 1e-12);
        assert!(e.z.abs() < 1e-12);
    }

    #[test]
    fn fk_first_factor_zero_forces_z_zero() {
        let p = params(1.0, 3.0, 4.0, 3.0);
        let q = JointConfig::new(0.0, FRAC_PI_2, (-0.75f64).acos());
        let e = forward_kinematics(p, q);
        assert!(e.z.abs() < 1e-14, "z = {}", e.z);
    }

    #[test]
    fn fk_invariant_under_wrapping() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let a = forward_kinematics(p, JointConfig::new(0.3, -1.1, 2.4));
        let b = forward_kinematics(
            p,
            JointConfig::new(0.3 + 2.0 * PI, -1.1 - 4.0 * PI, 2.4 + 2.0 * PI),
        );
        assert!(a.distance(&b) < 1e-12);
    }

    #[test]
    fn det_analytic_examples() {
        // theta3 = pi, theta2 = pi/2: both cosine terms vanish.
        let p = params(1.0, 2.0, 1.5, 1.0);
        let d = det_jacobian_analytic(p, JointConfig::new(0.4, FRAC_PI_2, PI));
        assert!(d.abs() < 1e-12);

        let d = det_jacobian_analytic(p, JointConfig::new(0.0, 0.0, FRAC_PI_2));
        assert!((d - 6.0).abs() < 1e-12);

        // Line singularity: first factor vanishes for any theta2.
        let p = params(1.0, 3.0, 4.0, 3.0);
        for theta2 in [0.0, 0.9, -2.2] {
            let d = det_jacobian_analytic(p, JointConfig::new(0.1, theta2, (-0.75f64).acos()));
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn det_analytic_independent_of_theta1() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let base = det_jacobian_analytic(p, JointConfig::new(0.0, 0.7, -1.3));
        for k in 0..10 {
            let t1 = -3.0 + 0.6 * k as f64;
            let d = det_jacobian_analytic(p, JointConfig::new(t1, 0.7, -1.3));
            assert_eq!(d, base);
        }
    }

    #[test]
    fn det_numeric_equals_d4_times_analytic() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let q = JointConfig::new(0.0, 0.0, FRAC_PI_2);
        let n = det_jacobian_numeric(p, q);
        assert!((n - 9.0).abs() < 1e-6, "numeric det = {n}");

        // Shared zero set on the singular line.
        let p = params(1.0, 3.0, 4.0, 3.0);
        let q = JointConfig::new(0.3, 1.1, (-0.75f64).acos());
        assert!(det_jacobian_numeric(p, q).abs() < 1e-8);
    }

    #[test]
    fn quartic_roundtrip_root() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let q0 = JointConfig::new(0.0, 0.8, -2.1);
        let target = CrossSectionPoint::from_cartesian(&forward_kinematics(p, q0));
        let quartic = ik_quartic(p, target);
        let t = (q0.theta3 / 2.0).tan();
        let local = quartic.scale() * t.abs().max(1.0).powi(4);
        assert!(quartic.eval(t).abs() < 1e-9 * local, "residual {}", quartic.eval(t));
    }

    #[test]
    fn quartic_unreachable_has_no_real_roots() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let quartic = ik_quartic(p, CrossSectionPoint::new(100.0, 0.0));
        assert_eq!(quartic.real_roots().unwrap().count_distinct(), 0);
    }

    #[test]
    fn solve_ik_roundtrip_contains_seed() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let q0 = JointConfig::new(1.2, -0.4, 2.0);
        let target = forward_kinematics(p, q0);
        let sols = solve_ik(p, target).unwrap();
        assert!(sols.configs.iter().any(|q| q.torus_distance(&q0) < 1e-8), "{sols:?}");
        assert!(sols.configs.len() == 2 || sols.configs.len() == 4, "{sols:?}");
    }

    #[test]
    fn solve_ik_handles_theta3_pi() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let q0 = JointConfig::new(0.5, 0.7, PI);
        let target = forward_kinematics(p, q0);
        let quartic = ik_quartic(p, CrossSectionPoint::from_cartesian(&target));
        assert!(quartic.degenerate_leading);
        assert!(quartic.has_pi_root());
        let sols = solve_ik(p, target).unwrap();
        assert!(sols.configs.iter().any(|q| q.torus_distance(&q0) < 1e-8), "{sols:?}");
    }

    #[test]
    fn solve_ik_resolves_touching_pair_near_boundary() {
        // The image of this configuration lies ~1e-10 (relative) from a
        // fold: the quartic's root pair only shows as a near-zero dip at a
        // critical point. The pair must still come back as two
        // configurations containing the seed.
        let p = params(0.1, 0.2089881311760097, 0.40015921175560604, 3.8484074786613993);
        let q0 = JointConfig::new(0.0, 0.8916308118258199, -2.119819851971103);
        let sols = solve_ik(p, forward_kinematics(p, q0)).unwrap();
        assert!(
            sols.configs.iter().any(|q| q.torus_distance(&q0) < 1e-8),
            "{sols:?}"
        );
        assert_eq!(sols.configs.len(), 4, "{sols:?}");
    }

    #[test]
    fn solve_ik_near_fold_is_sqrt_eps_accurate() {
        // Within ~1e-4 of the singular set the inverse problem is
        // sqrt(eps)-ill-posed: rounding the target moves the coalescing
        // pair by ~1e-8, so only a looser recovery bound is meaningful.
        let p = params(1.513069036022691, 3.8726624107670253, 0.1, 3.3012276865175987);
        let q0 = JointConfig::new(0.0, -1.4926179805989974, -3.000525915560811);
        let sols = solve_ik(p, forward_kinematics(p, q0)).unwrap();
        assert!(sols.double_root);
        assert!(
            sols.configs.iter().any(|q| q.torus_distance(&q0) < 1e-6),
            "{sols:?}"
        );
    }

    #[test]
    fn solve_ik_near_isolated_point_flags() {
        let p = params(1.0, 3.0, 4.0, 3.0);
        // rho of the inner isolated point: sqrt(d2^2 + (r2 - sqrt(d4^2 - d3^2))^2)
        let rho = (1.0 + (3.0 - 7.0f64.sqrt()).powi(2)).sqrt();
        for rho_probe in [rho, 1.0609] {
            let sols = solve_ik(p, CartesianPoint::new(rho_probe, 0.0, 0.0)).unwrap();
            assert!(sols.near_singular, "rho = {rho_probe}: {sols:?}");
        }
    }

    #[test]
    fn scale_homogeneity() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let q = JointConfig::new(0.3, -1.0, 2.2);
        let e1 = forward_kinematics(p, q);
        let e2 = forward_kinematics(p.scaled(2.0), q);
        assert!((e2.x - 2.0 * e1.x).abs() < 1e-12);
        assert!((e2.y - 2.0 * e1.y).abs() < 1e-12);
        assert!((e2.z - 2.0 * e1.z).abs() < 1e-12);

        let sols1 = solve_ik(p, e1).unwrap();
        let sols2 = solve_ik(p.scaled(2.0), CartesianPoint::new(2.0 * e1.x, 2.0 * e1.y, 2.0 * e1.z))
            .unwrap();
        assert_eq!(sols1.configs.len(), sols2.configs.len());
        for q1 in &sols1.configs {
            assert!(sols2.configs.iter().any(|q2| q1.torus_distance(q2) < 1e-8));
        }
    }
}
