//! Real-root isolation with multiplicity clusters for polynomials of
//! degree <= 4.
//!
//! Roots are isolated by recursive critical-point bracketing: the real
//! roots of p' split the line into intervals where p is monotone, so every
//! sign change brackets exactly one root, and a critical point where p
//! itself (nearly) vanishes is a root of even multiplicity. Bracketed
//! roots are polished by bisection-safeguarded Newton and merged into
//! clusters; cluster multiplicity comes from the magnitude of successive
//! derivatives at the representative. This avoids the catastrophic
//! cancellation of closed-form quartic formulas near multiple roots, which
//! is exactly where cusp detection operates.

use crate::num::Real;
use crate::tol;

/// One real root with its estimated multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster<T> {
    pub value: T,
    pub multiplicity: usize,
}

/// Sorted real roots of a low-degree polynomial.
#[derive(Debug, Clone)]
pub struct RealRoots<T> {
    /// Clusters sorted by value, ascending.
    pub clusters: Vec<RootCluster<T>>,
    /// Effective degree after trimming near-zero leading coefficients.
    pub degree: usize,
    /// True when at least one leading coefficient was trimmed.
    pub trimmed_leading: bool,
}

impl<T: Real> RealRoots<T> {
    /// Number of real roots counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// Number of distinct real roots.
    pub fn count_distinct(&self) -> usize {
        self.clusters.len()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).max().unwrap_or(0)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RootError {
    #[error("polynomial is identically (near) zero")]
    Degenerate,
    #[error("polynomial coefficients must be finite")]
    NonFinite,
}

/// Evaluate a polynomial given by descending coefficients.
pub fn eval_poly<T: Real>(coeffs: &[T], x: T) -> T {
    let mut acc = T::zero();
    for &c in coeffs {
        acc = acc * x + c;
    }
    acc
}

/// Descending coefficients of the derivative.
pub fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![T::zero()];
    }
    coeffs[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * T::lit((n - 1 - i) as f64))
        .collect()
}

/// Coefficient scale of |p| near x: sum |a_i| max(1, |x|)^(deg - i).
/// Residuals divided by this are dimensionless and comparable across
/// derivatives of different degrees.
pub fn poly_scale_at<T: Real>(coeffs: &[T], x: T) -> T {
    let m = x.abs().max(T::one());
    let mut s = T::zero();
    for &c in coeffs {
        s = s * m + c.abs();
    }
    s.max(T::min_positive_value())
}

fn local_scale<T: Real>(coeffs: &[T], x: T) -> T {
    poly_scale_at(coeffs, x)
}

/// Sorted real roots of a quartic (descending coefficients a4..a0) with
/// multiplicity clusters.
pub fn quartic_real_roots<T: Real>(coeffs: &[T; 5]) -> Result<RealRoots<T>, RootError> {
    real_roots(coeffs)
}

/// All real roots of a polynomial of degree <= 4 (descending coefficients),
/// clustered by proximity and annotated with multiplicity.
///
/// This is the multiplicity-aware root finder behind inverse kinematics,
/// boundary detection (double roots) and cusp certification (triple roots).
pub fn real_roots<T: Real>(coeffs: &[T]) -> Result<RealRoots<T>, RootError> {
    assert!(coeffs.len() <= 5, "only degrees up to 4 are supported");
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(RootError::NonFinite);
    }
    let max_mag = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    if max_mag == T::zero() {
        return Err(RootError::Degenerate);
    }

    // Trim near-zero leading coefficients and normalize.
    let trim_tol = T::lit(tol::LEADING_COEFF_REL) * max_mag;
    let mut start = 0;
    while start + 1 < coeffs.len() && coeffs[start].abs() < trim_tol {
        start += 1;
    }
    let trimmed_leading = start > 0;
    let work: Vec<T> = coeffs[start..].iter().map(|&c| c / max_mag).collect();
    let degree = work.len() - 1;
    if degree == 0 {
        // Constant, non-zero after the degeneracy check above... unless the
        // whole tail is below the trim tolerance as well.
        if work[0].abs() < T::lit(tol::LEADING_COEFF_REL) {
            return Err(RootError::Degenerate);
        }
        return Ok(RealRoots { clusters: vec![], degree, trimmed_leading });
    }

    let mut estimates = isolate(&work);
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let clusters = build_clusters(&work, &estimates, degree);
    Ok(RealRoots { clusters, degree, trimmed_leading })
}

/// Distinct real-root estimates of a normalized polynomial (leading
/// coefficient well away from zero).
fn isolate<T: Real>(coeffs: &[T]) -> Vec<T> {
    let degree = coeffs.len() - 1;
    match degree {
        0 => vec![],
        1 => vec![-coeffs[1] / coeffs[0]],
        _ => {
            let deriv = derivative(coeffs);
            let dmax = deriv.iter().fold(T::zero(), |m, c| m.max(c.abs()));
            let dnorm: Vec<T> = deriv.iter().map(|&c| c / dmax).collect();
            let mut crits = isolate(&dnorm);
            crits.sort_by(|a, b| a.partial_cmp(b).unwrap());

            // Cauchy bound on root magnitude.
            let an = coeffs[0].abs();
            let bound = T::one()
                + coeffs[1..].iter().fold(T::zero(), |m, c| m.max(c.abs())) / an;

            let mut pts = Vec::with_capacity(crits.len() + 2);
            pts.push(-bound - T::one());
            pts.extend(crits.iter().copied().filter(|c| c.abs() <= bound));
            pts.push(bound + T::one());

            let mut roots = Vec::new();
            // A critical point only counts as an even-multiplicity root if
            // the root pair it would resolve into lies within the cluster
            // tolerance: |p| <= |p''| (tol/2)^2 / 2 there, plus an absolute
            // floor for evaluation noise. A looser test swallows genuinely
            // distinct root pairs near workspace boundaries.
            let dd = derivative(&deriv);
            let touch = |x: T| {
                let cluster = T::lit(tol::ROOT_CLUSTER) * x.abs().max(T::one());
                let pair_bound = eval_poly(&dd, x).abs() * cluster * cluster * T::lit(0.125);
                let noise = T::lit(256.0) * T::epsilon() * local_scale(coeffs, x);
                eval_poly(coeffs, x).abs() <= pair_bound + noise
            };

            // Even-multiplicity roots show up as critical points where p
            // touches zero without a sign change.
            for &c in &pts[1..pts.len() - 1] {
                if touch(c) {
                    roots.push(c);
                }
            }
            for w in pts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if touch(lo) || touch(hi) {
                    // p is monotone on (lo, hi); an endpoint root leaves no
                    // interior sign change to bracket.
                    continue;
                }
                let flo = eval_poly(coeffs, lo);
                let fhi = eval_poly(coeffs, hi);
                if (flo > T::zero()) != (fhi > T::zero()) {
                    roots.push(polish(coeffs, lo, hi));
                }
            }
            roots
        }
    }
}

/// Bisection-safeguarded Newton on a bracket with a strict sign change.
fn polish<T: Real>(coeffs: &[T], mut lo: T, mut hi: T) -> T {
    let deriv = derivative(coeffs);
    let mut flo = eval_poly(coeffs, lo);
    if flo == T::zero() {
        return lo;
    }
    let mut x = (lo + hi) * T::lit(0.5);
    for _ in 0..90 {
        let fx = eval_poly(coeffs, x);
        if fx.abs() <= T::lit(tol::ROOT_POLISH_REL) * local_scale(coeffs, x) {
            break;
        }
        if (fx > T::zero()) == (flo > T::zero()) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let dfx = eval_poly(&deriv, x);
        let newton = x - fx / dfx;
        x = if dfx != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::lit(0.5)
        };
        if (hi - lo).abs() <= x.abs() * T::epsilon() * T::two() {
            break;
        }
    }
    x
}

fn build_clusters<T: Real>(coeffs: &[T], sorted: &[T], degree: usize) -> Vec<RootCluster<T>> {
    let mut clusters: Vec<RootCluster<T>> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() {
            let gap_tol = T::lit(tol::ROOT_CLUSTER) * sorted[j].abs().max(T::one());
            if sorted[j] - sorted[j - 1] <= gap_tol {
                j += 1;
            } else {
                break;
            }
        }
        // Representative: member with the smallest residual.
        let rep = sorted[i..j]
            .iter()
            .copied()
            .min_by(|a, b| {
                eval_poly(coeffs, *a)
                    .abs()
                    .partial_cmp(&eval_poly(coeffs, *b).abs())
                    .unwrap()
            })
            .unwrap();
        let m_deriv = derivative_multiplicity(coeffs, rep, degree);
        let multiplicity = m_deriv.max(j - i).min(degree);
        clusters.push(RootCluster { value: rep, multiplicity });
        i = j;
    }
    // Total multiplicity cannot exceed the degree.
    let mut total: usize = clusters.iter().map(|c| c.multiplicity).sum();
    while total > degree {
        let worst = clusters
            .iter_mut()
            .max_by_key(|c| c.multiplicity)
            .expect("non-empty");
        worst.multiplicity -= 1;
        total -= 1;
    }
    clusters
}

/// Multiplicity from successive derivative magnitudes at r.
fn derivative_multiplicity<T: Real>(coeffs: &[T], r: T, degree: usize) -> usize {
    let mut m = 1;
    let mut d = derivative(coeffs);
    while m < degree {
        let s = local_scale(&d, r);
        if eval_poly(&d, r).abs() >= T::lit(tol::MULTIPLICITY_REL) * s {
            break;
        }
        m += 1;
        d = derivative(&d);
    }
    m
}
