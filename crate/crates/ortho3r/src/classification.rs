//! Separating surfaces, workspace-topology domains and the cuspidality
//! condition.
//!
//! With A = sqrt((d3 + d2)^2 + r2^2) and B = sqrt((d3 - d2)^2 + r2^2), the
//! four surfaces are the d4 values
//!
//! ```text
//! C1 = sqrt( (S - (S^2 - (d3^2 - r2^2) d2^2) / (A B)) / 2 ),   S = d3^2 + r2^2
//! C2 = d3 A / (d2 + d3)
//! C3 = d3 B / (d3 - d2)          (d3 > d2 only)
//! C4 = d3 B / (d2 - d3)          (d3 < d2 only)
//! ```
//!
//! All are homogeneous of degree 1 in (d2, d3, r2). Crossing C1 from below
//! creates two points with four equal solutions (the binary/quaternary
//! transition); C2, C3 and C4 are tangencies of a singular line with a
//! singularity curve, where cusps appear or vanish in pairs. The five
//! domains carry constant cusp counts: D1 none (binary, hole), D2 four on
//! the internal boundary, D3 two, D4 four split across both boundaries,
//! D5 none (quaternary, no hole).
//!
//! The C1 radicand is sometimes quoted with the r2^2 term negated
//! ([`c1_variant`]); empirical bisection of the cusp-birth transition
//! (`check` suite) sides with the sign used here, and the two forms are
//! both kept so the check stays meaningful.
//!
//! A manipulator is cuspidal iff d4 > C1 and (d3 >= d2 or d4 < C4).

use crate::kinematics::DhParams;
use crate::num::Real;
use crate::singularity::{analyze_singularities, BoundaryRole, SingularityError};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceId {
    C1,
    C2,
    C3,
    C4,
}

impl SurfaceId {
    pub fn as_str(&self) -> &'static str {
        match self {
            SurfaceId::C1 => "C1",
            SurfaceId::C2 => "C2",
            SurfaceId::C3 => "C3",
            SurfaceId::C4 => "C4",
        }
    }
}

/// d4 values of the separating surfaces at given (d2, d3, r2).
#[derive(Debug, Clone, Copy)]
pub struct SeparatingSurfaces<T: Real> {
    pub c1: T,
    pub c2: T,
    /// Defined iff d3 > d2.
    pub c3: Option<T>,
    /// Defined iff d3 < d2.
    pub c4: Option<T>,
    /// A = sqrt((d3 + d2)^2 + r2^2).
    pub a: T,
    /// B = sqrt((d3 - d2)^2 + r2^2).
    pub b: T,
}

impl<T: Real> SeparatingSurfaces<T> {
    pub fn defined(&self) -> Vec<(SurfaceId, T)> {
        let mut v = vec![(SurfaceId::C1, self.c1), (SurfaceId::C2, self.c2)];
        if let Some(c3) = self.c3 {
            v.push((SurfaceId::C3, c3));
        }
        if let Some(c4) = self.c4 {
            v.push((SurfaceId::C4, c4));
        }
        v
    }
}

/// Evaluate the separating surfaces. C3/C4 are left undefined at d3 = d2.
pub fn surfaces<T: Real>(d2: T, d3: T, r2: T) -> SeparatingSurfaces<T> {
    let s = d3 * d3 + r2 * r2;
    let a = ((d3 + d2) * (d3 + d2) + r2 * r2).sqrt();
    let b = ((d3 - d2) * (d3 - d2) + r2 * r2).sqrt();
    let num = s * s - (d3 * d3 - r2 * r2) * d2 * d2;
    let radicand = (s - num / (a * b)) * T::lit(0.5);
    let c1 = radicand.max(T::zero()).sqrt();
    let c2 = d3 * a / (d2 + d3);
    let gap_tol = T::lit(tol::GENERIC_MARGIN_REL) * d2.max(d3);
    let c3 = if d3 - d2 > gap_tol { Some(d3 * b / (d3 - d2)) } else { None };
    let c4 = if d2 - d3 > gap_tol { Some(d3 * b / (d2 - d3)) } else { None };
    SeparatingSurfaces { c1, c2, c3, c4, a, b }
}

/// The binary/quaternary surface with the r2^2 numerator term negated:
/// radicand numerator S^2 - (d3^2 + r2^2) d2^2 instead of
/// S^2 - (d3^2 - r2^2) d2^2.
///
/// Diagnostic only. The empirical cusp-birth bisection at (d2, d3, r2) =
/// (1, 2, 1) localizes the transition at d4 ~ 0.2008, which matches the
/// shipped [`surfaces`] form (this variant gives ~ 0.5137); the variant is
/// kept so that check keeps discriminating between the two.
pub fn c1_variant<T: Real>(d2: T, d3: T, r2: T) -> T {
    let s = d3 * d3 + r2 * r2;
    let a = ((d3 + d2) * (d3 + d2) + r2 * r2).sqrt();
    let b = ((d3 - d2) * (d3 - d2) + r2 * r2).sqrt();
    let num = s * s - (d3 * d3 + r2 * r2) * d2 * d2;
    let radicand = (s - num / (a * b)) * T::lit(0.5);
    radicand.max(T::zero()).sqrt()
}

/// The five workspace-topology domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainId {
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl DomainId {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainId::D1 => "D1",
            DomainId::D2 => "D2",
            DomainId::D3 => "D3",
            DomainId::D4 => "D4",
            DomainId::D5 => "D5",
        }
    }

    /// (binary?, cusp count, cusps split across boundaries).
    pub fn semantics(&self) -> DomainSemantics {
        match self {
            DomainId::D1 => DomainSemantics {
                binary: true,
                cusp_count: 0,
                cusps_split: false,
                has_hole: Some(true),
            },
            DomainId::D2 => DomainSemantics {
                binary: false,
                cusp_count: 4,
                cusps_split: false,
                has_hole: None,
            },
            DomainId::D3 => DomainSemantics {
                binary: false,
                cusp_count: 2,
                cusps_split: false,
                has_hole: None,
            },
            DomainId::D4 => DomainSemantics {
                binary: false,
                cusp_count: 4,
                cusps_split: true,
                has_hole: None,
            },
            DomainId::D5 => DomainSemantics {
                binary: false,
                cusp_count: 0,
                cusps_split: false,
                has_hole: Some(false),
            },
        }
    }
}

/// Workspace-topology signature attached to each domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainSemantics {
    /// At most two solutions anywhere (vs four).
    pub binary: bool,
    pub cusp_count: usize,
    pub cusps_split: bool,
    /// None: not discriminating for this domain.
    pub has_hole: Option<bool>,
}

/// Analytic classification outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticLabel<T: Real> {
    Domain(DomainId),
    /// Within the genericity margin of a surface (or of d3 = d2):
    /// classification is undefined there.
    NonGeneric { nearest: SurfaceId, gap: T },
}

impl<T: Real> AnalyticLabel<T> {
    pub fn domain(&self) -> Option<DomainId> {
        match self {
            AnalyticLabel::Domain(d) => Some(*d),
            AnalyticLabel::NonGeneric { .. } => None,
        }
    }
}

/// Signed d4-gap to the nearest defined separating surface.
pub fn distance_to_nearest_surface<T: Real>(p: DhParams<T>) -> (SurfaceId, T) {
    let s = surfaces(p.d2, p.d3, p.r2);
    s.defined()
        .into_iter()
        .map(|(id, c)| (id, p.d4 - c))
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .expect("C1 and C2 are always defined")
}

/// Explicit cuspidality condition in the DH parameters:
/// d4 > C1 and (d3 >= d2 or d4 < C4). Invariant under uniform scaling.
pub fn is_cuspidal<T: Real>(p: DhParams<T>) -> bool {
    let s = surfaces(p.d2, p.d3, p.r2);
    if p.d4 <= s.c1 {
        return false;
    }
    match s.c4 {
        // d3 < d2: also requires d4 below C4.
        Some(c4) => p.d4 < c4,
        None => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspidalVerdict {
    Cuspidal,
    NonCuspidal,
    NonGeneric,
}

/// Cuspidality with the genericity gate applied.
pub fn cuspidality_verdict<T: Real>(p: DhParams<T>) -> CuspidalVerdict {
    if !is_generic(p) {
        return CuspidalVerdict::NonGeneric;
    }
    if is_cuspidal(p) {
        CuspidalVerdict::Cuspidal
    } else {
        CuspidalVerdict::NonCuspidal
    }
}

/// True when the design sits strictly off every separating surface and
/// off d3 = d2, by the relative margin.
pub fn is_generic<T: Real>(p: DhParams<T>) -> bool {
    let margin = T::lit(tol::GENERIC_MARGIN_REL);
    let (_, gap) = distance_to_nearest_surface(p);
    if gap.abs() <= margin * p.d4.max(p.d2) {
        return false;
    }
    (p.d3 - p.d2).abs() > margin * p.d2.max(p.d3)
}

/// Assign the workspace-topology domain from the surface layout.
///
/// The layout along d4 is D1 | C1 | D2 | C2 | D3 | C3 | D4 for d3 > d2
/// and D1 | C1 | D2 | C2 | D3 | C4 | D5 for d3 < d2; the surfaces are
/// ordered C1 < C2 < C3 (resp. C4) for r2 > 0. On the d3 = d2 line C3
/// and C4 diverge, so the layout continues as D1 | C1 | D2 | C2 | D3
/// there and only surface proximity is non-generic.
pub fn classify_domain<T: Real>(p: DhParams<T>) -> AnalyticLabel<T> {
    let (nearest, gap) = distance_to_nearest_surface(p);
    let margin = T::lit(tol::GENERIC_MARGIN_REL);
    if gap.abs() <= margin * p.d4.max(p.d2) {
        return AnalyticLabel::NonGeneric { nearest, gap };
    }

    let s = surfaces(p.d2, p.d3, p.r2);
    let label = if p.d4 < s.c1 {
        DomainId::D1
    } else if p.d4 < s.c2 {
        DomainId::D2
    } else if s.c3.is_some_and(|c3| p.d4 > c3) {
        DomainId::D4
    } else if s.c4.is_some_and(|c4| p.d4 > c4) {
        DomainId::D5
    } else {
        DomainId::D3
    };
    AnalyticLabel::Domain(label)
}

/// Everything the classifier can say about one design.
#[derive(Debug, Clone)]
pub struct TopologyReport<T: Real> {
    pub params: DhParams<T>,
    pub domain_analytic: AnalyticLabel<T>,
    /// Filled by the oracle when requested; None otherwise.
    pub domain_empirical: Option<DomainId>,
    pub cusps: Vec<crate::singularity::CuspPoint<T>>,
    pub cusps_split: bool,
    pub cuspidal: bool,
    /// analytic == empirical, when both are defined.
    pub agreement: Option<bool>,
    pub surfaces: SeparatingSurfaces<T>,
    pub nearest_surface: (SurfaceId, T),
    pub generic: bool,
    pub certification_failures: usize,
}

impl<T: Real> TopologyReport<T> {
    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }

    /// Record the oracle's verdict and the agreement flag.
    pub fn attach_empirical(&mut self, empirical: DomainId) {
        self.domain_empirical = Some(empirical);
        if let AnalyticLabel::Domain(d) = self.domain_analytic {
            self.agreement = Some(d == empirical);
        }
    }
}

/// Analytic topology report (no oracle fields).
pub fn topology_report<T: Real>(p: DhParams<T>) -> Result<TopologyReport<T>, SingularityError> {
    topology_report_with(p, crate::singularity::DEFAULT_SAMPLES)
}

pub fn topology_report_with<T: Real>(
    p: DhParams<T>,
    n_samples: usize,
) -> Result<TopologyReport<T>, SingularityError> {
    let analysis = analyze_singularities(p, n_samples)?;
    let split = analysis.cusps.iter().any(|c| c.boundary == BoundaryRole::External)
        && analysis.cusps.iter().any(|c| c.boundary == BoundaryRole::Internal);
    Ok(TopologyReport {
        params: p,
        domain_analytic: classify_domain(p),
        domain_empirical: None,
        cusps: analysis.cusps,
        cusps_split: split,
        cuspidal: is_cuspidal(p),
        agreement: None,
        surfaces: surfaces(p.d2, p.d3, p.r2),
        nearest_surface: distance_to_nearest_surface(p),
        generic: is_generic(p),
        certification_failures: analysis.certification_failures.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d2: f64, d3: f64, d4: f64, r2: f64) -> DhParams<f64> {
        DhParams::new(d2, d3, d4, r2).unwrap()
    }

    #[test]
    fn surface_values_d3_2_r2_1() {
        let s = surfaces::<f64>(1.0, 2.0, 1.0);
        // C2 = (2/3) sqrt(10)
        assert!((s.c2 - 2.0 / 3.0 * 10f64.sqrt()).abs() < 1e-12);
        assert!((s.c2 - 2.10819).abs() < 1e-5);
        // C1: S = 5, AB = sqrt(20), numerator = 25 - 4 + 1 = 22,
        // radicand = (5 - 22/sqrt(20)) / 2
        let expect = ((5.0 - 22.0 / 20f64.sqrt()) / 2.0).sqrt();
        assert!((s.c1 - expect).abs() < 1e-12);
        assert!((s.c1 - 0.2008).abs() < 1e-4);
        assert!(s.c3.is_some() && s.c4.is_none());
    }

    #[test]
    fn surface_values_d3_3_r2_3() {
        let s = surfaces::<f64>(1.0, 3.0, 3.0);
        assert!((s.a - 5.0).abs() < 1e-12);
        assert!((s.b - 13f64.sqrt()).abs() < 1e-12);
        assert!((s.c2 - 3.75).abs() < 1e-12);
        let c3 = s.c3.unwrap();
        assert!((c3 - 1.5 * 13f64.sqrt()).abs() < 1e-12);
        assert!((c3 - 5.40833).abs() < 1e-5);
    }

    #[test]
    fn surface_values_d3_half_r2_1() {
        let s = surfaces::<f64>(1.0, 0.5, 1.0);
        let c4 = s.c4.unwrap();
        assert!((c4 - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((c4 - 1.1180).abs() < 1e-4);
        assert!(s.c3.is_none());
    }

    #[test]
    fn c1_variant_differs_from_shipped_form() {
        let var = c1_variant::<f64>(1.0, 2.0, 1.0);
        assert!((var - 0.5137).abs() < 1e-4, "{var}");
        let s = surfaces::<f64>(1.0, 2.0, 1.0);
        assert!((var - s.c1).abs() > 0.3);
    }

    #[test]
    fn surfaces_homogeneous_degree_one() {
        let s1 = surfaces::<f64>(1.0, 2.0, 1.0);
        let s2 = surfaces::<f64>(3.0, 6.0, 3.0);
        assert!((s2.c1 - 3.0 * s1.c1).abs() < 1e-12);
        assert!((s2.c2 - 3.0 * s1.c2).abs() < 1e-12);
        assert!((s2.c3.unwrap() - 3.0 * s1.c3.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn domain_examples() {
        assert_eq!(classify_domain(params(1.0, 2.0, 1.5, 1.0)).domain(), Some(DomainId::D2));
        assert_eq!(classify_domain(params(1.0, 3.0, 4.0, 3.0)).domain(), Some(DomainId::D3));
        assert_eq!(classify_domain(params(1.0, 2.0, 0.1, 1.0)).domain(), Some(DomainId::D1));
        assert_eq!(classify_domain(params(1.0, 0.5, 2.0, 1.0)).domain(), Some(DomainId::D5));
        assert_eq!(classify_domain(params(1.0, 3.0, 6.0, 3.0)).domain(), Some(DomainId::D4));
    }

    #[test]
    fn non_generic_on_surface() {
        let s = surfaces::<f64>(1.0, 2.0, 1.0);
        let label = classify_domain(params(1.0, 2.0, s.c2, 1.0));
        assert!(matches!(label, AnalyticLabel::NonGeneric { nearest: SurfaceId::C2, .. }));
    }

    #[test]
    fn cuspidality_examples() {
        assert!(is_cuspidal(params(1.0, 2.0, 1.5, 1.0)));
        assert!(!is_cuspidal(params(1.0, 2.0, 0.1, 1.0)));
        // Scaling invariance: (2,4,3,2) = 2 * (1,2,1.5,1).
        assert!(is_cuspidal(params(2.0, 4.0, 3.0, 2.0)));
        // D5 is quaternary but not cuspidal.
        assert!(!is_cuspidal(params(1.0, 0.5, 2.0, 1.0)));
    }

    #[test]
    fn nearest_surface_examples() {
        let (id, gap) = distance_to_nearest_surface(params(1.0, 2.0, 1.5, 1.0));
        assert_eq!(id, SurfaceId::C2);
        assert!((gap + 0.60819).abs() < 1e-4, "{gap}");

        let (id, gap) = distance_to_nearest_surface(params(1.0, 3.0, 4.0, 3.0));
        assert_eq!(id, SurfaceId::C2);
        assert!((gap - 0.25).abs() < 1e-12);

        let s = surfaces::<f64>(1.0, 2.0, 1.0);
        let (id, gap) = distance_to_nearest_surface(params(1.0, 2.0, s.c2, 1.0));
        assert_eq!(id, SurfaceId::C2);
        assert!(gap.abs() < 1e-14);
    }

    #[test]
    fn classification_scale_invariant() {
        for lambda in [0.25, 2.0, 7.5] {
            let a = classify_domain(params(1.0, 3.0, 4.0, 3.0));
            let b = classify_domain(params(1.0, 3.0, 4.0, 3.0).scaled(lambda));
            assert_eq!(a.domain(), b.domain());
        }
    }

    #[test]
    fn monotone_transitions_along_d4() {
        // d3 = 3, r2 = 3: D1 | C1 | D2 | C2=3.75 | D3 | C3=5.408 | D4.
        let s = surfaces::<f64>(1.0, 3.0, 3.0);
        let c3 = s.c3.unwrap();
        let line = [
            (0.5 * s.c1, DomainId::D1),
            (0.5 * (s.c1 + s.c2), DomainId::D2),
            (0.5 * (s.c2 + c3), DomainId::D3),
            (c3 + 1.0, DomainId::D4),
        ];
        for (d4, expect) in line {
            assert_eq!(classify_domain(params(1.0, 3.0, d4, 3.0)).domain(), Some(expect));
        }

        // d3 = 0.5, r2 = 1: D1 | C1 | D2 | C2 | D3 | C4 | D5.
        let s = surfaces::<f64>(1.0, 0.5, 1.0);
        let c4 = s.c4.unwrap();
        assert!(s.c1 < s.c2 && s.c2 < c4);
        let line = [
            (0.5 * s.c1, DomainId::D1),
            (0.5 * (s.c1 + s.c2), DomainId::D2),
            (0.5 * (s.c2 + c4), DomainId::D3),
            (c4 + 1.0, DomainId::D5),
        ];
        for (d4, expect) in line {
            assert_eq!(classify_domain(params(1.0, 0.5, d4, 1.0)).domain(), Some(expect));
        }
    }

    #[test]
    fn verdict_gates_on_genericity() {
        use super::CuspidalVerdict::*;
        assert_eq!(cuspidality_verdict(params(1.0, 2.0, 1.5, 1.0)), Cuspidal);
        assert_eq!(cuspidality_verdict(params(1.0, 2.0, 0.1, 1.0)), NonCuspidal);
        let s = surfaces::<f64>(1.0, 2.0, 1.0);
        assert_eq!(cuspidality_verdict(params(1.0, 2.0, s.c2, 1.0)), NonGeneric);
        assert_eq!(cuspidality_verdict(params(1.0, 1.0, 0.5, 1.0)), NonGeneric);
    }

    #[test]
    fn domain_layout_continues_across_d3_equals_d2() {
        // C3 and C4 diverge as d3 -> d2, so the d3 = d2 line keeps the
        // D1 | C1 | D2 | C2 | D3 layout.
        let s = surfaces::<f64>(1.0, 1.0, 1.0);
        assert!(s.c3.is_none() && s.c4.is_none());
        assert_eq!(classify_domain(params(1.0, 1.0, 0.1, 1.0)).domain(), Some(DomainId::D1));
        assert_eq!(
            classify_domain(params(1.0, 1.0, 0.5 * (s.c1 + s.c2), 1.0)).domain(),
            Some(DomainId::D2)
        );
        assert_eq!(classify_domain(params(1.0, 1.0, 3.0, 1.0)).domain(), Some(DomainId::D3));
    }
}
