//! Joint-space singularity curves, their workspace images, and cusps.
//!
//! The second determinant factor s3 d2 + c2 (s3 d3 - c3 r2) vanishes where
//! cos(theta2) = h(theta3) with h = -d2 s3 / (s3 d3 - c3 r2). |h| <= 1
//! holds on exactly two arcs of the theta3 circle for r2 > 0 (the four
//! |h| = 1 crossings have closed forms; the denominator poles lie in the
//! invalid arcs). Each valid arc yields one closed curve on the joint
//! torus: the +acos and -acos branches meet at the arc ends where
//! theta2 hits 0 or +-pi.
//!
//! The first factor d3 + c3 d4 vanishes on two horizontal lines iff
//! d3 <= d4; a whole theta2 circle then maps to a single workspace point,
//! so the lines contribute two isolated points to the cross-section, not
//! curves.
//!
//! A cusp is a point of a curve's workspace image where the image velocity
//! vanishes and the tangent direction reverses; it is certified by the
//! inverse-kinematics quartic having a root cluster of multiplicity >= 3
//! there (three coinciding solutions).

use crate::kinematics::{
    forward_kinematics, ik_quartic, CrossSectionPoint, DhParams, JointConfig,
};
use crate::num::{circle_dist, wrap_angle, Real};
use crate::tol;

pub const DEFAULT_SAMPLES: usize = 4096;
pub const MIN_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    CurvePlus,
    CurveMinus,
    LinePlus,
    LineMinus,
}

impl BranchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchKind::CurvePlus => "CurvePlus",
            BranchKind::CurveMinus => "CurveMinus",
            BranchKind::LinePlus => "LinePlus",
            BranchKind::LineMinus => "LineMinus",
        }
    }
}

/// One sampled singularity component branch.
///
/// Curve branches hold the +acos or -acos half of a closed curve; the two
/// halves share a `component` id. Line branches sweep theta2 at fixed
/// theta3 and share nothing.
#[derive(Debug, Clone)]
pub struct SingularBranch<T: Real> {
    pub kind: BranchKind,
    pub component: usize,
    /// theta3 window [lo, hi], unwrapped (hi > lo); for lines (theta3, theta3).
    pub theta3_range: (T, T),
    /// (theta2, theta3) pairs, wrapped to [-pi, pi).
    pub samples: Vec<(T, T)>,
    pub image: Vec<CrossSectionPoint<T>>,
}

/// The two singular lines theta3 = +-arccos(-d3/d4), present iff d3 <= d4.
#[derive(Debug, Clone, Copy)]
pub struct SingularLines<T: Real> {
    pub theta3_plus: T,
    pub theta3_minus: T,
    /// d3 = d4: the two lines coincide at theta3 = pi.
    pub degenerate_tangent: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SingularityError {
    #[error("n_samples must be at least {MIN_SAMPLES}")]
    TooFewSamples,
    #[error("non-generic geometry: {0}")]
    NonGeneric(String),
    #[error("ambiguous boundary label: {0}")]
    AmbiguousLabel(String),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CountError {
    #[error("point lies within tolerance of a workspace boundary (near-double IK root)")]
    BoundaryProximity,
    #[error("inverse kinematics polynomial is degenerate at this point")]
    DegeneratePolynomial,
}

/// Angles theta3 of the singular lines, iff d3 <= d4.
pub fn singular_lines<T: Real>(p: DhParams<T>) -> Option<SingularLines<T>> {
    if p.d3 > p.d4 {
        return None;
    }
    let theta = (-(p.d3 / p.d4)).acos();
    let degenerate = (p.d4 - p.d3).abs() <= T::lit(1e-12) * p.d4;
    Some(SingularLines {
        theta3_plus: theta,
        theta3_minus: -theta,
        degenerate_tangent: degenerate,
    })
}

/// cos(theta2) on the singular curve, as a function of theta3.
pub fn curve_height<T: Real>(p: DhParams<T>, theta3: T) -> T {
    let (s3, c3) = theta3.sin_cos();
    -p.d2 * s3 / (s3 * p.d3 - c3 * p.r2)
}

fn denom<T: Real>(p: DhParams<T>, theta3: T) -> T {
    let (s3, c3) = theta3.sin_cos();
    s3 * p.d3 - c3 * p.r2
}

/// theta3 arcs where |h| <= 1, as unwrapped (lo, hi) with hi > lo.
fn curve_windows<T: Real>(p: DhParams<T>) -> Result<Vec<(T, T)>, SingularityError> {
    if p.r2 < T::lit(1e-12) * p.reach() {
        // At r2 = 0 the second factor degenerates into s3 (d2 + c2 d3): the
        // zero set becomes two full lines s3 = 0 plus (for d3 >= d2) two
        // horizontal lines, not the generic pair of closed curves.
        return Err(SingularityError::NonGeneric(
            "r2 ~ 0: singularity set is a union of lines, not generic curves".into(),
        ));
    }
    let pi = T::PI();
    let tau = T::TAU();
    // |h| = 1 crossings: s3 (d3 -+ d2) = c3 r2.
    let phi1 = p.r2.atan2(p.d3 - p.d2);
    let phi2 = p.r2.atan2(p.d3 + p.d2);
    let mut cross = [
        wrap_angle(phi1),
        wrap_angle(phi1 + pi),
        wrap_angle(phi2),
        wrap_angle(phi2 + pi),
    ];
    cross.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in cross.windows(2) {
        if circle_dist(w[0], w[1]) < T::lit(1e-9) {
            return Err(SingularityError::NonGeneric(
                "tangent |h| = 1 window: coincident crossings".into(),
            ));
        }
    }
    let mut windows = Vec::new();
    for i in 0..4 {
        let lo = cross[i];
        let hi = if i + 1 < 4 { cross[i + 1] } else { cross[0] + tau };
        let mid = (lo + hi) * T::lit(0.5);
        let d = denom(p, mid);
        let n = p.d2 * mid.sin();
        if d * d - n * n > T::zero() {
            windows.push((lo, hi));
        }
    }
    if windows.len() != 2 {
        return Err(SingularityError::NonGeneric(format!(
            "expected 2 curve windows, found {}",
            windows.len()
        )));
    }
    Ok(windows)
}

/// Workspace image of joint samples, at theta1 = 0.
pub fn map_to_workspace<T: Real>(p: DhParams<T>, samples: &[(T, T)]) -> Vec<CrossSectionPoint<T>> {
    samples
        .iter()
        .map(|&(theta2, theta3)| {
            let e = forward_kinematics(p, JointConfig::new(T::zero(), theta2, theta3));
            CrossSectionPoint::from_cartesian(&e)
        })
        .collect()
}

/// Sample the singularity set: two closed curves (split into +-acos
/// branches) plus the two lines when d3 <= d4.
pub fn trace_singularity_curves<T: Real>(
    p: DhParams<T>,
    n_samples: usize,
) -> Result<Vec<SingularBranch<T>>, SingularityError> {
    if n_samples < MIN_SAMPLES {
        return Err(SingularityError::TooFewSamples);
    }
    let tau = T::TAU();
    let windows = curve_windows(p)?;
    let mut branches = Vec::new();
    for (component, &(lo, hi)) in windows.iter().enumerate() {
        let len = hi - lo;
        let n_w = ((T::lit(n_samples as f64) * len / tau).to_f64().unwrap().ceil() as usize)
            .max(64);
        let mut plus = Vec::with_capacity(n_w);
        let mut minus = Vec::with_capacity(n_w);
        for k in 0..n_w {
            // Cosine spacing: theta2(theta3) has sqrt behaviour at the
            // window ends, so cluster samples there.
            let s = T::lit(k as f64) * T::PI() / T::lit((n_w - 1) as f64);
            let theta3u = lo + len * (T::one() - s.cos()) * T::lit(0.5);
            let h = curve_height(p, theta3u).max(-T::one()).min(T::one());
            let theta2 = h.acos();
            let theta3 = wrap_angle(theta3u);
            plus.push((theta2, theta3));
            minus.push((-theta2, theta3));
        }
        let plus_image = map_to_workspace(p, &plus);
        let minus_image = map_to_workspace(p, &minus);
        branches.push(SingularBranch {
            kind: BranchKind::CurvePlus,
            component,
            theta3_range: (lo, hi),
            samples: plus,
            image: plus_image,
        });
        branches.push(SingularBranch {
            kind: BranchKind::CurveMinus,
            component,
            theta3_range: (lo, hi),
            samples: minus,
            image: minus_image,
        });
    }
    if let Some(lines) = singular_lines(p) {
        let n_line = 64;
        for (j, (kind, theta3)) in [
            (BranchKind::LinePlus, lines.theta3_plus),
            (BranchKind::LineMinus, lines.theta3_minus),
        ]
        .into_iter()
        .enumerate()
        {
            let theta3 = wrap_angle(theta3);
            let samples: Vec<(T, T)> = (0..n_line)
                .map(|k| {
                    let theta2 = -T::PI() + tau * T::lit(k as f64) / T::lit(n_line as f64);
                    (theta2, theta3)
                })
                .collect();
            let image = map_to_workspace(p, &samples);
            branches.push(SingularBranch {
                kind,
                component: windows.len() + j,
                theta3_range: (theta3, theta3),
                samples,
                image,
            });
        }
    }
    Ok(branches)
}

/// Closed curve components assembled from +-acos branch pairs.
#[derive(Debug, Clone)]
pub(crate) struct CurveLoop<T: Real> {
    pub component: usize,
    pub window: (T, T),
    /// Orientation factor: -sign of the h denominator on the window
    /// (constant there; poles lie in invalid arcs).
    pub orient: T,
    pub image: Vec<CrossSectionPoint<T>>,
}

pub(crate) fn curve_loops<T: Real>(
    p: DhParams<T>,
    branches: &[SingularBranch<T>],
) -> Vec<CurveLoop<T>> {
    let mut loops = Vec::new();
    let components: Vec<usize> = {
        let mut ids: Vec<usize> = branches
            .iter()
            .filter(|b| b.kind == BranchKind::CurvePlus)
            .map(|b| b.component)
            .collect();
        ids.sort_unstable();
        ids
    };
    for component in components {
        let plus = branches
            .iter()
            .find(|b| b.component == component && b.kind == BranchKind::CurvePlus)
            .expect("plus branch");
        let minus = branches
            .iter()
            .find(|b| b.component == component && b.kind == BranchKind::CurveMinus)
            .expect("minus branch");
        let mut image = plus.image.clone();
        // Walk back along the minus branch, skipping the duplicated
        // junction samples at both window ends.
        for k in (1..minus.samples.len().saturating_sub(1)).rev() {
            image.push(minus.image[k]);
        }
        let (lo, hi) = plus.theta3_range;
        let mid = (lo + hi) * T::lit(0.5);
        let orient = if denom(p, mid) > T::zero() { -T::one() } else { T::one() };
        loops.push(CurveLoop { component, window: (lo, hi), orient, image });
    }
    loops
}

/// Largest image extent over all branches; the length scale for probe
/// offsets and velocity tolerances.
fn image_diameter<T: Real>(branches: &[SingularBranch<T>]) -> T {
    let mut rho_min = T::infinity();
    let mut rho_max = T::neg_infinity();
    let mut z_min = T::infinity();
    let mut z_max = T::neg_infinity();
    for b in branches {
        for pt in &b.image {
            rho_min = rho_min.min(pt.rho);
            rho_max = rho_max.max(pt.rho);
            z_min = z_min.min(pt.z);
            z_max = z_max.max(pt.z);
        }
    }
    (rho_max - rho_min).hypot(z_max - z_min).max(T::min_positive_value())
}

// ---------------------------------------------------------------------------
// Inverse-kinematics counting
// ---------------------------------------------------------------------------

/// Number of inverse kinematic solutions at a cross-section point
/// (0, 2 or 4 for generic points).
pub fn ik_count_at<T: Real>(
    p: DhParams<T>,
    point: CrossSectionPoint<T>,
) -> Result<usize, CountError> {
    let quartic = ik_quartic(p, point);
    let rr = quartic.real_roots().map_err(|_| CountError::DegeneratePolynomial)?;
    if rr.max_multiplicity() >= 2 {
        return Err(CountError::BoundaryProximity);
    }
    // A boundary also announces itself by the quartic dipping to near
    // zero at a critical point without crossing (the coalescing root
    // pair has gone complex).
    let deriv = crate::roots::derivative(&quartic.coeffs);
    if let Ok(crits) = crate::roots::real_roots(&deriv) {
        for c in &crits.clusters {
            let dip = quartic.eval(c.value).abs();
            if dip <= T::lit(tol::BOUNDARY_DIP_REL) * crate::roots::poly_scale_at(&quartic.coeffs, c.value)
            {
                return Err(CountError::BoundaryProximity);
            }
        }
    }
    let mut thetas: Vec<T> = rr.clusters.iter().map(|c| T::two() * c.value.atan()).collect();
    if quartic.has_pi_root() {
        thetas.push(T::PI());
    }
    let sep = T::lit(tol::BOUNDARY_ROOT_SEP);
    for i in 0..thetas.len() {
        for j in i + 1..thetas.len() {
            if circle_dist(thetas[i], thetas[j]) < sep {
                return Err(CountError::BoundaryProximity);
            }
        }
    }
    Ok(thetas.len())
}

// ---------------------------------------------------------------------------
// Boundary labelling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRole {
    Internal,
    External,
}

/// Workspace boundary polylines and the isolated singular points.
#[derive(Debug, Clone)]
pub struct WorkspaceBoundarySet<T: Real> {
    /// Internal boundary polylines (WS1).
    pub internal: Vec<Vec<CrossSectionPoint<T>>>,
    /// External boundary polylines (WS2); these attain the global maximum
    /// of rho over all branches.
    pub external: Vec<Vec<CrossSectionPoint<T>>>,
    /// Images of the singular lines; present (2 points) iff d3 <= d4.
    pub isolated_points: Vec<CrossSectionPoint<T>>,
    pub internal_components: Vec<usize>,
    pub external_components: Vec<usize>,
    /// A probe landing strictly inside a closed internal polyline (by the
    /// even-odd winding rule) found 0 solutions: the polyline bounds a
    /// hole. Probes in the unreachable region around the rotation axis do
    /// not count.
    pub hole_evidence: bool,
    /// Some probe found 4 solutions: a quaternary region exists.
    pub four_evidence: bool,
}

impl<T: Real> WorkspaceBoundarySet<T> {
    pub fn role_of(&self, component: usize) -> Option<BoundaryRole> {
        if self.external_components.contains(&component) {
            Some(BoundaryRole::External)
        } else if self.internal_components.contains(&component) {
            Some(BoundaryRole::Internal)
        } else {
            None
        }
    }
}

/// Even-odd test against a closed polyline (ray cast along +rho).
fn point_in_closed_polyline<T: Real>(
    pt: CrossSectionPoint<T>,
    poly: &[CrossSectionPoint<T>],
) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.z > pt.z) != (b.z > pt.z) {
            let x = a.rho + (pt.z - a.z) / (b.z - a.z) * (b.rho - a.rho);
            if x > pt.rho {
                inside = !inside;
            }
        }
    }
    inside
}

fn point_polyline_distance<T: Real>(pt: CrossSectionPoint<T>, poly: &[CrossSectionPoint<T>]) -> T {
    let mut best = T::infinity();
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ex, ey) = (b.rho - a.rho, b.z - a.z);
        let (px, py) = (pt.rho - a.rho, pt.z - a.z);
        let len2 = ex * ex + ey * ey;
        let t = if len2 > T::zero() {
            ((px * ex + py * ey) / len2).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let (dx, dy) = (px - t * ex, py - t * ey);
        best = best.min((dx * dx + dy * dy).sqrt());
    }
    best
}

/// Label curve-image polylines as internal/external workspace boundaries.
///
/// The polyline attaining the global maximum of rho is the external
/// boundary. Probe pairs offset +-delta along the normal provide the
/// region counts: valid stations must differ by exactly 2 (0/2 or 2/4),
/// the external boundary must see a {0,2} majority, and probe evidence
/// also records hole (count 0 inside an internal polyline) and
/// quaternary-region (count 4) observations.
pub fn classify_boundaries<T: Real>(
    p: DhParams<T>,
    branches: &[SingularBranch<T>],
) -> Result<WorkspaceBoundarySet<T>, SingularityError> {
    let loops = curve_loops(p, branches);
    classify_boundaries_impl(p, branches, &loops)
}

fn classify_boundaries_impl<T: Real>(
    p: DhParams<T>,
    branches: &[SingularBranch<T>],
    loops: &[CurveLoop<T>],
) -> Result<WorkspaceBoundarySet<T>, SingularityError> {
    let diameter = image_diameter(branches);
    let delta = T::lit(tol::PROBE_OFFSET_REL) * diameter;

    let all_polylines: Vec<&Vec<CrossSectionPoint<T>>> = loops.iter().map(|l| &l.image).collect();

    struct LoopProbe<T> {
        max_rho: T,
        max_rho_vertex: usize,
        signatures: Vec<(usize, usize)>,
        inside_zero: bool,
        four_seen: bool,
    }

    let probe_station = |lp: &CurveLoop<T>,
                         i: usize,
                         delta: T,
                         inside_zero: &mut bool|
     -> Option<(usize, usize)> {
        let n = lp.image.len();
        let prev = lp.image[(i + n - 1) % n];
        let next = lp.image[(i + 1) % n];
        let here = lp.image[i];
        let (tx, ty) = (next.rho - prev.rho, next.z - prev.z);
        let tlen = tx.hypot(ty);
        if tlen <= T::zero() {
            return None;
        }
        let (nx, ny) = (-ty / tlen, tx / tlen);
        let mut pair = Vec::with_capacity(2);
        for sgn in [T::one(), -T::one()] {
            let cand = CrossSectionPoint {
                rho: here.rho + sgn * delta * nx,
                z: here.z + sgn * delta * ny,
            };
            if cand.rho < delta {
                continue;
            }
            // A probe close to any boundary polyline would straddle two
            // regions; skip it.
            let near = all_polylines
                .iter()
                .map(|poly| point_polyline_distance(cand, poly))
                .fold(T::infinity(), |a, b| a.min(b));
            if near < delta * T::lit(0.5) {
                continue;
            }
            if let Ok(c) = ik_count_at(p, cand) {
                // The hole test must distinguish the enclosed interior from
                // the unreachable region around the rotation axis, so it
                // keys on the winding of the closed image.
                if c == 0 && point_in_closed_polyline(cand, &lp.image) {
                    *inside_zero = true;
                }
                pair.push(c);
            }
        }
        if pair.len() == 2 {
            Some((pair[0].min(pair[1]), pair[0].max(pair[1])))
        } else {
            None
        }
    };

    let mut probes: Vec<LoopProbe<T>> = Vec::new();
    for lp in loops {
        let n = lp.image.len();
        let mut sigs = Vec::new();
        let mut inside_zero = false;
        let mut four_seen = false;
        let stations = 12.min(n / 4).max(4);
        for s in 0..stations {
            let i = (s * n) / stations;
            // Features thinner than the offset defeat the probe pair; retry
            // closer to the polyline before giving up on the station.
            // Pairs differing by something other than 2 are probes
            // overshooting a region thinner than the offset; retry closer
            // and otherwise drop the station.
            for d in [delta, delta * T::lit(0.2), delta * T::lit(0.04)] {
                if let Some((lo, hi)) = probe_station(lp, i, d, &mut inside_zero) {
                    if hi - lo == 2 && lo % 2 == 0 {
                        sigs.push((lo, hi));
                        four_seen |= hi == 4;
                        break;
                    }
                }
            }
        }
        let (max_rho_vertex, max_rho) = lp
            .image
            .iter()
            .enumerate()
            .map(|(i, q)| (i, q.rho))
            .fold((0, T::neg_infinity()), |acc, it| if it.1 > acc.1 { it } else { acc });
        probes.push(LoopProbe {
            max_rho,
            max_rho_vertex,
            signatures: sigs,
            inside_zero,
            four_seen,
        });
    }

    let global_max = probes.iter().fold(T::neg_infinity(), |m, pr| m.max(pr.max_rho));
    let attain_tol = T::lit(1e-9) * diameter.max(global_max);
    let external_ids: Vec<usize> = loops
        .iter()
        .zip(&probes)
        .filter(|(_, pr)| (global_max - pr.max_rho).abs() <= attain_tol)
        .map(|(l, _)| l.component)
        .collect();
    if external_ids.len() != 1 {
        return Err(SingularityError::AmbiguousLabel(format!(
            "{} polylines attain the maximal radius",
            external_ids.len()
        )));
    }

    let mut set = WorkspaceBoundarySet {
        internal: Vec::new(),
        external: Vec::new(),
        isolated_points: Vec::new(),
        internal_components: Vec::new(),
        external_components: external_ids.clone(),
        hole_evidence: false,
        four_evidence: false,
    };

    for (lp, pr) in loops.iter().zip(probes.iter_mut()) {
        if pr.signatures.len() < 3 {
            return Err(SingularityError::AmbiguousLabel(format!(
                "component {}: only {} valid probe stations",
                lp.component,
                pr.signatures.len()
            )));
        }
        let is_external = external_ids.contains(&lp.component);
        if is_external {
            // Parts of the external image may fold into the interior; the
            // outer frontier verdict comes from a dedicated probe at the
            // maximal-radius vertex, where the outside must be empty.
            let mut dummy = false;
            match probe_station(lp, pr.max_rho_vertex, delta, &mut dummy) {
                Some(sig) if sig != (0, 2) => {
                    return Err(SingularityError::AmbiguousLabel(format!(
                        "component {} attains max radius but reads {:?} there",
                        lp.component, sig
                    )));
                }
                _ => {}
            }
            set.external.push(lp.image.clone());
        } else {
            set.internal.push(lp.image.clone());
            set.internal_components.push(lp.component);
            set.hole_evidence |= pr.inside_zero;
        }
        set.four_evidence |= pr.four_seen;
    }

    for b in branches {
        if matches!(b.kind, BranchKind::LinePlus | BranchKind::LineMinus) {
            if let Some(first) = b.image.first() {
                set.isolated_points.push(*first);
            }
        }
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Cusp detection
// ---------------------------------------------------------------------------

/// A boundary point where three inverse kinematic solutions coincide.
#[derive(Debug, Clone, Copy)]
pub struct CuspPoint<T: Real> {
    pub location: CrossSectionPoint<T>,
    pub theta2: T,
    /// Joint angle of the triple root.
    pub theta3: T,
    pub boundary: BoundaryRole,
    pub branch: BranchKind,
    pub component: usize,
}

/// A velocity-zero candidate that failed triple-root certification.
#[derive(Debug, Clone)]
pub struct CuspCertFailure<T: Real> {
    pub location: CrossSectionPoint<T>,
    pub theta3: T,
    pub reason: String,
}

/// Everything the singularity analysis produces in one pass.
#[derive(Debug, Clone)]
pub struct SingularityAnalysis<T: Real> {
    pub branches: Vec<SingularBranch<T>>,
    pub boundaries: WorkspaceBoundarySet<T>,
    pub cusps: Vec<CuspPoint<T>>,
    pub certification_failures: Vec<CuspCertFailure<T>>,
}

#[derive(Debug, Clone, Copy)]
struct LoopVertex<T: Real> {
    theta2: T,
    theta3: T,
    image: CrossSectionPoint<T>,
    velocity: (T, T),
    plus_branch: bool,
}

/// Evaluate the loop at parameter u in [0, 1): first half is the +acos
/// branch with theta3 rising lo -> hi, second half the -acos branch with
/// theta3 falling back.
fn eval_loop<T: Real>(p: DhParams<T>, lp: &CurveLoop<T>, u: T) -> LoopVertex<T> {
    let u = u - u.floor();
    let (lo, hi) = lp.window;
    let len = hi - lo;
    let half = T::lit(0.5);
    let (plus_branch, theta3u) = if u < half {
        (true, lo + len * (u * T::two()))
    } else {
        (false, hi - len * ((u - half) * T::two()))
    };
    let theta3 = wrap_angle(theta3u);
    let h = curve_height(p, theta3u).max(-T::one()).min(T::one());
    let theta2 = if plus_branch { h.acos() } else { -h.acos() };

    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let den = s3 * p.d3 - c3 * p.r2;
    // Curve tangent from the gradient of the determinant factor, oriented
    // so the loop runs +acos upward / -acos downward (orient = -sign(den)
    // is constant along the window).
    let f2 = -s2 * den;
    let f3 = c3 * p.d2 + c2 * (c3 * p.d3 + s3 * p.r2);
    let (mut t2, mut t3) = (-f3 * lp.orient, f2 * lp.orient);
    let tlen = t2.hypot(t3).max(T::min_positive_value());
    t2 = t2 / tlen;
    t3 = t3 / tlen;

    let g = p.d3 + c3 * p.d4;
    let uu = c2 * g + p.d2;
    let vv = s3 * p.d4 + p.r2;
    let rho = uu.hypot(vv);
    let image = CrossSectionPoint { rho, z: -s2 * g };
    let rho_safe = rho.max(T::lit(1e-12) * p.reach());
    let row_rho = (-uu * s2 * g / rho_safe, (vv * c3 * p.d4 - uu * c2 * s3 * p.d4) / rho_safe);
    let row_z = (-c2 * g, s2 * s3 * p.d4);
    let velocity = (row_rho.0 * t2 + row_rho.1 * t3, row_z.0 * t2 + row_z.1 * t3);
    LoopVertex { theta2, theta3, image, velocity, plus_branch }
}

fn dot<T: Real>(a: (T, T), b: (T, T)) -> T {
    a.0 * b.0 + a.1 * b.1
}

fn norm<T: Real>(a: (T, T)) -> T {
    a.0.hypot(a.1)
}

/// Bisect a direction reversal of the image velocity down to the zero.
fn refine_reversal<T: Real>(p: DhParams<T>, lp: &CurveLoop<T>, mut ua: T, mut ub: T) -> T {
    let va = eval_loop(p, lp, ua).velocity;
    let na = norm(va).max(T::min_positive_value());
    let wref = (va.0 / na, va.1 / na);
    for _ in 0..90 {
        let um = (ua + ub) * T::lit(0.5);
        let vm = eval_loop(p, lp, um).velocity;
        if dot(vm, wref) > T::zero() {
            ua = um;
        } else {
            ub = um;
        }
        if ub - ua < T::lit(1e-15) {
            break;
        }
    }
    (ua + ub) * T::lit(0.5)
}

enum Certification {
    Triple,
    QuadrupleCluster,
    Failed { detail: String },
}

fn certify_cusp<T: Real>(
    p: DhParams<T>,
    location: CrossSectionPoint<T>,
    theta3_star: T,
) -> Certification {
    let quartic = ik_quartic(p, location);
    let w = T::lit(tol::CUSP_CERT_WINDOW);
    let sets = quartic.theta_root_sets(theta3_star);
    let in_window = |set: &[(T, usize)]| {
        set.iter()
            .filter(|(th, _)| circle_dist(*th, theta3_star) <= w)
            .map(|(_, m)| *m)
            .sum::<usize>()
    };
    let p_mult = in_window(&sets[0]);
    let dp_mult = in_window(&sets[1]);
    let ddp_mult = in_window(&sets[2]);

    if p_mult >= 4 {
        return Certification::QuadrupleCluster;
    }
    if p_mult >= 1 && dp_mult >= 1 && ddp_mult >= 1 {
        return Certification::Triple;
    }
    Certification::Failed {
        detail: format!(
            "root cluster multiplicities within {:.0e} rad of theta3: p={}, p'={}, p''={}",
            tol::CUSP_CERT_WINDOW,
            p_mult,
            dp_mult,
            ddp_mult
        ),
    }
}

fn scan_loop_cusps<T: Real>(
    p: DhParams<T>,
    lp: &CurveLoop<T>,
    n_scan: usize,
    diameter: T,
    cusps: &mut Vec<CuspPoint<T>>,
    failures: &mut Vec<CuspCertFailure<T>>,
) -> Result<(), SingularityError> {
    let n = n_scan.max(MIN_SAMPLES);
    let inv = T::one() / T::lit(n as f64);
    let verts: Vec<LoopVertex<T>> = (0..n)
        .map(|k| eval_loop(p, lp, T::lit(k as f64) * inv))
        .collect();

    let mut candidates: Vec<T> = Vec::new();
    let dip_threshold = T::lit(tol::CUSP_DIP_REL) * diameter;
    for k in 0..n {
        let k1 = (k + 1) % n;
        let (ua, ub) = (T::lit(k as f64) * inv, T::lit((k + 1) as f64) * inv);
        if dot(verts[k].velocity, verts[k1].velocity) < T::zero() {
            candidates.push(refine_reversal(p, lp, ua, ub));
            continue;
        }
        // Velocity dip without a coarse reversal: a close cusp pair may
        // hide between samples; subscan around the local minimum.
        let km = (k + n - 1) % n;
        let nk = norm(verts[k].velocity);
        if nk < dip_threshold
            && nk <= norm(verts[km].velocity)
            && nk <= norm(verts[k1].velocity)
        {
            let u_lo = T::lit(km as f64) * inv;
            let span = T::two() * inv;
            let m = 256;
            let mut prev = eval_loop(p, lp, u_lo).velocity;
            for j in 1..=m {
                let uj = u_lo + span * T::lit(j as f64) / T::lit(m as f64);
                let vj = eval_loop(p, lp, uj).velocity;
                if dot(prev, vj) < T::zero() {
                    let step = span / T::lit(m as f64);
                    candidates.push(refine_reversal(p, lp, uj - step, uj));
                }
                prev = vj;
            }
        }
    }

    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() < T::lit(1e-9));

    let vel_tol = T::lit(tol::CUSP_VELOCITY_REL) * diameter;
    for u in candidates {
        let v = eval_loop(p, lp, u);
        if norm(v.velocity) > vel_tol {
            // rho = |...| folds at the rotation axis; the fold reverses the
            // radial velocity without the curve being singular there.
            if v.image.rho < T::lit(1e-3) * diameter {
                continue;
            }
            failures.push(CuspCertFailure {
                location: v.image,
                theta3: v.theta3,
                reason: format!(
                    "velocity reversal did not converge to zero: |v| = {:e}",
                    norm(v.velocity).to_f64().unwrap_or(f64::NAN)
                ),
            });
            continue;
        }
        match certify_cusp(p, v.image, v.theta3) {
            Certification::Triple => {
                let dup = cusps.iter().any(|c| {
                    c.component == lp.component
                        && c.location.distance(&v.image) < T::lit(tol::CUSP_DEDUPE) * diameter
                        && circle_dist(c.theta3, v.theta3) < T::lit(1e-5)
                });
                if !dup {
                    cusps.push(CuspPoint {
                        location: v.image,
                        theta2: v.theta2,
                        theta3: v.theta3,
                        boundary: BoundaryRole::Internal, // fixed up by caller
                        branch: if v.plus_branch {
                            BranchKind::CurvePlus
                        } else {
                            BranchKind::CurveMinus
                        },
                        component: lp.component,
                    });
                }
            }
            Certification::QuadrupleCluster => {
                return Err(SingularityError::NonGeneric(
                    "multiplicity-4 root cluster: point with four equal solutions \
                     (transition manipulator)"
                        .into(),
                ));
            }
            Certification::Failed { detail } => {
                failures.push(CuspCertFailure { location: v.image, theta3: v.theta3, reason: detail });
            }
        }
    }
    Ok(())
}

/// Trace the singular set, label the workspace boundaries and detect all
/// cusps in one pass.
pub fn analyze_singularities<T: Real>(
    p: DhParams<T>,
    n_samples: usize,
) -> Result<SingularityAnalysis<T>, SingularityError> {
    let branches = trace_singularity_curves(p, n_samples)?;
    let loops = curve_loops(p, &branches);
    let diameter = image_diameter(&branches);

    let mut cusps = Vec::new();
    let mut failures = Vec::new();
    for lp in &loops {
        scan_loop_cusps(p, lp, n_samples, diameter, &mut cusps, &mut failures)?;
    }

    let boundaries = classify_boundaries_impl(p, &branches, &loops)?;
    for c in &mut cusps {
        if let Some(role) = boundaries.role_of(c.component) {
            c.boundary = role;
        }
    }
    cusps.sort_by(|a, b| {
        (a.component, a.theta3.to_f64().unwrap_or(0.0))
            .partial_cmp(&(b.component, b.theta3.to_f64().unwrap_or(0.0)))
            .unwrap()
    });
    Ok(SingularityAnalysis { branches, boundaries, cusps, certification_failures: failures })
}

/// Cusp list plus certification failures (reported, never dropped).
#[derive(Debug, Clone)]
pub struct CuspFindings<T: Real> {
    pub cusps: Vec<CuspPoint<T>>,
    pub certification_failures: Vec<CuspCertFailure<T>>,
}

/// All cusps of the workspace boundary, at the default sampling density.
pub fn find_cusps<T: Real>(p: DhParams<T>) -> Result<CuspFindings<T>, SingularityError> {
    find_cusps_with(p, DEFAULT_SAMPLES)
}

pub fn find_cusps_with<T: Real>(
    p: DhParams<T>,
    n_samples: usize,
) -> Result<CuspFindings<T>, SingularityError> {
    let analysis = analyze_singularities(p, n_samples)?;
    Ok(CuspFindings {
        cusps: analysis.cusps,
        certification_failures: analysis.certification_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det_jacobian_analytic;

    fn params(d2: f64, d3: f64, d4: f64, r2: f64) -> DhParams<f64> {
        DhParams::new(d2, d3, d4, r2).unwrap()
    }

    #[test]
    fn lines_absent_when_d3_exceeds_d4() {
        assert!(singular_lines(params(1.0, 2.0, 1.5, 1.0)).is_none());
    }

    #[test]
    fn lines_at_arccos() {
        let l = singular_lines(params(1.0, 3.0, 4.0, 3.0)).unwrap();
        let expect = (-0.75f64).acos();
        assert!((l.theta3_plus - expect).abs() < 1e-12);
        assert!((l.theta3_minus + expect).abs() < 1e-12);
        assert!(!l.degenerate_tangent);
        assert!((expect - 2.418858405776378).abs() < 1e-9);
    }

    #[test]
    fn lines_degenerate_at_equal_lengths() {
        let l = singular_lines(params(1.0, 2.0, 2.0, 1.0)).unwrap();
        assert!(l.degenerate_tangent);
        assert!((l.theta3_plus - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn trace_two_closed_curves_no_lines() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let branches = trace_singularity_curves(p, 1024).unwrap();
        let curves = branches
            .iter()
            .filter(|b| matches!(b.kind, BranchKind::CurvePlus | BranchKind::CurveMinus))
            .count();
        let lines = branches.len() - curves;
        assert_eq!(curves, 4, "two components, two branches each");
        assert_eq!(lines, 0);
        assert_eq!(curve_loops(p, &branches).len(), 2);
    }

    #[test]
    fn trace_curves_plus_lines() {
        let p = params(1.0, 3.0, 4.0, 3.0);
        let branches = trace_singularity_curves(p, 1024).unwrap();
        let lines = branches
            .iter()
            .filter(|b| matches!(b.kind, BranchKind::LinePlus | BranchKind::LineMinus))
            .count();
        assert_eq!(lines, 2);
        assert_eq!(curve_loops(p, &branches).len(), 2);
    }

    #[test]
    fn traced_samples_sit_on_the_zero_set() {
        for p in [params(1.0, 2.0, 1.5, 1.0), params(1.0, 3.0, 4.0, 3.0)] {
            let branches = trace_singularity_curves(p, 512).unwrap();
            for b in &branches {
                for &(theta2, theta3) in &b.samples {
                    let d =
                        det_jacobian_analytic(p, JointConfig::new(0.0, theta2, theta3));
                    assert!(d.abs() < 1e-8, "{:?} ({theta2}, {theta3}): det = {d}", b.kind);
                }
            }
        }
    }

    #[test]
    fn line_images_are_isolated_points() {
        let p = params(1.0, 3.0, 4.0, 3.0);
        let branches = trace_singularity_curves(p, 512).unwrap();
        let s7 = 7.0f64.sqrt();
        let expect_outer = (1.0 + (3.0 + s7).powi(2)).sqrt();
        let expect_inner = (1.0 + (3.0 - s7).powi(2)).sqrt();
        for b in branches {
            if matches!(b.kind, BranchKind::LinePlus | BranchKind::LineMinus) {
                let first = b.image[0];
                for q in &b.image {
                    assert!(q.distance(&first) < 1e-9, "line image must be one point");
                }
                assert!(first.z.abs() < 1e-12);
                let ok = (first.rho - expect_outer).abs() < 1e-9
                    || (first.rho - expect_inner).abs() < 1e-9;
                assert!(ok, "rho = {}", first.rho);
            }
        }
    }

    #[test]
    fn ik_counts_in_the_three_regions() {
        // Probes located from an oracle sweep of the z = 0 ray and
        // cross-checked against the grid-seeded Newton count in the oracle
        // tests: 4-solution region, 2-solution region, out of reach.
        let p = params(1.0, 2.0, 1.5, 1.0);
        assert_eq!(ik_count_at(p, CrossSectionPoint::new(2.3, 0.0)), Ok(4));
        assert_eq!(ik_count_at(p, CrossSectionPoint::new(3.5, 0.0)), Ok(2));
        assert_eq!(ik_count_at(p, CrossSectionPoint::new(4.8, 0.0)), Ok(0));
    }

    #[test]
    fn count_is_even_at_generic_points() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let mut seen = 0;
        for i in 0..40 {
            for j in 0..10 {
                let pt = CrossSectionPoint::new(0.13 * i as f64 + 0.05, 0.31 * j as f64 - 1.4);
                if let Ok(c) = ik_count_at(p, pt) {
                    assert!(c % 2 == 0 && c <= 4, "count {c} at {pt:?}");
                    seen += 1;
                }
            }
        }
        assert!(seen > 300);
    }

    #[test]
    fn boundaries_of_the_four_cusp_example() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let branches = trace_singularity_curves(p, 2048).unwrap();
        let set = classify_boundaries(p, &branches).unwrap();
        assert_eq!(set.external.len(), 1);
        assert_eq!(set.internal.len(), 1);
        assert!(set.isolated_points.is_empty());
        assert!(set.four_evidence, "internal boundary encloses the 4-solution region");
        assert!(!set.hole_evidence);
        // The external polyline attains the global maximum of rho.
        let ext_max = set.external[0].iter().fold(f64::NEG_INFINITY, |m, q| m.max(q.rho));
        let int_max = set.internal[0].iter().fold(f64::NEG_INFINITY, |m, q| m.max(q.rho));
        assert!(ext_max > int_max);
    }

    #[test]
    fn hole_evidence_separates_d1_from_d5() {
        // Binary design: the internal boundary encloses a void.
        let p = params(1.0, 2.0, 0.1, 1.0);
        let branches = trace_singularity_curves(p, 2048).unwrap();
        let set = classify_boundaries(p, &branches).unwrap();
        assert!(set.hole_evidence);
        assert!(!set.four_evidence);

        // Quaternary no-cusp design: the enclosed region has 4 solutions
        // and the isolated points sit strictly inside it.
        let p = params(1.0, 0.5, 2.0, 1.0);
        let branches = trace_singularity_curves(p, 2048).unwrap();
        let set = classify_boundaries(p, &branches).unwrap();
        assert!(!set.hole_evidence);
        assert!(set.four_evidence);
        assert_eq!(set.isolated_points.len(), 2);
        for pt in &set.isolated_points {
            for (dr, dz) in [(0.01, 0.0), (-0.01, 0.0), (0.0, 0.01), (0.0, -0.01)] {
                let probe = CrossSectionPoint::new(pt.rho + dr, pt.z + dz);
                assert_eq!(ik_count_at(p, probe), Ok(4), "around {pt:?}");
            }
        }
    }

    #[test]
    fn cusp_counts_of_the_reference_designs() {
        let cases = [
            (params(1.0, 2.0, 1.5, 1.0), 4, 4, 0),
            (params(1.0, 3.0, 4.0, 3.0), 2, 2, 0),
            (params(1.0, 3.0, 6.0, 3.0), 4, 2, 2),
        ];
        for (p, total, internal, external) in cases {
            let found = find_cusps(p).unwrap();
            assert!(found.certification_failures.is_empty(), "{:?}", found.certification_failures);
            let int = found.cusps.iter().filter(|c| c.boundary == BoundaryRole::Internal).count();
            let ext = found.cusps.len() - int;
            assert_eq!((found.cusps.len(), int, ext), (total, internal, external), "{p:?}");
        }
    }

    #[test]
    fn cusps_stable_under_sampling_refinement() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        let a = find_cusps_with(p, 4096).unwrap().cusps;
        let b = find_cusps_with(p, 8192).unwrap().cusps;
        assert_eq!(a.len(), b.len());
        for ca in &a {
            let best = b
                .iter()
                .map(|cb| ca.location.distance(&cb.location))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "cusp moved by {best}");
        }
    }

    #[test]
    fn cusp_triple_root_certificate() {
        // Every reported cusp admits a multiplicity >= 3 root cluster.
        let p = params(1.0, 2.0, 1.5, 1.0);
        for c in find_cusps(p).unwrap().cusps {
            let quartic = ik_quartic(p, c.location);
            let sets = quartic.theta_root_sets(c.theta3);
            for set in &sets {
                let near = set.iter().any(|(th, _)| circle_dist(*th, c.theta3) < 2e-2);
                assert!(near, "derivative root missing near cusp {c:?}");
            }
        }
    }

    #[test]
    fn images_stable_under_sampling_refinement() {
        // Hausdorff distance between the n and 2n sample polylines.
        let p = params(1.0, 3.0, 4.0, 3.0);
        let coarse = trace_singularity_curves(p, 1024).unwrap();
        let fine = trace_singularity_curves(p, 2048).unwrap();
        let scale = 11.0; // reach
        for (bc, bf) in coarse.iter().zip(fine.iter()) {
            assert_eq!(bc.kind, bf.kind);
            for q in &bc.image {
                let d = bf.image.iter().map(|r| q.distance(r)).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-3 * scale, "kind {:?}: gap {d}", bc.kind);
            }
        }
    }

    #[test]
    fn r2_zero_is_rejected_as_non_generic() {
        let p = params(1.0, 2.0, 1.5, 0.0);
        assert!(matches!(
            trace_singularity_curves(p, 512),
            Err(SingularityError::NonGeneric(_))
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        let p = params(1.0, 2.0, 1.5, 1.0);
        assert!(matches!(
            trace_singularity_curves(p, 100),
            Err(SingularityError::TooFewSamples)
        ));
    }
}
