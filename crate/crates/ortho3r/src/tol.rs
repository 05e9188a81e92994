//! Numerical tolerances used across the crate.
//!
//! Everything here is expressed in f64 and converted into the working
//! scalar at the call site. Relative tolerances are quoted against the
//! natural scale of the quantity they gate (coefficient magnitude,
//! workspace diameter, link-length sum), never against bare machine
//! epsilon.

/// Central finite-difference step for the numeric Jacobian, in radians.
/// Balances O(h^2) truncation against roundoff at double precision.
pub const FD_STEP: f64 = 1e-5;

/// A leading polynomial coefficient below this fraction of the largest
/// coefficient is treated as zero (degree drop / root at infinity).
pub const LEADING_COEFF_REL: f64 = 1e-12;

/// Roots closer than this merge into one multiplicity cluster (t-space,
/// scaled by max(1, |t|)). Also calibrates the even-multiplicity test at
/// critical points.
pub const ROOT_CLUSTER: f64 = 1e-6;

/// |p| at a critical point below this fraction of the local coefficient
/// scale means the query point is within tolerance of a workspace
/// boundary even when the near-double root pair is complex.
pub const BOUNDARY_DIP_REL: f64 = 1e-9;

/// A derivative value below this fraction of its coefficient scale counts
/// as vanishing when estimating root multiplicity.
pub const MULTIPLICITY_REL: f64 = 1e-7;

/// Newton-polish target residual for polynomial roots. Near machine
/// level: root errors get amplified into theta2 by the fold sensitivity
/// near workspace boundaries, so polishing must not stop early.
pub const ROOT_POLISH_REL: f64 = 1e-15;

/// Residual bound |det J| for emitted singular-curve samples.
pub const SING_SAMPLE_RESIDUAL: f64 = 1e-8;

/// Image-velocity magnitude at a refined cusp, relative to the workspace
/// diameter.
pub const CUSP_VELOCITY_REL: f64 = 1e-9;

/// Velocity dips below this fraction of the workspace diameter trigger a
/// fine subscan for cusp pairs that the coarse reversal test missed.
pub const CUSP_DIP_REL: f64 = 5e-2;

/// Half-width (radians of theta3) of the window used to certify a
/// multiplicity >= 3 root cluster at a cusp candidate.
pub const CUSP_CERT_WINDOW: f64 = 2e-2;

/// Cusps closer than this (relative to workspace diameter) are duplicates.
pub const CUSP_DEDUPE: f64 = 1e-6;

/// Two inverse-kinematics roots closer than this (radians of theta3) mean
/// the query point sits on a workspace boundary.
pub const BOUNDARY_ROOT_SEP: f64 = 1e-5;

/// Boundary-labelling probe offset, relative to the workspace diameter.
/// Must exceed the polyline discretization error but stay below feature
/// size; re-probed at several stations with majority vote.
pub const PROBE_OFFSET_REL: f64 = 1e-3;

/// Relative margin to a separating surface (or to d3 = d2) below which a
/// design is non-generic and classification is refused.
pub const GENERIC_MARGIN_REL: f64 = 1e-6;

/// Forward-kinematics residual allowed for a returned IK solution,
/// relative to the reach.
pub const FK_ROUNDTRIP: f64 = 1e-8;

/// |d3 + c3*d4| below this fraction of (d3 + d4) flags a near-singular IK
/// root (theta2 poorly determined; the isolated-point case). Loose on
/// purpose: a target rounded to ~1e-4 near an isolated point still lands
/// within sqrt of that in the g coordinate.
pub const NEAR_SINGULAR_G_REL: f64 = 1e-2;

/// Below this fraction of (d3 + d4), theta2 is numerically indeterminate
/// and no configuration is constructed for the root.
pub const HARD_SINGULAR_G_REL: f64 = 1e-9;

/// Oracle Newton residual, relative to the reach.
pub const NEWTON_RESIDUAL_REL: f64 = 1e-11;

/// Oracle duplicate-solution merge distance on the joint torus.
pub const TORUS_DEDUPE: f64 = 1e-6;

/// Scaled max(|p|, |p'|, |p''|) at a brute-scan sample below this counts
/// as a triple-root hit.
pub const CUSP_BRUTE_RESIDUAL: f64 = 1e-8;
