//! Kinematic analysis of orthogonal 3R positioning manipulators.
//!
//! Models the family of serial manipulators with three mutually orthogonal
//! revolute axes (twists -90/+90 degrees, no offset on the last joint),
//! parametrized by the four lengths (d2, d3, d4, r2):
//!
//! - forward kinematics and the factored Jacobian determinant, with a
//!   finite-difference oracle ([`kinematics`]);
//! - inverse kinematics through a quartic in tan(theta3/2), with
//!   multiplicity-aware real-root isolation ([`roots`]);
//! - joint-space singularity curves and lines, their workspace images in
//!   the (rho, z) half cross-section, boundary labelling and cusp
//!   detection ([`singularity`]);
//! - the four separating surfaces of the design-parameter space, the five
//!   workspace-topology domains D1..D5 and the explicit cuspidality
//!   condition ([`classification`]);
//! - independent brute-force validators: grid-seeded IK counting,
//!   exhaustive triple-root scanning and empirical domain labelling
//!   ([`oracle`]).
//!
//! All numeric code is generic over [`Real`] (f32 or f64); the `*64` type
//! aliases below pin the common case. Every operation is a pure function
//! of its inputs — no global state, deterministic results — so values can
//! be shared freely across threads and callers may parallelize over
//! configurations, points or parameter draws as they see fit.

pub mod classification;
pub mod kinematics;
pub mod num;
pub mod oracle;
pub mod roots;
pub mod singularity;
pub mod tol;

pub use num::Real;

pub use kinematics::{
    det_jacobian_analytic, det_jacobian_numeric, forward_kinematics, ik_quartic, solve_ik,
    CartesianPoint, CrossSectionPoint, DhParams, IkQuartic, IkSolutions, JointConfig,
};
pub use roots::{quartic_real_roots, real_roots, RealRoots, RootCluster};
pub use singularity::{
    analyze_singularities, classify_boundaries, find_cusps, ik_count_at, map_to_workspace,
    singular_lines, trace_singularity_curves, BranchKind, CuspPoint, SingularBranch,
    WorkspaceBoundarySet,
};

pub use classification::{
    classify_domain, distance_to_nearest_surface, is_cuspidal, surfaces, AnalyticLabel, DomainId,
    SeparatingSurfaces, SurfaceId, TopologyReport,
};
pub use oracle::{
    cusp_brute, empirical_domain, ik_count_brute, transition_bisect, transition_bisect_between,
    GridSpec,
};

pub type DhParams64 = kinematics::DhParams<f64>;
pub type JointConfig64 = kinematics::JointConfig<f64>;
pub type CartesianPoint64 = kinematics::CartesianPoint<f64>;
pub type CrossSectionPoint64 = kinematics::CrossSectionPoint<f64>;
pub type IkQuartic64 = kinematics::IkQuartic<f64>;
pub type TopologyReport64 = classification::TopologyReport<f64>;
