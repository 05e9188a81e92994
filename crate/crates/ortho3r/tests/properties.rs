//! Property tests for the kinematic core: roundtrips, determinant
//! proportionality, parity and scaling invariances.

use ortho3r::classification::{classify_domain, is_cuspidal, surfaces};
use ortho3r::kinematics::{
    det_jacobian_analytic, det_jacobian_numeric, forward_kinematics, ik_quartic, solve_ik,
    CartesianPoint, CrossSectionPoint, DhParams, JointConfig,
};
use proptest::prelude::*;

fn length() -> impl Strategy<Value = f64> {
    0.1f64..4.0
}

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

fn params() -> impl Strategy<Value = DhParams<f64>> {
    (length(), length(), length(), length())
        .prop_map(|(d2, d3, d4, r2)| DhParams::new(d2, d3, d4, r2).unwrap())
}

proptest! {
    /// solve_ik(fk(q)) recovers q on the joint torus.
    ///
    /// Configurations on the singular set have coalescing solutions and
    /// the inverse problem is sqrt(eps)-ill-posed there (a last-digit
    /// rounding of the target moves the coalescing pair by ~1e-8), so the
    /// draws keep a small margin from both determinant factors.
    #[test]
    fn fk_ik_roundtrip(p in params(), t1 in angle(), t2 in angle(), t3 in angle()) {
        let q = JointConfig::new(t1, t2, t3);
        let (s3, c3) = t3.sin_cos();
        let (_, c2) = t2.sin_cos();
        let g = p.d3() + c3 * p.d4();
        let f2 = s3 * p.d2() + c2 * (s3 * p.d3() - c3 * p.r2());
        prop_assume!(g.abs() > 1e-3 * (p.d3() + p.d4()));
        prop_assume!(f2.abs() > 1e-3 * (p.d2() + p.d3() + p.r2()));

        let target = forward_kinematics(p, q);
        let sols = solve_ik(p, target).unwrap();
        let hit = sols.configs.iter().any(|s| s.torus_distance(&q) < 1e-8);
        prop_assert!(hit, "seed config not recovered: {sols:?}");
        for s in &sols.configs {
            prop_assert!(forward_kinematics(p, *s).distance(&target) < 1e-8 * p.reach());
        }
    }

    /// The finite-difference determinant is d4 times the factored form.
    #[test]
    fn determinant_proportionality(p in params(), t1 in angle(), t2 in angle(), t3 in angle()) {
        let q = JointConfig::new(t1, t2, t3);
        let analytic = det_jacobian_analytic(p, q);
        let numeric = det_jacobian_numeric(p, q);
        let expected = p.d4() * analytic;
        // Central differences with h = 1e-5 leave O(h^2) truncation on a
        // quantity of size O(reach^2).
        let tol = 1e-7 * p.reach().powi(2).max(1.0);
        prop_assert!((numeric - expected).abs() < tol,
            "numeric {numeric} vs d4 * analytic {expected}");
    }

    /// The factored determinant does not depend on theta1.
    #[test]
    fn determinant_ignores_theta1(p in params(), t1a in angle(), t1b in angle(),
                                  t2 in angle(), t3 in angle()) {
        let a = det_jacobian_analytic(p, JointConfig::new(t1a, t2, t3));
        let b = det_jacobian_analytic(p, JointConfig::new(t1b, t2, t3));
        prop_assert_eq!(a, b);
    }

    /// Real root counts of the inverse-kinematics quartic are always even
    /// away from boundaries (counting the theta3 = pi root).
    #[test]
    fn root_count_parity(p in params(), rho in 0.0f64..14.0, z in -7.0f64..7.0) {
        let quartic = ik_quartic(p, CrossSectionPoint::new(rho, z));
        if let Ok(roots) = quartic.real_roots() {
            if roots.max_multiplicity() == 1 {
                let total = roots.count_distinct() + usize::from(quartic.has_pi_root());
                prop_assert!(total % 2 == 0, "odd root count {total}");
            }
        }
    }

    /// Uniform scaling of all four lengths scales positions linearly and
    /// leaves the solution set, the domain label and cuspidality unchanged.
    #[test]
    fn scale_homogeneity(p in params(), lambda in 0.2f64..5.0,
                         t1 in angle(), t2 in angle(), t3 in angle()) {
        let q = JointConfig::new(t1, t2, t3);
        let e = forward_kinematics(p, q);
        let es = forward_kinematics(p.scaled(lambda), q);
        prop_assert!((es.x - lambda * e.x).abs() < 1e-9 * lambda * p.reach());
        prop_assert!((es.y - lambda * e.y).abs() < 1e-9 * lambda * p.reach());
        prop_assert!((es.z - lambda * e.z).abs() < 1e-9 * lambda * p.reach());

        let scaled_target = CartesianPoint::new(lambda * e.x, lambda * e.y, lambda * e.z);
        let sols = solve_ik(p, e).unwrap();
        let sols_scaled = solve_ik(p.scaled(lambda), scaled_target).unwrap();
        prop_assert_eq!(sols.configs.len(), sols_scaled.configs.len());

        prop_assert_eq!(is_cuspidal(p), is_cuspidal(p.scaled(lambda)));
        prop_assert_eq!(
            classify_domain(p).domain(),
            classify_domain(p.scaled(lambda)).domain()
        );

        let s = surfaces(p.d2(), p.d3(), p.r2());
        let ss = surfaces(lambda * p.d2(), lambda * p.d3(), lambda * p.r2());
        prop_assert!((ss.c1 - lambda * s.c1).abs() < 1e-9 * lambda * s.c1.max(1.0));
        prop_assert!((ss.c2 - lambda * s.c2).abs() < 1e-9 * lambda * s.c2);
    }

    /// Wrapping is idempotent and keeps angles in [-pi, pi).
    #[test]
    fn wrap_idempotent(a in -50.0f64..50.0) {
        let w = ortho3r::num::wrap_angle(a);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
        prop_assert_eq!(w, ortho3r::num::wrap_angle(w));
    }
}
