use epshape::algebra::orthogonality_residual;
use epshape::algebra::{
    ad, coad, exp_so3, hat, se3_compose, sigma_star, vee, AlgebraVector, MomentumCovector,
    SE3Element, Vec3, Vec4,
};
use epshape::poisson::{bracket, casimirs, random_gradient, random_phase_point, BracketId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-2.0..2.0f64).prop_map(Vec3::from)
}

fn xi() -> impl Strategy<Value = AlgebraVector> {
    (v3(), v3()).prop_map(|(o, v)| AlgebraVector::new(o, v))
}

fn group() -> impl Strategy<Value = SE3Element> {
    (v3(), v3()).prop_map(|(w, x)| SE3Element::new(exp_so3(&w), x).unwrap())
}

fn bracket_id() -> impl Strategy<Value = BracketId> {
    prop::sample::select(BracketId::ALL.to_vec())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn hat_vee_round_trip(a in v3()) {
        prop_assert_eq!(vee(&hat(&a)).unwrap(), a);
    }

    #[test]
    fn exp_is_a_rotation(w in v3()) {
        let r = exp_so3(&w);
        prop_assert!(orthogonality_residual(&r) < 1e-13);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn coad_is_dual_to_ad(x in xi(), y in xi(), pi in v3(), p in v3()) {
        let m = MomentumCovector::new(pi, p);
        prop_assert!(close(coad(&x, &m).pair(&y), m.pair(&ad(&x, &y)), 1e-13));
    }

    #[test]
    fn ad_satisfies_jacobi(x in xi(), y in xi(), z in xi()) {
        let s = ad(&x, &ad(&y, &z)) + ad(&y, &ad(&z, &x)) + ad(&z, &ad(&x, &y));
        prop_assert!(s.omega.amax().max(s.vel.amax()) < 1e-12);
    }

    #[test]
    fn sigma_star_is_a_homomorphism(s1 in group(), s2 in group(), g in v3(), h in -2.0..2.0f64) {
        let a = Vec4::new(g, h);
        let lhs = sigma_star(&se3_compose(&s1, &s2).unwrap(), &a).unwrap();
        let rhs = sigma_star(&s1, &sigma_star(&s2, &a).unwrap()).unwrap();
        prop_assert!((lhs.spatial - rhs.spatial).amax() < 1e-12);
        prop_assert!((lhs.scalar - rhs.scalar).abs() < 1e-12);
    }

    #[test]
    fn brackets_are_antisymmetric(id in bracket_id(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_phase_point(id, &mut rng);
        let (f, g) = (random_gradient(id, &mut rng), random_gradient(id, &mut rng));
        let fg = bracket(id, &z, &f, &g).unwrap();
        let gf = bracket(id, &z, &g, &f).unwrap();
        prop_assert!(close(fg, -gf, 1e-13));
        prop_assert!(bracket(id, &z, &f, &f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn casimirs_commute_with_everything(id in bracket_id(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_phase_point(id, &mut rng);
        let h = random_gradient(id, &mut rng);
        for c in casimirs(id) {
            let v = bracket(id, &z, &c.gradient(id, &z), &h).unwrap();
            prop_assert!(v.abs() < 1e-11, "{} on {}: {v}", c.name, id.name());
        }
    }
}
