//! Property-based invariants.

use crsphere::functionals::{eval_j, gradient};
use crsphere::geometry::*;
use crsphere::harmonics::{nu, zonal_phi, ZonalPluriharmonic};
use crsphere::quadrature::DiskRule;
use crsphere::special::{gamma, gamma_ratio, pochhammer};
use crsphere::spectral::{lambda_d, lambda_d_ext};
use crsphere::{hom_dim, sample, sphere_volume, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn rule() -> &'static DiskRule {
    static RULE: OnceLock<DiskRule> = OnceLock::new();
    RULE.get_or_init(|| DiskRule::new(1, 64, 96).unwrap())
}

fn heis(n: usize) -> impl Strategy<Value = HeisenbergPoint> {
    (prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n), -3.0..3.0f64)
        .prop_map(|(z, t)| HeisenbergPoint::new(z.into_iter().map(|(a, b)| C64::new(a, b)).collect(), t))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(u in heis(2), v in heis(2), w in heis(2)) {
        let a = heis_mul(&heis_mul(&u, &v).unwrap(), &w).unwrap();
        let b = heis_mul(&u, &heis_mul(&v, &w).unwrap()).unwrap();
        prop_assert!(close(a.t, b.t, 1e-12));
        let e = heis_mul(&u, &u.inverse()).unwrap();
        prop_assert!(e.t.abs() < 1e-12 && e.z.iter().all(|c| c.norm() < 1e-12));
        prop_assert_eq!(heis_mul(&HeisenbergPoint::origin(2), &u).unwrap(), u);
    }

    #[test]
    fn distance_is_right_invariant(u in heis(1), v in heis(1), w in heis(1)) {
        let d0 = heis_dist(&u, &v).unwrap();
        let d1 = heis_dist(&heis_mul(&u, &w).unwrap(), &heis_mul(&v, &w).unwrap()).unwrap();
        prop_assert!(close(d0, d1, 1e-10));
    }

    #[test]
    fn cayley_round_trip(u in heis(2)) {
        let back = cayley_inv(&cayley(&u)).unwrap();
        prop_assert!(close(back.t, u.t, 1e-12));
        for (a, b) in back.z.iter().zip(&u.z) {
            prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn conformal_maps_are_conformal(seed in 0u64..10_000, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = sample::conformal_word(&mut rng, n, 4);
        let sigma = sample::conformal_word(&mut rng, n, 4);
        let (a, b) = (sample::sphere_point(&mut rng, n), sample::sphere_point(&mut rng, n));
        let (ta, ja) = tau.apply_with_jacobian(&a).unwrap();
        let (tb, jb) = tau.apply_with_jacobian(&b).unwrap();
        let q = hom_dim(n);
        prop_assert!(close(sphere_dist(&ta, &tb), sphere_dist(&a, &b) * (ja * jb).powf(0.5 / q), 1e-9));
        let comp = sigma.then(&tau).unwrap();
        let js = sigma.jacobian(&a).unwrap();
        let jt = tau.jacobian(&sigma.apply(&a).unwrap()).unwrap();
        prop_assert!(close(comp.jacobian(&a).unwrap(), js * jt, 1e-9));
        let inv = tau.inverse();
        let back = inv.apply(&ta).unwrap();
        prop_assert!(sphere_dist(&back, &a) < 1e-6);
    }

    #[test]
    fn gamma_recurrence(x in 0.1..30.0f64) {
        prop_assert!(close(gamma(x + 1.0), x * gamma(x), 1e-12));
        prop_assert!(close(gamma_ratio(x + 1.0, x).unwrap(), x, 1e-12));
    }

    #[test]
    fn lambda_reflection(j in 0usize..60, d in 0.1..3.9f64, n in 1usize..=3) {
        let p = lambda_d_ext(j, d, n).unwrap() * lambda_d_ext(j, -d, n).unwrap();
        prop_assert!(close(p, 1.0, 1e-11));
        let q = hom_dim(n);
        let product = if j == 0 { 0.0 } else { pochhammer(j as f64, n + 1) };
        prop_assert!(close(lambda_d(j, q, n).unwrap(), product, 1e-13));
    }

    #[test]
    fn zonal_reproducing_at_one(j in 0usize..8, k in 0usize..8, n in 1usize..=3) {
        // Φ_{jk}(1) = dim H_{jk} / ω
        let dim = crsphere::harmonics::dim_hjk(j, k, n) as f64;
        let v = zonal_phi(j, k, C64::new(1.0, 0.0), n);
        prop_assert!(close(v.re, dim / sphere_volume(n), 1e-10));
        prop_assert!(v.im.abs() < 1e-10 * (1.0 + v.re.abs()));
    }

    #[test]
    fn pluri_norm_matches_quadrature(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)) {
        let mut a = vec![C64::new(0.0, 0.0)];
        a.extend(coeffs.iter().map(|(x, y)| C64::new(*x, *y)));
        let f = ZonalPluriharmonic::new(1, a.clone()).unwrap();
        let l2 = rule().integrate(|w| f.eval_w(w).powi(2)).unwrap();
        let spec: f64 = a.iter().enumerate().skip(1).map(|(j, c)| c.norm_sqr() * nu(j, 1) / 2.0).sum();
        prop_assert!(close(l2, spec, 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn beckner_onofri_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = sample::zonal_pluri(&mut rng, 1, 8, 3.0);
        let v = eval_j(&f, rule()).unwrap().value;
        prop_assert!(v >= -1e-6, "J = {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn constants_are_critical(c0 in -3.0..3.0f64) {
        let f = ZonalPluriharmonic::new(1, vec![C64::new(c0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let g = gradient(&f, rule()).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() < 1e-12));
        prop_assert!(eval_j(&f, rule()).unwrap().value.abs() < 1e-12);
    }
}
