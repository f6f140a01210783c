//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 8`.

use crsphere::adams::{adams_from_profile, adams_sublap_series, sharpness_probe_multi, ProbeOptions};
use crsphere::functionals::*;
use crsphere::geometry::*;
use crsphere::harmonics::zonal_phi;
use crsphere::kernels::{orthogonality_check, ThetaKernel};
use crsphere::quadrature::{DiskRule, SigmaRule, SphereRule};
use crsphere::spectral::*;
use crsphere::{hom_dim, sample, sphere_volume, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, PI};
use std::time::Instant;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1() -> Outcome {
    let t = Instant::now();
    let targets = [(1, 4.0), (2, 18.0 * PI), (3, 192.0 * PI * PI / (12.0 - PI * PI))];
    let mut worst: f64 = 0.0;
    for (n, exact) in targets {
        let a = adams_sublap_series(n).map_err(|e| e.to_string())?;
        worst = worst.max(rel(a.value, exact));
    }
    let secs = t.elapsed().as_secs_f64();
    check(worst <= 1e-8 && secs < 1.0, format!("max rel err {worst:.2e}, {secs:.3}s"))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let d = hom_dim(n) / 2.0;
        let rule = SigmaRule::graded(n, 32, 12).map_err(|e| e.to_string())?;
        let quad = adams_from_profile(&ThetaKernel::Full { d, n }, &rule).map_err(|e| e.to_string())?;
        let series = adams_sublap_series(n).map_err(|e| e.to_string())?;
        worst = worst.max(rel(quad.value, series.value));
    }
    let secs = t.elapsed().as_secs_f64();
    check(worst <= 1e-4 && secs < 30.0, format!("max rel diff {worst:.2e}, {secs:.2}s"))
}

fn c3() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let d = hom_dim(n) / 2.0;
        let rule = SigmaRule::new(n, 32).map_err(|e| e.to_string())?;
        let base = (n + 1) as f64 * PI.powi(n as i32 + 1);
        let p = adams_from_profile(&ThetaKernel::Pluri { d, n }, &rule).map_err(|e| e.to_string())?;
        let h = adams_from_profile(&ThetaKernel::Hardy { d, n }, &rule).map_err(|e| e.to_string())?;
        worst = worst.max(rel(p.value, base)).max(rel(h.value, 2.0 * base));
    }
    check(worst <= 1e-8, format!("max rel err {worst:.2e}"))
}

/// Rule on `S^3` concentrated near `U N`: graded disk nodes for `η·(U N)`
/// times a uniform circle for the orthogonal phase.
fn sphere_rule_about(u: &nalgebra::DMatrix<C64>, n_phi: usize) -> Vec<(SpherePoint, f64)> {
    let disk = DiskRule::default_graded(1, 320, 40).unwrap();
    let mut out = vec![];
    for (w, wt) in disk.nodes.iter().zip(&disk.weights) {
        let r = (1.0 - w.norm_sqr()).max(0.0).sqrt();
        for a in 0..n_phi {
            let phi = 2.0 * PI * (a as f64 + 0.5) / n_phi as f64;
            let xi = nalgebra::DVector::from_vec(vec![C64::from_polar(r, phi), *w]);
            let eta = u * xi;
            out.push((SpherePoint::new_unchecked(eta.iter().copied().collect()), wt / n_phi as f64));
        }
    }
    out
}

fn c4() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    // series vs closed kernel on |1-w| ∈ [0.3, 2]
    let mut worst_filtered: f64 = 0.0;
    let mut worst_square: f64 = 0.0;
    for &d in &[1.5, 2.0, 3.0] {
        for ri in 0..8 {
            let rho = 0.3 + 1.7 * ri as f64 / 7.0;
            for k in 0..12 {
                let w = c(1.0, 0.0) - C64::from_polar(rho, PI * (k as f64 + 0.5) / 12.0 - PI / 2.0);
                if w.norm() > 1.0 {
                    continue;
                }
                let exact = closed_kernel(d, w, 1).map_err(err)?;
                worst_filtered = worst_filtered.max(rel(fundamental_series_filtered(d, w, 200, 1).map_err(err)?, exact));
                worst_square = worst_square.max(rel(fundamental_series(d, w, 200, 1).map_err(err)?, exact));
            }
        }
    }
    // normalization integral by quadrature
    let rule = DiskRule::default_graded(1, 480, 48).map_err(err)?;
    let v = rule.integrate(|w| (2.0 * (c(1.0, 0.0) - w).norm()).powf(-1.0)).map_err(err)?;
    let norm_err = rel(v, normalization_integral(2.0, 1).map_err(err)?);
    // kernel of A_2^{-1} acts diagonally on zonal harmonics
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cd = c_d(2.0, 1).map_err(err)?;
    let mut rec_err: f64 = 0.0;
    for _ in 0..5 {
        let zeta = sample::sphere_point(&mut rng, 1);
        let (a, b) = (zeta.zeta[0], zeta.zeta[1]);
        let u = nalgebra::DMatrix::from_row_slice(2, 2, &[b.conj(), a, -a.conj(), b]);
        let rule = sphere_rule_about(&u, 48);
        for (j, k) in [(0usize, 0usize), (1, 0), (1, 1), (2, 1)] {
            let integral: C64 = rule
                .iter()
                .map(|(eta, wt)| zonal_phi(j, k, eta.last(), 1) * (cd * sphere_dist(&zeta, eta).powf(-2.0) * wt))
                .sum();
            let lam = lambda_d(j, 2.0, 1).map_err(err)? * lambda_d(k, 2.0, 1).map_err(err)?;
            let expect = zonal_phi(j, k, zeta.last(), 1) / lam;
            let scale = zonal_phi(j, k, c(1.0, 0.0), 1).norm();
            rec_err = rec_err.max((integral - expect).norm() / scale);
        }
    }
    check(
        worst_filtered <= 1e-3 && norm_err <= 1e-6 && rec_err <= 1e-4,
        format!(
            "filtered series rel err {worst_filtered:.2e} (square truncation {worst_square:.2e}), normalization {norm_err:.2e}, recursion {rec_err:.2e}"
        ),
    )
}

fn c5() -> Outcome {
    let mut worst: f64 = 0.0;
    for &d in &[4usize, 6] {
        for n in 1..=3 {
            for j in 0..=5 {
                for k in 0..=5 {
                    let r = factorization_check(d, n, j, k).map_err(|e| e.to_string())?;
                    let scale = (lambda_d_ext(j, d as f64, n).unwrap() * lambda_d_ext(k, d as f64, n).unwrap())
                        .abs()
                        .max(1.0);
                    worst = worst.max(r / scale);
                }
            }
        }
    }
    let mut prod_err: f64 = 0.0;
    for n in 1..=3 {
        let lm = SpectralMultiplier::new(MultiplierKind::L, n).unwrap();
        let q = hom_dim(n);
        for j in 0..=20 {
            let two_l = 2.0 / n as f64 * lm.eval(j, 0).unwrap();
            let prod: f64 = (0..=n).map(|l| two_l + l as f64).product();
            let exact = lambda_d(j, q, n).unwrap();
            prod_err = prod_err.max((prod - exact).abs() / exact.max(1.0));
        }
    }
    check(
        worst <= 1e-12 && prod_err <= 1e-12,
        format!("max scaled residual {worst:.2e}, product formula {prod_err:.2e}"),
    )
}

fn c6() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let rule = SigmaRule::new(n, 128).map_err(|e| e.to_string())?;
        for &d in &[hom_dim(n) / 2.0, 3.0] {
            for j in 0..=4 {
                for k in 0..=4 {
                    let (v, t) = orthogonality_check(j, k, d, n, &rule).map_err(|e| e.to_string())?;
                    worst = worst.max((v - t).abs() / (1.0 + t.abs()));
                }
            }
        }
    }
    check(worst <= 1e-6, format!("max deviation {worst:.2e}"))
}

fn c7() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let one = c(1.0, 0.0);
    let (mut e11, mut e12, mut e15s, mut e15h, mut ecoc): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 1..=2 {
        let q = hom_dim(n);
        for _ in 0..100 {
            let (u, v) = (sample::heis_point(&mut rng, n), sample::heis_point(&mut rng, n));
            let (zu, zv) = (cayley(&u), cayley(&v));
            let du = heis_dist(&u, &v).map_err(err)?;
            let fu = (1.0 + u.z.iter().map(|a| a.norm_sqr()).sum::<f64>()).powi(2) + u.t * u.t;
            let fv = (1.0 + v.z.iter().map(|a| a.norm_sqr()).sum::<f64>()).powi(2) + v.t * v.t;
            let lhs = (one - herm(&zu.zeta, &zv.zeta)).norm() / 2.0;
            e11 = e11.max(rel(lhs, du * du / (fu.sqrt() * fv.sqrt())));
            let rhs12 = du * (4.0 / fu).powf(0.25) * (4.0 / fv).powf(0.25);
            e12 = e12.max(rel(sphere_dist(&zu, &zv), rhs12));
        }
        for _ in 0..50 {
            let tau = sample::conformal_word(&mut rng, n, 4);
            let sigma = sample::conformal_word(&mut rng, n, 4);
            let (a, b) = (sample::sphere_point(&mut rng, n), sample::sphere_point(&mut rng, n));
            let (ta, ja) = tau.apply_with_jacobian(&a).map_err(err)?;
            let (tb, jb) = tau.apply_with_jacobian(&b).map_err(err)?;
            let expect = sphere_dist(&a, &b) * (ja * jb).powf(1.0 / (2.0 * q));
            e15s = e15s.max(rel(sphere_dist(&ta, &tb), expect));
            let (u, v) = (sample::heis_point(&mut rng, n), sample::heis_point(&mut rng, n));
            let (hu, jhu) = tau.apply_heis(&u).map_err(err)?;
            let (hv, jhv) = tau.apply_heis(&v).map_err(err)?;
            let expect = heis_dist(&u, &v).map_err(err)? * (jhu * jhv).powf(1.0 / (2.0 * q));
            e15h = e15h.max(rel(heis_dist(&hu, &hv).map_err(err)?, expect));
            let comp = sigma.then(&tau).map_err(err)?;
            let (sa, js) = sigma.apply_with_jacobian(&a).map_err(err)?;
            let jt = tau.jacobian(&sa).map_err(err)?;
            ecoc = ecoc.max(rel(comp.jacobian(&a).map_err(err)?, jt * js));
        }
    }
    // ∫ |J_τ| = ω_{2n+1}
    let rule = SphereRule::new(1, 48).map_err(err)?;
    let mut eint: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for _ in 0..10 {
        let tau = sample::conformal_word(&mut rng, 1, 2);
        let prof = fit_profile(&tau).map_err(err)?;
        if prof.omega.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() > 0.5 {
            continue;
        }
        let v = rule.integrate(|p| tau.jacobian(p).unwrap_or(f64::NAN)).map_err(err)?;
        eint = eint.max(rel(v, sphere_volume(1)));
    }
    check(
        e11 <= 1e-10 && e12 <= 1e-10 && e15s <= 1e-10 && e15h <= 1e-10 && ecoc <= 1e-10 && eint <= 1e-8,
        format!(
            "cayley distance {e11:.1e}, distance factorization {e12:.1e}, conformal distance sphere {e15s:.1e}, Heisenberg {e15h:.1e}, cocycle {ecoc:.1e}, ∫|J| {eint:.1e}"
        ),
    )
}

fn c8() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    let t = Instant::now();
    let graded = DiskRule::default_graded(1, 240, 96).map_err(err)?;
    // extremals
    let mut ext: f64 = 0.0;
    for &lam in &[0.5, 2.0, 5.0] {
        let s = (lam * lam - 1.0) / (lam * lam + 1.0);
        let f = log_jacobian_extremal(1, c(s, 0.0), 250).map_err(err)?;
        ext = ext.max(eval_j(&f, &graded).map_err(err)?.value.abs());
    }
    // invariance under the conformal action
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let polar = DiskRule::new(1, 120, 256).map_err(err)?;
    let mut inv: f64 = 0.0;
    for _ in 0..3 {
        let f = sample::zonal_pluri(&mut rng, 1, 6, 1.5);
        let tau = ConformalMap::new(
            1,
            vec![Generator::Dilation(1.4), Generator::Translation { z: vec![c(0.0, 0.0)], t: 0.3 }],
        )
        .map_err(err)?;
        let pushed = conformal_push_zonal(&f, &tau, &polar, 120, Some(1e-6)).map_err(err)?;
        inv = inv.max((eval_j(&pushed, &graded).map_err(err)?.value - eval_j(&f, &graded).map_err(err)?.value).abs());
    }
    // nonnegativity over random zonal F
    let fast = DiskRule::new(1, 64, 96).map_err(err)?;
    let mut min_j = f64::INFINITY;
    for _ in 0..1000 {
        let f = sample::zonal_pluri(&mut rng, 1, 8, 3.0);
        min_j = min_j.min(eval_j(&f, &fast).map_err(err)?.value);
    }
    // minimizer
    let init = sample::zonal_pluri(&mut rng, 1, 6, 1.0);
    let res = minimize_j(&init, &DiskRule::new(1, 48, 64).map_err(err)?, &MinimizeOptions::default()).map_err(err)?;
    let fit = fit_log_jacobian(&res.minimizer);
    let extremal = log_jacobian_extremal(1, fit.s, 96).map_err(err)?;
    let el = euler_lagrange_residual(&extremal, &DiskRule::new(1, 160, 320).map_err(err)?).map_err(err)?;
    let secs = t.elapsed().as_secs_f64();
    check(
        ext <= 1e-6 && inv <= 1e-6 && min_j >= -1e-6 && res.report.value.abs() <= 1e-4 && fit.relative_residual <= 1e-2 && el <= 1e-5 && secs < 300.0,
        format!(
            "extremals {ext:.1e}, invariance {inv:.1e}, min over 1000 F {min_j:.2e}, minimizer J {:.1e} (fit s = {:.3e}, rel resid {:.1e}, {} iters), EL {el:.1e}, {secs:.1}s",
            res.report.value,
            fit.s.norm(),
            fit.relative_residual,
            res.trace.len()
        ),
    )
}

fn c9() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    let rule = SphereRule::new(1, 16).map_err(err)?;
    let unit = eigen_aqprime_w(|_| 1.0, &rule, 4).map_err(err)?;
    let mult = unit.eigenvalues.iter().take_while(|l| (*l - 2.0).abs() <= 1e-8).count();
    let mult_ok = mult == 4 && unit.eigenvalues[4] > 2.5;
    // Hersch bound over random weights
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut min_hersch = f64::INFINITY;
    for _ in 0..50 {
        let w = sample::smooth_weight(&mut rng, 1, 0.6);
        let res = eigen_aqprime_w(|p| w.eval(p), &rule, 4).map_err(err)?;
        min_hersch = min_hersch.min(hersch_sum(&res));
    }
    // equality at a conformal Jacobian; invariance of the spectrum
    let fine = SphereRule::new(1, 24).map_err(err)?;
    let tau = ConformalMap::new(
        1,
        vec![
            Generator::Dilation(1.2),
            Generator::Translation { z: vec![c(0.1, -0.05)], t: 0.1 },
        ],
    )
    .map_err(err)?;
    let jw = eigen_aqprime_w(|p| tau.jacobian(p).unwrap(), &fine, 8).map_err(err)?;
    let eq = (hersch_sum(&jw) - 2.0).abs();
    let w = sample::smooth_weight(&mut rng, 1, 0.3);
    let base = eigen_aqprime_w(|p| w.eval(p), &fine, 8).map_err(err)?;
    let moved = eigen_aqprime_w(
        |p| {
            let (q, j) = tau.apply_with_jacobian(p).unwrap();
            w.eval(&q) * j
        },
        &fine,
        8,
    )
    .map_err(err)?;
    let inv = base.eigenvalues[..4]
        .iter()
        .zip(&moved.eigenvalues[..4])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        mult_ok && min_hersch >= 2.0 - 1e-6 && eq <= 1e-6 && inv <= 1e-5,
        format!(
            "λ'_1(1) = {:.10} (multiplicity {mult}), min Hersch sum {min_hersch:.6} ≥ 2, |sum - 2| at |J_τ| {eq:.1e}, invariance {inv:.1e}",
            unit.eigenvalues[0]
        ),
    )
}

fn c10() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    let rule = SphereRule::new(1, 32).map_err(err)?;
    let one = eval_log_hls(|_| 1.0, &rule, 16).map_err(err)?.gap.abs();
    let tau = ConformalMap::new(
        1,
        vec![Generator::Dilation(1.3), Generator::Translation { z: vec![c(0.1, 0.05)], t: -0.1 }],
    )
    .map_err(err)?;
    let jac = eval_log_hls(|p| tau.jacobian(p).unwrap(), &rule, 16).map_err(err)?.gap.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut min_gap = f64::INFINITY;
    for _ in 0..20 {
        let w = sample::smooth_weight(&mut rng, 1, 0.8);
        min_gap = min_gap.min(eval_log_hls(|p| w.eval(p), &rule, 16).map_err(err)?.gap);
    }
    // Heisenberg side: g = (G∘C)|J_C|
    let mut agree: f64 = 0.0;
    for _ in 0..10 {
        let w = sample::smooth_weight(&mut rng, 1, 0.8);
        let s = eval_log_hls(|p| w.eval(p), &rule, 16).map_err(err)?;
        let h = eval_log_hls_heisenberg(|u| w.eval(&cayley(u)) * jacobian_cayley(u), &rule, 16).map_err(err)?;
        agree = agree.max((s.gap - h.gap).abs());
    }
    let h1 = eval_log_hls_heisenberg(jacobian_cayley, &rule, 16).map_err(err)?;
    check(
        one <= 1e-5 && jac <= 1e-5 && min_gap > 0.0 && agree <= 1e-5 && h1.gap.abs() <= 1e-5,
        format!(
            "gap at 1 {one:.1e}, at |J_τ| {jac:.1e}, min gap over 20 G {min_gap:.3e}, sphere vs Heisenberg {agree:.1e} (gap at |J_C| {:.1e}, log 2 = {LN_2:.4})",
            h1.gap.abs()
        ),
    )
}

fn c11() -> Outcome {
    let err = |e: crsphere::Error| e.to_string();
    let rule = DiskRule::new(1, 64, 96).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = sample::zonal_pluri(&mut rng, 1, 5, 2.0);
        let g = gradient(&f, &rule).map_err(err)?;
        let x = to_real(&f);
        let h = 1e-5;
        let mut diff = 0.0;
        for k in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let jp = eval_j(&from_real(1, &xp).map_err(err)?, &rule).map_err(err)?.value;
            let jm = eval_j(&from_real(1, &xm).map_err(err)?, &rule).map_err(err)?.value;
            diff += ((jp - jm) / (2.0 * h) - g[k]).powi(2);
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(diff.sqrt() / gn.max(1e-12));
    }
    check(worst <= 1e-5, format!("max relative gradient error {worst:.2e}"))
}

fn c12() -> Outcome {
    let t = Instant::now();
    let ms = [4, 8, 16];
    let tables = sharpness_probe_multi(2.0, 1, &[1.0, 1.5], &ms, &ProbeOptions::default()).map_err(|e| e.to_string())?;
    let col = |i: usize| tables[i].rows.iter().map(|r| r.integral).collect::<Vec<_>>();
    let (a, b) = (col(0), col(1));
    let bounded = a.iter().all(|v| v.is_finite()) && a[2] <= 2.0 * a[0];
    let growth = b[2] / b[0];
    check(
        bounded && growth >= 10.0,
        format!(
            "factor 1.0: {:.4e} {:.4e} {:.4e}; factor 1.5: {:.4e} {:.4e} {:.4e} (growth {growth:.2}x, needs 10x); {:.0}s",
            a[0],
            a[1],
            a[2],
            b[0],
            b[1],
            b[2],
            t.elapsed().as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome, bool); 12] = [
        (1, "sharp sublaplacian constants", c1, true),
        (2, "quadrature vs series constant", c2, true),
        (3, "pluriharmonic and Hardy constants", c3, true),
        (4, "fundamental solution", c4, true),
        (5, "even-order factorization", c5, true),
        (6, "orthogonality of g_k,d", c6, true),
        (7, "conformal machinery", c7, true),
        (8, "Beckner-Onofri functional", c8, true),
        (9, "weighted eigenvalues", c9, true),
        (10, "log-HLS", c10, true),
        (11, "gradient check", c11, true),
        (12, "sharpness probe", c12, false),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut gating_failures = 0;
    for (id, name, run, gating) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        let note = if !gating && out.is_err() { " (non-gating)" } else { "" };
        println!("criterion {id:>2} {tag}{note} [{secs:.1}s] {name}: {detail}");
        if out.is_err() && gating {
            gating_failures += 1;
        }
    }
    if gating_failures > 0 {
        std::process::exit(1);
    }
}
