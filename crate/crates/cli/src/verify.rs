//! Seeded invariant suites behind `verify`.

use crate::commands::{self, rng, CmdResult, Weight};
use crate::report::{Check, Provenance, Report, Row};
use crate::{CmdError, RunConfig, Suite, WeightSpec};
use crsphere::functionals::{
    eigen_aqprime_w, eval_j, eval_log_hls, eval_log_hls_heisenberg, from_real, gradient, hersch_sum,
    log_jacobian_extremal, conformal_push_zonal, to_real,
};
use crsphere::geometry::*;
use crsphere::harmonics::zonal_phi;
use crsphere::kernels::orthogonality_check;
use crsphere::quadrature::{DiskRule, SigmaRule, SphereRule};
use crsphere::special::{factorial, pochhammer};
use crsphere::spectral::*;
use crsphere::{hom_dim, sample, sphere_volume, C64};
use nalgebra::{DMatrix, DVector};
use serde_json::json;
use std::f64::consts::PI;
use std::time::Instant;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn at_most(name: &str, v: f64, bound: f64, prov: Provenance) -> Row {
    Row::new(name, v, Check::AtMost { bound }, prov)
}

pub fn run(cfg: &RunConfig, suite: Suite) -> CmdResult {
    let mut rep = Report::new("verify", cfg.echo(&[("suite", json!(format!("{suite:?}").to_lowercase()))]));
    let all = suite == Suite::All;
    let parts: [(Suite, &str, fn(&RunConfig) -> Result<Vec<Row>, CmdError>); 5] = [
        (Suite::Geometry, "geometry", geometry),
        (Suite::Spectral, "spectral", spectral),
        (Suite::Kernels, "kernels", kernels),
        (Suite::Adams, "adams", adams),
        (Suite::Functionals, "functionals", functionals),
    ];
    for (s, label, f) in parts {
        if all || s == suite {
            let t = Instant::now();
            for mut row in f(cfg)? {
                row.name = format!("{label}.{}", row.name);
                rep.rows.push(row);
            }
            rep.timings.push((label.into(), t.elapsed().as_secs_f64()));
        }
    }
    Ok(rep)
}

/// Cayley distance identities, conformal distortion, Jacobian cocycle and total mass.
fn geometry(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let n = cfg.n;
    let q = hom_dim(n);
    let mut rng = rng(cfg);
    let one = C64::new(1.0, 0.0);
    let (mut e_cay, mut e_fac, mut e_round) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let (u, v) = (sample::heis_point(&mut rng, n), sample::heis_point(&mut rng, n));
        let (zu, zv) = (cayley(&u), cayley(&v));
        let du = heis_dist(&u, &v)?;
        let f = |p: &HeisenbergPoint| (1.0 + p.z.iter().map(|a| a.norm_sqr()).sum::<f64>()).powi(2) + p.t * p.t;
        let (fu, fv) = (f(&u), f(&v));
        let lhs = (one - herm(&zu.zeta, &zv.zeta)).norm() / 2.0;
        e_cay = e_cay.max(rel(lhs, du * du / (fu.sqrt() * fv.sqrt())));
        e_fac = e_fac.max(rel(sphere_dist(&zu, &zv), du * (4.0 / fu).powf(0.25) * (4.0 / fv).powf(0.25)));
        let back = cayley_inv(&zu)?;
        let dz = back.z.iter().zip(&u.z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        e_round = e_round.max(dz.max((back.t - u.t).abs()) / (1.0 + u.norm()));
    }
    let (mut e_sph, mut e_heis, mut e_coc) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let tau = sample::conformal_word(&mut rng, n, 4);
        let sigma = sample::conformal_word(&mut rng, n, 4);
        let (a, b) = (sample::sphere_point(&mut rng, n), sample::sphere_point(&mut rng, n));
        let (ta, ja) = tau.apply_with_jacobian(&a)?;
        let (tb, jb) = tau.apply_with_jacobian(&b)?;
        e_sph = e_sph.max(rel(sphere_dist(&ta, &tb), sphere_dist(&a, &b) * (ja * jb).powf(0.5 / q)));
        let (u, v) = (sample::heis_point(&mut rng, n), sample::heis_point(&mut rng, n));
        let (hu, jhu) = tau.apply_heis(&u)?;
        let (hv, jhv) = tau.apply_heis(&v)?;
        e_heis = e_heis.max(rel(heis_dist(&hu, &hv)?, heis_dist(&u, &v)? * (jhu * jhv).powf(0.5 / q)));
        let comp = sigma.then(&tau)?;
        let (sa, js) = sigma.apply_with_jacobian(&a)?;
        e_coc = e_coc.max(rel(comp.jacobian(&a)?, tau.jacobian(&sa)? * js));
    }
    let tol = cfg.tol.max(1e-10);
    let mut rows = vec![
        at_most("cayley_distance", e_cay, tol, Provenance::Paper),
        at_most("distance_factorization", e_fac, tol, Provenance::Paper),
        at_most("cayley_round_trip", e_round, 1e-12, Provenance::Trivial),
        at_most("conformal_distance_sphere", e_sph, tol, Provenance::Paper),
        at_most("conformal_distance_heisenberg", e_heis, tol, Provenance::Paper),
        at_most("jacobian_cocycle", e_coc, tol, Provenance::Derived),
    ];
    if n <= 2 {
        let rule = SphereRule::new(n, cfg.quad_sphere.unwrap_or(if n == 1 { 48 } else { 24 }))?;
        let mut e_int = 0.0f64;
        for _ in 0..10 {
            let tau = sample::conformal_word(&mut rng, n, 2);
            let prof = fit_profile(&tau)?;
            // strongly concentrated Jacobians need a finer rule
            if prof.omega.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() > 0.5 {
                continue;
            }
            let v = rule.integrate(|p| tau.jacobian(p).unwrap_or(f64::NAN))?;
            e_int = e_int.max(rel(v, sphere_volume(n)));
        }
        rows.push(at_most("jacobian_total_mass", e_int, 1e-6, Provenance::Paper));
    } else {
        rows.push(Row::skipped("jacobian_total_mass"));
    }
    Ok(rows)
}

/// Rule on `S^3` concentrated near `U N`.
fn sphere_rule_about(u: &DMatrix<C64>, n_phi: usize) -> Result<Vec<(SpherePoint, f64)>, CmdError> {
    let disk = DiskRule::default_graded(1, 320, 40)?;
    let mut out = vec![];
    for (w, wt) in disk.nodes.iter().zip(&disk.weights) {
        let r = (1.0 - w.norm_sqr()).max(0.0).sqrt();
        for a in 0..n_phi {
            let phi = 2.0 * PI * (a as f64 + 0.5) / n_phi as f64;
            let eta = u * DVector::from_vec(vec![C64::from_polar(r, phi), *w]);
            out.push((SpherePoint::new_unchecked(eta.iter().copied().collect()), wt / n_phi as f64));
        }
    }
    Ok(out)
}

/// Factorization, product formula, fundamental solution and its normalization.
fn spectral(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let n = cfg.n;
    let q = hom_dim(n);
    let mut fac = 0.0f64;
    for d in [4usize, 6] {
        for j in 0..=5 {
            for k in 0..=5 {
                let r = factorization_check(d, n, j, k)?;
                let scale = (lambda_d_ext(j, d as f64, n)? * lambda_d_ext(k, d as f64, n)?).abs().max(1.0);
                fac = fac.max(r / scale);
            }
        }
    }
    let lm = SpectralMultiplier::new(MultiplierKind::L, n)?;
    let mut prod = 0.0f64;
    for j in 0..=20 {
        let two_l = 2.0 / n as f64 * lm.eval(j, 0)?;
        let p: f64 = (0..=n).map(|l| two_l + l as f64).product();
        let exact = lambda_d(j, q, n)?;
        prod = prod.max((p - exact).abs() / exact.max(1.0));
    }
    let mut rows = vec![
        at_most("factorization_residual", fac, 1e-12, Provenance::Paper),
        at_most("product_formula", prod, 1e-12, Provenance::Paper),
    ];
    if n == 1 {
        let m = cfg.jmax.unwrap_or(200);
        let mut worst = 0.0f64;
        for d in [1.5, 2.0, 3.0] {
            for ri in 0..8 {
                let rho = 0.3 + 1.7 * ri as f64 / 7.0;
                for k in 0..12 {
                    let w = C64::new(1.0, 0.0) - C64::from_polar(rho, PI * (k as f64 + 0.5) / 12.0 - PI / 2.0);
                    if w.norm() > 1.0 {
                        continue;
                    }
                    worst = worst.max(rel(fundamental_series_filtered(d, w, m, n)?, closed_kernel(d, w, n)?));
                }
            }
        }
        rows.push(at_most("fundamental_series", worst, 1e-3, Provenance::Derived));
        let rule = DiskRule::default_graded(1, 480, 48)?;
        let v = rule.integrate(|w| (2.0 * (C64::new(1.0, 0.0) - w).norm()).powf(-1.0))?;
        rows.push(at_most("normalization_integral", rel(v, normalization_integral(2.0, 1)?), 1e-6, Provenance::Derived));
        rows.push(at_most("zonal_kernel_recursion", kernel_recursion(cfg)?, 1e-4, Provenance::Derived));
    } else {
        for name in ["fundamental_series", "normalization_integral", "zonal_kernel_recursion"] {
            rows.push(Row::skipped(name));
        }
    }
    Ok(rows)
}

/// The kernel `c_2 |1 - ζ·η̄|^{-1}` of `A_2^{-1}` on `S^3` acts on zonal harmonics by `1/(λ_j λ_k)`.
fn kernel_recursion(cfg: &RunConfig) -> Result<f64, CmdError> {
    let mut rng = rng(cfg);
    let cd = c_d(2.0, 1)?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let zeta = sample::sphere_point(&mut rng, 1);
        let (a, b) = (zeta.zeta[0], zeta.zeta[1]);
        let u = DMatrix::from_row_slice(2, 2, &[b.conj(), a, -a.conj(), b]);
        let rule = sphere_rule_about(&u, 48)?;
        for (j, k) in [(0usize, 0usize), (1, 0), (1, 1), (2, 1)] {
            let integral: C64 = rule
                .iter()
                .map(|(eta, wt)| zonal_phi(j, k, eta.last(), 1) * (cd * sphere_dist(&zeta, eta).powf(-2.0) * wt))
                .sum();
            let expect = zonal_phi(j, k, zeta.last(), 1) / (lambda_d(j, 2.0, 1)? * lambda_d(k, 2.0, 1)?);
            let scale = zonal_phi(j, k, C64::new(1.0, 0.0), 1).norm();
            worst = worst.max((integral - expect).norm() / scale);
        }
    }
    Ok(worst)
}

/// Orthogonality structure of the angular modes.
fn kernels(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let n = cfg.n;
    let rule = SigmaRule::new(n, cfg.quad_sigma.unwrap_or(128))?;
    let mut worst = 0.0f64;
    for d in [hom_dim(n) / 2.0, 3.0] {
        for j in 0..=4 {
            for k in 0..=4 {
                let (v, t) = orthogonality_check(j, k, d, n, &rule)?;
                worst = worst.max((v - t).abs() / (1.0 + t.abs()));
            }
        }
    }
    Ok(vec![at_most("mode_orthogonality", worst, 1e-6, Provenance::Paper)])
}

fn adams(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let rep = commands::constants(cfg)?;
    Ok(rep.rows.into_iter().filter(|r| r.name.starts_with("A_") || r.name == "k_n").collect())
}

/// Extremals, conformal invariance, nonnegativity and the gradient of the
/// Beckner-Onofri functional; first eigenvalues; log-HLS gaps.
fn functionals(cfg: &RunConfig) -> Result<Vec<Row>, CmdError> {
    let n = cfg.n;
    let mut rng = rng(cfg);
    let mut rows = Vec::new();

    let graded = DiskRule::default_graded(n, 240, 96)?;
    let mut ext = 0.0f64;
    for lam in [0.5, 2.0, 5.0] {
        let s = (lam * lam - 1.0) / (lam * lam + 1.0);
        let f = log_jacobian_extremal(n, C64::new(s, 0.0), 250)?;
        ext = ext.max(eval_j(&f, &graded)?.value.abs());
    }
    rows.push(at_most("j_at_extremals", ext, 1e-6, Provenance::Paper));

    if n == 1 {
        let polar = DiskRule::new(n, 120, 256)?;
        let tau = ConformalMap::new(
            n,
            vec![Generator::Dilation(1.4), Generator::Translation { z: vec![C64::new(0.0, 0.0); n], t: 0.3 }],
        )?;
        let mut inv = 0.0f64;
        for _ in 0..2 {
            let f = sample::zonal_pluri(&mut rng, n, 6, 1.5);
            let pushed = conformal_push_zonal(&f, &tau, &polar, 120, Some(1e-6))?;
            inv = inv.max((eval_j(&pushed, &graded)?.value - eval_j(&f, &graded)?.value).abs());
        }
        rows.push(at_most("j_conformal_invariance", inv, 1e-6, Provenance::Paper));
    } else {
        rows.push(Row::skipped("j_conformal_invariance"));
    }

    let fast = DiskRule::new(n, 64, 96)?;
    let mut min_j = f64::INFINITY;
    for _ in 0..200 {
        let f = sample::zonal_pluri(&mut rng, n, 8, 3.0);
        min_j = min_j.min(eval_j(&f, &fast)?.value);
    }
    rows.push(Row::new("j_min_random", min_j, Check::AtLeast { bound: 0.0, tol: 1e-6 }, Provenance::Paper));

    let mut grad = 0.0f64;
    for _ in 0..5 {
        let f = sample::zonal_pluri(&mut rng, n, 5, 2.0);
        let g = gradient(&f, &fast)?;
        let x = to_real(&f);
        let h = 1e-5;
        let mut diff = 0.0;
        for k in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let jp = eval_j(&from_real(n, &xp)?, &fast)?.value;
            let jm = eval_j(&from_real(n, &xm)?, &fast)?.value;
            diff += ((jp - jm) / (2.0 * h) - g[k]).powi(2);
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        grad = grad.max(diff.sqrt() / gn.max(1e-12));
    }
    rows.push(at_most("gradient_vs_finite_differences", grad, 1e-5, Provenance::Derived));

    if n <= 2 {
        let m = cfg.quad_sphere.unwrap_or(if n == 1 { 16 } else { 12 });
        let rule = SphereRule::new(n, m)?;
        let unit = eigen_aqprime_w(|_| 1.0, &rule, cfg.jmax.unwrap_or(4).min(if n == 1 { 8 } else { 4 }))?;
        let q = 2 * n + 2;
        let first = factorial(n + 1);
        let mult = unit.eigenvalues.iter().take_while(|l| (*l - first).abs() <= 1e-8 * first).count();
        rows.push(Row::new("eigen_first_multiplicity", mult as f64, Check::Close { target: q as f64, tol: 0.0 }, Provenance::Paper));
        let next = pochhammer(2.0, n + 1);
        rows.push(Row::new(
            "eigen_next_level",
            unit.eigenvalues.get(q).copied().unwrap_or(f64::NAN),
            Check::Close { target: next, tol: 1e-8 },
            Provenance::Paper,
        ));
        let mut min_h = f64::INFINITY;
        for _ in 0..10 {
            let w = Weight::new(WeightSpec::Random(0.6), n, &mut rng)?;
            min_h = min_h.min(hersch_sum(&eigen_aqprime_w(|p| w.eval(p), &rule, 4.min(cfg.jmax.unwrap_or(4)))?));
        }
        rows.push(Row::new(
            "hersch_lower_bound",
            min_h,
            Check::AtLeast { bound: 2.0 / factorial(n), tol: 1e-6 },
            Provenance::Paper,
        ));

        let hls_rule = SphereRule::new(n, cfg.quad_sphere.unwrap_or(if n == 1 { 32 } else { 16 }))?;
        let jh = if n == 1 { 16 } else { 8 };
        let gap1 = eval_log_hls(|_| 1.0, &hls_rule, jh)?.gap;
        rows.push(Row::new("hls_gap_at_one", gap1, Check::Close { target: 0.0, tol: 1e-5 }, Provenance::Paper));
        let w = Weight::new(WeightSpec::Random(0.8), n, &mut rng)?;
        let s = eval_log_hls(|p| w.eval(p), &hls_rule, jh)?;
        rows.push(Row::new("hls_gap_random", s.gap, Check::AtLeast { bound: 0.0, tol: 0.0 }, Provenance::Paper));
        let h = eval_log_hls_heisenberg(|u| w.eval(&cayley(u)) * jacobian_cayley(u), &hls_rule, jh)?;
        rows.push(Row::new("hls_sphere_vs_heisenberg", h.gap, Check::Close { target: s.gap, tol: 1e-5 }, Provenance::Paper));
    } else {
        for name in [
            "eigen_first_multiplicity",
            "eigen_next_level",
            "hersch_lower_bound",
            "hls_gap_at_one",
            "hls_gap_random",
            "hls_sphere_vs_heisenberg",
        ] {
            rows.push(Row::skipped(name));
        }
    }
    Ok(rows)
}
