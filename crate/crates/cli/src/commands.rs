//! `constants`, `minimize`, `probe`, `hls` and `eigen`.

use crate::report::{fmt_num, Check, Provenance, Report, Row, Table};
use crate::{CmdError, RunConfig, WeightSpec};
use crsphere::adams::{
    a_n_lambda, adams_from_profile, adams_lab, adams_sublap_series, k_n, sharpness_probe_multi, ProbeOptions,
};
use crsphere::functionals::{
    euler_lagrange_residual, eval_log_hls, eval_log_hls_heisenberg, eval_log_hls_spectral, fit_log_jacobian,
    eigen_aqprime_w, hersch_sum, log_jacobian_extremal, minimize_j, MinimizeOptions, SmoothWeight,
};
use crsphere::geometry::{cayley, jacobian_cayley, JacobianProfile, SpherePoint};
use crsphere::kernels::ThetaKernel;
use crsphere::quadrature::{DiskRule, SigmaRule, SphereRule};
use crsphere::special::factorial;
use crsphere::spectral::{c_d, heisenberg_c_d};
use crsphere::{hom_dim, sample, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;
use std::time::Instant;

pub type CmdResult = Result<Report, CmdError>;

pub fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

/// Exact `A_{Q/2}` for the conformal sublaplacian, where known in closed form.
pub fn known_sublap_constant(n: usize) -> Option<f64> {
    match n {
        1 => Some(4.0),
        2 => Some(18.0 * PI),
        3 => Some(192.0 * PI * PI / (12.0 - PI * PI)),
        _ => None,
    }
}

/// Default sphere-rule size for the eigen and log-HLS commands.
fn sphere_size(cfg: &RunConfig, n1: usize, n2: usize) -> usize {
    cfg.quad_sphere.unwrap_or(if cfg.n == 1 { n1 } else { n2 })
}

/// A weight evaluated on the sphere, plus whether it is an extremal (constant or conformal Jacobian).
pub struct Weight {
    pub extremal: bool,
    eval: Box<dyn Fn(&SpherePoint) -> f64 + Sync>,
}

impl Weight {
    pub fn new(spec: WeightSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Self, CmdError> {
        Ok(match spec {
            WeightSpec::One => Weight { extremal: true, eval: Box::new(|_| 1.0) },
            WeightSpec::Jacobian(s) => {
                let p = JacobianProfile::axial(n, C64::new(s, 0.0))?;
                Weight { extremal: true, eval: Box::new(move |z| p.eval(z)) }
            }
            WeightSpec::Random(amp) => {
                let w: SmoothWeight = sample::smooth_weight(rng, n, amp);
                Weight { extremal: amp == 0.0, eval: Box::new(move |z| w.eval(z)) }
            }
        })
    }

    pub fn eval(&self, z: &SpherePoint) -> f64 {
        (self.eval)(z)
    }
}

pub fn constants(cfg: &RunConfig) -> CmdResult {
    let n = cfg.n;
    let q = hom_dim(n);
    let d = cfg.d.unwrap_or(q / 2.0);
    let a = cfg.a.unwrap_or(1.0);
    let sigma_panels = cfg.quad_sigma.unwrap_or(32);
    let mut rep = Report::new(
        "constants",
        cfg.echo(&[("d_effective", json!(d)), ("a_effective", json!(a)), ("quad_sigma_effective", json!(sigma_panels))]),
    );
    let t = Instant::now();

    let cd = c_d(d, n)?;
    let cd_check = if n == 1 && d == 2.0 {
        Row::new("c_d", cd, Check::Close { target: 1.0 / PI, tol: 1e-12 }, Provenance::Paper)
    } else {
        Row::info("c_d", cd)
    };
    rep.rows.push(cd_check);
    rep.rows.push(Row::new("C_d", heisenberg_c_d(d, n)?, Check::Close { target: cd / 2.0, tol: 1e-15 }, Provenance::Trivial));

    let series = adams_sublap_series(n)?;
    rep.rows.push(match known_sublap_constant(n) {
        Some(v) => Row::new("A_sublap_Q2", series.value, Check::Close { target: v, tol: 1e-8 }, Provenance::Paper),
        None => Row::info("A_sublap_Q2", series.value),
    });
    rep.rows.push(Row::new("A_sublap_Q2_series_error_bound", series.error_bound, Check::AtMost { bound: 1e-8 * series.value }, Provenance::Derived));

    let graded = SigmaRule::graded(n, sigma_panels, 12)?;
    let quad = adams_from_profile(&ThetaKernel::Full { d: q / 2.0, n }, &graded)?;
    rep.rows.push(Row::new(
        "A_sublap_Q2_quadrature",
        quad.value,
        Check::Close { target: series.value, tol: 1e-4 },
        Provenance::Derived,
    ));

    let plain = SigmaRule::new(n, 32)?;
    let base = (n + 1) as f64 * PI.powi(n as i32 + 1);
    let pluri = adams_from_profile(&ThetaKernel::Pluri { d: q / 2.0, n }, &plain)?;
    rep.rows.push(Row::new("A_pluri_Q2", pluri.value, Check::Close { target: base, tol: 1e-8 }, Provenance::Paper));
    let hardy = adams_from_profile(&ThetaKernel::Hardy { d: q / 2.0, n }, &plain)?;
    rep.rows.push(Row::new("A_hardy_Q2", hardy.value, Check::Close { target: 2.0 * base, tol: 1e-8 }, Provenance::Paper));

    if (d - q / 2.0).abs() > 0.0 {
        let ad = adams_from_profile(&ThetaKernel::Full { d, n }, &graded)?;
        rep.rows.push(Row::info("A_d_quadrature", ad.value));
    }

    let lab = adams_lab(a, cfg.b, n)?;
    rep.rows.push(Row::info("A_lab", lab.value));
    let lab_unit = adams_lab(1.0, 1.0, n)?;
    rep.rows.push(Row::new(
        "A_lab_unit_reduces_to_sublap",
        lab_unit.value,
        Check::Close { target: series.value, tol: 1e-10 },
        Provenance::Derived,
    ));
    let anl = a_n_lambda(cfg.lambda, n)?;
    rep.rows.push(Row::info("A_n_lambda", anl));
    let lab_lambda = adams_lab(2.0 / n as f64, cfg.lambda.powf(2.0 / q), n)?;
    rep.rows.push(Row::new(
        "A_n_lambda_from_A_lab",
        crsphere::sphere_volume(n) / (4.0 * lab_lambda.value),
        Check::Close { target: anl, tol: 1e-12 },
        Provenance::Derived,
    ));
    rep.rows.push(Row::info("k_n", k_n(n)?));
    rep.timings.push(("constants".into(), t.elapsed().as_secs_f64()));
    Ok(rep)
}

pub fn minimize(cfg: &RunConfig) -> CmdResult {
    let n = cfg.n;
    let n_r = cfg.quad_disk.unwrap_or(48);
    let el_j = cfg.jmax.unwrap_or(96);
    let mut rep = Report::new(
        "minimize",
        cfg.echo(&[("quad_disk_effective", json!(n_r)), ("jmax_effective", json!(el_j))]),
    );
    let rule = DiskRule::new(n, n_r, (4 * n_r / 3).max(4 * cfg.degree + 8))?;
    let mut rng = rng(cfg);
    let init = sample::zonal_pluri(&mut rng, n, cfg.degree, 1.0);
    let opts = MinimizeOptions { gtol: cfg.tol, ..MinimizeOptions::default() };
    let t = Instant::now();
    let res = minimize_j(&init, &rule, &opts)?;
    rep.timings.push(("minimize".into(), t.elapsed().as_secs_f64()));

    rep.rows.push(Row::new("J_final", res.report.value, Check::Close { target: 0.0, tol: 1e-4 }, Provenance::Paper));
    rep.rows.push(Row::info("grad_norm", res.grad_norm));
    rep.rows.push(Row::info("iterations", res.trace.len() as f64));
    rep.rows.push(Row::info("converged", if res.converged { 1.0 } else { 0.0 }));
    let fit = fit_log_jacobian(&res.minimizer);
    rep.rows.push(Row::new("fit_relative_residual", fit.relative_residual, Check::AtMost { bound: 1e-2 }, Provenance::Derived));
    rep.rows.push(Row::info("fit_s_abs", fit.s.norm()));
    let t = Instant::now();
    let extremal = log_jacobian_extremal(n, fit.s, el_j)?;
    let el = euler_lagrange_residual(&extremal, &DiskRule::new(n, 160, 320)?)?;
    rep.rows.push(Row::new("euler_lagrange_residual_fitted", el, Check::AtMost { bound: 1e-5 }, Provenance::Derived));
    rep.timings.push(("euler_lagrange".into(), t.elapsed().as_secs_f64()));

    let mut trace = Table::new("trace", &["iter", "value", "grad_norm", "step", "renormalized"]);
    for r in &res.trace {
        trace.push_mixed(&[r.iter], &[r.value, r.grad_norm, r.step]);
        trace.rows.last_mut().expect("row pushed").push(r.renormalized.to_string());
    }
    rep.tables.push(trace);
    Ok(rep)
}

pub fn probe(cfg: &RunConfig) -> CmdResult {
    let n = cfg.n;
    let d = cfg.d.unwrap_or(2.0);
    let mut rep = Report::new("probe", cfg.echo(&[("d_effective", json!(d))]));
    let opts = ProbeOptions { jmax: cfg.jmax, ..ProbeOptions::default() };
    let t = Instant::now();
    let tables = sharpness_probe_multi(d, n, &cfg.factor, &cfg.m, &opts)?;
    rep.timings.push(("probe".into(), t.elapsed().as_secs_f64()));
    let mut out = Table::new("probe", &["factor", "m", "jmax", "norm_p", "max_tf", "integral"]);
    for tab in &tables {
        for r in &tab.rows {
            out.push(vec![tab.factor.to_string(), r.m.to_string(), r.jmax.to_string()]);
            out.rows.last_mut().expect("row pushed").extend([r.norm_p, r.max_tf, r.integral].map(fmt_num));
            rep.rows.push(Row::new(
                format!("integral[factor={};m={}]", tab.factor, r.m),
                r.integral,
                Check::AtMost { bound: f64::INFINITY },
                Provenance::Derived,
            ));
        }
        let (first, last) = match (tab.rows.first(), tab.rows.last()) {
            (Some(a), Some(b)) if tab.rows.len() > 1 => (a.integral, b.integral),
            _ => continue,
        };
        let ratio = last / first;
        // factor ≤ 1 stays bounded; factor > 1 should blow up
        let row = if tab.factor <= 1.0 {
            Row::new(format!("growth[factor={}]", tab.factor), ratio, Check::AtMost { bound: 2.0 }, Provenance::Derived)
        } else {
            Row::new(format!("growth[factor={}]", tab.factor), ratio, Check::AtLeast { bound: 10.0, tol: 0.0 }, Provenance::Derived)
        };
        rep.rows.push(row);
    }
    rep.tables.push(out);
    Ok(rep)
}

pub fn hls(cfg: &RunConfig) -> CmdResult {
    let n = cfg.n;
    let m = sphere_size(cfg, 32, 16);
    let jmax = cfg.jmax.unwrap_or(16);
    let mut rep = Report::new(
        "hls",
        cfg.echo(&[("quad_sphere_effective", json!(m)), ("jmax_effective", json!(jmax))]),
    );
    let rule = SphereRule::new(n, m)?;
    let mut rng = rng(cfg);
    let g = Weight::new(cfg.w, n, &mut rng)?;
    let t = Instant::now();
    let s = eval_log_hls(|p| g.eval(p), &rule, jmax)?;
    let spec = eval_log_hls_spectral(|p| g.eval(p), &rule, jmax)?;
    let h = eval_log_hls_heisenberg(|u| g.eval(&cayley(u)) * jacobian_cayley(u), &rule, jmax)?;
    rep.timings.push(("hls".into(), t.elapsed().as_secs_f64()));
    rep.rows.push(Row::info("entropy", s.entropy));
    rep.rows.push(Row::info("energy", s.energy));
    rep.rows.push(if g.extremal {
        Row::new("gap", s.gap, Check::Close { target: 0.0, tol: 1e-5 }, Provenance::Paper)
    } else {
        Row::new("gap", s.gap, Check::AtLeast { bound: 0.0, tol: 0.0 }, Provenance::Paper)
    });
    rep.rows.push(Row::new("gap_spectral_route", spec.gap, Check::Close { target: s.gap, tol: 1e-10 }, Provenance::Derived));
    rep.rows.push(Row::new("gap_heisenberg", h.gap, Check::Close { target: s.gap, tol: 1e-5 }, Provenance::Paper));
    Ok(rep)
}

pub fn eigen(cfg: &RunConfig) -> CmdResult {
    let n = cfg.n;
    let m = sphere_size(cfg, 40, 12);
    let jmax = cfg.jmax.unwrap_or(if n == 1 { 12 } else { 4 });
    let mut rep = Report::new(
        "eigen",
        cfg.echo(&[("quad_sphere_effective", json!(m)), ("jmax_effective", json!(jmax))]),
    );
    let rule = SphereRule::new(n, m)?;
    let mut rng = rng(cfg);
    let w = Weight::new(cfg.w, n, &mut rng)?;
    let t = Instant::now();
    let res = eigen_aqprime_w(|p| w.eval(p), &rule, jmax)?;
    rep.timings.push(("eigen".into(), t.elapsed().as_secs_f64()));
    let q = 2 * n + 2;
    let first = factorial(n + 1);
    for (k, l) in res.eigenvalues.iter().take(q).enumerate() {
        let name = format!("lambda_prime_{}", k + 1);
        rep.rows.push(if cfg.w == WeightSpec::One {
            Row::new(name, *l, Check::Close { target: first, tol: 1e-8 }, Provenance::Paper)
        } else {
            Row::info(name, *l)
        });
    }
    let bound = 2.0 / factorial(n);
    let hs = hersch_sum(&res);
    rep.rows.push(if w.extremal {
        Row::new("hersch_sum", hs, Check::Close { target: bound, tol: 1e-6 }, Provenance::Paper)
    } else {
        Row::new("hersch_sum", hs, Check::AtLeast { bound, tol: 1e-6 }, Provenance::Paper)
    });
    rep.rows.push(Row::info("gram_condition", res.gram_condition));
    rep.rows.push(Row::new("orthogonality_defect", res.orthogonality_defect, Check::AtMost { bound: 1e-8 }, Provenance::Derived));
    let mut tab = Table::new("eigenvalues", &["index", "value"]);
    for (k, l) in res.eigenvalues.iter().enumerate() {
        tab.push_mixed(&[k + 1], &[*l]);
    }
    rep.tables.push(tab);
    Ok(rep)
}
