//! The Beckner-Onofri functional `𝒥` on real pluriharmonic functions, the
//! conformal action `F ↦ F∘τ + log|J_τ|`, the center-of-mass normalization,
//! the log-HLS functionals and the weighted eigenvalue problem for `𝒜'_Q`.
//!
//! Averages `⨍` are taken with respect to `dζ / ω_{2n+1}`.

use crate::geometry::{
    cayley_inv, jacobian_cayley, ConformalMap, Generator, HeisenbergPoint, JacobianProfile, SpherePoint,
};
use crate::harmonics::{log_jacobian_pluri, nu, pluri_project, ZonalPluriharmonic};
use crate::quadrature::{DiskRule, SphereRule};
use crate::special::{factorial, pochhammer};
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Eigenvalue `j (j+1) ... (j+n)` of `𝒜'_Q` on `H_{j0}` and `H_{0j}`.
pub fn aq_prime_eigenvalue(j: usize, n: usize) -> f64 {
    if j == 0 {
        0.0
    } else {
        pochhammer(j as f64, n + 1)
    }
}

/// The point `(√(1-|w|²), 0, ..., 0, w)`; functions of `ζ_{n+1}` and maps
/// commuting with `U(n)` only see `w`.
pub fn zonal_point(n: usize, w: C64) -> SpherePoint {
    let mut zeta = vec![C64::new(0.0, 0.0); n + 1];
    zeta[0] = C64::new((1.0 - w.norm_sqr()).max(0.0).sqrt(), 0.0);
    zeta[n] = w;
    SpherePoint::new_unchecked(zeta)
}

fn check_dim(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<()> {
    if f.n != rule.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: rule.n });
    }
    Ok(())
}

/// `log ⨍ e^v` from samples, shifted by the maximum to avoid overflow.
fn log_mean_exp(vals: &[f64], weights: &[f64], omega: f64) -> Result<f64> {
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return Err(Error::NonFinite("exponential average".into()));
    }
    let s: f64 = vals.iter().zip(weights).map(|(v, w)| w * (v - mx).exp()).sum();
    Ok((s / omega).ln() + mx)
}

fn samples(f: &ZonalPluriharmonic, rule: &DiskRule) -> Vec<f64> {
    rule.nodes.par_iter().map(|w| f.eval_w(*w)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub value: f64,
    /// `(1/(2(n+1)!)) ⨍ F 𝒜'_Q F`.
    pub quadratic_term: f64,
    /// `⨍ F`.
    pub mean_term: f64,
    /// `log ⨍ e^F`.
    pub log_exp_term: f64,
    pub nodes: usize,
}

/// `(1/(2(n+1)!)) ⨍ F 𝒜'_Q F` from the coefficients.
pub fn quadratic_term(f: &ZonalPluriharmonic) -> f64 {
    let n = f.n;
    let s: f64 = f
        .a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, a)| aq_prime_eigenvalue(j, n) * a.norm_sqr() * nu(j, n) / 2.0)
        .sum();
    s / (2.0 * factorial(n + 1) * sphere_volume(n))
}

/// `𝒥[F] = (1/(2(n+1)!)) ⨍ F 𝒜'_Q F + ⨍ F - log ⨍ e^F`.
pub fn eval_j(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<FunctionalReport> {
    check_dim(f, rule)?;
    let quadratic_term = quadratic_term(f);
    let mean_term = f.mean();
    let log_exp_term = log_mean_exp(&samples(f, rule), &rule.weights, sphere_volume(f.n))?;
    Ok(FunctionalReport {
        value: quadratic_term + mean_term - log_exp_term,
        quadratic_term,
        mean_term,
        log_exp_term,
        nodes: rule.len(),
    })
}

/// Coefficients as a real vector `[a_0, Re a_1, Im a_1, Re a_2, ...]`.
pub fn to_real(f: &ZonalPluriharmonic) -> Vec<f64> {
    let mut x = vec![f.a[0].re];
    for a in &f.a[1..] {
        x.push(a.re);
        x.push(a.im);
    }
    x
}

pub fn from_real(n: usize, x: &[f64]) -> Result<ZonalPluriharmonic> {
    if x.is_empty() || x.len() % 2 == 0 {
        return invalid("real coefficient vector must have odd length");
    }
    let mut a = vec![C64::new(x[0], 0.0)];
    a.extend(x[1..].chunks(2).map(|c| C64::new(c[0], c[1])));
    ZonalPluriharmonic::new(n, a)
}

/// `e^F`-weighted averages of `ζ_{n+1}^j`, `j ≤ J`, and `log ⨍ e^F`.
fn exp_moments(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<(Vec<C64>, f64)> {
    let jmax = f.jmax();
    let vals = samples(f, rule);
    let log_mean = log_mean_exp(&vals, &rule.weights, sphere_volume(f.n))?;
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let chunk = rule.nodes.len().div_ceil(64).max(1);
    let parts: Vec<Vec<C64>> = rule
        .nodes
        .par_chunks(chunk)
        .zip(vals.par_chunks(chunk))
        .zip(rule.weights.par_chunks(chunk))
        .map(|((ws, vs), wts)| {
            let mut acc = vec![C64::new(0.0, 0.0); jmax + 1];
            for ((w, v), wt) in ws.iter().zip(vs).zip(wts) {
                let e = wt * (v - mx).exp();
                let mut p = C64::new(e, 0.0);
                for a in acc.iter_mut() {
                    *a += p;
                    p *= w;
                }
            }
            acc
        })
        .collect();
    let mut m = vec![C64::new(0.0, 0.0); jmax + 1];
    for part in &parts {
        for (a, b) in m.iter_mut().zip(part) {
            *a += b;
        }
    }
    let total = m[0].re;
    Ok((m.iter().map(|c| c / total).collect(), log_mean))
}

/// Gradient of `𝒥` in the coordinates of [`to_real`].
pub fn gradient(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<Vec<f64>> {
    check_dim(f, rule)?;
    let n = f.n;
    let (m, _) = exp_moments(f, rule)?;
    let scale = 1.0 / (2.0 * factorial(n + 1) * sphere_volume(n));
    let mut g = vec![0.0];
    for (j, a) in f.a.iter().enumerate().skip(1) {
        let h = aq_prime_eigenvalue(j, n) * nu(j, n) * scale;
        g.push(h * a.re - m[j].re);
        g.push(h * a.im + m[j].im);
    }
    Ok(g)
}

/// `L²` norm (average) of `(1/(n+1)!) 𝒜'_Q F - π(e^F - 1)` after normalizing
/// `⨍ e^F = 1`, projected onto `H_{j0} ⊕ H_{0j}`, `j ≤ J_max` of `F`.
///
/// The moments `⨍ ζ_{n+1}^j e^F` must be resolved up to `j = J_max`; a polar
/// rule about the origin with more than `2 J_max` angles does this, while
/// rules graded toward a boundary point lose accuracy at high degree.
pub fn euler_lagrange_residual(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<f64> {
    check_dim(f, rule)?;
    let n = f.n;
    let (m, _) = exp_moments(f, rule)?;
    let om = sphere_volume(n);
    let mut acc = 0.0;
    for (j, a) in f.a.iter().enumerate().skip(1) {
        // π(e^F) has coefficient 2 ⨍ e^F ζ̄^j / (ν_j/ω) on ζ_{n+1}^j
        let b = m[j].conj() * (2.0 * om / nu(j, n));
        let r = a * (aq_prime_eigenvalue(j, n) / factorial(n + 1)) - b;
        acc += r.norm_sqr() * nu(j, n) / (2.0 * om);
    }
    Ok(acc.sqrt())
}

/// `F^τ = F∘τ + log|J_τ|` for a function on the sphere.
pub fn conformal_push<'a, F>(f: F, tau: &'a ConformalMap) -> impl Fn(&SpherePoint) -> Result<f64> + Sync + 'a
where
    F: Fn(&SpherePoint) -> f64 + Sync + 'a,
{
    move |p| {
        let (q, jac) = tau.apply_with_jacobian(p)?;
        Ok(f(&q) + jac.ln())
    }
}

/// `F^τ` for zonal `F`, re-expanded as `Re Σ_{j ≤ J} b_j ζ_{n+1}^j`.
///
/// With `tol = Some(t)` the re-expansion is compared with `F^τ` on a test
/// grid, using two representatives of each `ζ_{n+1}` so that maps not
/// commuting with `U(n)` are detected; a discrepancy above `t` is an error.
pub fn conformal_push_zonal(
    f: &ZonalPluriharmonic,
    tau: &ConformalMap,
    rule: &DiskRule,
    jmax: usize,
    tol: Option<f64>,
) -> Result<ZonalPluriharmonic> {
    check_dim(f, rule)?;
    let n = f.n;
    if tau.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: tau.n });
    }
    let push = |p: &SpherePoint| -> Result<f64> {
        let (q, jac) = tau.apply_with_jacobian(p)?;
        Ok(f.eval(&q) + jac.ln())
    };
    let series = pluri_project(rule, jmax, |w| {
        C64::new(push(&zonal_point(n, w)).unwrap_or(f64::NAN), 0.0)
    })?;
    let out = series.to_pluri();
    if out.a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("conformal push".into()));
    }
    if let Some(tol) = tol {
        let mut worst: f64 = 0.0;
        for ri in 0..6 {
            let r = 0.15 * ri as f64;
            for k in 0..12 {
                let w = C64::from_polar(r, 0.5236 * k as f64 + 0.1);
                let p1 = zonal_point(n, w);
                let mut z2 = p1.zeta.clone();
                z2[0] *= C64::from_polar(1.0, 1.9);
                if n > 1 {
                    z2.swap(0, n - 1);
                }
                let p2 = SpherePoint::new_unchecked(z2);
                let target = out.eval_w(w);
                worst = worst.max((push(&p1)? - target).abs()).max((push(&p2)? - target).abs());
            }
        }
        if worst > tol {
            return Err(Error::ProjectionResidual(worst));
        }
    }
    Ok(out)
}

/// Stopping rule for the center-of-mass solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ComOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ComOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 60 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComSolution {
    /// `τ` with `⨍ ζ e^{F^τ} = 0`.
    pub tau: ConformalMap,
    /// `|⨍ ζ e^{F^τ}| / ⨍ e^{F^τ}`.
    pub residual: f64,
    pub iterations: usize,
}

/// `σ = T_{(z,t)} ∘ δ_λ`; these maps act simply transitively on the ball.
fn na_map(n: usize, p: &[f64], zonal: bool) -> Result<ConformalMap> {
    let (z, t) = if zonal {
        (vec![C64::new(0.0, 0.0); n], p[1])
    } else {
        ((0..n).map(|i| C64::new(p[1 + i], p[1 + n + i])).collect(), p[1 + 2 * n])
    };
    ConformalMap::new(n, vec![Generator::Dilation(p[0].exp()), Generator::Translation { z, t }])
}

/// Normalized first moment `Σ w_i σ(x_i) / Σ w_i` as a real vector.
fn moment(points: &[SpherePoint], weights: &[f64], sigma: &ConformalMap, zonal: bool) -> Result<Vec<f64>> {
    let n = sigma.n;
    let total: f64 = weights.iter().sum();
    let chunk = points.len().div_ceil(64).max(1);
    let parts: Vec<Result<Vec<C64>>> = points
        .par_chunks(chunk)
        .zip(weights.par_chunks(chunk))
        .map(|(ps, ws)| {
            let mut acc = vec![C64::new(0.0, 0.0); n + 1];
            for (p, w) in ps.iter().zip(ws) {
                let q = sigma.apply(p)?;
                for (a, z) in acc.iter_mut().zip(&q.zeta) {
                    *a += z * *w;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    for part in parts {
        for (a, b) in c.iter_mut().zip(part?) {
            *a += b / total;
        }
    }
    Ok(if zonal {
        vec![c[n].re, c[n].im]
    } else {
        c.iter().flat_map(|a| [a.re, a.im]).collect()
    })
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton iteration on the `NA` parameters (log-dilation, translation),
/// with a finite-difference Jacobian.
fn balance(
    n: usize,
    points: &[SpherePoint],
    weights: &[f64],
    zonal: bool,
    opts: &ComOptions,
) -> Result<ComSolution> {
    let dim = if zonal { 2 } else { 2 * n + 2 };
    let mut p = vec![0.0; dim];
    let resid = |p: &[f64]| -> Result<Vec<f64>> { moment(points, weights, &na_map(n, p, zonal)?, zonal) };
    let mut r = resid(&p)?;
    let mut iterations = 0;
    while vnorm(&r) > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                what: "center of mass".into(),
                iterations,
                residual: vnorm(&r),
            });
        }
        iterations += 1;
        let h = 1e-6;
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..dim {
            let (mut pp, mut pm) = (p.clone(), p.clone());
            pp[k] += h;
            pm[k] -= h;
            let (rp, rm) = (resid(&pp)?, resid(&pm)?);
            for i in 0..dim {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let step = jac
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or_else(|| Error::NoConvergence {
                what: "center of mass (singular Jacobian)".into(),
                iterations,
                residual: vnorm(&r),
            })?;
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a - alpha * s).collect();
            if let Ok(rt) = resid(&trial) {
                if vnorm(&rt) < vnorm(&r) {
                    p = trial;
                    r = rt;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-8 {
                return Err(Error::NoConvergence {
                    what: "center of mass (line search)".into(),
                    iterations,
                    residual: vnorm(&r),
                });
            }
        }
    }
    Ok(ComSolution {
        tau: na_map(n, &p, zonal)?.inverse(),
        residual: vnorm(&r),
        iterations,
    })
}

/// `⨍ ζ e^F / ⨍ e^F`.
pub fn center_of_mass<F>(f: F, rule: &SphereRule) -> Result<Vec<C64>>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    let vals: Vec<f64> = rule.nodes.par_iter().map(&f).collect();
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return Err(Error::NonFinite("center of mass".into()));
    }
    let mut c = vec![C64::new(0.0, 0.0); rule.n + 1];
    let mut total = 0.0;
    for ((p, v), w) in rule.nodes.iter().zip(&vals).zip(&rule.weights) {
        let e = w * (v - mx).exp();
        total += e;
        for (a, z) in c.iter_mut().zip(&p.zeta) {
            *a += z * e;
        }
    }
    Ok(c.iter().map(|a| a / total).collect())
}

/// Conformal map `τ` such that `e^{F^τ}` has vanishing center of mass.
pub fn center_of_mass_solve<F>(f: F, rule: &SphereRule, opts: &ComOptions) -> Result<ComSolution>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    let vals: Vec<f64> = rule.nodes.par_iter().map(&f).collect();
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return Err(Error::NonFinite("center of mass".into()));
    }
    let weights: Vec<f64> = vals.iter().zip(&rule.weights).map(|(v, w)| w * (v - mx).exp()).collect();
    balance(rule.n, &rule.nodes, &weights, false, opts)
}

/// [`center_of_mass_solve`] for zonal `F`; the solution is a dilation
/// followed by a vertical translation, so `F^τ` stays zonal.
pub fn center_of_mass_solve_zonal(
    f: &ZonalPluriharmonic,
    rule: &DiskRule,
    opts: &ComOptions,
) -> Result<ComSolution> {
    check_dim(f, rule)?;
    let n = f.n;
    let vals = samples(f, rule);
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = vals.iter().zip(&rule.weights).map(|(v, w)| w * (v - mx).exp()).collect();
    let points: Vec<SpherePoint> = rule.nodes.iter().map(|w| zonal_point(n, *w)).collect();
    balance(n, &points, &weights, true, opts)
}

/// Pieces of the log-HLS functional.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHlsReport {
    /// `⨍ G log G`.
    pub entropy: f64,
    /// `(n+1) ⨍⨍ log(1/|1 - ζ·η̄|) G(ζ) G(η)` (Heisenberg kernel for the Heisenberg variant).
    pub energy: f64,
    /// `entropy - energy` (plus `log 2` on `H^n`), nonnegative by the log-HLS inequality.
    pub gap: f64,
}

/// Multi-indices `α ∈ ℕ^{n+1}` with `|α| = j`.
fn multi_indices(n: usize, j: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![j]];
    }
    let mut out = Vec::new();
    for first in (0..=j).rev() {
        for mut rest in multi_indices(n - 1, j - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `ζ^α` for a list of multi-indices.
fn monomials(p: &SpherePoint, alphas: &[Vec<usize>]) -> Vec<C64> {
    alphas
        .iter()
        .map(|a| a.iter().zip(&p.zeta).map(|(k, z)| z.powu(*k as u32)).product())
        .collect()
}

fn multinomial(alpha: &[usize]) -> f64 {
    let j: usize = alpha.iter().sum();
    factorial(j) / alpha.iter().map(|k| factorial(*k)).product::<f64>()
}

/// Normalized density samples `G / ⨍G` at the rule nodes.
fn density_samples(vals: &[f64], rule: &SphereRule) -> Result<Vec<f64>> {
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log-HLS density".into()));
    }
    if vals.iter().any(|v| *v < -1e-12 * scale) {
        return invalid("log-HLS density must be nonnegative");
    }
    let mean: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).sum::<f64>() / sphere_volume(rule.n);
    if mean <= 0.0 {
        return invalid("log-HLS density must have positive mass");
    }
    Ok(vals.iter().map(|v| v.max(0.0) / mean).collect())
}

/// `M_α = ⨍ ζ^α G` for `1 ≤ |α| ≤ J`, grouped by degree.
fn holomorphic_moments(g: &[f64], rule: &SphereRule, jmax: usize) -> Vec<Vec<(Vec<usize>, C64)>> {
    let alphas: Vec<Vec<usize>> = (1..=jmax).flat_map(|j| multi_indices(rule.n, j)).collect();
    let chunk = rule.nodes.len().div_ceil(64).max(1);
    let parts: Vec<Vec<C64>> = rule
        .nodes
        .par_chunks(chunk)
        .zip(g.par_chunks(chunk))
        .zip(rule.weights.par_chunks(chunk))
        .map(|((ps, gs), ws)| {
            let mut acc = vec![C64::new(0.0, 0.0); alphas.len()];
            for ((p, gv), w) in ps.iter().zip(gs).zip(ws) {
                let c = gv * w;
                if c == 0.0 {
                    continue;
                }
                for (a, m) in acc.iter_mut().zip(monomials(p, &alphas)) {
                    *a += m * c;
                }
            }
            acc
        })
        .collect();
    let om = sphere_volume(rule.n);
    let mut grouped: Vec<Vec<(Vec<usize>, C64)>> = vec![Vec::new(); jmax + 1];
    for (i, alpha) in alphas.into_iter().enumerate() {
        let m: C64 = parts.iter().map(|p| p[i]).sum::<C64>() / om;
        let j: usize = alpha.iter().sum();
        grouped[j].push((alpha, m));
    }
    grouped
}

/// `(n+1) ⨍⨍ log(1/|1 - ζ·η̄|) G G` through `log(1/|1-x|) = Re Σ x^j / j`
/// and `(ζ·η̄)^j = Σ_{|α|=j} (j!/α!) ζ^α η̄^α`.
fn log_energy(moments: &[Vec<(Vec<usize>, C64)>], n: usize) -> f64 {
    let mut e = 0.0;
    for (j, group) in moments.iter().enumerate().skip(1) {
        let s: f64 = group.iter().map(|(a, m)| multinomial(a) * m.norm_sqr()).sum();
        e += s / j as f64;
    }
    (n + 1) as f64 * e
}

/// The gap `⨍ G log G - (n+1) ⨍⨍ log(1/|1 - ζ·η̄|) G(ζ) G(η)` for `G ≥ 0`
/// normalized to `⨍ G = 1`; the double integral is truncated at degree `J`.
pub fn eval_log_hls<G>(g: G, rule: &SphereRule, jmax: usize) -> Result<LogHlsReport>
where
    G: Fn(&SpherePoint) -> f64 + Sync,
{
    let vals: Vec<f64> = rule.nodes.par_iter().map(&g).collect();
    let dens = density_samples(&vals, rule)?;
    let om = sphere_volume(rule.n);
    let entropy: f64 = dens
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| if *v > 0.0 { w * v * v.ln() } else { 0.0 })
        .sum::<f64>()
        / om;
    let energy = log_energy(&holomorphic_moments(&dens, rule, jmax), rule.n);
    Ok(LogHlsReport { entropy, energy, gap: entropy - energy })
}

/// The same gap written as `⨍ G log G - ((n+1)!/2) ⨍ (G-1) (𝒜'_Q)^{-1} π (G-1)`,
/// evaluated from the `H_{j0}` norms `‖P_{j0} G‖²`.
pub fn eval_log_hls_spectral<G>(g: G, rule: &SphereRule, jmax: usize) -> Result<LogHlsReport>
where
    G: Fn(&SpherePoint) -> f64 + Sync,
{
    let n = rule.n;
    let vals: Vec<f64> = rule.nodes.par_iter().map(&g).collect();
    let dens = density_samples(&vals, rule)?;
    let om = sphere_volume(n);
    let entropy: f64 = dens
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| if *v > 0.0 { w * v * v.ln() } else { 0.0 })
        .sum::<f64>()
        / om;
    let moments = holomorphic_moments(&dens, rule, jmax);
    let mut e = 0.0;
    for (j, group) in moments.iter().enumerate().skip(1) {
        // ⨍ |P_{j0} G|² = Σ |M_α|² / ⨍|ζ^α|², with ⨍|ζ^α|² = n! α! / (n+j)!
        let p2: f64 = group
            .iter()
            .map(|(a, m)| {
                let h = factorial(n) * a.iter().map(|k| factorial(*k)).product::<f64>() / factorial(n + j);
                m.norm_sqr() / h
            })
            .sum();
        e += 2.0 * p2 / aq_prime_eigenvalue(j, n);
    }
    let energy = factorial(n + 1) / 2.0 * e;
    Ok(LogHlsReport { entropy, energy, gap: entropy - energy })
}

/// The Heisenberg gap `⨍ g log g + log 2 - (n+1) ⨍⨍ log(2/|v^{-1}u|²) g(u) g(v)`
/// for `g ≥ 0` on `H^n` (normalized to `⨍_{H^n} g = 1`).
///
/// Integrals are transported to the sphere with `g = (G∘C)|J_C|`; the
/// double integral uses
/// `|1 - ζ·η̄| = 2^{-n/(n+1)} |J_C(u)|^{1/Q} |J_C(v)|^{1/Q} |v^{-1}u|²`.
pub fn eval_log_hls_heisenberg<G>(g: G, rule: &SphereRule, jmax: usize) -> Result<LogHlsReport>
where
    G: Fn(&HeisenbergPoint) -> f64 + Sync,
{
    let n = rule.n;
    let q = hom_dim(n);
    let pairs: Vec<(f64, f64)> = rule
        .nodes
        .par_iter()
        .map(|p| match cayley_inv(p) {
            Ok(u) => {
                let jc = jacobian_cayley(&u);
                (g(&u) / jc, jc.ln())
            }
            Err(_) => (0.0, 0.0),
        })
        .collect();
    let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let dens = density_samples(&vals, rule)?;
    let om = sphere_volume(n);
    let mut ent_s = 0.0;
    let mut log_jac = 0.0;
    for ((v, (_, lj)), w) in dens.iter().zip(&pairs).zip(&rule.weights) {
        if *v > 0.0 {
            ent_s += w * v * v.ln();
            log_jac += w * v * lj;
        }
    }
    ent_s /= om;
    log_jac /= om;
    let energy_s = log_energy(&holomorphic_moments(&dens, rule, jmax), n);
    let ln2 = std::f64::consts::LN_2;
    let entropy = ent_s + log_jac;
    let double = ln2 / (n + 1) as f64 + energy_s / (n + 1) as f64 + 2.0 / q * log_jac;
    let energy = (n + 1) as f64 * double;
    Ok(LogHlsReport { entropy, energy, gap: entropy + ln2 - energy })
}

/// Real basis function `Re ζ^α`, `Im ζ^α` or the constant, normalized in `L²(⨍)`.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisFunction {
    Constant,
    Re(Vec<usize>),
    Im(Vec<usize>),
}

impl BasisFunction {
    pub fn degree(&self) -> usize {
        match self {
            BasisFunction::Constant => 0,
            BasisFunction::Re(a) | BasisFunction::Im(a) => a.iter().sum(),
        }
    }

    fn norm(&self, n: usize) -> f64 {
        match self {
            BasisFunction::Constant => 1.0,
            BasisFunction::Re(a) | BasisFunction::Im(a) => {
                let j: usize = a.iter().sum();
                let h = factorial(n) * a.iter().map(|k| factorial(*k)).product::<f64>() / factorial(n + j);
                (h / 2.0).sqrt()
            }
        }
    }
}

/// Eigenpairs of `𝒜'_Q(W)` in a truncated real pluriharmonic basis.
#[derive(Debug, Clone)]
pub struct WeightedEigenResult {
    pub n: usize,
    pub jmax: usize,
    /// `λ'_1(W) ≤ λ'_2(W) ≤ ...` (the zero eigenvalue of the constants removed).
    pub eigenvalues: Vec<f64>,
    /// Column `k` holds the basis coefficients of the eigenfunction of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    pub basis: Vec<BasisFunction>,
    /// Ratio of the extreme eigenvalues of the `W`-weighted Gram matrix.
    pub gram_condition: f64,
    /// `max |Xᵀ B X - I|` for the returned eigenvectors.
    pub orthogonality_defect: f64,
}

/// Basis `{1} ∪ {Re ζ^α, Im ζ^α : 1 ≤ |α| ≤ J}`, which spans the real parts of
/// all holomorphic polynomials of degree `≤ J` (in particular the coordinate
/// functions needed by the Hersch-type bound).
pub fn pluri_basis(n: usize, jmax: usize) -> Vec<BasisFunction> {
    let mut basis = vec![BasisFunction::Constant];
    for j in 1..=jmax {
        for a in multi_indices(n, j) {
            basis.push(BasisFunction::Re(a.clone()));
            basis.push(BasisFunction::Im(a));
        }
    }
    basis
}

/// Generalized eigenproblem `A x = λ' B x` with `A_{ab} = ⨍ φ_a 𝒜'_Q φ_b` and
/// `B_{ab} = ⨍ φ_a φ_b W`, `W` normalized to `⨍ W = 1`.
pub fn eigen_aqprime_w<W>(w: W, rule: &SphereRule, jmax: usize) -> Result<WeightedEigenResult>
where
    W: Fn(&SpherePoint) -> f64 + Sync,
{
    let n = rule.n;
    if jmax == 0 {
        return invalid("eigenproblem needs J_max >= 1");
    }
    let wv: Vec<f64> = rule.nodes.par_iter().map(&w).collect();
    if wv.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return invalid("weight must be positive and finite on all quadrature nodes");
    }
    let om = sphere_volume(n);
    let mean: f64 = wv.iter().zip(&rule.weights).map(|(v, q)| v * q).sum::<f64>() / om;
    let basis = pluri_basis(n, jmax);
    let dim = basis.len();
    let alphas: Vec<Vec<usize>> = (1..=jmax).flat_map(|j| multi_indices(n, j)).collect();
    let norms: Vec<f64> = basis.iter().map(|b| b.norm(n)).collect();
    let chunk = rule.nodes.len().div_ceil(64).max(1);
    let parts: Vec<DMatrix<f64>> = rule
        .nodes
        .par_chunks(chunk)
        .zip(wv.par_chunks(chunk))
        .zip(rule.weights.par_chunks(chunk))
        .map(|((ps, ws), qs)| {
            let mut acc = DMatrix::<f64>::zeros(dim, dim);
            let mut phi = DVector::<f64>::zeros(dim);
            for ((p, wt), qw) in ps.iter().zip(ws).zip(qs) {
                let mons = monomials(p, &alphas);
                phi[0] = 1.0;
                for (i, m) in mons.iter().enumerate() {
                    phi[1 + 2 * i] = m.re / norms[1 + 2 * i];
                    phi[2 + 2 * i] = m.im / norms[2 + 2 * i];
                }
                acc.syger(wt * qw / (om * mean), &phi, &phi, 1.0);
            }
            acc
        })
        .collect();
    let mut b = DMatrix::<f64>::zeros(dim, dim);
    for part in &parts {
        b += part;
    }
    // syger fills the lower triangle only
    for i in 0..dim {
        for j in 0..i {
            b[(j, i)] = b[(i, j)];
        }
    }
    let gram_eigs = b.clone().symmetric_eigenvalues();
    let (gmin, gmax) = gram_eigs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let gram_condition = if gmin > 0.0 { gmax / gmin } else { f64::INFINITY };
    if gram_condition > 1e12 {
        return Err(Error::IllConditioned(gram_condition));
    }
    let chol = b.clone().cholesky().ok_or(Error::IllConditioned(gram_condition))?;
    let l = chol.l();
    let a = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        basis.iter().map(|f| aq_prime_eigenvalue(f.degree(), n)),
    ));
    let linv_a = l.solve_lower_triangular(&a).ok_or(Error::IllConditioned(gram_condition))?;
    let mut c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or(Error::IllConditioned(gram_condition))?;
    c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let keep = &order[1..];
    let eigenvalues: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(dim, keep.len(), |r, k| eig.eigenvectors[(r, keep[k])]);
    let lt = l.transpose();
    let x = lt.solve_upper_triangular(&y).ok_or(Error::IllConditioned(gram_condition))?;
    let gram = x.transpose() * &b * &x;
    let orthogonality_defect = (gram - DMatrix::<f64>::identity(keep.len(), keep.len())).amax();
    Ok(WeightedEigenResult {
        n,
        jmax,
        eigenvalues,
        eigenvectors: x,
        basis,
        gram_condition,
        orthogonality_defect,
    })
}

/// `Σ_{j=1}^{2n+2} 1/λ'_j(W)`.
pub fn hersch_sum(res: &WeightedEigenResult) -> f64 {
    res.eigenvalues.iter().take(2 * res.n + 2).map(|l| 1.0 / l).sum()
}

/// Smooth positive weight `exp(Re(b·ζ) + Re(ζᵀ M ζ̄) + Re(ζᵀ P ζ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothWeight {
    pub b: Vec<C64>,
    pub m: DMatrix<C64>,
    pub p: DMatrix<C64>,
}

impl SmoothWeight {
    pub fn n(&self) -> usize {
        self.b.len() - 1
    }

    pub fn eval(&self, z: &SpherePoint) -> f64 {
        let k = self.b.len();
        let mut e = C64::new(0.0, 0.0);
        for i in 0..k {
            e += self.b[i] * z.zeta[i];
            for j in 0..k {
                e += self.m[(i, j)] * z.zeta[i] * z.zeta[j].conj() + self.p[(i, j)] * z.zeta[i] * z.zeta[j];
            }
        }
        e.re.exp()
    }
}

/// Settings for [`minimize_j`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Stop when the gradient norm drops below this value.
    pub gtol: f64,
    pub max_iter: usize,
    /// Check the center of mass every this many steps (0 disables).
    pub renormalize_every: usize,
    /// Renormalize when `|⨍ ζ e^F| / ⨍ e^F` exceeds this value.
    pub com_threshold: f64,
    pub com: ComOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-9,
            max_iter: 5000,
            renormalize_every: 10,
            com_threshold: 0.25,
            com: ComOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub renormalized: bool,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub minimizer: ZonalPluriharmonic,
    pub report: FunctionalReport,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Shift the constant term so that `⨍ e^F = 1`.
pub fn normalize_exp_mean(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<ZonalPluriharmonic> {
    check_dim(f, rule)?;
    let lm = log_mean_exp(&samples(f, rule), &rule.weights, sphere_volume(f.n))?;
    Ok(f.with_mean(f.mean() - lm))
}

/// Gradient descent on the coefficients of `F` (degree fixed by `init`),
/// preconditioned by the diagonal of the quadratic term, with Armijo
/// backtracking. The constant is kept at `⨍ e^F = 1`, and when the center
/// of mass of `e^F` drifts beyond `com_threshold` the iterate is moved back
/// by the conformal action, which leaves `𝒥` unchanged.
pub fn minimize_j(init: &ZonalPluriharmonic, rule: &DiskRule, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    check_dim(init, rule)?;
    let n = init.n;
    let degree = init.jmax();
    let om = sphere_volume(n);
    let scale = 1.0 / (2.0 * factorial(n + 1) * om);
    let precond: Vec<f64> = std::iter::once(0.0)
        .chain((1..=degree).flat_map(|j| {
            let h = aq_prime_eigenvalue(j, n) * nu(j, n) * scale + nu(j, n) / (2.0 * om);
            [1.0 / h, 1.0 / h]
        }))
        .collect();
    let mut f = normalize_exp_mean(init, rule)?;
    let mut value = eval_j(&f, rule)?.value;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let mut renormalized = false;
        if opts.renormalize_every > 0 && iter > 0 && iter % opts.renormalize_every == 0 {
            let c = center_of_mass_zonal(&f, rule)?;
            if c.norm() > opts.com_threshold {
                let sol = center_of_mass_solve_zonal(&f, rule, &opts.com)?;
                f = normalize_exp_mean(&conformal_push_zonal(&f, &sol.tau, rule, degree, None)?, rule)?;
                value = eval_j(&f, rule)?.value;
                renormalized = true;
            }
        }
        let g = gradient(&f, rule)?;
        grad_norm = vnorm(&g);
        if grad_norm <= opts.gtol {
            trace.push(TraceRow { iter, value, grad_norm, step: 0.0, renormalized });
            converged = true;
            break;
        }
        let d: Vec<f64> = g.iter().zip(&precond).map(|(a, p)| a * p).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let x = to_real(&f);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - alpha * b).collect();
            let ft = from_real(n, &xt)?;
            if let Ok(rep) = eval_j(&ft, rule) {
                if rep.value <= value - 1e-4 * alpha * slope {
                    accepted = Some((ft, rep.value));
                    break;
                }
            }
            alpha *= 0.5;
        }
        trace.push(TraceRow { iter, value, grad_norm, step: alpha, renormalized });
        match accepted {
            Some((ft, v)) => {
                f = normalize_exp_mean(&ft, rule)?;
                value = v;
            }
            // no decrease possible at working precision
            None => break,
        }
    }
    let report = eval_j(&f, rule)?;
    if !converged && grad_norm > opts.gtol * 1e3 {
        return Err(Error::NoConvergence {
            what: "minimize_J".into(),
            iterations: trace.len(),
            residual: grad_norm,
        });
    }
    Ok(MinimizeResult { minimizer: f, report, grad_norm, converged, trace })
}

/// `⨍ ζ_{n+1} e^F / ⨍ e^F` for zonal `F` (the other coordinates average to zero).
pub fn center_of_mass_zonal(f: &ZonalPluriharmonic, rule: &DiskRule) -> Result<C64> {
    let (m, _) = exp_moments(&f.with_mean(0.0), rule)?;
    Ok(m.get(1).copied().unwrap_or_default().conj())
}

/// Least-squares fit of `a_j ≈ Q s^j / j`, `j ≥ 1`: the coefficients of
/// `log|J_τ|` for the axial profile `ω = s N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalFit {
    pub s: C64,
    pub constant: f64,
    /// `‖a - Q s^j/j‖ / ‖a‖` over `j ≥ 1`.
    pub relative_residual: f64,
}

pub fn fit_log_jacobian(f: &ZonalPluriharmonic) -> ExtremalFit {
    let q = hom_dim(f.n);
    let a = &f.a;
    let norm_a = a[1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut s = if a.len() > 1 { a[1] / q } else { C64::new(0.0, 0.0) };
    let resid = |s: C64| -> f64 {
        let mut sp = C64::new(1.0, 0.0);
        let mut r = 0.0;
        for (j, aj) in a.iter().enumerate().skip(1) {
            sp *= s;
            r += (aj - sp * (q / j as f64)).norm_sqr();
        }
        r.sqrt()
    };
    for _ in 0..100 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        let mut sp = C64::new(1.0, 0.0);
        for (j, aj) in a.iter().enumerate().skip(1) {
            let d = sp * q;
            sp *= s;
            let r = aj - sp * (q / j as f64);
            num += d.conj() * r;
            den += d.norm_sqr();
        }
        if den == 0.0 {
            break;
        }
        let step = num / den;
        let next = s + step;
        if next.norm() >= 1.0 || resid(next) > resid(s) {
            break;
        }
        s = next;
        if step.norm() < 1e-15 {
            break;
        }
    }
    let r = resid(s);
    ExtremalFit {
        s,
        constant: a[0].re,
        relative_residual: if norm_a > 0.0 { r / norm_a } else { 0.0 },
    }
}

/// `log|J|` for the axial profile with parameter `s`, normalized to
/// `⨍ |J| = 1`, truncated at `J_max`.
pub fn log_jacobian_extremal(n: usize, s: C64, jmax: usize) -> Result<ZonalPluriharmonic> {
    Ok(log_jacobian_pluri(&JacobianProfile::axial(n, s)?, jmax)?.0)
}
