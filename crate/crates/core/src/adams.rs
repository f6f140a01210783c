//! Sharp Adams (Moser-Trudinger) constants.
//!
//! For a kernel behaving like `2^{(d-Q)/2} g(θ) |1 - ζ·η̄|^{(d-Q)/2}` near the
//! diagonal the sharp constant is `A_d = 2Q / ∫_Σ |g|^{p'} du*` with
//! `p' = Q/(Q-d)`. For `d = Q/2` and the operators `a L π + b L π^⊥` the
//! integral has a closed series form, evaluated here through Hurwitz zeta
//! values.

use crate::harmonics::ZonalKernelSeries;
use crate::kernels::ThetaKernel;
use crate::quadrature::{DiskRule, SigmaRule};
use crate::special::{factorial, hurwitz_zeta, zeta_partial};
use crate::spectral::{c_d, closed_kernel, degree_filter, lambda_d};
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    Series,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::Series => "series",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamsConstant {
    pub value: f64,
    pub method: Method,
    pub d: f64,
    pub n: usize,
    /// `p = Q/d`.
    pub p: f64,
    /// Bound on the error of a truncated series (0 for quadrature and closed forms).
    pub error_bound: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be positive");
    }
    Ok(())
}

/// `A_d = 2Q / ∫_Σ |g|^{p'} du*` for the profile `g`.
pub fn adams_from_profile(g: &ThetaKernel, rule: &SigmaRule) -> Result<AdamsConstant> {
    let (d, n) = (g.order(), g.dim());
    check_n(n)?;
    if rule.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: rule.n });
    }
    let q = hom_dim(n);
    if !(d > 0.0 && d < q) {
        return invalid(format!("need 0 < d < Q = {q}, got {d}"));
    }
    let pp = q / (q - d);
    let vals = rule.sample(|t| g.eval(t).map(|v| v.abs().powf(pp)).unwrap_or(f64::NAN));
    let integral: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
    if !integral.is_finite() {
        return Err(Error::NonFinite("profile integral".into()));
    }
    if integral <= 0.0 {
        return invalid("profile vanishes identically");
    }
    Ok(AdamsConstant {
        value: 2.0 * q / integral,
        method: Method::Quadrature,
        d,
        n,
        p: q / d,
        error_bound: 0.0,
    })
}

/// Monomial coefficients (ascending) of `Π_{i=1}^{n-1} (x - n/2 + i)`.
fn binomial_poly(n: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for i in 1..n {
        let r = n as f64 / 2.0 - i as f64;
        let mut next = vec![0.0; c.len() + 1];
        for (m, cm) in c.iter().enumerate() {
            next[m + 1] += cm;
            next[m] += cm * r;
        }
        c = next;
    }
    c
}

/// `S_n = Σ_{k≥0} C(k+n-1, n-1) (k+n/2)^{-n-1}` and an error bound.
///
/// With `x = k + n/2` the binomial is a polynomial in `x`, which turns the
/// sum into a combination of Hurwitz zeta values `ζ(n+1-m, n/2)`.
pub fn binomial_zeta_sum(n: usize) -> Result<(f64, f64)> {
    check_n(n)?;
    let a = n as f64 / 2.0;
    let mut value = 0.0;
    let mut bound = 0.0;
    for (m, cm) in binomial_poly(n).iter().enumerate() {
        if *cm == 0.0 {
            continue;
        }
        let z = hurwitz_zeta((n + 1 - m) as f64, a)?;
        value += cm * z.value;
        bound += cm.abs() * (z.tail_bound + 4.0 * f64::EPSILON * z.value.abs());
    }
    let nf = factorial(n - 1);
    Ok((value / nf, bound / nf))
}

/// Direct partial sum of `S_n` over `k ≤ K` plus the integral-test tail
/// bound, used to cross-check the Hurwitz route.
pub fn binomial_zeta_partial(n: usize, k_max: usize) -> Result<(f64, f64)> {
    check_n(n)?;
    let a = n as f64 / 2.0;
    let mut value = 0.0;
    for k in (0..=k_max).rev() {
        let binom = (1..n).map(|i| (k + i) as f64 / i as f64).product::<f64>();
        value += binom * (k as f64 + a).powi(-(n as i32) - 1);
    }
    // the summand is at most (x + n/2)^{n-1} / (n-1)! x^{-n-1} for x = k + n/2
    let tail = zeta_partial(2.0, k_max as f64 + a, 0)?.tail_bound
        * (1.0 + a / (k_max as f64 + 1.0)).powi(n as i32 - 1)
        / factorial(n - 1);
    Ok((value, tail))
}

/// `k_n = Σ_{k≥1} C(k+n-1, n-1) (k+n/2)^{-n-1}`.
pub fn k_n(n: usize) -> Result<f64> {
    let (s, _) = binomial_zeta_sum(n)?;
    Ok(s - (2.0 / n as f64).powi(n as i32 + 1))
}

/// Sharp constant for `L^{Q/4}` acting on `W^{Q/2,2}`:
/// `(n+1)(n-1)! π^{n+1} / Σ_{k≥0} (k+n-1)! / (k! (k+n/2)^{n+1})`.
pub fn adams_sublap_series(n: usize) -> Result<AdamsConstant> {
    let (s, err) = binomial_zeta_sum(n)?;
    let value = (n + 1) as f64 * PI.powi(n as i32 + 1) / s;
    Ok(AdamsConstant {
        value,
        method: Method::Series,
        d: (n + 1) as f64,
        n,
        p: 2.0,
        error_bound: value * err / s,
    })
}

/// Sharp constant for `L_{a,b} = a L π + b L π^⊥` at `d = Q/2`:
/// `ω (n+1)! / (2 [(2/(a n))^{n+1} + k_n / b^{n+1}])`.
pub fn adams_lab(a: f64, b: f64, n: usize) -> Result<AdamsConstant> {
    check_n(n)?;
    if !(a > 0.0 && b > 0.0) {
        return invalid("L_{a,b} needs a, b > 0");
    }
    let (s, err) = binomial_zeta_sum(n)?;
    let kn = s - (2.0 / n as f64).powi(n as i32 + 1);
    let e = n as i32 + 1;
    let den = (2.0 / (a * n as f64)).powi(e) + kn / b.powi(e);
    let value = sphere_volume(n) * factorial(n + 1) / (2.0 * den);
    Ok(AdamsConstant {
        value,
        method: Method::Series,
        d: (n + 1) as f64,
        n,
        p: 2.0,
        error_bound: value * err / (b.powi(e) * den),
    })
}

/// `A_n(λ) = (1 + k_n/λ) / (2 (n+1)!)`.
pub fn a_n_lambda(lambda: f64, n: usize) -> Result<f64> {
    if lambda <= 0.0 {
        return invalid("A_n(λ) needs λ > 0");
    }
    Ok((1.0 + k_n(n)? / lambda) / (2.0 * factorial(n + 1)))
}

/// Pluriharmonic constant `ω (n+1)!/2 = (n+1) π^{n+1}`.
pub fn adams_pluri_closed(n: usize) -> Result<AdamsConstant> {
    check_n(n)?;
    Ok(AdamsConstant {
        value: (n + 1) as f64 * PI.powi(n as i32 + 1),
        method: Method::ClosedForm,
        d: (n + 1) as f64,
        n,
        p: 2.0,
        error_bound: 0.0,
    })
}

/// Discretization of the sharpness probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    /// Truncation degree of the spectral evaluation of `T f_m`; `None` picks `16 m` capped at 256.
    pub jmax: Option<usize>,
    pub panels: usize,
    pub per_panel: usize,
    pub n_ang: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { jmax: None, panels: 24, per_panel: 10, n_ang: 96 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub m: usize,
    pub jmax: usize,
    pub norm_p: f64,
    pub max_tf: f64,
    /// `∫ exp[factor A_d (|T f_m| / ‖f_m‖_p)^{p'}]`, `+∞` on overflow.
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub d: f64,
    pub n: usize,
    pub factor: f64,
    pub a_d: f64,
    pub rows: Vec<ProbeRow>,
}

/// Exponential integrals along the test sequence `f_m` for `T = D^{-d/2}`
/// (`D` the conformal sublaplacian), whose kernel is exactly
/// `c_d (2|1 - ζ·η̄|)^{(d-Q)/2}` with constant profile `g = c_d`.
///
/// `f_m = G(N, ·)^{d/(Q-d)}` where `G ≤ m` and `d(N, ·) ≥ 2 m^{-2/(Q-d)}`,
/// zero elsewhere. `T f_m` is evaluated spectrally with a smooth degree
/// filter, so the table is heuristic: finite `m` cannot certify divergence.
pub fn sharpness_probe(
    d: f64,
    n: usize,
    factor: f64,
    m_list: &[usize],
    opts: &ProbeOptions,
) -> Result<ProbeTable> {
    let mut t = sharpness_probe_multi(d, n, &[factor], m_list, opts)?;
    Ok(t.remove(0))
}

/// [`sharpness_probe`] for several factors, sharing the evaluation of `T f_m`.
pub fn sharpness_probe_multi(
    d: f64,
    n: usize,
    factors: &[f64],
    m_list: &[usize],
    opts: &ProbeOptions,
) -> Result<Vec<ProbeTable>> {
    if n != 1 {
        return invalid("the sharpness probe supports n = 1 only");
    }
    let q = hom_dim(n);
    if !(d > 0.0 && d < q) {
        return invalid(format!("need 0 < d < Q = {q}, got {d}"));
    }
    if factors.iter().any(|f| *f < 0.0 || !f.is_finite()) {
        return invalid("factors must be finite and nonnegative");
    }
    let (p, pp) = (q / d, q / (q - d));
    let cd = c_d(d, n)?;
    let sigma_mass = SigmaRule::new(n, 8)?.mass();
    let a_d = 2.0 * q / (cd.powf(pp) * sigma_mass);
    let mut tables: Vec<ProbeTable> = factors
        .iter()
        .map(|&factor| ProbeTable { d, n, factor, a_d, rows: Vec::new() })
        .collect();
    for &m in m_list {
        if m == 0 {
            return invalid("m must be positive");
        }
        let mf = m as f64;
        // G ≤ m  ⇔  |1-w| ≥ (m/c_d)^{2/(d-Q)} / 2 ; distance d = (2|1-w|)^{1/2}
        let rho_g = 0.5 * (mf / cd).powf(2.0 / (d - q));
        let rho_d = 2.0 * mf.powf(-4.0 / (q - d));
        let rho_cut = rho_g.max(rho_d);
        let rule = DiskRule::graded(n, opts.panels, opts.per_panel, opts.n_ang, &[rho_cut])?;
        let f = |w: C64| -> f64 {
            if (C64::new(1.0, 0.0) - w).norm() < rho_cut {
                0.0
            } else {
                closed_kernel(d, w, n).map(|g| g.powf(d / (q - d))).unwrap_or(0.0)
            }
        };
        let jmax = opts.jmax.unwrap_or((16 * m).min(256));
        let series = ZonalKernelSeries::from_fn(&rule, jmax, |w| C64::new(f(w), 0.0))?;
        let inv: Vec<f64> = (0..=jmax)
            .map(|j| lambda_d(j, d, n).map(|l| 1.0 / l))
            .collect::<Result<_>>()?;
        let mut tf = series;
        for (&(j, k), c) in tf.coeffs.iter_mut() {
            *c *= inv[j] * inv[k] * degree_filter(j + k, jmax);
        }
        let tf_abs: Vec<f64> = tf.eval_many(&rule.nodes).iter().map(|v| v.re.abs()).collect();
        if tf_abs.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("sharpness probe potential".into()));
        }
        let norm_p = rule.integrate(|w| f(w).powf(p))?.powf(1.0 / p);
        let max_tf = tf_abs.iter().copied().fold(0.0, f64::max);
        for table in tables.iter_mut() {
            let scale = table.factor * a_d;
            let integral: f64 = tf_abs
                .iter()
                .zip(&rule.weights)
                .filter(|(_, wt)| **wt > 0.0)
                .map(|(t, wt)| wt * (scale * (t / norm_p).powf(pp)).exp())
                .sum();
            table.rows.push(ProbeRow { m, jmax, norm_p, max_tf, integral });
        }
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sublaplacian_constants() {
        assert_relative_eq!(adams_sublap_series(1).unwrap().value, 4.0, max_relative = 1e-12);
        assert_relative_eq!(adams_sublap_series(2).unwrap().value, 18.0 * PI, max_relative = 1e-12);
        let pi2 = PI * PI;
        assert_relative_eq!(
            adams_sublap_series(3).unwrap().value,
            192.0 * pi2 / (12.0 - pi2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn hurwitz_route_matches_direct_sum() {
        for n in 1..=4 {
            let (s, err) = binomial_zeta_sum(n).unwrap();
            let (p, tail) = binomial_zeta_partial(n, 20000).unwrap();
            assert!(err < 1e-13);
            assert!(s >= p && s - p <= tail, "n={n}: {s} {p} {tail}");
        }
    }

    #[test]
    fn partial_fraction_identity_n3() {
        // (k+1)(k+2) = (k+3/2)² - 1/4
        let (s, _) = binomial_zeta_sum(3).unwrap();
        let pi2 = PI * PI;
        assert_relative_eq!(2.0 * s, pi2 / 2.0 - pi2 * pi2 / 24.0, max_relative = 1e-12);
        let z2 = hurwitz_zeta(2.0, 1.5).unwrap().value;
        let z4 = hurwitz_zeta(4.0, 1.5).unwrap().value;
        assert_relative_eq!(z2 - 0.25 * z4, pi2 / 2.0 - pi2 * pi2 / 24.0, max_relative = 1e-10);
    }

    #[test]
    fn lab_reductions() {
        for n in 1..=3 {
            let a = adams_lab(1.0, 1.0, n).unwrap().value;
            assert_relative_eq!(a, adams_sublap_series(n).unwrap().value, max_relative = 1e-10);
            let lim = adams_lab(2.0 / n as f64, 1e9, n).unwrap().value;
            assert_relative_eq!(lim, adams_pluri_closed(n).unwrap().value, max_relative = 1e-9);
        }
    }

    #[test]
    fn lab_monotone() {
        for n in 1..=3 {
            for i in 1..8 {
                let a = 0.25 * i as f64;
                let mut prev = 0.0;
                for j in 1..8 {
                    let v = adams_lab(a, 0.25 * j as f64, n).unwrap().value;
                    assert!(v > prev);
                    prev = v;
                }
                let lower = adams_lab(a + 0.1, 1.0, n).unwrap().value;
                assert!(lower > adams_lab(a, 1.0, n).unwrap().value);
            }
        }
    }

    #[test]
    fn a_n_lambda_relations() {
        for n in 1..=3 {
            assert_relative_eq!(
                a_n_lambda(1e12, n).unwrap(),
                1.0 / (2.0 * factorial(n + 1)),
                max_relative = 1e-10
            );
            for &lam in &[0.3f64, 1.0, 2.5, 17.0] {
                let q = hom_dim(n);
                let lab = adams_lab(2.0 / n as f64, lam.powf(2.0 / q), n).unwrap().value;
                assert_relative_eq!(
                    a_n_lambda(lam, n).unwrap(),
                    sphere_volume(n) / (4.0 * lab),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn profile_constants() {
        let rule = SigmaRule::new(1, 32).unwrap();
        let pl = adams_from_profile(&ThetaKernel::Pluri { d: 2.0, n: 1 }, &rule).unwrap();
        assert_relative_eq!(pl.value, 2.0 * PI * PI, max_relative = 1e-10);
        let h = adams_from_profile(&ThetaKernel::Hardy { d: 2.0, n: 1 }, &rule).unwrap();
        assert_relative_eq!(h.value, 4.0 * PI * PI, max_relative = 1e-12);
        assert_eq!(h.p, 2.0);
        let graded = SigmaRule::graded(1, 64, 16).unwrap();
        let full = adams_from_profile(&ThetaKernel::Full { d: 2.0, n: 1 }, &graded).unwrap();
        assert_relative_eq!(full.value, 4.0, max_relative = 1e-4);
        assert!(adams_from_profile(&ThetaKernel::Hardy { d: 2.0, n: 1 }, &SigmaRule::new(2, 8).unwrap()).is_err());
    }

    #[test]
    fn probe_zero_factor_is_volume() {
        let opts = ProbeOptions { jmax: Some(16), ..ProbeOptions::default() };
        let t = sharpness_probe(2.0, 1, 0.0, &[4], &opts).unwrap();
        assert_relative_eq!(t.rows[0].integral, sphere_volume(1), max_relative = 1e-12);
        assert_relative_eq!(t.a_d, 4.0, max_relative = 1e-12);
        assert!(sharpness_probe(2.0, 2, 1.0, &[4], &opts).is_err());
    }
}
