//! Angular profiles of singular kernels on the sphere.
//!
//! Near the diagonal, the kernels of `L^{-d/2}`, `L_{a,b}^{-d/2}` and of
//! pluriharmonic `d`-type operators behave like
//! `2^{(d-Q)/2} g(θ) |1 - ζ·η̄|^{(d-Q)/2}`, where `θ` is the Heisenberg angle
//! of `ζ·η̄`: `(1-w)/(1+w) = |u|² e^{iθ}`. This module evaluates the profiles `g`.

use crate::quadrature::{composite_gauss, geometric_breaks, SigmaRule};
use crate::special::{factorial, gamma, gamma_ratio, rising_over_factorial};
use crate::spectral::{degree_filter, lambda};
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};

fn check_order(d: f64, n: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let q = hom_dim(n);
    if !(d > 0.0 && d < q) {
        return invalid(format!("kernel order must satisfy 0 < d < Q = {q}, got {d}"));
    }
    Ok(())
}

/// Heisenberg angle `θ = arg((1-w)/(1+w)) ∈ [-π/2, π/2]` of a disk point.
pub fn theta_of(w: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    ((one - w) / (one + w)).arg()
}

/// Nodes in `s` for the integral defining `G_d`: geometric panels toward
/// `s = 0` (needed as `|θ| → π/2`) and doubling panels up to `s = 64`.
fn s_nodes() -> (Vec<f64>, Vec<f64>) {
    let mut breaks = geometric_breaks(0.0, 1.0, 48);
    let mut b = 1.0;
    while b < 64.0 {
        b *= 2.0;
        breaks.push(b);
    }
    composite_gauss(&breaks, 20)
}

/// Profile `G_d(θ)` of the kernel of `L^{-d/2}`, from its integral
/// representation over `s ∈ (0, ∞)`.
pub fn g_full_theta(d: f64, n: usize, theta: f64) -> Result<f64> {
    check_order(d, n)?;
    if theta.abs() > std::f64::consts::FRAC_PI_2 {
        return invalid("θ must lie in [-π/2, π/2]");
    }
    let q = hom_dim(n);
    let beta = (q - d) / 2.0;
    let e2 = C64::from_polar(1.0, 2.0 * theta);
    let (s, ws) = s_nodes();
    let mut acc = C64::new(0.0, 0.0);
    for (si, wi) in s.iter().zip(&ws) {
        let ratio = si / -(-2.0 * si).exp_m1();
        let den = (e2 + (-2.0 * si).exp()).powf(-beta);
        acc += den * (wi * ratio.powf(d / 2.0 - 1.0) * (-(n as f64) * si).exp());
    }
    let pref = 2f64.powi(n as i32 + 1) * gamma(beta) / (std::f64::consts::PI.powi(n as i32 + 1) * gamma(d / 2.0));
    let v = pref * (C64::from_polar(1.0, beta * theta) * acc).re;
    if !v.is_finite() {
        return Err(Error::NonFinite("G_d(θ) integral".into()));
    }
    Ok(v)
}

/// Coefficients `(c_ℓ, frequency_ℓ)` of `g_{k,d}(θ) = Σ_ℓ c_ℓ cos(freq_ℓ θ)`.
pub fn g_kd_modes(k: usize, d: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    check_order(d, n)?;
    let q = hom_dim(n);
    let beta = (q - d) / 2.0;
    let pref = 2f64.powf(beta + 1.0) / (sphere_volume(n) * factorial(n));
    let mut out = Vec::with_capacity(k + 1);
    for l in 0..=k {
        let a = rising_over_factorial(d / 2.0 - 1.0, k - l);
        if a == 0.0 {
            continue;
        }
        // Γ(ℓ+n-d/2+1)/ℓ!
        let b = gamma_ratio(l as f64 + n as f64 - d / 2.0 + 1.0, l as f64 + 1.0)?;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        out.push((pref * sign * a * b, 2.0 * l as f64 + beta));
    }
    Ok(out)
}

/// Term `g_{k,d}(θ)` of the expansion `G_d = Σ_k g_{k,d} / λ_k^{d/2}`.
pub fn g_kd_theta(k: usize, d: f64, n: usize, theta: f64) -> Result<f64> {
    Ok(g_kd_modes(k, d, n)?
        .iter()
        .map(|(c, f)| c * (f * theta).cos())
        .sum())
}

/// Partial sum `Σ_{k ≤ K} g_{k,d}(θ) / λ_k^{d/2}`.
pub fn expansion_partial_sum(d: f64, n: usize, theta: f64, kmax: usize) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..=kmax {
        acc += g_kd_theta(k, d, n, theta)? / lambda(k, n).powf(d / 2.0);
    }
    Ok(acc)
}

/// Partial sum with the degree filter of [`degree_filter`]; converges
/// pointwise for `|θ| < π/2` where the plain partial sums oscillate.
pub fn expansion_filtered_sum(d: f64, n: usize, theta: f64, kmax: usize) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..=kmax {
        let w = degree_filter(k, kmax);
        if w > 0.0 {
            acc += w * g_kd_theta(k, d, n, theta)? / lambda(k, n).powf(d / 2.0);
        }
    }
    Ok(acc)
}

/// Moments `∫_Σ (Σ_{k ≤ K} g_{k,d}/λ_k^{d/2}) φ du*` for `K` in `kmaxes`,
/// reusing the cosine moments `∫_Σ cos(fθ) φ du*` across all `k`.
pub fn expansion_moments<F: Fn(f64) -> f64>(
    d: f64,
    n: usize,
    rule: &SigmaRule,
    phi: F,
    kmaxes: &[usize],
) -> Result<Vec<f64>> {
    check_order(d, n)?;
    let kmax = kmaxes.iter().copied().max().unwrap_or(0);
    let beta = (hom_dim(n) - d) / 2.0;
    let vals: Vec<f64> = rule.thetas.iter().map(|&t| phi(t)).collect();
    let mode_moment: Vec<f64> = (0..=kmax)
        .map(|l| {
            let f = 2.0 * l as f64 + beta;
            rule.thetas
                .iter()
                .zip(&rule.weights)
                .zip(&vals)
                .map(|((t, w), v)| w * v * (f * t).cos())
                .sum()
        })
        .collect();
    let mut partial = 0.0;
    let mut out = vec![0.0; kmaxes.len()];
    for k in 0..=kmax {
        let modes = g_kd_modes(k, d, n)?;
        let m: f64 = modes
            .iter()
            .map(|(c, f)| c * mode_moment[((f - beta) / 2.0).round() as usize])
            .sum();
        partial += m / lambda(k, n).powf(d / 2.0);
        for (o, &km) in out.iter_mut().zip(kmaxes) {
            if km == k {
                *o = partial;
            }
        }
    }
    Ok(out)
}

/// Pluriharmonic profile `g_d(θ) = 2^{(Q-d)/2+1} Γ((Q-d)/2) cos((Q-d)θ/2) / (ω_{2n+1} n!)`.
pub fn g_pluri_theta(d: f64, n: usize, theta: f64) -> Result<f64> {
    check_order(d, n)?;
    let beta = (hom_dim(n) - d) / 2.0;
    Ok(2f64.powf(beta + 1.0) * gamma(beta) / (sphere_volume(n) * factorial(n)) * (beta * theta).cos())
}

/// Constant profile `2^{(Q-d)/2} Γ((Q-d)/2) / (n! ω_{2n+1})` of `d`-type operators on Hardy space.
pub fn g_hardy(d: f64, n: usize) -> Result<f64> {
    check_order(d, n)?;
    let beta = (hom_dim(n) - d) / 2.0;
    Ok(2f64.powf(beta) * gamma(beta) / (factorial(n) * sphere_volume(n)))
}

/// `g_d^⊥(θ) = G_d(θ) - g_d(θ) / (n/2)^{d/2}`.
pub fn g_perp_theta(d: f64, n: usize, theta: f64) -> Result<f64> {
    Ok(g_full_theta(d, n, theta)? - g_pluri_theta(d, n, theta)? / (0.5 * n as f64).powf(d / 2.0))
}

/// Profile of `L_{a,b}^{-d/2}`: `g_d / (a n/2)^{d/2} + g_d^⊥ / b^{d/2}`.
pub fn g_lab_theta(a: f64, b: f64, d: f64, n: usize, theta: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return invalid("L_{a,b} needs a, b > 0");
    }
    let p = g_pluri_theta(d, n, theta)?;
    let perp = g_perp_theta(d, n, theta)?;
    Ok(p / (a * n as f64 / 2.0).powf(d / 2.0) + perp / b.powf(d / 2.0))
}

/// A named angular profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaKernel {
    /// `G_d`, profile of `L^{-d/2}`.
    Full { d: f64, n: usize },
    /// `g_{k,d}`.
    Mode { k: usize, d: f64, n: usize },
    /// `g_d`, pluriharmonic `d`-type operators.
    Pluri { d: f64, n: usize },
    /// `g_d^⊥`.
    Perp { d: f64, n: usize },
    /// Constant Hardy-space profile.
    Hardy { d: f64, n: usize },
    /// Profile of `L_{a,b}^{-d/2}`.
    Lab { a: f64, b: f64, d: f64, n: usize },
}

impl ThetaKernel {
    pub fn eval(&self, theta: f64) -> Result<f64> {
        match *self {
            Self::Full { d, n } => g_full_theta(d, n, theta),
            Self::Mode { k, d, n } => g_kd_theta(k, d, n, theta),
            Self::Pluri { d, n } => g_pluri_theta(d, n, theta),
            Self::Perp { d, n } => g_perp_theta(d, n, theta),
            Self::Hardy { d, n } => g_hardy(d, n),
            Self::Lab { a, b, d, n } => g_lab_theta(a, b, d, n, theta),
        }
    }

    pub fn order(&self) -> f64 {
        match *self {
            Self::Full { d, .. }
            | Self::Mode { d, .. }
            | Self::Pluri { d, .. }
            | Self::Perp { d, .. }
            | Self::Hardy { d, .. }
            | Self::Lab { d, .. } => d,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Full { n, .. }
            | Self::Mode { n, .. }
            | Self::Pluri { n, .. }
            | Self::Perp { n, .. }
            | Self::Hardy { n, .. }
            | Self::Lab { n, .. } => n,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Full { d, n } => format!("G_d(d={d}, n={n})"),
            Self::Mode { k, d, n } => format!("g_k,d(k={k}, d={d}, n={n})"),
            Self::Pluri { d, n } => format!("g_d(d={d}, n={n})"),
            Self::Perp { d, n } => format!("g_d_perp(d={d}, n={n})"),
            Self::Hardy { d, n } => format!("g_hardy(d={d}, n={n})"),
            Self::Lab { a, b, d, n } => format!("g_Lab(a={a}, b={b}, d={d}, n={n})"),
        }
    }
}

/// `(∫_Σ g_{k,d} g_{j,Q-d} du*, 4 Γ(k+n) δ_{jk} / (π^{n+1} Γ(n) Γ(k+1)))`.
pub fn orthogonality_check(j: usize, k: usize, d: f64, n: usize, rule: &SigmaRule) -> Result<(f64, f64)> {
    check_order(d, n)?;
    let q = hom_dim(n);
    let a = g_kd_modes(k, d, n)?;
    let b = g_kd_modes(j, q - d, n)?;
    let integral = rule.integrate(|t| {
        let x: f64 = a.iter().map(|(c, f)| c * (f * t).cos()).sum();
        let y: f64 = b.iter().map(|(c, f)| c * (f * t).cos()).sum();
        x * y
    })?;
    let target = if j == k {
        4.0 * gamma(k as f64 + n as f64)
            / (std::f64::consts::PI.powi(n as i32 + 1) * gamma(n as f64) * factorial(k))
    } else {
        0.0
    };
    Ok((integral, target))
}

/// Scaled remainder `sup_ψ |K(w) - 2^{(d-Q)/2} g_d(θ) |1-w|^{(d-Q)/2}| |1-w|^{(Q-d)/2}`
/// over `w = 1 - ρ e^{iψ}`, `|ψ| ≤ π/3`, where `K = Σ_{j ≥ 1} (Φ_{j0} + Φ_{0j}) / j^{d/2}`
/// is the kernel of a pluriharmonic `d`-type operator.
pub fn pluri_kernel_remainder(d: f64, n: usize, rho: f64, n_psi: usize) -> Result<f64> {
    check_order(d, n)?;
    if !(rho > 0.0 && rho < 1.0) {
        return invalid("ρ must lie in (0, 1)");
    }
    let q = hom_dim(n);
    let mut worst: f64 = 0.0;
    for i in 0..n_psi {
        let psi = -std::f64::consts::FRAC_PI_3 + 2.0 * std::f64::consts::FRAC_PI_3 * i as f64 / (n_psi - 1).max(1) as f64;
        let w = C64::new(1.0, 0.0) - C64::from_polar(rho, psi);
        // Σ_j w^j / (ν_j j^{d/2}) summed until the terms are negligible
        let r = w.norm();
        let jmax = ((40.0 / (1.0 - r)).ceil() as usize).max(64);
        let mut acc = C64::new(0.0, 0.0);
        let mut wj = C64::new(1.0, 0.0);
        for j in 1..=jmax {
            wj *= w;
            acc += wj / (crate::harmonics::nu(j, n) * (j as f64).powf(d / 2.0));
        }
        let k = 2.0 * acc.re;
        let lead = 2f64.powf((d - q) / 2.0) * g_pluri_theta(d, n, theta_of(w))? * rho.powf((d - q) / 2.0);
        worst = worst.max((k - lead).abs() * rho.powf((q - d) / 2.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::project_component;
    use crate::quadrature::DiskRule;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn full_profile_is_even_and_matches_d2() {
        // n = 1, d = 2: G_2 ≡ 1/π
        for &t in &[0.0, 0.3, -0.9, 1.2, 1.5, -1.55] {
            assert!((g_full_theta(2.0, 1, t).unwrap() - 1.0 / PI).abs() < 1e-9, "{t}");
        }
        for n in 1..=2 {
            for &d in &[1.0, 1.5, 3.0] {
                for &t in &[0.2, 0.8, 1.4] {
                    let a = g_full_theta(d, n, t).unwrap();
                    let b = g_full_theta(d, n, -t).unwrap();
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
        assert!(g_full_theta(4.0, 1, 0.0).is_err());
    }

    #[test]
    fn mode_examples() {
        let v = g_kd_theta(3, 2.0, 1, 0.0).unwrap();
        assert_relative_eq!(v, -2.0 / (PI * PI), max_relative = 1e-14);
        // first term equals g_d (n/2)^{-d/2} / λ_0^{-d/2}, i.e. g_{0,d} = g_d
        for n in 1..=3 {
            for &d in &[1.0, 2.0, 2.5] {
                for &t in &[0.0, 0.4, 1.1] {
                    assert_relative_eq!(
                        g_kd_theta(0, d, n, t).unwrap(),
                        g_pluri_theta(d, n, t).unwrap(),
                        max_relative = 1e-12,
                        epsilon = 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn pluri_profile_examples() {
        assert_relative_eq!(g_pluri_theta(2.0, 1, 0.0).unwrap(), 2.0 / (PI * PI), max_relative = 1e-14);
        for n in 1..=3 {
            let d = hom_dim(n) / 2.0;
            assert_relative_eq!(g_hardy(d, n).unwrap(), 0.5 * g_pluri_theta(d, n, 0.0).unwrap(), max_relative = 1e-14);
        }
        let t = 0.7;
        let sum = g_perp_theta(1.5, 1, t).unwrap() + g_pluri_theta(1.5, 1, t).unwrap() / 0.5f64.powf(0.75);
        assert_relative_eq!(sum, g_full_theta(1.5, 1, t).unwrap(), max_relative = 1e-14);
        let lab = g_lab_theta(1.0, 1.0, 1.5, 1, t).unwrap();
        assert_relative_eq!(lab, g_full_theta(1.5, 1, t).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn orthogonality_examples() {
        let rule = SigmaRule::new(1, 128).unwrap();
        for j in 0..5 {
            for k in 0..5 {
                let (v, t) = orthogonality_check(j, k, 2.0, 1, &rule).unwrap();
                assert!((v - t).abs() < 1e-8, "{j}{k}: {v} vs {t}");
            }
        }
        let (v, t) = orthogonality_check(0, 0, 2.0, 1, &rule).unwrap();
        assert_relative_eq!(t, 4.0 / (PI * PI), max_relative = 1e-14);
        assert_relative_eq!(v, t, max_relative = 1e-10);
        let rule2 = SigmaRule::new(2, 128).unwrap();
        let (v, t) = orthogonality_check(2, 2, 3.0, 2, &rule2).unwrap();
        assert_relative_eq!(t, 12.0 / PI.powi(3), max_relative = 1e-14);
        assert_relative_eq!(v, t, max_relative = 1e-6);
        for n in 1..=2 {
            let r = SigmaRule::new(n, 128).unwrap();
            for &d in &[1.3, 2.5] {
                for j in 0..4 {
                    for k in 0..4 {
                        let (v, t) = orthogonality_check(j, k, d, n, &r).unwrap();
                        assert!((v - t).abs() < 1e-8 * (1.0 + t.abs()), "n={n} d={d} {j}{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_pointwise() {
        let t = 0.3;
        let direct = g_full_theta(2.0, 1, t).unwrap();
        let f = expansion_filtered_sum(2.0, 1, t, 200).unwrap();
        assert!((f - direct).abs() < 1e-4, "{f} vs {direct}");
        // for d ≠ 2 the filtered sums approach G_d like 1/K; one Richardson step removes it
        let direct = g_full_theta(1.5, 1, t).unwrap();
        let s400 = expansion_filtered_sum(1.5, 1, t, 400).unwrap();
        let s800 = expansion_filtered_sum(1.5, 1, t, 800).unwrap();
        assert!((s800 - direct).abs() < 1e-3 * direct);
        assert!((2.0 * s800 - s400 - direct).abs() < 1e-5 * direct);
    }

    #[test]
    fn expansion_weak_convergence() {
        let tests: [fn(f64) -> f64; 3] = [|_| 1.0, |t| t * t, |t| (2.0 * t).cos() * t.cos()];
        for (n, d) in [(1usize, 1.5), (1, 3.0), (2, 3.0)] {
            let rule = SigmaRule::graded(n, 512, 16).unwrap();
            let g = rule.sample(|t| g_full_theta(d, n, t).unwrap());
            for phi in tests {
                let direct: f64 = rule
                    .thetas
                    .iter()
                    .zip(&rule.weights)
                    .zip(&g)
                    .map(|((t, w), g)| w * g * phi(*t))
                    .sum();
                let m = expansion_moments(d, n, &rule, phi, &[1000, 2000]).unwrap();
                assert!((m[1] - direct).abs() <= 1e-3 * direct.abs(), "n={n} d={d}: {} vs {direct}", m[1]);
                assert!((m[1] - direct).abs() < (m[0] - direct).abs());
                assert!((2.0 * m[1] - m[0] - direct).abs() <= 1e-5 * direct.abs());
            }
        }
    }

    #[test]
    fn d2_profile_recovers_conformal_sublaplacian() {
        // for n = 1, d = 2 the leading form is exact and inverts D = L + n²/4
        let rule = DiskRule::default_graded(1, 480, 64).unwrap();
        let k = |w: C64| {
            let g = g_full_theta(2.0, 1, theta_of(w)).unwrap();
            C64::new(0.5 * g / (C64::new(1.0, 0.0) - w).norm(), 0.0)
        };
        for j in 0..=3 {
            let c = project_component(&rule, k, j, 0).unwrap();
            let expect = lambda(j, 1) * lambda(0, 1);
            assert_relative_eq!(1.0 / c.re, expect, max_relative = 1e-3);
        }
    }

    #[test]
    fn pluri_kernel_leading_term() {
        let r: Vec<f64> = [0.3, 0.1, 0.03, 0.01]
            .iter()
            .map(|&rho| pluri_kernel_remainder(2.0, 1, rho, 13).unwrap())
            .collect();
        assert!(r.windows(2).all(|p| p[1] < p[0]), "{r:?}");
        let scale = 0.5 * g_pluri_theta(2.0, 1, 0.0).unwrap();
        assert!(r[3] <= 0.1 * scale, "{r:?}");
    }
}
