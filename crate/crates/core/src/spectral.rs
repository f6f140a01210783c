//! Operators diagonal on the decomposition `L² = ⊕ H_{jk}`, described by
//! their multipliers, together with the fundamental solutions of the
//! intertwining operators `A_d`.

use crate::harmonics::{dim_hjk, nu, ZonalKernelSeries, ZonalPluriharmonic};
use crate::special::{factorial, gamma, gamma_ratio, jacobi_sequence, pochhammer};
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};
use std::fmt;
use std::sync::Arc;

/// `λ_j = j + n/2`, the factors of the conformal sublaplacian spectrum.
pub fn lambda(j: usize, n: usize) -> f64 {
    j as f64 + 0.5 * n as f64
}

/// `λ_j(d) = Γ(j + (Q+d)/4) / Γ(j + (Q-d)/4)` for `0 < d ≤ Q`.
/// At `d = Q` this is the product `j (j+1) ... (j+n)`.
pub fn lambda_d(j: usize, d: f64, n: usize) -> Result<f64> {
    let q = hom_dim(n);
    if !(d > 0.0 && d <= q) {
        return invalid(format!("order d must lie in (0, Q] = (0, {q}], got {d}"));
    }
    lambda_d_ext(j, d, n)
}

/// `λ_j(d)` for any real `d`, using the finite product when `d/2` is a
/// nonnegative integer (which covers `d ≥ Q`, where the gamma ratio has poles).
pub fn lambda_d_ext(j: usize, d: f64, n: usize) -> Result<f64> {
    let q = hom_dim(n);
    let lo = j as f64 + (q - d) / 4.0;
    let hi = j as f64 + (q + d) / 4.0;
    let half = d / 2.0;
    if half >= 0.0 && half.fract() == 0.0 {
        return Ok(pochhammer(lo, half as usize));
    }
    if lo <= 0.0 || hi <= 0.0 {
        return invalid(format!("λ_{j}({d}) is not defined by a finite gamma ratio"));
    }
    gamma_ratio(hi, lo)
}

/// Operator families that are diagonal on `H_{jk}`.
#[derive(Clone)]
pub enum MultiplierKind {
    /// Conformal sublaplacian `D`, eigenvalue `λ_j λ_k`.
    D,
    /// Sublaplacian `L = D - n²/4`.
    L,
    /// Intertwinor `A_d`, eigenvalue `λ_j(d) λ_k(d)`.
    Ad(f64),
    /// `A_Q = lim_{d→Q} A_d`, vanishing on pluriharmonic indices.
    AQ,
    /// Conditional intertwinor `A'_Q`, defined on pluriharmonic indices only.
    AQprime,
    /// `a L π + b L π^⊥`, with `π` the pluriharmonic projection.
    Lab(f64, f64),
    /// `(2/n) L π + λ^{2/Q} L π^⊥`.
    Llambda(f64),
    /// `|T|`, eigenvalue `|j-k|/2`.
    Tabs,
    Custom(Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for MultiplierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::D => write!(f, "D"),
            Self::L => write!(f, "L"),
            Self::Ad(d) => write!(f, "Ad({d})"),
            Self::AQ => write!(f, "AQ"),
            Self::AQprime => write!(f, "AQprime"),
            Self::Lab(a, b) => write!(f, "Lab({a}, {b})"),
            Self::Llambda(l) => write!(f, "Llambda({l})"),
            Self::Tabs => write!(f, "Tabs"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A map `(j, k) ↦ eigenvalue on H_{jk}`.
#[derive(Debug, Clone)]
pub struct SpectralMultiplier {
    pub kind: MultiplierKind,
    pub n: usize,
}

impl SpectralMultiplier {
    pub fn new(kind: MultiplierKind, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("n must be positive");
        }
        let q = hom_dim(n);
        match kind {
            MultiplierKind::Ad(d) if !(d > 0.0 && d <= q) => {
                return invalid(format!("order d must lie in (0, Q], got {d}"))
            }
            MultiplierKind::Llambda(l) if !(l > 0.0 && l.is_finite()) => {
                return invalid("L_λ needs λ > 0")
            }
            MultiplierKind::Lab(a, b) if !(a.is_finite() && b.is_finite()) => {
                return invalid("L_{a,b} needs finite a, b")
            }
            _ => {}
        }
        Ok(Self { kind, n })
    }

    pub fn eval(&self, j: usize, k: usize) -> Result<f64> {
        let n = self.n;
        let q = hom_dim(n);
        let l_eig = lambda(j, n) * lambda(k, n) - 0.25 * (n * n) as f64;
        let pluri = j == 0 || k == 0;
        Ok(match &self.kind {
            MultiplierKind::D => lambda(j, n) * lambda(k, n),
            MultiplierKind::L => l_eig,
            MultiplierKind::Ad(d) => lambda_d(j, *d, n)? * lambda_d(k, *d, n)?,
            MultiplierKind::AQ => lambda_d(j, q, n)? * lambda_d(k, q, n)?,
            MultiplierKind::AQprime => {
                if !pluri {
                    return invalid(format!("A'_Q is only defined on H_j0 and H_0k, not H_{j}{k}"));
                }
                lambda_d(j.max(k), q, n)?
            }
            MultiplierKind::Lab(a, b) => l_eig * if pluri { *a } else { *b },
            MultiplierKind::Llambda(l) => {
                l_eig * if pluri { 2.0 / n as f64 } else { l.powf(2.0 / q) }
            }
            MultiplierKind::Tabs => 0.5 * (j as f64 - k as f64).abs(),
            MultiplierKind::Custom(f) => f(j, k),
        })
    }
}

/// Componentwise product of a multiplier with a zonal series.
pub fn apply_multiplier(m: &SpectralMultiplier, s: &ZonalKernelSeries) -> Result<ZonalKernelSeries> {
    if m.n != s.n {
        return Err(Error::DimensionMismatch { expected: m.n, got: s.n });
    }
    let mut out = s.clone();
    for (&(j, k), c) in out.coeffs.iter_mut() {
        *c *= m.eval(j, k)?;
    }
    Ok(out)
}

/// `⟨m F, F⟩` for `F = Σ c_{jk} Φ_{jk}(ζ_{n+1})`.
pub fn quad_form(m: &SpectralMultiplier, s: &ZonalKernelSeries) -> Result<f64> {
    let om = sphere_volume(s.n);
    let mut acc = 0.0;
    for (&(j, k), c) in &s.coeffs {
        acc += m.eval(j, k)? * c.norm_sqr() * dim_hjk(j, k, s.n) as f64 / om;
    }
    Ok(acc)
}

/// `⟨m F, F⟩` for `F = Re Σ a_j ζ_{n+1}^j`, using `‖ζ_{n+1}^j‖² = ν_j`.
pub fn quad_form_pluri(m: &SpectralMultiplier, f: &ZonalPluriharmonic) -> Result<f64> {
    let n = f.n;
    let mut acc = m.eval(0, 0)? * f.a[0].re.powi(2) * sphere_volume(n);
    for (j, a) in f.a.iter().enumerate().skip(1) {
        acc += (m.eval(j, 0)? + m.eval(0, j)?) * a.norm_sqr() * nu(j, n) / 4.0;
    }
    Ok(acc)
}

/// Difference between the differential-operator product for even `d` and
/// `λ_j(d) λ_k(d)`, with `D ↦ λ_j λ_k` and `T ↦ i (j-k)/2`.
pub fn factorization_check(d: usize, n: usize, j: usize, k: usize) -> Result<f64> {
    if d == 0 || d % 2 == 1 {
        return invalid(format!("factorization needs a positive even order, got {d}"));
    }
    let dee = C64::new(lambda(j, n) * lambda(k, n), 0.0);
    let tee = C64::new(0.0, 0.5 * (j as f64 - k as f64));
    let i = C64::new(0.0, 1.0);
    let pair = |b: f64| (dee - b * b + i * (2.0 * b) * tee) * (dee - b * b - i * (2.0 * b) * tee);
    let prod = if d % 4 == 0 {
        (0..d / 4).fold(C64::new(1.0, 0.0), |acc, l| acc * pair(l as f64 + 0.5))
    } else {
        (1..=(d - 2) / 4).fold(dee, |acc, l| acc * pair(l as f64))
    };
    let target = lambda_d_ext(j, d as f64, n)? * lambda_d_ext(k, d as f64, n)?;
    Ok((prod - target).norm())
}

/// `c_d = 2^{n-d/2} Γ((Q-d)/4)² / (π^{n+1} Γ(d/2))`, `0 < d < Q`.
pub fn c_d(d: f64, n: usize) -> Result<f64> {
    let q = hom_dim(n);
    if !(d > 0.0 && d < q) {
        return invalid(format!("c_d needs 0 < d < Q, got {d}"));
    }
    let g = gamma((q - d) / 4.0);
    Ok(2f64.powf(n as f64 - d / 2.0) * g * g / (std::f64::consts::PI.powi(n as i32 + 1) * gamma(d / 2.0)))
}

/// Heisenberg-group constant `C_d = c_d / 2`.
pub fn heisenberg_c_d(d: f64, n: usize) -> Result<f64> {
    Ok(0.5 * c_d(d, n)?)
}

fn check_off_pole(w: C64) -> Result<()> {
    if (C64::new(1.0, 0.0) - w).norm() < 1e-300 {
        return Err(Error::Pole);
    }
    if w.norm() > 1.0 + 1e-12 {
        return invalid("zonal argument must satisfy |w| ≤ 1");
    }
    Ok(())
}

/// `c_d (2|1-w|)^{(d-Q)/2}`, the kernel of `A_d^{-1}` as a function of `w = ζ·η̄`.
pub fn closed_kernel(d: f64, w: C64, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    let q = hom_dim(n);
    Ok(c_d(d, n)? * (2.0 * (C64::new(1.0, 0.0) - w).norm()).powf((d - q) / 2.0))
}

/// Sum of `μ_{jk} Φ_{jk}(w)` over `(j, k)` with weight `filter(j, k)`,
/// walking the diagonals `j - k = m` with the Jacobi recurrence.
fn zonal_sum<M, W>(n: usize, w: C64, jmax: usize, mu: M, filter: W) -> C64
where
    M: Fn(usize) -> f64,
    W: Fn(usize, usize) -> f64,
{
    let om = sphere_volume(n);
    let x = 2.0 * w.norm_sqr() - 1.0;
    let mut total = C64::new(0.0, 0.0);
    let mut wm = C64::new(1.0, 0.0);
    let inv_nfact = 1.0 / (om * factorial(n));
    for m in 0..=jmax {
        let seq = jacobi_sequence(jmax - m, (n - 1) as f64, m as f64, x);
        let mut diag = 0.0;
        let mut conj_diag = 0.0;
        for (k, p) in seq.iter().enumerate() {
            let j = k + m;
            let pref = pochhammer((j + 1) as f64, n - 1) * (j + k + n) as f64 * inv_nfact * p;
            diag += filter(j, k) * mu(j) * mu(k) * pref;
            if m > 0 {
                conj_diag += filter(k, j) * mu(k) * mu(j) * pref;
            }
        }
        total += wm * diag + wm.conj() * conj_diag;
        wm *= w;
    }
    total
}

fn inverse_lambdas(d: f64, n: usize, jmax: usize) -> Result<Vec<f64>> {
    (0..=jmax).map(|j| lambda_d(j, d, n).map(|l| 1.0 / l)).collect()
}

/// Square truncation `Σ_{j,k ≤ J} Φ_{jk}(w) / (λ_j(d) λ_k(d))` of the series
/// for the fundamental solution of `A_d`.
pub fn fundamental_series(d: f64, w: C64, jmax: usize, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    if d >= hom_dim(n) {
        return invalid("fundamental series needs d < Q");
    }
    let inv = inverse_lambdas(d, n, jmax)?;
    Ok(zonal_sum(n, w, jmax, |j| inv[j], |_, _| 1.0).re)
}

/// Summation filter `(1 - (N/(M+1))⁴)^{12}` on the total degree `N = j + k`.
pub fn degree_filter(total: usize, m: usize) -> f64 {
    let r = total as f64 / (m + 1) as f64;
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - r.powi(4)).powi(12)
    }
}

/// Fundamental-solution series summed over total degree `≤ M` with a smooth
/// degree filter; converges on the whole closed disk away from `w = 1`,
/// where the square truncation oscillates.
pub fn fundamental_series_filtered(d: f64, w: C64, m: usize, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    if d >= hom_dim(n) {
        return invalid("fundamental series needs d < Q");
    }
    let inv = inverse_lambdas(d, n, m)?;
    Ok(zonal_sum(n, w, m, |j| inv[j], |j, k| degree_filter(j + k, m)).re)
}

/// `G'_Q(w) = -(2 / (n! ω_{2n+1})) log|1-w|`, the kernel of `(A'_Q)^{-1}` on `P`.
pub fn log_kernel(w: C64, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    Ok(-2.0 / (factorial(n) * sphere_volume(n)) * (C64::new(1.0, 0.0) - w).norm().ln())
}

/// `(2 / (ω_{2n+1} Γ(Q/2)²)) log²|1-w|`, a kernel for `A_Q^{-1}` modulo `P`.
pub fn log2_kernel(w: C64, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    let g = gamma(hom_dim(n) / 2.0);
    Ok(2.0 / (sphere_volume(n) * g * g) * (C64::new(1.0, 0.0) - w).norm().ln().powi(2))
}

/// Partial sum `2 Re Σ_{1 ≤ j ≤ J} Φ_{j0}(w) / λ_j(Q)` of the series for `G'_Q`.
pub fn log_kernel_series(w: C64, jmax: usize, n: usize) -> Result<f64> {
    check_off_pole(w)?;
    let q = hom_dim(n);
    let mut acc = C64::new(0.0, 0.0);
    let mut wj = C64::new(1.0, 0.0);
    for j in 1..=jmax {
        wj *= w;
        // Φ_{j0}(w) = w^j / ν_j
        acc += wj / (nu(j, n) * lambda_d(j, q, n)?);
    }
    Ok(2.0 * acc.re)
}

/// `∫ d(ζ,η)^{d-Q} dη = 2^{(d-Q)/2} ω_{2n+1} Γ(Q/2) Γ(d/2) / Γ((Q+d)/4)²`.
pub fn normalization_integral(d: f64, n: usize) -> Result<f64> {
    let q = hom_dim(n);
    if !(d > 0.0) {
        return invalid("normalization integral needs d > 0");
    }
    let g = gamma((q + d) / 4.0);
    Ok(2f64.powf((d - q) / 2.0) * sphere_volume(n) * gamma(q / 2.0) * gamma(d / 2.0) / (g * g))
}
