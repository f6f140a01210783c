//! Bigraded harmonic spaces `H_{jk}` through their zonal kernels `Φ_{jk}`,
//! zonal projections and real pluriharmonic functions `Re Σ a_j ζ_{n+1}^j`.

use crate::geometry::{JacobianProfile, SpherePoint};
use crate::quadrature::DiskRule;
use crate::special::{factorial, jacobi_poly, jacobi_sequence, pochhammer};
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Default truncation degree for pluriharmonic expansions.
pub const DEFAULT_JMAX: usize = 32;

fn binom(top: usize, k: usize) -> f64 {
    let k = k.min(top - k);
    (1..=k).map(|i| (top - k + i) as f64 / i as f64).product()
}

/// `dim H_{jk} = (j+n-1)! (k+n-1)! (j+k+n) / (n! (n-1)! j! k!)`.
pub fn dim_hjk(j: usize, k: usize, n: usize) -> u64 {
    assert!(n >= 1, "n must be positive");
    let v = binom(j + n - 1, j) * binom(k + n - 1, k) * (j + k + n) as f64 / n as f64;
    v.round() as u64
}

/// Zonal kernel `Φ_{jk}(w)` of the orthogonal projection onto `H_{jk}`,
/// so that `Φ_{jk}(ζ·η̄)` is the reproducing kernel of `H_{jk}`.
pub fn zonal_phi(j: usize, k: usize, w: C64, n: usize) -> C64 {
    if j < k {
        return zonal_phi(k, j, w, n).conj();
    }
    let om = sphere_volume(n);
    let pref = pochhammer((j + 1) as f64, n - 1) * (j + k + n) as f64 / (om * factorial(n));
    let p = jacobi_poly(k, (n - 1) as f64, (j - k) as f64, 2.0 * w.norm_sqr() - 1.0);
    w.powu((j - k) as u32) * (pref * p)
}

/// All `Φ_{jk}(w)` with `j, k ≤ J`, row-major in `(j, k)`.
pub fn zonal_phi_table(jmax: usize, w: C64, n: usize) -> Vec<C64> {
    let size = jmax + 1;
    let mut out = vec![C64::new(0.0, 0.0); size * size];
    let inv = 1.0 / (sphere_volume(n) * factorial(n));
    let x = 2.0 * w.norm_sqr() - 1.0;
    let mut wm = C64::new(1.0, 0.0);
    for m in 0..=jmax {
        let seq = jacobi_sequence(jmax - m, (n - 1) as f64, m as f64, x);
        for (k, p) in seq.iter().enumerate() {
            let j = k + m;
            let v = wm * (pochhammer((j + 1) as f64, n - 1) * (j + k + n) as f64 * inv * p);
            out[j * size + k] = v;
            out[k * size + j] = v.conj();
        }
        wm *= w;
    }
    out
}

/// `ν_j = ∫ |ζ_{n+1}|^{2j} dζ = ω_{2n+1} n! j! / (n+j)!`.
pub fn nu(j: usize, n: usize) -> f64 {
    sphere_volume(n) * factorial(n) / pochhammer((j + 1) as f64, n)
}

/// Amplitude `c` of the `H_{jk}` part `c Φ_{jk}(ζ_{n+1})` of a function of `ζ_{n+1}`.
pub fn project_component<F>(rule: &DiskRule, f: F, j: usize, k: usize) -> Result<C64>
where
    F: Fn(C64) -> C64 + Sync,
{
    let n = rule.n;
    let norm = dim_hjk(j, k, n) as f64 / sphere_volume(n);
    let ip = rule.integrate_complex(|w| f(w) * zonal_phi(j, k, w, n).conj())?;
    Ok(ip / norm)
}

/// Zonal function `Σ c_{jk} Φ_{jk}(ζ_{n+1})` with `j, k ≤ J_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernelSeries {
    pub n: usize,
    pub jmax: usize,
    pub coeffs: BTreeMap<(usize, usize), C64>,
}

impl ZonalKernelSeries {
    /// Projects `f` onto every `H_{jk}`, `j, k ≤ J_max`, with one pass over the rule.
    pub fn from_fn<F>(rule: &DiskRule, jmax: usize, f: F) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Sync,
    {
        let n = rule.n;
        let size = jmax + 1;
        let chunk = rule.nodes.len().div_ceil(64).max(1);
        let partial: Vec<Vec<C64>> = rule
            .nodes
            .par_chunks(chunk)
            .zip(rule.weights.par_chunks(chunk))
            .map(|(ws, wts)| {
                let mut acc = vec![C64::new(0.0, 0.0); size * size];
                for (w, wt) in ws.iter().zip(wts) {
                    let fw = f(*w) * *wt;
                    if fw == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (a, phi) in acc.iter_mut().zip(zonal_phi_table(jmax, *w, n)) {
                        *a += fw * phi.conj();
                    }
                }
                acc
            })
            .collect();
        let om = sphere_volume(n);
        let mut coeffs = BTreeMap::new();
        for j in 0..size {
            for k in 0..size {
                let ip: C64 = partial.iter().map(|p| p[j * size + k]).sum();
                if !(ip.re.is_finite() && ip.im.is_finite()) {
                    return Err(Error::NonFinite("zonal projection".into()));
                }
                coeffs.insert((j, k), ip * (om / dim_hjk(j, k, n) as f64));
            }
        }
        Ok(Self { n, jmax, coeffs })
    }

    /// Values at many points, evaluated in parallel.
    pub fn eval_many(&self, ws: &[C64]) -> Vec<C64> {
        let size = self.jmax + 1;
        let mut dense = vec![C64::new(0.0, 0.0); size * size];
        for (&(j, k), c) in &self.coeffs {
            dense[j * size + k] = *c;
        }
        ws.par_iter()
            .map(|w| {
                zonal_phi_table(self.jmax, *w, self.n)
                    .iter()
                    .zip(&dense)
                    .map(|(p, c)| p * c)
                    .sum()
            })
            .collect()
    }

    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        self.coeffs.get(&(j, k)).copied().unwrap_or_default()
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.coeffs
            .iter()
            .map(|(&(j, k), c)| c * zonal_phi(j, k, w, self.n))
            .sum()
    }

    /// Largest violation of `c_{jk} = conj(c_{kj})`.
    pub fn hermitian_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(j, k), c)| (c - self.coeff(k, j).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projection onto the CR-pluriharmonic part: drop `(j, k)` with `j, k ≥ 1`.
    pub fn pluri_project(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(j, k), _)| j == 0 || k == 0)
            .map(|(&jk, &c)| (jk, c))
            .collect();
        Self { n: self.n, jmax: self.jmax, coeffs }
    }

    /// The pluriharmonic part as `Re Σ a_j ζ_{n+1}^j`; assumes Hermitian coefficients.
    pub fn to_pluri(&self) -> ZonalPluriharmonic {
        let n = self.n;
        let mut a = vec![C64::new(self.coeff(0, 0).re / sphere_volume(n), 0.0)];
        for j in 1..=self.jmax {
            let cj = 0.5 * (self.coeff(j, 0) + self.coeff(0, j).conj());
            a.push(cj * (2.0 / nu(j, n)));
        }
        ZonalPluriharmonic { n, a }
    }
}

/// Projection of a zonal function onto the pluriharmonic functions, returned
/// in the series representation (only `j·k = 0` entries).
pub fn pluri_project<F>(rule: &DiskRule, jmax: usize, f: F) -> Result<ZonalKernelSeries>
where
    F: Fn(C64) -> C64 + Sync,
{
    let n = rule.n;
    let mut coeffs = BTreeMap::new();
    coeffs.insert((0, 0), project_component(rule, &f, 0, 0)?);
    for j in 1..=jmax {
        coeffs.insert((j, 0), project_component(rule, &f, j, 0)?);
        coeffs.insert((0, j), project_component(rule, &f, 0, j)?);
    }
    Ok(ZonalKernelSeries { n, jmax, coeffs })
}

/// Real pluriharmonic function `F(ζ) = Re Σ_{j ≤ J_max} a_j ζ_{n+1}^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalPluriharmonic {
    pub n: usize,
    pub a: Vec<C64>,
}

impl ZonalPluriharmonic {
    pub fn new(n: usize, a: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return invalid("n must be positive");
        }
        if a.is_empty() {
            return invalid("need at least the constant coefficient");
        }
        if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("coefficients must be finite");
        }
        Ok(Self { n, a })
    }

    pub fn zero(n: usize, jmax: usize) -> Self {
        Self { n, a: vec![C64::new(0.0, 0.0); jmax + 1] }
    }

    pub fn jmax(&self) -> usize {
        self.a.len() - 1
    }

    /// Value at a point with last coordinate `w`.
    pub fn eval_w(&self, w: C64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.a.iter().rev() {
            acc = acc * w + c;
        }
        acc.re
    }

    pub fn eval(&self, p: &SpherePoint) -> f64 {
        self.eval_w(p.last())
    }

    pub fn mean(&self) -> f64 {
        self.a[0].re
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, a: self.a.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.a.len().max(other.a.len());
        let get = |v: &[C64], i: usize| v.get(i).copied().unwrap_or_default();
        Self {
            n: self.n,
            a: (0..len).map(|i| get(&self.a, i) + get(&other.a, i)).collect(),
        }
    }

    /// Same function with the mean moved to `m`.
    pub fn with_mean(&self, m: f64) -> Self {
        let mut a = self.a.clone();
        a[0] = C64::new(m, 0.0);
        Self { n: self.n, a }
    }
}

/// Expansion of `log|J|` for a profile with `ω = s N`:
/// `log C + Q Re Σ_{j ≥ 1} s^j ζ_{n+1}^j / j`, truncated at `J_max`.
/// Returns the function and the sup-norm truncation bound
/// `Q |s|^{J+1} / ((J+1)(1-|s|))`.
pub fn log_jacobian_pluri(p: &JacobianProfile, jmax: usize) -> Result<(ZonalPluriharmonic, f64)> {
    let n = p.n();
    if p.omega[..n].iter().any(|c| c.norm() > 1e-12) {
        return invalid("profile must be axial (ω parallel to N)");
    }
    let s = p.omega[n];
    let r = s.norm();
    if r >= 1.0 {
        return invalid("profile parameter must satisfy |s| < 1");
    }
    let q = hom_dim(n);
    let mut a = vec![C64::new(p.c.ln(), 0.0)];
    let mut sp = C64::new(1.0, 0.0);
    for j in 1..=jmax {
        sp *= s;
        a.push(sp * (q / j as f64));
    }
    let bound = q * r.powi(jmax as i32 + 1) / ((jmax + 1) as f64 * (1.0 - r));
    Ok((ZonalPluriharmonic { n, a }, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereRule;
    use crate::special::gamma_ratio;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dimension_examples() {
        for n in 1..=4 {
            assert_eq!(dim_hjk(0, 0, n), 1);
            assert_eq!(dim_hjk(1, 0, n), n as u64 + 1);
            assert_eq!(dim_hjk(1, 0, n) + dim_hjk(0, 1, n), 2 * n as u64 + 2);
        }
        assert_eq!(dim_hjk(1, 1, 1), 3);
        // total degree-m harmonics on S^3: (m+1)²
        for m in 0..6 {
            let s: u64 = (0..=m).map(|j| dim_hjk(j, m - j, 1)).sum();
            assert_eq!(s, (m as u64 + 1).pow(2));
        }
    }

    #[test]
    fn phi_examples() {
        for n in 1..=3 {
            let om = sphere_volume(n);
            assert_relative_eq!(zonal_phi(0, 0, c(0.3, 0.1), n).re, 1.0 / om, max_relative = 1e-14);
            for j in 0..6 {
                let v = zonal_phi(j, 0, c(1.0, 0.0), n);
                assert_relative_eq!(v.re, factorial(j + n) / (factorial(j) * factorial(n) * om), max_relative = 1e-13);
                for k in 0..6 {
                    let v = zonal_phi(j, k, c(1.0, 0.0), n);
                    assert_relative_eq!(v.re, dim_hjk(j, k, n) as f64 / om, max_relative = 1e-12);
                }
            }
        }
        let w = c(0.3, -0.5);
        assert_eq!(zonal_phi(0, 3, w, 2), zonal_phi(3, 0, w, 2).conj());
    }

    #[test]
    fn phi_table_matches_pointwise() {
        for n in 1..=3 {
            let w = c(0.3, -0.55);
            let t = zonal_phi_table(6, w, n);
            for j in 0..=6 {
                for k in 0..=6 {
                    let d = (t[j * 7 + k] - zonal_phi(j, k, w, n)).norm();
                    assert!(d < 1e-12 * (1.0 + zonal_phi(j, k, w, n).norm()));
                }
            }
        }
        let rule = DiskRule::new(1, 40, 64).unwrap();
        let s = ZonalKernelSeries::from_fn(&rule, 5, |w| (w * w.conj() + w).exp()).unwrap();
        let pts = [c(0.1, 0.2), c(-0.7, 0.1)];
        for (p, v) in pts.iter().zip(s.eval_many(&pts)) {
            assert!((s.eval(*p) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_orthogonality_and_reproducing() {
        let rule = DiskRule::new(1, 40, 40).unwrap();
        let om = sphere_volume(1);
        for (j, k) in [(2usize, 1usize), (0, 0), (3, 0), (1, 3)] {
            for j2 in 0..=4 {
                for k2 in 0..=4 {
                    let a = project_component(&rule, |w| zonal_phi(j, k, w, 1), j2, k2).unwrap();
                    let expect = if (j, k) == (j2, k2) { 1.0 } else { 0.0 };
                    assert!((a - expect).norm() < 1e-8, "{j}{k} vs {j2}{k2}: {a}");
                }
            }
            // ∫|Φ_jk(ζ_{n+1})|² dζ = Φ_jk(1)
            let sq = rule.integrate(|w| zonal_phi(j, k, w, 1).norm_sqr()).unwrap();
            assert_relative_eq!(sq, dim_hjk(j, k, 1) as f64 / om, max_relative = 1e-10);
        }
    }

    #[test]
    fn fundamental_solution_components() {
        // n = 1, d = 2: c_2 = 1/π, λ_j(2) = Γ(j+3/2)/Γ(j+1/2)
        let rule = DiskRule::default_graded(1, 480, 64).unwrap();
        let f = |w: C64| C64::new(1.0 / (std::f64::consts::PI * 2.0 * (C64::new(1.0, 0.0) - w).norm()), 0.0);
        for j in 0..=3usize {
            for k in 0..=3usize {
                let lj = gamma_ratio(j as f64 + 1.5, j as f64 + 0.5).unwrap();
                let lk = gamma_ratio(k as f64 + 1.5, k as f64 + 0.5).unwrap();
                let a = project_component(&rule, f, j, k).unwrap();
                assert!((a - 1.0 / (lj * lk)).norm() < 1e-4, "({j},{k}) {a}");
            }
        }
    }

    #[test]
    fn pluri_projection_examples() {
        let rule = DiskRule::new(2, 32, 32).unwrap();
        // already pluriharmonic
        let f = |w: C64| C64::new((w * w * c(0.5, 0.2)).re + 0.3 + w.re, 0.0);
        let p = pluri_project(&rule, 6, f).unwrap().to_pluri();
        let expect = [c(0.3, 0.0), c(1.0, 0.0), c(0.5, 0.2)];
        for (j, e) in expect.iter().enumerate() {
            assert!((p.a[j] - e).norm() < 1e-10);
        }
        assert!(p.a[3..].iter().all(|a| a.norm() < 1e-10));
        // |w|² projects to its mean
        let q = pluri_project(&rule, 6, |w| C64::new(w.norm_sqr(), 0.0)).unwrap().to_pluri();
        assert_relative_eq!(q.mean(), 1.0 / 3.0, max_relative = 1e-12);
        assert!(q.a[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn pluri_projection_is_idempotent_and_self_adjoint() {
        let rule = DiskRule::new(1, 32, 48).unwrap();
        let f = |w: C64| C64::new((1.0 + w.re * 0.7 - w.im * 0.2).exp() * (1.0 + w.norm_sqr()), 0.0);
        let g = |w: C64| C64::new((w.re * w.im).sin() + w.norm_sqr().powi(2), 0.0);
        let pf = ZonalKernelSeries::from_fn(&rule, 6, f).unwrap().pluri_project();
        let pf2 = ZonalKernelSeries::from_fn(&rule, 6, |w| pf.eval(w)).unwrap().pluri_project();
        for (k, v) in &pf.coeffs {
            assert!((v - pf2.coeff(k.0, k.1)).norm() < 1e-8);
        }
        let pg = ZonalKernelSeries::from_fn(&rule, 6, g).unwrap().pluri_project();
        let sphere = SphereRule::new(1, 40).unwrap();
        let lhs = sphere.integrate(|p| pf.eval(p.last()).re * g(p.last()).re).unwrap();
        let rhs = sphere.integrate(|p| f(p.last()).re * pg.eval(p.last()).re).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
    }

    #[test]
    fn pluri_function_basics() {
        let f = ZonalPluriharmonic::new(1, vec![c(2.5, 0.0)]).unwrap();
        assert_eq!(f.eval_w(c(0.3, 0.4)), 2.5);
        assert_eq!(f.mean(), 2.5);
        let g = ZonalPluriharmonic::new(1, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(g.mean(), 0.0);
        let h = ZonalPluriharmonic::new(2, vec![c(0.4, 0.0), c(0.2, -0.3), c(-0.1, 0.5)]).unwrap();
        let sphere = SphereRule::new(2, 12).unwrap();
        let m = sphere.integrate(|p| h.eval(p)).unwrap() / sphere_volume(2);
        assert_relative_eq!(m, 0.4, max_relative = 1e-10);
    }

    #[test]
    fn log_jacobian_expansion() {
        let prof = JacobianProfile::axial(1, c(0.5, 0.0)).unwrap();
        let (f, bound) = log_jacobian_pluri(&prof, 40).unwrap();
        let sphere = SphereRule::new(1, 24).unwrap();
        for p in sphere.nodes.iter().step_by(97) {
            assert!((f.eval(p) - prof.eval(p).ln()).abs() <= bound + 1e-12);
        }
        let mean_exp = sphere.integrate(|p| f.eval(p).exp()).unwrap() / sphere_volume(1);
        assert_relative_eq!(mean_exp, 1.0, max_relative = 1e-6);
        let flat = JacobianProfile::new(2.0, vec![c(0.0, 0.0); 2]).unwrap();
        let (g, b) = log_jacobian_pluri(&flat, 8).unwrap();
        assert_eq!(g.eval_w(c(0.1, 0.9)), 2f64.ln());
        assert_eq!(b, 0.0);
    }
}
