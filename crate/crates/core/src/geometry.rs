//! Heisenberg group, Cayley transform, CR distances and conformal maps of
//! the sphere together with their Jacobian densities.
//!
//! Conformal maps are stored as words in the generators of the conformal
//! group of `H^n` (left translations, dilations, unitary rotations and the
//! inversion). Each generator also has a closed-form action on the sphere
//! that stays finite at the pole `(0,...,0,-1)`, so the sphere-side action
//! never passes through the Cayley transform.

use crate::quadrature::SphereRule;
use crate::{hom_dim, invalid, sphere_volume, Error, Result, C64};
use nalgebra::DMatrix;

/// Tolerance on `| |ζ|² - 1 |` for points of the sphere.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Hermitian product `z · w̄ = Σ z_j conj(w_j)`.
pub fn herm(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

fn norm_sqr(z: &[C64]) -> f64 {
    z.iter().map(|a| a.norm_sqr()).sum()
}

/// A point `(z, t)` of `H^n = C^n × R`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint {
    pub z: Vec<C64>,
    pub t: f64,
}

impl HeisenbergPoint {
    pub fn new(z: Vec<C64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![C64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn inverse(&self) -> Self {
        Self {
            z: self.z.iter().map(|a| -a).collect(),
            t: -self.t,
        }
    }

    /// Homogeneous norm `(|z|⁴ + t²)^{1/4}`.
    pub fn norm(&self) -> f64 {
        let r2 = norm_sqr(&self.z);
        (r2 * r2 + self.t * self.t).sqrt().sqrt()
    }

    /// `|z|² + i t`, the Siegel coordinate of the point.
    pub fn siegel(&self) -> C64 {
        C64::new(norm_sqr(&self.z), self.t)
    }
}

/// A point of the unit sphere `S^{2n+1} ⊂ C^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub zeta: Vec<C64>,
}

impl SpherePoint {
    pub fn new(zeta: Vec<C64>) -> Result<Self> {
        if zeta.len() < 2 {
            return invalid("sphere points need at least two coordinates");
        }
        let dev = (norm_sqr(&zeta) - 1.0).abs();
        if dev > UNIT_NORM_TOL {
            return invalid(format!("point is off the unit sphere by {dev:e}"));
        }
        Ok(Self { zeta })
    }

    pub fn new_unchecked(zeta: Vec<C64>) -> Self {
        Self { zeta }
    }

    /// The north pole `N = (0,...,0,1)`.
    pub fn north(n: usize) -> Self {
        let mut zeta = vec![C64::new(0.0, 0.0); n + 1];
        zeta[n] = C64::new(1.0, 0.0);
        Self { zeta }
    }

    /// Dimension parameter `n` of `S^{2n+1}`.
    pub fn n(&self) -> usize {
        self.zeta.len() - 1
    }

    /// Last coordinate `ζ_{n+1} = ζ · N̄`.
    pub fn last(&self) -> C64 {
        self.zeta[self.zeta.len() - 1]
    }

    pub fn neg(&self) -> Self {
        Self {
            zeta: self.zeta.iter().map(|a| -a).collect(),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        })
    } else {
        Ok(())
    }
}

/// Group law `(z,t)(z',t') = (z+z', t+t'+2 Im z·z̄')`.
pub fn heis_mul(u: &HeisenbergPoint, v: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    check_dims(u.dim(), v.dim())?;
    let z = u.z.iter().zip(&v.z).map(|(a, b)| a + b).collect();
    let t = u.t + v.t + 2.0 * herm(&u.z, &v.z).im;
    Ok(HeisenbergPoint { z, t })
}

/// Distance `(|z-z'|⁴ + (t-t'-2 Im z·z̄')²)^{1/4}`, i.e. `|u v⁻¹|` for the
/// group law above. It is invariant under right translations, which are the
/// translations that the Cayley transform carries to automorphisms of the sphere.
pub fn heis_dist(u: &HeisenbergPoint, v: &HeisenbergPoint) -> Result<f64> {
    Ok(heis_mul(u, &v.inverse())?.norm())
}

/// Cayley transform `H^n → S^{2n+1} \ {pole}`.
pub fn cayley(u: &HeisenbergPoint) -> SpherePoint {
    let den = C64::new(1.0, 0.0) + u.siegel();
    let mut zeta: Vec<C64> = u.z.iter().map(|a| a * 2.0 / den).collect();
    zeta.push((C64::new(1.0, 0.0) - u.siegel()) / den);
    SpherePoint { zeta }
}

/// Inverse Cayley transform; fails at the pole `(0,...,0,-1)`.
pub fn cayley_inv(p: &SpherePoint) -> Result<HeisenbergPoint> {
    let n = p.n();
    let d = C64::new(1.0, 0.0) + p.zeta[n];
    if d.norm() < 1e-300 {
        return Err(Error::Pole);
    }
    let z = p.zeta[..n].iter().map(|a| a / d).collect();
    let t = ((C64::new(1.0, 0.0) - p.zeta[n]) / d).im;
    Ok(HeisenbergPoint { z, t })
}

/// CR distance on the sphere, `(2|1 - ζ·η̄|)^{1/2}`.
pub fn sphere_dist(a: &SpherePoint, b: &SpherePoint) -> f64 {
    (2.0 * (C64::new(1.0, 0.0) - herm(&a.zeta, &b.zeta)).norm()).sqrt()
}

/// Volume density of the Cayley transform, `2^{2n+1} / ((1+|z|²)² + t²)^{n+1}`.
pub fn jacobian_cayley(u: &HeisenbergPoint) -> f64 {
    let n = u.dim() as i32;
    let r2 = norm_sqr(&u.z);
    2f64.powi(2 * n + 1) / ((1.0 + r2).powi(2) + u.t * u.t).powi(n + 1)
}

/// One generator of the conformal group of `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Right translation `u ↦ u·(z', t')`.
    Translation { z: Vec<C64>, t: f64 },
    /// `(z, t) ↦ (δz, δ²t)`.
    Dilation(f64),
    /// `(z, t) ↦ (Rz, t)` with `R ∈ U(n)`.
    Rotation(DMatrix<C64>),
    /// `(z, t) ↦ (-z/(|z|²+it), -t/(|z|⁴+t²))`.
    Inversion,
}

impl Generator {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Generator::Translation { z, t } => {
                check_dims(n, z.len())?;
                if !t.is_finite() || z.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                    return invalid("translation parameters must be finite");
                }
            }
            Generator::Dilation(d) => {
                if !(*d > 0.0 && d.is_finite()) {
                    return invalid(format!("dilation factor must be positive, got {d}"));
                }
            }
            Generator::Rotation(r) => {
                if r.nrows() != n || r.ncols() != n {
                    return invalid("rotation matrix must be n x n");
                }
                let dev = (r.adjoint() * r - DMatrix::<C64>::identity(n, n)).norm();
                if dev > 1e-12 {
                    return invalid(format!("rotation matrix is not unitary (deviation {dev:e})"));
                }
            }
            Generator::Inversion => {}
        }
        Ok(())
    }

    fn inverse(&self) -> Generator {
        match self {
            Generator::Translation { z, t } => Generator::Translation {
                z: z.iter().map(|a| -a).collect(),
                t: -t,
            },
            Generator::Dilation(d) => Generator::Dilation(1.0 / d),
            Generator::Rotation(r) => Generator::Rotation(r.adjoint()),
            Generator::Inversion => Generator::Inversion,
        }
    }

    fn apply_heis(&self, u: &HeisenbergPoint) -> Result<(HeisenbergPoint, f64)> {
        let q = hom_dim(u.dim());
        Ok(match self {
            Generator::Translation { z, t } => (heis_mul(u, &HeisenbergPoint::new(z.clone(), *t))?, 1.0),
            Generator::Dilation(d) => (
                HeisenbergPoint::new(u.z.iter().map(|a| a * *d).collect(), d * d * u.t),
                d.powf(q),
            ),
            Generator::Rotation(r) => {
                let v = r * nalgebra::DVector::from_column_slice(&u.z);
                (HeisenbergPoint::new(v.iter().copied().collect(), u.t), 1.0)
            }
            Generator::Inversion => {
                let s = u.siegel();
                let nrm = u.norm();
                if nrm == 0.0 {
                    return Err(Error::Pole);
                }
                let z = u.z.iter().map(|a| -a / s).collect();
                let t = -u.t / s.norm_sqr();
                (HeisenbergPoint::new(z, t), nrm.powf(-2.0 * q))
            }
        })
    }

    /// Sphere action and Jacobian density at `ζ`, finite everywhere.
    fn apply_sphere(&self, p: &SpherePoint) -> (SpherePoint, f64) {
        let n = p.n();
        let q = hom_dim(n);
        let one = C64::new(1.0, 0.0);
        let w = p.zeta[n];
        let prime = &p.zeta[..n];
        match self {
            Generator::Dilation(d) => {
                let (dd, b) = (one + w, one - w);
                let den = dd + b * (d * d);
                let mut zeta: Vec<C64> = prime.iter().map(|a| a * (2.0 * d) / den).collect();
                zeta.push((dd - b * (d * d)) / den);
                (SpherePoint { zeta }, (2.0 * d / den.norm()).powf(q))
            }
            Generator::Translation { z: a, t: s } => {
                // work with D = 1 + ζ_{n+1}; z D = ζ', A D = 1 - ζ_{n+1},
                // and A ↦ A + |a|² + is + 2 z·ā
                let dd = one + w;
                let ad_new = (one - w) + dd * C64::new(norm_sqr(a), *s) + herm(prime, a) * 2.0;
                let den = dd + ad_new;
                let mut zeta: Vec<C64> = a
                    .iter()
                    .zip(prime)
                    .map(|(ai, zi)| (ai * dd + zi) * 2.0 / den)
                    .collect();
                zeta.push((dd - ad_new) / den);
                (SpherePoint { zeta }, (2.0 / den.norm()).powf(q))
            }
            Generator::Rotation(r) => {
                let v = r * nalgebra::DVector::from_column_slice(prime);
                let mut zeta: Vec<C64> = v.iter().copied().collect();
                zeta.push(w);
                (SpherePoint { zeta }, 1.0)
            }
            Generator::Inversion => (p.neg(), 1.0),
        }
    }
}

/// A conformal automorphism of the sphere given as a word of generators.
///
/// The word `[g_1, ..., g_k]` denotes `g_k ∘ ... ∘ g_1`: `g_1` acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap {
    pub n: usize,
    pub word: Vec<Generator>,
}

impl ConformalMap {
    pub fn identity(n: usize) -> Self {
        Self { n, word: vec![] }
    }

    pub fn new(n: usize, word: Vec<Generator>) -> Result<Self> {
        for g in &word {
            g.validate(n)?;
        }
        Ok(Self { n, word })
    }

    pub fn dilation(n: usize, delta: f64) -> Result<Self> {
        Self::new(n, vec![Generator::Dilation(delta)])
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &ConformalMap) -> Result<Self> {
        check_dims(self.n, other.n)?;
        let mut word = self.word.clone();
        word.extend(other.word.iter().cloned());
        Ok(Self { n: self.n, word })
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            word: self.word.iter().rev().map(Generator::inverse).collect(),
        }
    }

    /// `(τ(ζ), |J_τ(ζ)|)` by the chain rule through the word.
    pub fn apply_with_jacobian(&self, p: &SpherePoint) -> Result<(SpherePoint, f64)> {
        check_dims(self.n, p.n())?;
        let mut cur = p.clone();
        let mut jac = 1.0;
        for g in &self.word {
            let (next, j) = g.apply_sphere(&cur);
            cur = next;
            jac *= j;
        }
        if !jac.is_finite() || cur.zeta.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("conformal map evaluation".into()));
        }
        Ok((cur, jac))
    }

    pub fn apply(&self, p: &SpherePoint) -> Result<SpherePoint> {
        Ok(self.apply_with_jacobian(p)?.0)
    }

    pub fn jacobian(&self, p: &SpherePoint) -> Result<f64> {
        Ok(self.apply_with_jacobian(p)?.1)
    }

    /// Action on `H^n` and its Jacobian; fails if a point hits the origin
    /// before an inversion.
    pub fn apply_heis(&self, u: &HeisenbergPoint) -> Result<(HeisenbergPoint, f64)> {
        check_dims(self.n, u.dim())?;
        let mut cur = u.clone();
        let mut jac = 1.0;
        for g in &self.word {
            let (next, j) = g.apply_heis(&cur)?;
            cur = next;
            jac *= j;
        }
        Ok((cur, jac))
    }
}

/// Jacobian density in the form `C / |1 - ω·ζ|^Q` with `ω·ζ = Σ ω_j ζ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianProfile {
    pub c: f64,
    pub omega: Vec<C64>,
}

impl JacobianProfile {
    pub fn new(c: f64, omega: Vec<C64>) -> Result<Self> {
        if !(c > 0.0) {
            return invalid("profile constant must be positive");
        }
        if norm_sqr(&omega) >= 1.0 {
            return invalid("profile vector must lie in the open unit ball");
        }
        Ok(Self { c, omega })
    }

    /// Profile with `ω = s N`.
    pub fn axial(n: usize, s: C64) -> Result<Self> {
        let mut omega = vec![C64::new(0.0, 0.0); n + 1];
        omega[n] = s;
        Self::new(normalize_profile(&omega)?, omega)
    }

    pub fn n(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn eval(&self, p: &SpherePoint) -> f64 {
        let q = hom_dim(self.n());
        let dot: C64 = self.omega.iter().zip(&p.zeta).map(|(a, b)| a * b).sum();
        self.c / (C64::new(1.0, 0.0) - dot).norm().powf(q)
    }
}

/// Constant `C` making `C / |1 - ω·ζ|^Q` a probability density for `dζ/ω_{2n+1}`.
pub fn normalize_profile(omega: &[C64]) -> Result<f64> {
    let r2 = norm_sqr(omega);
    if r2 >= 1.0 {
        return invalid("profile vector must lie in the open unit ball");
    }
    Ok((1.0 - r2).powi(omega.len() as i32))
}

/// Recover `(C, ω)` for the Jacobian of `τ` from the first moments of
/// `|J_τ|^{-2/Q}`, which is the quadratic polynomial `C^{-2/Q} |1 - ω·ζ|²`.
pub fn fit_profile(tau: &ConformalMap) -> Result<JacobianProfile> {
    let n = tau.n;
    let rule = SphereRule::new(n, 8)?;
    let q = hom_dim(n);
    let om = sphere_volume(n);
    let samples: Vec<(SpherePoint, f64)> = rule
        .nodes
        .iter()
        .map(|p| Ok((p.clone(), tau.jacobian(p)?.powf(-2.0 / q))))
        .collect::<Result<_>>()?;
    let mut m = 0.0;
    let mut v = vec![C64::new(0.0, 0.0); n + 1];
    for ((p, g), w) in samples.iter().zip(&rule.weights) {
        m += w * g;
        for (vj, zj) in v.iter_mut().zip(&p.zeta) {
            *vj += zj.conj() * (w * g);
        }
    }
    m /= om;
    v.iter_mut().for_each(|a| *a /= om);
    let nf = (n + 1) as f64;
    let disc = m * m - 4.0 * nf * norm_sqr(&v);
    let c0 = 0.5 * (m + disc.max(0.0).sqrt());
    let omega: Vec<C64> = v.iter().map(|a| -a * nf / c0).collect();
    JacobianProfile::new(c0.powf(-q / 2.0), omega)
}
