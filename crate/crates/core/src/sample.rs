//! Seeded random points and conformal words for tests and probes.

use crate::functionals::SmoothWeight;
use crate::geometry::{ConformalMap, Generator, HeisenbergPoint, SpherePoint};
use crate::harmonics::{nu, ZonalPluriharmonic};
use crate::{sphere_volume, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn gauss_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

/// Uniformly distributed point of `S^{2n+1}`.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpherePoint {
    let v: Vec<C64> = (0..=n).map(|_| gauss_c(rng)).collect();
    let r = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    SpherePoint::new_unchecked(v.into_iter().map(|a| a / r).collect())
}

/// Point of `H^n` with standard normal coordinates.
pub fn heis_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HeisenbergPoint {
    HeisenbergPoint::new((0..n).map(|_| gauss_c(rng)).collect(), gauss(rng))
}

/// Haar-distributed unitary `n × n` matrix (QR of a Ginibre matrix with
/// the phases of `diag(R)` removed).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gauss_c(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random generator; dilation factors are log-normal with spread `0.5`.
pub fn generator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Generator {
    match rng.random_range(0..4) {
        0 => Generator::Translation {
            z: (0..n).map(|_| gauss_c(rng) * 0.7).collect(),
            t: gauss(rng),
        },
        1 => Generator::Dilation((0.5 * gauss(rng)).exp()),
        2 => Generator::Rotation(unitary(rng, n)),
        _ => Generator::Inversion,
    }
}

/// Random word with between one and `max_len` generators.
pub fn conformal_word<R: Rng + ?Sized>(rng: &mut R, n: usize, max_len: usize) -> ConformalMap {
    let len = rng.random_range(1..=max_len.max(1));
    let word = (0..len).map(|_| generator(rng, n)).collect();
    ConformalMap::new(n, word).expect("sampled generators are valid")
}

/// Zonal `F = Re Σ_{j ≤ degree} a_j ζ_{n+1}^j` with a Gaussian direction and
/// `L²` norm `(⨍ F²)^{1/2}` uniform in `[0, max_norm]`; the mean is zero.
pub fn zonal_pluri<R: Rng + ?Sized>(rng: &mut R, n: usize, degree: usize, max_norm: f64) -> ZonalPluriharmonic {
    let mut a = vec![C64::new(0.0, 0.0)];
    a.extend((1..=degree).map(|_| gauss_c(rng)));
    let om = sphere_volume(n);
    let norm = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.norm_sqr() * nu(j, n) / (2.0 * om))
        .sum::<f64>()
        .sqrt();
    let target = max_norm * rng.random::<f64>();
    let scale = if norm > 0.0 { target / norm } else { 0.0 };
    ZonalPluriharmonic { n, a: a.into_iter().map(|c| c * scale).collect() }
}

/// Positive weight `exp(amp · quadratic form in ζ, ζ̄)` with Gaussian coefficients.
pub fn smooth_weight<R: Rng + ?Sized>(rng: &mut R, n: usize, amp: f64) -> SmoothWeight {
    let k = n + 1;
    let s = amp / k as f64;
    SmoothWeight {
        b: (0..k).map(|_| gauss_c(rng) * s).collect(),
        m: DMatrix::from_fn(k, k, |_, _| gauss_c(rng) * s),
        p: DMatrix::from_fn(k, k, |_, _| gauss_c(rng) * s),
    }
}
