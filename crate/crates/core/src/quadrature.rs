//! Quadrature rules: the zonal pushforward on the unit disk, the slice
//! `Sigma` used for theta-profiles, and product grids on `S^3` and `S^5`.
//!
//! All sums are evaluated in fixed-size chunks whose partial sums are added
//! in order, so results do not depend on the number of worker threads.

use crate::geometry::SpherePoint;
use crate::{invalid, sphere_volume, Error, Result, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

const CHUNK: usize = 2048;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..(m + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = mf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre on each panel `[a, b]`, concatenated.
pub fn composite_gauss(breaks: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(per_panel);
    let mut xs = Vec::with_capacity(breaks.len() * per_panel);
    let mut ws = Vec::with_capacity(breaks.len() * per_panel);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(c + h * x);
            ws.push(h * w);
        }
    }
    (xs, ws)
}

/// Break points on `[a, b]` refined geometrically (ratio 1/2) toward `a`.
pub fn geometric_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let mut out = vec![a];
    for k in (0..panels).rev() {
        out.push(a + (b - a) * 0.5f64.powi(k as i32));
    }
    out
}

fn check_finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("quadrature sample".into()))
    }
}

fn weighted_sum<T, F>(items: &[T], weights: &[f64], f: F) -> Result<f64>
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    let partial: Vec<f64> = items
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(xs, ws)| xs.iter().zip(ws).map(|(x, w)| w * f(x)).sum::<f64>())
        .collect();
    check_finite(partial.iter().sum())
}

fn weighted_sum_complex<T, F>(items: &[T], weights: &[f64], f: F) -> Result<C64>
where
    T: Sync,
    F: Fn(&T) -> C64 + Sync,
{
    let partial: Vec<C64> = items
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(xs, ws)| xs.iter().zip(ws).map(|(x, w)| f(x) * *w).sum::<C64>())
        .collect();
    let s: C64 = partial.iter().sum();
    check_finite(s.re)?;
    check_finite(s.im)?;
    Ok(s)
}

/// Rule on the unit disk realizing `∫_{S^{2n+1}} f(ζ_{n+1}) dζ = ∫_D f(w) κ_n (1-|w|²)^{n-1} dA(w)`
/// with `κ_n = n ω_{2n+1} / π`.
#[derive(Debug, Clone)]
pub struct DiskRule {
    pub n: usize,
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
}

fn disk_density(n: usize, w: C64) -> f64 {
    let kappa = n as f64 * sphere_volume(n) / PI;
    kappa * (1.0 - w.norm_sqr()).max(0.0).powi(n as i32 - 1)
}

impl DiskRule {
    /// Gauss-Legendre in the radius times the trapezoid rule in the angle.
    pub fn new(n: usize, n_r: usize, n_ang: usize) -> Result<Self> {
        if n == 0 || n_r < 2 || n_ang < 2 {
            return invalid("disk rule needs n >= 1 and at least 2 nodes per direction");
        }
        let (rx, rw) = gauss_legendre(n_r);
        let mut nodes = Vec::with_capacity(n_r * n_ang);
        let mut weights = Vec::with_capacity(n_r * n_ang);
        let dphi = 2.0 * PI / n_ang as f64;
        for (x, wx) in rx.iter().zip(&rw) {
            let r = 0.5 * (x + 1.0);
            for a in 0..n_ang {
                let w = C64::from_polar(r, (a as f64 + 0.5) * dphi);
                nodes.push(w);
                weights.push(0.5 * wx * r * dphi * disk_density(n, w));
            }
        }
        Ok(Self { n, nodes, weights })
    }

    /// Rule in polar coordinates centred at the boundary point `w = 1`,
    /// `w = 1 - ρ e^{iψ}`, with Gauss panels refined geometrically toward
    /// `ρ = 0` (the singular point) and toward `ρ = 2`.
    ///
    /// `extra_breaks` adds panel boundaries in `ρ`, used for integrands that
    /// jump across a circle `|1-w| = ρ_0`.
    pub fn graded(
        n: usize,
        panels: usize,
        per_panel: usize,
        n_ang: usize,
        extra_breaks: &[f64],
    ) -> Result<Self> {
        if n == 0 || per_panel < 2 || n_ang < 2 {
            return invalid("graded disk rule needs n >= 1 and at least 2 nodes per panel");
        }
        let mut breaks = geometric_breaks(0.0, 1.0, panels);
        breaks.extend(extra_breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let (mut rho, mut rw) = composite_gauss(&breaks, per_panel);
        // on [1, 2) substitute ρ = 2 - s² to absorb the square-root edge
        let mut sb: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
        sb.extend(
            extra_breaks
                .iter()
                .filter(|&&b| b > 1.0 && b < 2.0)
                .map(|b| (2.0 - b).sqrt()),
        );
        sb.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sb.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let (s, sw) = composite_gauss(&sb, per_panel);
        for (si, wi) in s.iter().zip(&sw) {
            rho.push(2.0 - si * si);
            rw.push(2.0 * si * wi);
        }
        let (px, pw) = gauss_legendre(n_ang);
        let mut nodes = Vec::with_capacity(rho.len() * n_ang);
        let mut weights = Vec::with_capacity(rho.len() * n_ang);
        for (&r, &wr) in rho.iter().zip(&rw) {
            let half = (0.5 * r).min(1.0).acos();
            for (x, wx) in px.iter().zip(&pw) {
                let psi = half * x;
                let w = C64::new(1.0, 0.0) - C64::from_polar(r, psi);
                let dens = {
                    let kappa = n as f64 * sphere_volume(n) / PI;
                    let base = (2.0 * r * psi.cos() - r * r).max(0.0);
                    kappa * base.powi(n as i32 - 1)
                };
                nodes.push(w);
                weights.push(wr * wx * half * r * dens);
            }
        }
        Ok(Self { n, nodes, weights })
    }

    /// Default graded rule: 20 geometric panels, `n_r` radial and `n_ang` angular nodes.
    pub fn default_graded(n: usize, n_r: usize, n_ang: usize) -> Result<Self> {
        let panels = 20;
        let per_panel = (n_r / (panels + 4)).max(6);
        Self::graded(n, panels, per_panel, n_ang, &[])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(C64) -> f64 + Sync>(&self, f: F) -> Result<f64> {
        weighted_sum(&self.nodes, &self.weights, |w| f(*w))
    }

    pub fn integrate_complex<F: Fn(C64) -> C64 + Sync>(&self, f: F) -> Result<C64> {
        weighted_sum_complex(&self.nodes, &self.weights, |w| f(*w))
    }
}

/// Gauss-Legendre rule on `θ ∈ [-π/2, π/2]` for the slice measure
/// `ω_{2n-1} (cos θ)^{n-1} dθ`.
#[derive(Debug, Clone)]
pub struct SigmaRule {
    pub n: usize,
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SigmaRule {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m < 2 {
            return invalid("sigma rule needs n >= 1 and m >= 2");
        }
        let (x, w) = gauss_legendre(m);
        let om = sphere_volume(n - 1);
        let thetas: Vec<f64> = x.iter().map(|x| 0.5 * PI * x).collect();
        let weights = thetas
            .iter()
            .zip(&w)
            .map(|(t, w)| 0.5 * PI * w * om * t.cos().powi(n as i32 - 1))
            .collect();
        Ok(Self { n, thetas, weights })
    }

    /// Composite rule: `panels` uniform panels on `[-π/2, π/2]` with the two
    /// end panels refined geometrically (60 levels) toward `±π/2`, where
    /// kernel profiles may have integrable singularities. Use enough panels
    /// to resolve `cos(fθ)` for the largest frequency `f` of interest.
    pub fn graded(n: usize, panels: usize, per_panel: usize) -> Result<Self> {
        if n == 0 || panels < 2 || per_panel < 2 {
            return invalid("graded sigma rule needs n >= 1, panels >= 2 and per_panel >= 2");
        }
        let h = PI / panels as f64;
        let mut breaks: Vec<f64> = geometric_breaks(0.0, h, 60).iter().map(|x| x - 0.5 * PI).collect();
        breaks.extend((2..panels).map(|i| -0.5 * PI + i as f64 * h));
        breaks.extend(geometric_breaks(0.0, h, 60).iter().rev().map(|x| 0.5 * PI - x));
        let (thetas, w) = composite_gauss(&breaks, per_panel);
        let om = sphere_volume(n - 1);
        let weights = thetas
            .iter()
            .zip(&w)
            .map(|(t, w)| w * om * t.cos().powi(n as i32 - 1))
            .collect();
        Ok(Self { n, thetas, weights })
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Values `f(θ_i)` at all nodes, evaluated in parallel.
    pub fn sample<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        self.thetas.par_iter().map(|&t| f(t)).collect()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let s: f64 = self
            .thetas
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(*t))
            .sum();
        check_finite(s)
    }
}

/// Product grid on `S^3` or `S^5` in torus coordinates.
///
/// The squared moduli `(|ζ_1|², ..., |ζ_{n+1}|²)` are uniformly distributed
/// on the simplex and the phases are independent, so
/// `dζ = 2^{-n} ds dξ`. The simplex is covered by collapsed Gauss-Legendre
/// coordinates and each phase by the trapezoid rule.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n: usize,
    pub nodes: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return invalid("sphere rule needs m >= 2");
        }
        let (gx, gw) = gauss_legendre(m);
        let u: Vec<f64> = gx.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let uw: Vec<f64> = gw.iter().map(|w| 0.5 * w).collect();
        let dxi = 2.0 * PI / m as f64;
        let phases: Vec<C64> = (0..m)
            .map(|a| C64::from_polar(1.0, (a as f64 + 0.5) * dxi))
            .collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match n {
            1 => {
                for (s, ws) in u.iter().zip(&uw) {
                    let (r1, r2) = ((1.0 - s).sqrt(), s.sqrt());
                    for p1 in &phases {
                        for p2 in &phases {
                            nodes.push(SpherePoint::new_unchecked(vec![p1 * r1, p2 * r2]));
                            weights.push(0.5 * ws * dxi * dxi);
                        }
                    }
                }
            }
            2 => {
                for (s3, w3) in u.iter().zip(&uw) {
                    for (v, wv) in u.iter().zip(&uw) {
                        let s2 = (1.0 - s3) * v;
                        let s1 = (1.0 - s3) * (1.0 - v);
                        let wt = 0.25 * w3 * wv * (1.0 - s3) * dxi.powi(3);
                        let (r1, r2, r3) = (s1.sqrt(), s2.sqrt(), s3.sqrt());
                        for p1 in &phases {
                            for p2 in &phases {
                                for p3 in &phases {
                                    nodes.push(SpherePoint::new_unchecked(vec![
                                        p1 * r1,
                                        p2 * r2,
                                        p3 * r3,
                                    ]));
                                    weights.push(wt);
                                }
                            }
                        }
                    }
                }
            }
            _ => return invalid(format!("sphere rule supports n = 1, 2 only, got {n}")),
        }
        Ok(Self { n, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&SpherePoint) -> f64 + Sync>(&self, f: F) -> Result<f64> {
        weighted_sum(&self.nodes, &self.weights, f)
    }

    pub fn integrate_complex<F: Fn(&SpherePoint) -> C64 + Sync>(&self, f: F) -> Result<C64> {
        weighted_sum_complex(&self.nodes, &self.weights, f)
    }
}

/// Default sphere-rule resolution for dimension `n`.
pub fn default_sphere_size(n: usize) -> usize {
    if n == 1 {
        48
    } else {
        24
    }
}
