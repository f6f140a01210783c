//! Scalar special functions: log-gamma, gamma ratios, Pochhammer symbols,
//! Jacobi polynomials and zeta-type sums with tail bounds.

use crate::{invalid, Result};

/// A truncated series together with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT: f64 = 20.0;

fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * r + c;
    }
    acc / x
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    let mut x = x;
    let mut prod = 1.0;
    while x < SHIFT {
        prod *= x;
        x += 1.0;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x) - prod.ln()
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x <= 171.0 {
        return factorial(x as usize - 1);
    }
    ln_gamma(x).exp()
}

/// `k!` as a float.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `Gamma(a) / Gamma(b)` for positive arguments.
///
/// Both arguments are shifted above 20 by the recurrence, then the ratio of
/// the Stirling expansions is formed without cancellation.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return invalid(format!("gamma_ratio needs positive arguments, got ({a}, {b})"));
    }
    if a == b {
        return Ok(1.0);
    }
    let (mut a, mut b) = (a, b);
    let mut r = 1.0;
    while a < SHIFT {
        r /= a;
        a += 1.0;
    }
    while b < SHIFT {
        r *= b;
        b += 1.0;
    }
    let diff = a - b;
    let l = (a - 0.5) * (diff / b).ln_1p() + diff * (b.ln() - 1.0) + stirling_tail(a)
        - stirling_tail(b);
    Ok(r * l.exp())
}

/// Rising factorial `(x)_m = x (x+1) ... (x+m-1)` for any real `x`.
pub fn pochhammer(x: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// Generalized binomial `(x)_m / m!`.
pub fn rising_over_factorial(x: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (x + i as f64) / (i + 1) as f64)
}

/// Jacobi polynomial `P_k^{(alpha, beta)}(x)` by the three-term recurrence.
pub fn jacobi_poly(k: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ab = alpha + beta;
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (alpha - beta + (ab + 2.0) * x);
    for m in 2..=k {
        let m = m as f64;
        let c = 2.0 * m + ab;
        let a1 = 2.0 * m * (m + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_0, ..., P_{kmax}` of the Jacobi family at one point.
pub fn jacobi_sequence(kmax: usize, alpha: f64, beta: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    let ab = alpha + beta;
    out.push(0.5 * (alpha - beta + (ab + 2.0) * x));
    for m in 2..=kmax {
        let mf = m as f64;
        let c = 2.0 * mf + ab;
        let a1 = 2.0 * mf * (mf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (mf + alpha - 1.0) * (mf + beta - 1.0) * c;
        out.push(((a2 + a3 * x) * out[m - 1] - a4 * out[m - 2]) / a1);
    }
    out
}

/// `sum_{k=0}^{K} (k+a)^{-s}` with the integral-test bound on the tail.
pub fn zeta_partial(s: f64, a: f64, k_max: usize) -> Result<SeriesValue> {
    if s <= 1.0 {
        return invalid(format!("zeta_partial needs s > 1, got {s}"));
    }
    if a <= 0.0 {
        return invalid(format!("zeta_partial needs a > 0, got {a}"));
    }
    // summed from the small terms upwards
    let value = (0..=k_max)
        .rev()
        .map(|k| (k as f64 + a).powf(-s))
        .sum::<f64>();
    let tail_bound = (k_max as f64 + a).powf(1.0 - s) / (s - 1.0);
    Ok(SeriesValue {
        value,
        tail_bound,
        terms_used: k_max + 1,
    })
}

// B_{2j} / (2j)! for j = 1..8
const EM_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Hurwitz zeta `zeta(s, a) = sum_{k>=0} (k+a)^{-s}` by Euler-Maclaurin.
///
/// The reported tail bound is the magnitude of the first omitted correction.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<SeriesValue> {
    if s <= 1.0 {
        return invalid(format!("hurwitz_zeta needs s > 1, got {s}"));
    }
    if a <= 0.0 {
        return invalid(format!("hurwitz_zeta needs a > 0, got {a}"));
    }
    let big_n = 24usize;
    let head: f64 = (0..big_n)
        .rev()
        .map(|k| (k as f64 + a).powf(-s))
        .sum();
    let x = big_n as f64 + a;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising product s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    let mut fac = s;
    let mut pow = x.powf(-s - 1.0);
    let mut last = 0.0;
    for (j, c) in EM_COEFFS.iter().enumerate() {
        if j > 0 {
            fac *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
            pow /= x * x;
        }
        last = c * fac * pow;
        tail += last;
    }
    Ok(SeriesValue {
        value: head + tail,
        tail_bound: last.abs() * (s + 17.0) * (s + 18.0) / (x * x),
        terms_used: big_n,
    })
}
