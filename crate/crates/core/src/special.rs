//! Gamma and Gauss hypergeometric evaluation on the real line.
//!
//! Only the regimes the barrier constructions need are covered: `Γ` on the
//! positive axis (negative non-integers are reachable internally through the
//! reflection formula), and `₂F₁(a, b; c; z)` for real parameters with `c > 0`
//! and `z < 1`.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SERIES_REL_TOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 10_000;

/// Distance below which `c - a - b` is treated as an integer in the
/// connection formula.
const NEAR_INTEGER: f64 = 1e-6;
const PARAM_SHIFT: f64 = 1e-4;

fn lanczos_sum(x: f64) -> f64 {
    // x is already shifted by -1
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// sin(πx) with exact zeros at the integers and full relative accuracy near
/// them.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// Γ(t) for `t ≥ 0.5` by the Lanczos approximation. The power is split in
/// two halves so the result stays finite up to t ≈ 171.
fn gamma_lanczos(t: f64) -> f64 {
    let x = t - 1.0;
    let w = x + LANCZOS_G + 0.5;
    let half = w.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (-w).exp() * half * lanczos_sum(x)
}

/// Γ on the real line, poles excluded. Used internally by the connection
/// formula where arguments can be negative.
pub(crate) fn gamma_real(t: f64) -> f64 {
    if t < 0.5 {
        PI / (sin_pi(t) * gamma_lanczos(1.0 - t))
    } else {
        gamma_lanczos(t)
    }
}

/// 1/Γ(t), equal to zero at the poles `t = 0, -1, -2, ...`.
pub(crate) fn rgamma(t: f64) -> f64 {
    if t < 0.5 {
        sin_pi(t) * gamma_lanczos(1.0 - t) / PI
    } else {
        1.0 / gamma_lanczos(t)
    }
}

/// The Gamma function on `(0, ∞)`.
pub fn gamma(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("gamma requires t > 0, got {t}")));
    }
    if t == t.round() && t <= 171.0 {
        return Ok((2..t as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    Ok(gamma_real(t))
}

/// ln Γ(t) for `t > 0`.
pub fn ln_gamma(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("ln_gamma requires t > 0, got {t}")));
    }
    if t < 0.5 {
        // Γ(t) = Γ(t + 1) / t keeps us on the Lanczos branch
        return Ok(gamma_lanczos(t + 1.0).ln() - t.ln());
    }
    let x = t - 1.0;
    let w = x + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (x + 0.5) * w.ln() - w + lanczos_sum(x).ln())
}

/// Arguments of a Gauss hypergeometric evaluation `₂F₁(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Query {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyp2F1Query {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Self { a, b, c, z }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Plain power series. Returns `Err(Accuracy)` with the partial sum when the
/// term cap is hit.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= SERIES_REL_TOL * sum.abs() {
            // the ratio must also be shrinking, otherwise a small term can be
            // followed by larger ones
            let ratio = ((a + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * z).abs();
            if ratio < 1.0 {
                return Ok(sum);
            }
        }
    }
    Err(Error::Accuracy {
        what: format!("2F1({a}, {b}; {c}; {z}) series"),
        estimate: sum,
        error_bound: (term * z / (1.0 - z.abs())).abs(),
    })
}

/// `z = 1 - w ∈ [0.75, 1)`: expansion about `z = 1` through the standard
/// `1 - z` connection formula.
fn near_one(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let m = c - a - b;
    if (m - m.round()).abs() < NEAR_INTEGER {
        // Both Gamma prefactors blow up; the sum is analytic in c. Symmetric
        // shifts cancel odd orders and one Richardson step removes O(η²).
        let centred = |eta: f64| -> Result<f64> {
            Ok(0.5 * (near_one_generic(a, b, c - eta, w)? + near_one_generic(a, b, c + eta, w)?))
        };
        let near = centred(PARAM_SHIFT)?;
        let far = centred(2.0 * PARAM_SHIFT)?;
        return Ok((4.0 * near - far) / 3.0);
    }
    near_one_generic(a, b, c, w)
}

fn near_one_generic(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let m = c - a - b;
    let g_c = gamma_real(c);
    let first = g_c * gamma_real(m) * rgamma(c - a) * rgamma(c - b);
    let second = g_c * gamma_real(-m) * rgamma(a) * rgamma(b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * series(a, b, 1.0 - m, w)?;
    }
    if second != 0.0 {
        value += second * w.powf(m) * series(c - a, c - b, 1.0 + m, w)?;
    }
    Ok(value)
}

fn eval_unit_interval(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z < 0.75 {
        series(a, b, c, z)
    } else {
        near_one(a, b, c, 1.0 - z)
    }
}

/// Gauss hypergeometric function for real parameters, `c > 0`, `z < 1`.
///
/// Negative arguments are folded into `[0, 1)` by the Pfaff transformation in
/// its `a`-form, `F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))`.
pub fn hyp2f1(q: Hyp2F1Query) -> Result<f64> {
    let Hyp2F1Query { a, b, c, z } = q;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(domain("2F1 parameters must be finite"));
    }
    if is_nonpositive_integer(c) {
        return Err(domain(format!("2F1 undefined for c = {c}")));
    }
    if c <= 0.0 {
        return Err(domain(format!("2F1 requires c > 0, got {c}")));
    }
    if z >= 1.0 {
        return Err(domain(format!("2F1 requires z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        // terminating polynomial, valid for every z
        return series(a, b, c, z);
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        let scale = (1.0 - z).powf(-a);
        if is_nonpositive_integer(c - b) {
            return Ok(scale * series(a, c - b, c, w)?);
        }
        return Ok(scale * eval_unit_interval(a, c - b, c, w)?);
    }
    eval_unit_interval(a, b, c, z)
}

/// `₂F₁(a, b; c; 1 - w)` for `w ∈ (0, 1]`, taking the complement directly so
/// arguments within round-off of 1 stay resolvable.
pub fn hyp2f1_complement(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(domain(format!("complement argument must lie in (0, 1], got {w}")));
    }
    if w > 0.25 {
        return hyp2f1(Hyp2F1Query::new(a, b, c, 1.0 - w));
    }
    if !(c > 0.0) {
        return Err(domain(format!("2F1 requires c > 0, got {c}")));
    }
    if a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return series(a, b, c, 1.0 - w);
    }
    near_one(a, b, c, w)
}

/// `lim_{z→1⁻} ₂F₁(a, b; c; z) = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b))`.
///
/// All four Gamma arguments are required to be positive.
pub fn hyp_limit(a: f64, b: f64, c: f64) -> Result<f64> {
    for (label, v) in [("c", c), ("c - a - b", c - a - b), ("c - a", c - a), ("c - b", c - b)] {
        if !(v > 0.0) {
            return Err(domain(format!("hyp_limit requires {label} > 0, got {v}")));
        }
    }
    let log = ln_gamma(c)? + ln_gamma(c - a - b)? - ln_gamma(c - a)? - ln_gamma(c - b)?;
    Ok(log.exp())
}

/// Normalisation constant `C_{N,s}` of the singular-integral form of `(-Δ)^s`.
pub fn c_ns(n: u32, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("c_ns requires 0 < s < 1, got {s}")));
    }
    let nf = n as f64;
    Ok(2f64.powf(2.0 * s) * s * gamma((nf + 2.0 * s) / 2.0)? / (PI.powf(nf / 2.0) * gamma(1.0 - s)?))
}

/// Surface measure of the unit sphere `S^{N-1}` (2 for N = 1).
pub fn unit_sphere_area(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    let half = n as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / gamma(half)?)
}
