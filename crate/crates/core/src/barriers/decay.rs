use serde::{Deserialize, Serialize};

use super::{MarginReport, MarginSample, TIGHT_FACTOR};
use crate::coefficients::CoefficientField;
use crate::error::{domain, Error, Result};
use crate::operator::{frac_lap_radial_power, RadialPowerProfile};
use crate::special::hyp_limit;

/// Pass threshold on `a·(-Δ)^s V - 1`.
pub const V_MARGIN_TOLERANCE: f64 = -1e-6;

const R0_SCAN_START: f64 = 1.0;
const R0_SCAN_DOUBLINGS: u32 = 40;
const R0_SCAN_SAMPLES: usize = 64;
const R0_SCAN_DECADES: f64 = 6.0;

/// `V(x) = C(1+|x|²)^{-β/2}` with `a·(-Δ)^s V ≥ 1` outside `B_{R₀}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBarrierV {
    pub profile: RadialPowerProfile,
    pub r0: f64,
    /// `lim_{r→∞} ₂F₁(-s, β/2+s; N/2; r²/(1+r²))`
    pub k: f64,
}

impl DecayBarrierV {
    pub fn value(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    pub fn beta(&self) -> f64 {
        self.profile.beta
    }

    pub fn amplitude(&self) -> f64 {
        self.profile.amplitude
    }

    pub fn dim(&self) -> u32 {
        self.profile.dim
    }

    pub fn s(&self) -> f64 {
        self.profile.s
    }

    pub fn fv_const(&self) -> f64 {
        self.profile.fv_const().expect("barrier profiles are built calibrated")
    }

    /// `(-Δ)^s V` at radius `r`.
    pub fn frac_lap(&self, r: f64) -> Result<f64> {
        frac_lap_radial_power(&self.profile, r)
    }

    /// Same barrier with amplitude multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let profile = RadialPowerProfile::new(self.amplitude() * k, self.beta(), self.dim(), self.s())?
            .with_fv_const(self.fv_const());
        Ok(Self { profile, ..self.clone() })
    }
}

/// `count` points log-spaced on `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (l + (h - l) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Picks `β`, `K`, the operator constant, the amplitude `C` and `R₀`.
pub fn select_v_params(dim: u32, s: f64, coeffs: &CoefficientField) -> Result<DecayBarrierV> {
    let n = dim as f64;
    let alpha = coeffs.alpha();
    if !(n > 2.0 * s) {
        return Err(Error::Hypothesis(format!("need N > 2s, got N = {dim}, s = {s}")));
    }
    if !(alpha > 2.0 * s) {
        return Err(Error::Hypothesis(format!("need alpha > 2s, got alpha = {alpha}, s = {s}")));
    }
    if !(coeffs.c0() > 0.0) {
        return Err(Error::Hypothesis("diffusion lower bound c0 must be positive".into()));
    }
    let beta = (0.9 * (n - 2.0 * s)).min(alpha - 2.0 * s);
    let k = hyp_limit(-s, 0.5 * beta + s, 0.5 * n)?;
    let unit = RadialPowerProfile::new(1.0, beta, dim, s)?.calibrated()?;
    let fv = unit.fv_const().expect("just calibrated");
    let amplitude = 2.0 / (coeffs.c0() * fv * k) * TIGHT_FACTOR;
    let profile = RadialPowerProfile::new(amplitude, beta, dim, s)?.with_fv_const(fv);

    let mut candidate = R0_SCAN_START;
    for _ in 0..=R0_SCAN_DOUBLINGS {
        let radii = log_spaced(candidate, candidate * 10f64.powf(R0_SCAN_DECADES), R0_SCAN_SAMPLES);
        let mut holds = true;
        for r in radii {
            if profile.hyp_factor(r)? < 0.5 * k {
                holds = false;
                break;
            }
        }
        if holds {
            return Ok(DecayBarrierV { profile, r0: candidate, k });
        }
        candidate *= 2.0;
    }
    Err(Error::Construction(format!(
        "no radius up to {candidate} keeps the hypergeometric factor above K/2"
    )))
}

/// `a(r)·(-Δ)^s V(r) - 1` at each radius; passes iff the minimum is at
/// least `-1e-6`.
pub fn verify_v_supersolution(v: &DecayBarrierV, coeffs: &CoefficientField, radii: &[f64]) -> Result<MarginReport> {
    if let Some(&r) = radii.iter().find(|&&r| !(r >= v.r0)) {
        return Err(domain(format!("radius {r} lies inside B_R0 (R0 = {})", v.r0)));
    }
    let samples = radii
        .iter()
        .map(|&r| Ok(MarginSample { position: r, margin: coeffs.a.eval(r) * v.frac_lap(r)? - 1.0 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginReport::from_samples(samples, V_MARGIN_TOLERANCE))
}
