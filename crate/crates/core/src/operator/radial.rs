//! Closed form of `(-Δ)^s` applied to `C(1+|x|²)^{-β/2}`.
//!
//! The profile's image is `C·κ·(1+r²)^{-(β/2+s)}·₂F₁(-s, β/2+s; N/2; r²/(1+r²))`
//! where `κ` is the value at the origin of `(-Δ)^s (1+|x|²)^{-β/2}`. `κ` is not
//! hard-coded; it is obtained by radial quadrature at the origin
//! ([`calibrate_fv_constant`]).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, DEFAULT_MAX_INTERVALS};
use crate::special::{c_ns, hyp2f1, hyp2f1_complement, unit_sphere_area, Hyp2F1Query};

const CALIBRATION_REL_TOL: f64 = 1e-12;

/// `V(x) = C(1+|x|²)^{-β/2}` in dimension `N`, together with the
/// operator constant once calibrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPowerProfile {
    pub amplitude: f64,
    pub beta: f64,
    pub dim: u32,
    pub s: f64,
    fv_const: Option<f64>,
}

impl RadialPowerProfile {
    pub fn new(amplitude: f64, beta: f64, dim: u32, s: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(domain(format!("amplitude must be positive, got {amplitude}")));
        }
        if !(beta > 0.0) {
            return Err(domain(format!("decay exponent must be positive, got {beta}")));
        }
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(domain(format!("s must lie in (0, 1), got {s}")));
        }
        Ok(Self { amplitude, beta, dim, s, fv_const: None })
    }

    /// Runs the origin calibration and stores the constant.
    pub fn calibrated(mut self) -> Result<Self> {
        self.fv_const = Some(calibrate_fv_constant(self.beta, self.dim, self.s)?);
        Ok(self)
    }

    /// Attaches a constant computed elsewhere (e.g. shared between profiles
    /// that differ only in amplitude).
    pub fn with_fv_const(mut self, fv_const: f64) -> Self {
        self.fv_const = Some(fv_const);
        self
    }

    pub fn fv_const(&self) -> Option<f64> {
        self.fv_const
    }

    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * (1.0 + r * r).powf(-0.5 * self.beta)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        -self.beta * r * self.amplitude * (1.0 + r * r).powf(-0.5 * self.beta - 1.0)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let q = 1.0 + r * r;
        self.amplitude * self.beta * q.powf(-0.5 * self.beta - 2.0) * ((self.beta + 1.0) * r * r - 1.0)
    }

    /// `₂F₁(-s, β/2+s; N/2; r²/(1+r²))`, the factor that tends to `K`.
    pub fn hyp_factor(&self, r: f64) -> Result<f64> {
        let (a, b, c) = (-self.s, 0.5 * self.beta + self.s, 0.5 * self.dim as f64);
        if r > 1.0 {
            hyp2f1_complement(a, b, c, 1.0 / (1.0 + r * r))
        } else {
            hyp2f1(Hyp2F1Query::new(a, b, c, r * r / (1.0 + r * r)))
        }
    }
}

/// `(-Δ)^s[(1+|x|²)^{-β/2}](0)`, by reducing the singular integral at the
/// origin to `C_{N,s}·|S^{N-1}|·∫₀^∞ (1 - (1+ρ²)^{-β/2}) ρ^{-1-2s} dρ`.
pub fn calibrate_fv_constant(beta: f64, dim: u32, s: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain(format!("decay exponent must be positive, got {beta}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("s must lie in (0, 1), got {s}")));
    }
    // 1 - (1+ρ²)^{-β/2} without cancellation near ρ = 0
    let deficit = |rho: f64| -(-0.5 * beta * (rho * rho).ln_1p()).exp_m1();
    let integrand = |rho: f64| deficit(rho) * rho.powf(-1.0 - 2.0 * s);
    let inner = integrate(integrand, 0.0, 1.0, 0.0, CALIBRATION_REL_TOL, DEFAULT_MAX_INTERVALS)?;
    let outer = integrate_to_infinity(integrand, 1.0, 0.0, CALIBRATION_REL_TOL, DEFAULT_MAX_INTERVALS)?;
    let total = inner + outer;
    let value = c_ns(dim, s)? * unit_sphere_area(dim)? * total.value;
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Accuracy {
            what: "operator constant calibration".into(),
            estimate: value,
            error_bound: total.error,
        });
    }
    Ok(value)
}

/// `(-Δ)^s V` at radius `r`, from the hypergeometric closed form.
pub fn frac_lap_radial_power(p: &RadialPowerProfile, r: f64) -> Result<f64> {
    let fv = p
        .fv_const
        .ok_or_else(|| Error::State("operator constant not calibrated".into()))?;
    if !(r >= 0.0) {
        return Err(domain(format!("radius must be nonnegative, got {r}")));
    }
    let decay = (1.0 + r * r).powf(-(0.5 * p.beta + p.s));
    Ok(p.amplitude * fv * decay * p.hyp_factor(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma, hyp_limit};

    /// Known closed form of the origin constant; independent of the
    /// quadrature path.
    fn origin_constant_oracle(beta: f64, dim: u32, s: f64) -> f64 {
        let n = dim as f64;
        2f64.powf(2.0 * s) * gamma(n / 2.0 + s).unwrap() * gamma(beta / 2.0 + s).unwrap()
            / (gamma(n / 2.0).unwrap() * gamma(beta / 2.0).unwrap())
    }

    #[test]
    fn calibration_matches_closed_form() {
        for &(beta, dim, s) in &[(0.45, 1, 0.25), (0.2, 1, 0.1), (1.8, 3, 0.5), (0.5, 3, 0.75), (2.5, 2, 0.9)] {
            let got = calibrate_fv_constant(beta, dim, s).unwrap();
            let want = origin_constant_oracle(beta, dim, s);
            assert!((got - want).abs() < 1e-9 * want, "{beta} {dim} {s}: {got} vs {want}");
        }
        // mpmath value for the reference configuration
        let got = calibrate_fv_constant(0.45, 1, 0.25).unwrap();
        assert!((got - 0.449_815_781_850_465_67).abs() < 1e-10);
    }

    #[test]
    fn calibration_vanishes_with_beta() {
        let small = calibrate_fv_constant(1e-6, 1, 0.25).unwrap();
        assert!(small < 1e-5);
        assert!(small > 0.0);
    }

    #[test]
    fn uncalibrated_profile_is_a_state_error() {
        let p = RadialPowerProfile::new(1.0, 0.45, 1, 0.25).unwrap();
        assert!(matches!(frac_lap_radial_power(&p, 1.0), Err(Error::State(_))));
    }

    #[test]
    fn value_at_origin_and_linearity_in_amplitude() {
        let p = RadialPowerProfile::new(1.0, 0.45, 1, 0.25).unwrap().calibrated().unwrap();
        let fv = p.fv_const().unwrap();
        assert!((frac_lap_radial_power(&p, 0.0).unwrap() - fv).abs() < 1e-15);
        let q = RadialPowerProfile::new(3.5, 0.45, 1, 0.25).unwrap().calibrated().unwrap();
        assert_eq!(q.fv_const(), p.fv_const());
        for r in [0.3, 2.0, 17.0] {
            let a = frac_lap_radial_power(&p, r).unwrap();
            let b = frac_lap_radial_power(&q, r).unwrap();
            assert!((b - 3.5 * a).abs() < 1e-14 * b.abs());
        }
    }

    #[test]
    fn far_field_asymptotics() {
        let p = RadialPowerProfile::new(1.0, 0.45, 1, 0.25).unwrap().calibrated().unwrap();
        let k = hyp_limit(-0.25, 0.225 + 0.25, 0.5).unwrap();
        let want = p.fv_const().unwrap() * k;
        // the gap closes like (1+r²)^{-(N-β)/2}, slowly for N - β = 0.55
        let gap = |r: f64| {
            let scaled = frac_lap_radial_power(&p, r).unwrap() * r.powf(0.45 + 0.5);
            (scaled - want).abs() / want
        };
        let mut previous = f64::INFINITY;
        for r in [10.0, 1e2, 1e3, 1e5, 1e7, 1e9] {
            let g = gap(r);
            assert!(g < previous, "r = {r}: gap {g} did not shrink");
            previous = g;
        }
        assert!(gap(1e3) < 0.2);
        assert!(gap(1e9) < 1e-3);
        assert!(frac_lap_radial_power(&p, 1e8).unwrap() < 1e-6);
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let p = RadialPowerProfile::new(2.0, 0.7, 3, 0.4).unwrap();
        let h = 1e-4;
        for r in [0.0, 0.5, 3.0] {
            let d1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let d2 = (p.value(r + h) - 2.0 * p.value(r) + p.value(r - h)) / (h * h);
            assert!((d1 - p.derivative(r)).abs() < 1e-7);
            assert!((d2 - p.second_derivative(r)).abs() < 1e-5);
        }
    }
}
