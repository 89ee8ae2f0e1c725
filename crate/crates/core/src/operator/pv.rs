//! Principal-value quadrature for `(-Δ)^s`, used as an independent oracle for
//! the closed form and the grid operator.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Estimate, DEFAULT_MAX_INTERVALS};
use crate::special::c_ns;

const NEAR_FIELD: f64 = 0.1;

/// A bounded function with two derivatives and a known limit at infinity.
/// In one dimension `x` is the coordinate; for radial use it is `|x|`.
pub trait SmoothProfile {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;

    /// `lim_{|x|→∞}` of the profile.
    fn limit_at_infinity(&self) -> f64 {
        0.0
    }

    /// Points where the profile is only continuous (kinks, support edges).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl SmoothProfile for super::RadialPowerProfile {
    fn value(&self, x: f64) -> f64 {
        super::RadialPowerProfile::value(self, x)
    }
    fn derivative(&self, x: f64) -> f64 {
        super::RadialPowerProfile::derivative(self, x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        super::RadialPowerProfile::second_derivative(self, x)
    }
}

/// `k`, constant in space.
#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile(pub f64);

impl SmoothProfile for ConstantProfile {
    fn value(&self, _: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _: f64) -> f64 {
        0.0
    }
    fn second_derivative(&self, _: f64) -> f64 {
        0.0
    }
    fn limit_at_infinity(&self) -> f64 {
        self.0
    }
}

/// `e^{-x²}`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianProfile;

impl SmoothProfile for GaussianProfile {
    fn value(&self, x: f64) -> f64 {
        (-x * x).exp()
    }
    fn derivative(&self, x: f64) -> f64 {
        -2.0 * x * (-x * x).exp()
    }
    fn second_derivative(&self, x: f64) -> f64 {
        (4.0 * x * x - 2.0) * (-x * x).exp()
    }
}

fn combine(parts: &[Estimate]) -> Estimate {
    parts.iter().fold(Estimate { value: 0.0, error: 0.0 }, |acc, &p| acc + p)
}

fn check(total: Estimate, scale: f64, tol: f64, what: &str) -> Result<f64> {
    let value = scale * total.value;
    let error = scale * total.error;
    if error > tol || !value.is_finite() {
        return Err(Error::Accuracy { what: what.to_string(), estimate: value, error_bound: error });
    }
    Ok(value)
}

/// `(-Δ)^s u(x)` in one dimension, to absolute accuracy `tol`.
///
/// Uses the symmetric form `∫₀^∞ (2u(x) - u(x+t) - u(x-t)) t^{-1-2s} dt`.
/// Near `t = 0` the quadratic Taylor term is subtracted and integrated in
/// closed form; the constant far-field part `2(u(x) - u_∞)` is integrated in
/// closed form as well.
pub fn frac_lap_quadrature<P: SmoothProfile + ?Sized>(u: &P, x: f64, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("s must lie in (0, 1), got {s}")));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let scale = c_ns(1, s)?;
    let u_inf = u.limit_at_infinity();
    let ux = u.value(x);
    let uxx = u.second_derivative(x);
    let kinks: Vec<f64> = u.breakpoints().iter().map(|b| (b - x).abs()).filter(|&d| d > 0.0).collect();
    let rho0 = kinks.iter().fold(NEAR_FIELD, |acc, &d| acc.min(0.5 * d));
    // tolerance budget split between the pieces
    let piece_tol = 0.2 * tol / scale;

    let near = integrate(
        |t| {
            let second = 2.0 * ux - u.value(x + t) - u.value(x - t);
            (second + uxx * t * t) * t.powf(-1.0 - 2.0 * s)
        },
        0.0,
        rho0,
        piece_tol,
        0.0,
        DEFAULT_MAX_INTERVALS,
    )?;
    let near_closed = -uxx * rho0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let const_part = 2.0 * (ux - u_inf) * rho0.powf(-2.0 * s) / (2.0 * s);

    let decaying = |t: f64| (2.0 * u_inf - u.value(x + t) - u.value(x - t)) * t.powf(-1.0 - 2.0 * s);
    let far_edge = kinks.iter().fold(4.0 * (1.0 + x.abs()), |acc, &d| acc.max(2.0 * d));
    let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&d| d > rho0 && d < far_edge).collect();
    cuts.push(rho0);
    cuts.push(far_edge);
    cuts.sort_by(f64::total_cmp);
    let mut parts = vec![near];
    for w in cuts.windows(2) {
        parts.push(integrate(decaying, w[0], w[1], piece_tol, 0.0, DEFAULT_MAX_INTERVALS)?);
    }
    parts.push(integrate_to_infinity(decaying, far_edge, piece_tol, 0.0, DEFAULT_MAX_INTERVALS)?);
    let mut total = combine(&parts);
    total.value += near_closed + const_part;
    check(total, scale, tol, "one-dimensional principal value")
}

/// `(-Δ)^s u` at radius `r0` for a radial function in three dimensions.
///
/// The angular integral is done in closed form,
/// `∫_{S²} |r₀e₁ - ρω|^{-3-2s} dω = 2π/((1+2s) r₀ ρ)·(|r₀-ρ|^{-1-2s} - (r₀+ρ)^{-1-2s})`,
/// leaving a radial principal value. Points `r₀ ± t` are paired near the
/// singularity and the leading `t^{1-2s}` term is integrated exactly.
pub fn frac_lap_radial_quadrature_3d<P: SmoothProfile + ?Sized>(u: &P, r0: f64, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("s must lie in (0, 1), got {s}")));
    }
    if !(r0 >= 0.0) {
        return Err(domain(format!("radius must be nonnegative, got {r0}")));
    }
    let scale = c_ns(3, s)?;
    let u0 = u.value(r0);
    let u_inf = u.limit_at_infinity();
    let piece_tol = 0.1 * tol / scale;
    let four_pi = 4.0 * std::f64::consts::PI;

    if r0 == 0.0 {
        let piece_tol = piece_tol / four_pi;
        let uxx = u.second_derivative(0.0);
        // u(0) - u(ρ) ≈ -u''(0)ρ²/2 near the origin
        let near = integrate(
            |t| (u0 - u.value(t) + 0.5 * uxx * t * t) * t.powf(-1.0 - 2.0 * s),
            0.0,
            NEAR_FIELD,
            piece_tol,
            0.0,
            DEFAULT_MAX_INTERVALS,
        )?;
        let near_closed = -0.5 * uxx * NEAR_FIELD.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        let const_part = (u0 - u_inf) * NEAR_FIELD.powf(-2.0 * s) / (2.0 * s);
        let tail = integrate_to_infinity(
            |t| (u_inf - u.value(t)) * t.powf(-1.0 - 2.0 * s),
            NEAR_FIELD,
            piece_tol,
            0.0,
            DEFAULT_MAX_INTERVALS,
        )?;
        let mut total = near + tail;
        total.value += near_closed + const_part;
        total.value *= four_pi;
        total.error *= four_pi;
        return check(total, scale, tol, "radial principal value at the origin");
    }

    let pref = 2.0 * std::f64::consts::PI / ((1.0 + 2.0 * s) * r0);
    let kernel = |rho: f64| {
        pref * rho * ((r0 - rho).abs().powf(-1.0 - 2.0 * s) - (r0 + rho).powf(-1.0 - 2.0 * s))
    };
    let rho_n = NEAR_FIELD.min(0.5 * r0);
    let lead = pref * (-2.0 * u.derivative(r0) - r0 * u.second_derivative(r0));
    let near = integrate(
        |t| {
            let pair = (u0 - u.value(r0 + t)) * kernel(r0 + t) + (u0 - u.value(r0 - t)) * kernel(r0 - t);
            pair - lead * t.powf(1.0 - 2.0 * s)
        },
        0.0,
        rho_n,
        piece_tol,
        0.0,
        DEFAULT_MAX_INTERVALS,
    )?;
    let near_closed = lead * rho_n.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let side = |rho: f64| (u0 - u.value(rho)) * kernel(rho);
    let inside = integrate(side, 0.0, r0 - rho_n, piece_tol, 0.0, DEFAULT_MAX_INTERVALS)?;
    let mid_edge = 4.0 * (1.0 + r0);
    let middle = integrate(side, r0 + rho_n, mid_edge, piece_tol, 0.0, DEFAULT_MAX_INTERVALS)?;
    let outside = integrate_to_infinity(side, mid_edge, piece_tol, 0.0, DEFAULT_MAX_INTERVALS)?;
    let mut total = near + inside + middle + outside;
    total.value += near_closed;
    check(total, scale, tol, "radial principal value")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{calibrate_fv_constant, frac_lap_radial_power, RadialPowerProfile};

    #[test]
    fn constant_has_zero_image() {
        for x in [0.0, 1.5, -7.0] {
            assert!(frac_lap_quadrature(&ConstantProfile(3.2), x, 0.3, 1e-10).unwrap().abs() < 1e-10);
        }
        assert!(frac_lap_radial_quadrature_3d(&ConstantProfile(-1.0), 0.7, 0.6, 1e-10).unwrap().abs() < 1e-10);
    }

    #[test]
    fn origin_matches_calibration() {
        let tol = 1e-9;
        let p = RadialPowerProfile::new(1.0, 0.45, 1, 0.25).unwrap();
        let pv = frac_lap_quadrature(&p, 0.0, 0.25, tol).unwrap();
        let fv = calibrate_fv_constant(0.45, 1, 0.25).unwrap();
        assert!((pv - fv).abs() < 2.0 * tol, "{pv} vs {fv}");

        let p3 = RadialPowerProfile::new(1.0, 1.8, 3, 0.5).unwrap();
        let pv3 = frac_lap_radial_quadrature_3d(&p3, 0.0, 0.5, tol).unwrap();
        let fv3 = calibrate_fv_constant(1.8, 3, 0.5).unwrap();
        assert!((pv3 - fv3).abs() < 2.0 * tol, "{pv3} vs {fv3}");
    }

    #[test]
    fn closed_form_at_two() {
        let p = RadialPowerProfile::new(1.0, 0.45, 1, 0.25).unwrap().calibrated().unwrap();
        let pv = frac_lap_quadrature(&p, 2.0, 0.25, 1e-10).unwrap();
        let cf = frac_lap_radial_power(&p, 2.0).unwrap();
        assert!((pv - cf).abs() < 1e-4 * cf.abs(), "{pv} vs {cf}");
    }

    #[test]
    fn gaussian_half_laplacian_at_origin() {
        // For s = 1/2 in 1-D, (-Δ)^{1/2} e^{-x²} at 0 equals
        // (1/π)∫ |ξ| e^{-ξ²/4}/(2√π)·√π dξ = 2/√π.
        let v = frac_lap_quadrature(&GaussianProfile, 0.0, 0.5, 1e-10).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-8, "{v}");
    }
}
