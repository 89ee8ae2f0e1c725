use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::operator::SmoothProfile;
use crate::special::gamma;

/// `Ŵ(x) = C₁(R̂² - |x|²)₊^s`, the solution of `(-Δ)^s u = 1` in `B_R̂`,
/// `u = 0` outside, with `C₁ = Γ(N/2)/(4^s Γ(N/2+s) Γ(1+s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeSolution {
    pub r_hat: f64,
    pub c1: f64,
    pub dim: u32,
    pub s: f64,
}

pub fn getoor(r_hat: f64, dim: u32, s: f64) -> Result<ExitTimeSolution> {
    if !(r_hat > 0.0) || !r_hat.is_finite() {
        return Err(domain(format!("ball radius must be positive, got {r_hat}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("s must lie in (0, 1), got {s}")));
    }
    if dim == 0 {
        return Err(domain("dimension must be positive"));
    }
    let n = dim as f64;
    let c1 = gamma(0.5 * n)? / (4f64.powf(s) * gamma(0.5 * n + s)? * gamma(1.0 + s)?);
    Ok(ExitTimeSolution { r_hat, c1, dim, s })
}

impl ExitTimeSolution {
    /// `R̂² - r²` as a product, accurate for `r` near `R̂`.
    fn gap(&self, r: f64) -> f64 {
        let r = r.abs();
        (self.r_hat - r) * (self.r_hat + r)
    }

    pub fn value(&self, r: f64) -> f64 {
        let g = self.gap(r);
        if g <= 0.0 {
            0.0
        } else {
            self.c1 * g.powf(self.s)
        }
    }

    /// Radial derivative (signed in `r`).
    pub fn derivative(&self, r: f64) -> f64 {
        let g = self.gap(r);
        if g <= 0.0 {
            0.0
        } else {
            -2.0 * self.s * r * self.c1 * g.powf(self.s - 1.0)
        }
    }

    pub fn max_value(&self) -> f64 {
        self.value(0.0)
    }
}

impl SmoothProfile for ExitTimeSolution {
    fn value(&self, x: f64) -> f64 {
        ExitTimeSolution::value(self, x)
    }
    fn derivative(&self, x: f64) -> f64 {
        ExitTimeSolution::derivative(self, x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        let g = self.gap(x);
        if g <= 0.0 {
            return 0.0;
        }
        let s = self.s;
        -2.0 * s * self.c1 * g.powf(s - 1.0) + 4.0 * s * (s - 1.0) * x * x * self.c1 * g.powf(s - 2.0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![-self.r_hat, self.r_hat]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::operator::{apply_discrete, build_discrete_op, frac_lap_quadrature, ExteriorDatum};

    #[test]
    #[allow(clippy::approx_constant)]
    fn constants() {
        // s = 1/2, N = 1: Γ(1/2)/(2·Γ(1)·Γ(3/2)) = 1
        assert!((getoor(1.0, 1, 0.5).unwrap().c1 - 1.0).abs() < 1e-14);
        // s = 1/4: 2/√π (mpmath 1.1283791670955125)
        assert!((getoor(1.0, 1, 0.25).unwrap().c1 - 1.128_379_167_095_512_5).abs() < 1e-13);
    }

    #[test]
    fn vanishes_outside_the_ball() {
        let w = getoor(2.0, 1, 0.3).unwrap();
        assert_eq!(w.value(2.0), 0.0);
        assert_eq!(w.value(-3.0), 0.0);
        assert!(w.value(1.999) > 0.0);
        assert!(w.max_value() >= w.value(0.5));
    }

    #[test]
    fn discrete_operator_reproduces_unit_load() {
        let w = getoor(1.0, 1, 0.25).unwrap();
        let grid = Grid1D::new(1.0, 1023).unwrap();
        assert!(grid.spacing() <= 1.0 / 512.0);
        let op = build_discrete_op(&grid, 0.25).unwrap();
        let field: Vec<f64> = grid.nodes().iter().map(|&x| w.value(x)).collect();
        let out = apply_discrete(&op, &field, ExteriorDatum::new(0.0).unwrap()).unwrap();
        for i in grid.window(0.8) {
            assert!((out[i] - 1.0).abs() <= 0.03, "x = {}: {}", grid.node(i), out[i]);
        }
    }

    #[test]
    fn quadrature_reproduces_unit_load() {
        let w = getoor(1.0, 1, 0.25).unwrap();
        for x in [0.0, 0.3, -0.7] {
            let v = frac_lap_quadrature(&w, x, 0.25, 1e-7).unwrap();
            assert!((v - 1.0).abs() < 1e-5, "x = {x}: {v}");
        }
    }
}
