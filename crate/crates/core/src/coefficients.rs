//! Coefficient families for `a(-Δ)^s u - cu = f` and its parabolic analogue.
//! All families are even in `x`, so they double as radial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Diffusion coefficient with certified lower bound `c0(1+|x|²)^{α/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    /// `c0(1+|x|²)^{α/2}`
    PowerLaw { c0: f64, alpha: f64 },
    /// `c0(1+|x|²)^{α/2}(1 + amplitude·e^{-|x|²})`, `amplitude ≥ 0`
    Modulated { c0: f64, alpha: f64, amplitude: f64 },
}

impl Diffusion {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Diffusion::PowerLaw { c0, alpha } => c0 * (1.0 + x * x).powf(0.5 * alpha),
            Diffusion::Modulated { c0, alpha, amplitude } => {
                c0 * (1.0 + x * x).powf(0.5 * alpha) * (1.0 + amplitude * (-x * x).exp())
            }
        }
    }

    pub fn c0(&self) -> f64 {
        match *self {
            Diffusion::PowerLaw { c0, .. } | Diffusion::Modulated { c0, .. } => c0,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Diffusion::PowerLaw { alpha, .. } | Diffusion::Modulated { alpha, .. } => alpha,
        }
    }
}

/// Zeroth-order coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reaction {
    Zero,
    Constant { value: f64 },
    /// `-depth·e^{-(x/width)²}`
    GaussianWell { depth: f64, width: f64 },
}

impl Reaction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Constant { value } => value,
            Reaction::GaussianWell { depth, width } => -depth * (-(x / width).powi(2)).exp(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Constant { value } => value.abs(),
            Reaction::GaussianWell { depth, .. } => depth.abs(),
        }
    }

    /// Supremum of the positive part.
    pub fn positive_sup(&self) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Constant { value } => value.max(0.0),
            Reaction::GaussianWell { depth, .. } => (-depth).max(0.0),
        }
    }

    pub fn is_nonpositive(&self) -> bool {
        self.positive_sup() == 0.0
    }
}

/// Source term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Zero,
    Constant { value: f64 },
    /// `amplitude·exp(1 - 1/(1 - (x/radius)²))` on `|x| < radius`, peak
    /// `amplitude` at the origin.
    Bump { amplitude: f64, radius: f64 },
}

impl Source {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Source::Zero => 0.0,
            Source::Constant { value } => value,
            Source::Bump { amplitude, radius } => {
                let q = (x / radius).powi(2);
                if q >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            Source::Zero => 0.0,
            Source::Constant { value } => value.abs(),
            Source::Bump { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Same family with every value multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Source {
        match *self {
            Source::Zero => Source::Zero,
            Source::Constant { value } => Source::Constant { value: k * value },
            Source::Bump { amplitude, radius } => Source::Bump { amplitude: k * amplitude, radius },
        }
    }
}

/// `(a, c, f)` with `a` satisfying the power-law lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub a: Diffusion,
    pub c: Reaction,
    pub f: Source,
}

impl CoefficientField {
    pub fn new(a: Diffusion, c: Reaction, f: Source) -> Self {
        Self { a, c, f }
    }

    /// Reference diffusion `c0(1+x²)^{α/2}` with `c ≡ 0`, `f ≡ 0`.
    pub fn power_law(c0: f64, alpha: f64) -> Self {
        Self::new(Diffusion::PowerLaw { c0, alpha }, Reaction::Zero, Source::Zero)
    }

    pub fn with_reaction(mut self, c: Reaction) -> Self {
        self.c = c;
        self
    }

    pub fn with_source(mut self, f: Source) -> Self {
        self.f = f;
        self
    }

    pub fn c0(&self) -> f64 {
        self.a.c0()
    }

    pub fn alpha(&self) -> f64 {
        self.a.alpha()
    }

    pub fn c_sup(&self) -> f64 {
        self.c.sup_norm()
    }

    pub fn f_sup(&self) -> f64 {
        self.f.sup_norm()
    }

    pub fn c_nonpositive(&self) -> bool {
        self.c.is_nonpositive()
    }

    /// Checks the lower-bound hypothesis for order `s` in dimension `dim`,
    /// and positivity / sign conditions at the sample points.
    pub fn validate(&self, dim: u32, s: f64, samples: &[f64]) -> Result<()> {
        let c0 = self.c0();
        let alpha = self.alpha();
        if !(c0 > 0.0) {
            return Err(Error::Hypothesis(format!("diffusion lower bound needs c0 > 0, got {c0}")));
        }
        if !(alpha > 2.0 * s) {
            return Err(Error::Hypothesis(format!("diffusion growth needs alpha > 2s, got alpha = {alpha}, s = {s}")));
        }
        if !((dim as f64) > 2.0 * s) {
            return Err(Error::Hypothesis(format!("dimension must exceed 2s, got N = {dim}, s = {s}")));
        }
        if let Diffusion::Modulated { amplitude, .. } = self.a {
            if amplitude < 0.0 {
                return Err(domain("modulation amplitude must be nonnegative"));
            }
        }
        for &x in samples {
            let a = self.a.eval(x);
            if !(a > 0.0) {
                return Err(domain(format!("a({x}) = {a} is not positive")));
            }
            if a < c0 * (1.0 + x * x).powf(0.5 * alpha) * (1.0 - 1e-12) {
                return Err(Error::Hypothesis(format!("a({x}) = {a} is below its stated lower bound")));
            }
            if self.c_nonpositive() && self.c.eval(x) > 0.0 {
                return Err(domain(format!("c({x}) > 0 although c ≤ 0 was declared")));
            }
        }
        Ok(())
    }

    pub fn a_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.a.eval(x)).collect()
    }

    pub fn c_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.c.eval(x)).collect()
    }

    pub fn f_nodes(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.f.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let a = Diffusion::PowerLaw { c0: 2.0, alpha: 1.5 };
        assert_eq!(a.eval(0.0), 2.0);
        assert!((a.eval(1.0) - 2.0 * 2f64.powf(0.75)).abs() < 1e-14);
        let m = Diffusion::Modulated { c0: 1.0, alpha: 1.0, amplitude: 0.5 };
        assert_eq!(m.eval(0.0), 1.5);
        let well = Reaction::GaussianWell { depth: 0.3, width: 2.0 };
        assert_eq!(well.eval(0.0), -0.3);
        assert!(well.is_nonpositive());
        assert_eq!(well.sup_norm(), 0.3);
        assert!(!Reaction::Constant { value: 0.1 }.is_nonpositive());
        let bump = Source::Bump { amplitude: 1.0, radius: 1.0 };
        assert_eq!(bump.eval(0.0), 1.0);
        assert_eq!(bump.eval(1.0), 0.0);
        assert!(bump.eval(0.5) > 0.0 && bump.eval(0.5) < 1.0);
        assert_eq!(bump.scaled(2.0).eval(0.0), 2.0);
    }

    #[test]
    fn validation_catches_hypothesis_violations() {
        let samples = [0.0, 1.0, 10.0];
        assert!(CoefficientField::power_law(1.0, 1.5).validate(1, 0.25, &samples).is_ok());
        assert!(matches!(
            CoefficientField::power_law(1.0, 0.4).validate(1, 0.25, &samples),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            CoefficientField::power_law(0.0, 1.5).validate(1, 0.25, &samples),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            CoefficientField::power_law(1.0, 3.0).validate(1, 0.6, &samples),
            Err(Error::Hypothesis(_))
        ));
    }
}
