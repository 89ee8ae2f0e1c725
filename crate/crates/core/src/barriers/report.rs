use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSample {
    pub position: f64,
    pub margin: f64,
}

/// Pointwise margins of a supersolution inequality and the pass decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub samples: Vec<MarginSample>,
    pub min_margin: f64,
    pub argmin: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl MarginReport {
    pub fn from_samples(samples: Vec<MarginSample>, threshold: f64) -> Self {
        let (min_margin, argmin) = samples
            .iter()
            .fold((f64::INFINITY, f64::NAN), |(m, at), s| if s.margin < m { (s.margin, s.position) } else { (m, at) });
        let passed = !samples.is_empty() && min_margin >= threshold;
        Self { samples, min_margin, argmin, threshold, passed }
    }
}
