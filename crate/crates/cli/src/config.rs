//! Flat TOML scenario configuration.
//!
//! Every key is optional; missing keys take the reference values
//! `N = 1, s = 0.25, α = 1.5, C₀ = 1`. Loading re-validates every
//! precondition the pipelines rely on and reports the offending key.

use std::fmt;
use std::path::{Path, PathBuf};

use fracbarrier::coefficients::{CoefficientField, Diffusion, Reaction, Source};
use fracbarrier::grid::Grid1D;
use fracbarrier::parabolic::{BoundaryTrajectory, InitialData, ParabolicProblem};
use serde::{Deserialize, Serialize};

/// Largest node count of any single grid; systems are dense.
pub const MAX_NODES: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Barriers,
    Elliptic,
    Parabolic,
    Asymptotic,
    VerifyAll,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Barriers => "barriers",
            ScenarioKind::Elliptic => "elliptic",
            ScenarioKind::Parabolic => "parabolic",
            ScenarioKind::Asymptotic => "asymptotic",
            ScenarioKind::VerifyAll => "verify-all",
        }
    }

    /// Pipelines run for this kind, in report order.
    pub fn pipelines(self) -> Vec<ScenarioKind> {
        match self {
            ScenarioKind::VerifyAll => vec![
                ScenarioKind::Barriers,
                ScenarioKind::Elliptic,
                ScenarioKind::Parabolic,
                ScenarioKind::Asymptotic,
            ],
            k => vec![k],
        }
    }

    fn includes(self, k: ScenarioKind) -> bool {
        self.pipelines().contains(&k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionKind {
    PowerLaw,
    Modulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionKind {
    Zero,
    Constant,
    GaussianWell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Zero,
    Constant,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// `g ≡ γ`
    Constant,
    /// `γ + amplitude·e^{-t}`
    ExpDecay,
    /// `γ + amplitude·e^{-t} sin t`
    SinDecay,
    /// `amplitude·sin t`; `gamma` is then only used by the elliptic run
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// `u₀ ≡ g(0)`
    Compatible,
    /// `g(0)` plus a smooth bump
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub dim: u32,
    pub s: f64,
    pub alpha: f64,
    pub c0: f64,
    pub diffusion: DiffusionKind,
    pub modulation: f64,
    pub reaction: ReactionKind,
    pub reaction_value: f64,
    pub well_depth: f64,
    pub well_width: f64,
    pub source: SourceKind,
    pub source_amplitude: f64,
    pub source_radius: f64,
    pub gamma: f64,
    pub boundary: BoundaryKind,
    pub boundary_amplitude: f64,
    pub initial: InitialKind,
    pub initial_amplitude: f64,
    pub initial_radius: f64,
    /// Ball for the parabolic and long-time runs.
    pub half_width: f64,
    /// Smallest ball of the elliptic nested schedule.
    pub level0: f64,
    pub levels: usize,
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
    pub infinite_horizon: bool,
    pub window: f64,
    /// Nested-limit tolerance.
    pub tol: f64,
    /// Bound on `sup |u(T) - W|` for the long-time run.
    pub discrepancy_tol: f64,
    pub checkpoints: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::VerifyAll,
            dim: 1,
            s: 0.25,
            alpha: 1.5,
            c0: 1.0,
            diffusion: DiffusionKind::PowerLaw,
            modulation: 0.0,
            reaction: ReactionKind::GaussianWell,
            reaction_value: 0.0,
            well_depth: 0.5,
            well_width: 2.0,
            source: SourceKind::Bump,
            source_amplitude: 1.0,
            source_radius: 1.0,
            gamma: 0.5,
            boundary: BoundaryKind::ExpDecay,
            boundary_amplitude: 0.5,
            initial: InitialKind::Compatible,
            initial_amplitude: 0.0,
            initial_radius: 1.0,
            half_width: 40.0,
            level0: 10.0,
            levels: 5,
            dx: 0.1,
            dt: 0.05,
            horizon: 50.0,
            infinite_horizon: false,
            window: 5.0,
            tol: 5e-3,
            discrepancy_tol: 1e-2,
            checkpoints: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            out: None,
        }
    }
}

impl ScenarioConfig {
    pub fn reference(kind: ScenarioKind) -> Self {
        Self { scenario: kind, ..Self::default() }
    }

    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .and_then(|span| key_at(text, span.start))
                .unwrap_or_else(|| "<document>".to_string());
            ConfigError::new(&field, e.message().trim())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Normalized form: every key spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn coefficients(&self) -> CoefficientField {
        let a = match self.diffusion {
            DiffusionKind::PowerLaw => Diffusion::PowerLaw { c0: self.c0, alpha: self.alpha },
            DiffusionKind::Modulated => {
                Diffusion::Modulated { c0: self.c0, alpha: self.alpha, amplitude: self.modulation }
            }
        };
        let c = match self.reaction {
            ReactionKind::Zero => Reaction::Zero,
            ReactionKind::Constant => Reaction::Constant { value: self.reaction_value },
            ReactionKind::GaussianWell => Reaction::GaussianWell { depth: self.well_depth, width: self.well_width },
        };
        let f = match self.source {
            SourceKind::Zero => Source::Zero,
            SourceKind::Constant => Source::Constant { value: self.source_amplitude },
            SourceKind::Bump => Source::Bump { amplitude: self.source_amplitude, radius: self.source_radius },
        };
        CoefficientField::new(a, c, f)
    }

    pub fn boundary_trajectory(&self) -> BoundaryTrajectory {
        let (gamma, amplitude) = (self.gamma, self.boundary_amplitude);
        match self.boundary {
            BoundaryKind::Constant => BoundaryTrajectory::Constant { value: gamma },
            BoundaryKind::ExpDecay => BoundaryTrajectory::ExpDecay { gamma, amplitude },
            BoundaryKind::SinDecay => BoundaryTrajectory::DampedSine { gamma, amplitude },
            BoundaryKind::Sine => BoundaryTrajectory::Sine { amplitude },
        }
    }

    pub fn initial_data(&self) -> InitialData {
        let base = self.boundary_trajectory().eval(0.0);
        match self.initial {
            InitialKind::Compatible => InitialData::Constant { value: base },
            InitialKind::Bump => {
                InitialData::Bump { base, amplitude: self.initial_amplitude, radius: self.initial_radius }
            }
        }
    }

    /// Half-widths of the elliptic nested schedule.
    pub fn level_half_widths(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.level0 * 2f64.powi(k as i32)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let kind = self.scenario;
        let err = |field: &str, msg: String| Err(ConfigError::new(field, msg));
        for (field, v) in self.real_fields() {
            if !v.is_finite() {
                return err(field, format!("must be finite, got {v}"));
            }
        }
        if self.dim == 0 {
            return err("dim", "dimension must be at least 1".into());
        }
        if kind != ScenarioKind::Barriers && self.dim != 1 {
            return err("dim", format!("the {} solvers are one-dimensional, got N = {}", kind.name(), self.dim));
        }
        if !(self.s > 0.0 && self.s < 0.5) {
            return err("s", format!("order must lie in (0, 1/2), got {}", self.s));
        }
        if !(self.c0 > 0.0) {
            return err("c0", format!("diffusion lower bound needs c0 > 0, got {}", self.c0));
        }
        if !(self.alpha > 2.0 * self.s) {
            return err("alpha", format!("hypothesis alpha > 2s fails: alpha = {}, s = {}", self.alpha, self.s));
        }
        if !(self.dim as f64 > 2.0 * self.s) {
            return err("dim", format!("hypothesis N > 2s fails: N = {}, s = {}", self.dim, self.s));
        }
        if self.diffusion == DiffusionKind::Modulated && self.modulation < 0.0 {
            return err("modulation", format!("must be nonnegative, got {}", self.modulation));
        }
        if self.reaction == ReactionKind::GaussianWell {
            if self.well_depth < 0.0 {
                return err("well_depth", format!("a well has c ≤ 0, so depth must be nonnegative, got {}", self.well_depth));
            }
            if !(self.well_width > 0.0) {
                return err("well_width", format!("must be positive, got {}", self.well_width));
            }
        }
        if self.source == SourceKind::Bump && !(self.source_radius > 0.0) {
            return err("source_radius", format!("must be positive, got {}", self.source_radius));
        }
        if self.initial == InitialKind::Bump && !(self.initial_radius > 0.0) {
            return err("initial_radius", format!("must be positive, got {}", self.initial_radius));
        }

        let coeffs = self.coefficients();
        let c_plus = coeffs.c.positive_sup();
        let c_field = match self.reaction {
            ReactionKind::GaussianWell => "well_depth",
            _ => "reaction_value",
        };
        let needs_c_nonpositive = [
            (ScenarioKind::Elliptic, "the elliptic problem"),
            (ScenarioKind::Asymptotic, "the long-time limit"),
        ];
        for (k, what) in needs_c_nonpositive {
            if kind.includes(k) && c_plus > 0.0 {
                return err(c_field, format!("{what} requires the hypothesis c ≤ 0, got sup c = {c_plus}"));
            }
        }
        if kind.includes(ScenarioKind::Parabolic) && self.infinite_horizon && c_plus > 0.0 {
            return err(
                c_field,
                format!("an infinite time horizon requires the hypothesis c ≤ 0, got sup c = {c_plus}"),
            );
        }

        if !(self.dx > 0.0) {
            return err("dx", format!("must be positive, got {}", self.dx));
        }
        if !(self.window > 0.0) {
            return err("window", format!("must be positive, got {}", self.window));
        }
        if !(self.tol > 0.0) {
            return err("tol", format!("must be positive, got {}", self.tol));
        }
        if kind.includes(ScenarioKind::Elliptic) {
            if self.levels < 3 {
                return err("levels", format!("a nested limit needs at least 3 levels, got {}", self.levels));
            }
            if !(self.level0 > self.window) {
                return err("level0", format!("smallest ball {} must contain the window {}", self.level0, self.window));
            }
            let top = self.level0 * 2f64.powi(self.levels as i32 - 1);
            check_grid("levels", top, self.dx)?;
        }

        let dynamic = kind.includes(ScenarioKind::Parabolic) || kind.includes(ScenarioKind::Asymptotic);
        if dynamic {
            if !(self.dt > 0.0) {
                return err("dt", format!("must be positive, got {}", self.dt));
            }
            if !(self.horizon >= self.dt) {
                return err("horizon", format!("must be at least one step dt = {}, got {}", self.dt, self.horizon));
            }
            if self.dt * c_plus >= 1.0 {
                return err("dt", format!("implicit step needs dt·sup c < 1, got {}", self.dt * c_plus));
            }
            if !(self.half_width > self.window) {
                return err("half_width", format!("ball {} must contain the window {}", self.half_width, self.window));
            }
            check_grid("half_width", self.half_width, self.dx)?;
            ParabolicProblem::new(coeffs, self.initial_data(), self.boundary_trajectory(), self.s)
                .map_err(|e| ConfigError::new("initial", e.to_string()))?;
        }
        if kind.includes(ScenarioKind::Asymptotic) {
            if self.boundary_trajectory().limit().is_none() {
                return err("boundary", "the long-time limit needs exterior data with a limit as t → ∞".into());
            }
            if !(0.25 * self.half_width > self.window) {
                return err(
                    "half_width",
                    format!("the long-time comparison needs half_width/4 > window, got {}", 0.25 * self.half_width),
                );
            }
            if self.checkpoints.is_empty() {
                return err("checkpoints", "at least one checkpoint is needed".into());
            }
            if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
                return err("checkpoints", "must be strictly increasing".into());
            }
            let last = *self.checkpoints.last().expect("non-empty");
            if !(self.checkpoints[0] > 0.0 && last <= self.horizon) {
                return err("checkpoints", format!("must lie in (0, horizon = {}]", self.horizon));
            }
            if !(self.discrepancy_tol > 0.0) {
                return err("discrepancy_tol", format!("must be positive, got {}", self.discrepancy_tol));
            }
        }
        Ok(())
    }

    fn real_fields(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("s", self.s),
            ("alpha", self.alpha),
            ("c0", self.c0),
            ("modulation", self.modulation),
            ("reaction_value", self.reaction_value),
            ("well_depth", self.well_depth),
            ("well_width", self.well_width),
            ("source_amplitude", self.source_amplitude),
            ("source_radius", self.source_radius),
            ("gamma", self.gamma),
            ("boundary_amplitude", self.boundary_amplitude),
            ("initial_amplitude", self.initial_amplitude),
            ("initial_radius", self.initial_radius),
            ("half_width", self.half_width),
            ("level0", self.level0),
            ("dx", self.dx),
            ("dt", self.dt),
            ("horizon", self.horizon),
            ("window", self.window),
            ("tol", self.tol),
            ("discrepancy_tol", self.discrepancy_tol),
        ];
        v.extend(self.checkpoints.iter().map(|&t| ("checkpoints", t)));
        v
    }
}

fn check_grid(field: &str, half_width: f64, dx: f64) -> Result<(), ConfigError> {
    let grid = Grid1D::with_spacing(half_width, dx).map_err(|e| ConfigError::new(field, e.to_string()))?;
    if grid.len() > MAX_NODES {
        return Err(ConfigError::new(
            field,
            format!("ball of half-width {half_width} at dx = {dx} has {} nodes, limit {MAX_NODES}", grid.len()),
        ));
    }
    Ok(())
}

/// Name of the key on the line holding byte offset `pos`.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let start = text[..pos.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    (!key.is_empty() && !key.starts_with('#')).then(|| key.trim_matches('"').to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_kind() {
        for kind in [
            ScenarioKind::Barriers,
            ScenarioKind::Elliptic,
            ScenarioKind::Parabolic,
            ScenarioKind::Asymptotic,
            ScenarioKind::VerifyAll,
        ] {
            ScenarioConfig::reference(kind).validate().unwrap();
        }
    }

    #[test]
    fn empty_document_is_the_reference() {
        assert_eq!(ScenarioConfig::from_toml("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn normalized_form_round_trips() {
        let mut cfg = ScenarioConfig::reference(ScenarioKind::Parabolic);
        cfg.boundary = BoundaryKind::SinDecay;
        cfg.tol = 3.3e-5;
        cfg.out = Some(PathBuf::from("runs/a"));
        let text = cfg.to_toml();
        let back = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn integers_are_accepted_for_reals() {
        let cfg = ScenarioConfig::from_toml("horizon = 20\nhalf_width = 40\ncheckpoints = [5, 10]").unwrap();
        assert_eq!(cfg.horizon, 20.0);
        assert_eq!(cfg.checkpoints, vec![5.0, 10.0]);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("alpha = 0.4", "alpha"),
            ("s = 0.5", "s"),
            ("scenario = \"elliptic\"\ndim = 3", "dim"),
            ("scenario = \"parabolic\"\nreaction = \"constant\"\nreaction_value = 0.3\ninfinite_horizon = true", "reaction_value"),
            ("well_depth = -1.0", "well_depth"),
            ("levels = 2", "levels"),
            ("dx = 0.001", "levels"),
            ("scenario = \"asymptotic\"\nboundary = \"sine\"\nboundary_amplitude = 1.0", "boundary"),
            ("checkpoints = [10.0, 5.0]", "checkpoints"),
            ("colour = 1", "colour"),
            ("tol = \"small\"", "tol"),
        ];
        for (text, field) in cases {
            let e = ScenarioConfig::from_toml(text).unwrap_err();
            assert_eq!(e.field, field, "{text}: {e}");
        }
    }

    #[test]
    fn positive_reaction_on_infinite_horizon_cites_hypothesis() {
        let text = "scenario = \"parabolic\"\nreaction = \"constant\"\nreaction_value = 0.3\ninfinite_horizon = true";
        let e = ScenarioConfig::from_toml(text).unwrap_err();
        assert!(e.message.contains("c ≤ 0"), "{e}");
        // finite horizon is allowed
        let finite = "scenario = \"parabolic\"\nreaction = \"constant\"\nreaction_value = 0.3";
        ScenarioConfig::from_toml(finite).unwrap();
    }

    #[test]
    fn derived_data_follow_the_selectors() {
        let cfg = ScenarioConfig::from_toml("boundary = \"sin-decay\"\ngamma = 0.25\ninitial = \"bump\"\ninitial_amplitude = 0.5")
            .unwrap();
        assert_eq!(cfg.boundary_trajectory(), BoundaryTrajectory::DampedSine { gamma: 0.25, amplitude: 0.5 });
        assert_eq!(cfg.initial_data(), InitialData::Bump { base: 0.25, amplitude: 0.5, radius: 1.0 });
        assert_eq!(cfg.level_half_widths(), vec![10.0, 20.0, 40.0, 80.0, 160.0]);
    }
}
