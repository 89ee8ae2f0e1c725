//! Configuration-driven runner: validates a scenario, runs the certificate
//! and solver pipelines, and writes reports, CSV tables and SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pipeline;
pub mod plot;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{ConfigError, ScenarioConfig, ScenarioKind};
pub use pipeline::{run_scenario, RunOptions};
pub use report::{emit_report, Certificate, Format, Report, ScenarioResult};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FRACBARRIER_OUT";
pub const DEFAULT_OUT: &str = "fracbarrier-out";

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error(transparent)]
    Write(#[from] report::WriteError),
    #[error(transparent)]
    Plot(#[from] plot::PlotError),
}

/// `--out`, then the config's `out`, then `$FRACBARRIER_OUT`, then
/// `./fracbarrier-out`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Writes `report.txt`, `report.json`, the CSV tables, the plots and the
/// normalized `config.toml` (when the report carries a config).
pub fn write_artifacts(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, ArtifactError> {
    let mut files = Vec::new();
    for f in [Format::Text, Format::Json, Format::Csv] {
        files.extend(emit_report(report, f, dir)?);
    }
    for r in &report.results {
        files.extend(plot::write_plots(&r.plots, dir)?);
    }
    if let Some(cfg) = &report.config {
        files.push(report::write_file(dir.join("config.toml"), cfg.to_toml().as_bytes())?);
    }
    Ok(files)
}
