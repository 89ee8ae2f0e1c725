use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracbarrier_cli::{resolve_out_dir, run_scenario, write_artifacts, RunOptions, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "fracbarrier", version, about = "Barrier certificates and nested-ball solvers for a(x)(-Δ)^s")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML scenario file; missing keys take the reference values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config `out`, then $FRACBARRIER_OUT, then ./fracbarrier-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Nested-limit tolerance, overriding the config
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run independent pipelines in parallel
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Construct and certify the decay and global barriers
    Barriers,
    /// Nested-ball elliptic limit with decay bound
    Elliptic,
    /// Parabolic run with global bounds, boundary envelope and monotone envelopes
    Parabolic,
    /// Long-time convergence to the elliptic solution
    Asymptotic,
    /// Every pipeline above
    VerifyAll,
}

impl From<Command> for ScenarioKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Barriers => ScenarioKind::Barriers,
            Command::Elliptic => ScenarioKind::Elliptic,
            Command::Parabolic => ScenarioKind::Parabolic,
            Command::Asymptotic => ScenarioKind::Asymptotic,
            Command::VerifyAll => ScenarioKind::VerifyAll,
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, fracbarrier_cli::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    cfg.scenario = cli.command.into();
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let dir = resolve_out_dir(cli.out.as_deref(), &cfg);
    let report = run_scenario(&cfg, RunOptions { parallel: cli.parallel });
    if let Err(e) = write_artifacts(&report, &dir) {
        eprintln!("{e}");
        return ExitCode::from(3);
    }
    print!("{}", report.to_text());
    println!("\nartifacts in {}", dir.display());
    if report.all_pass {
        ExitCode::SUCCESS
    } else {
        for f in report.failures() {
            eprintln!("certificate failed: {f}");
        }
        ExitCode::from(1)
    }
}
