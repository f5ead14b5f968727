mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "geoinfer", version, about = "Geometric inference experiments on compact sets")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Main sample budget of the command (overrides the config).
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Distance and gradient norm at query points.
    Dist,
    /// Sample the μ-medial axis.
    Medial,
    /// Covering numbers of the μ-medial axis across scales.
    Covering,
    /// Boundary measure of a region.
    Boundary,
    /// Steiner polynomial fit of tube volumes.
    Curvature,
    /// Projection and critical-point stability under perturbation.
    Stability,
    /// Hölder curve of the projection map.
    Holder,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::Medial => "medial",
            Command::Covering => "covering",
            Command::Boundary => "boundary",
            Command::Curvature => "curvature",
            Command::Stability => "stability",
            Command::Holder => "holder",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { 2 } else { 1 })
        }
    }
}

fn execute(cli: &Cli) -> Result<(), run::CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::RunConfig::load(path)?,
        None => config::RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.samples {
        cfg.samples = Some(n);
    }
    cfg.validate()?;
    let base = cli.config.as_ref().and_then(|p| p.parent().map(|d| d.to_path_buf())).unwrap_or_default();
    std::fs::create_dir_all(&cli.out).map_err(geoinfer::Error::from)?;
    with_workers(cli.workers, || run::dispatch(cli.command, &cfg, &base, &cli.out))
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    if workers.is_some_and(|n| n > 1) {
        log::warn!("built without the parallel feature; running on one thread");
    }
    f()
}
