use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dicke_rap_cli::config::{self, EssTargetConfig, RobustnessConfig, ScenarioConfig, SweepConfig};
use dicke_rap_cli::export::write_atomic;
use dicke_rap_cli::runner::{self, Artifact};
use dicke_rap_cli::{CliError, Result};
use log::{error, info, warn};

#[derive(Parser)]
#[command(
    name = "dicke-rap",
    version,
    about = "Dicke and squeezed-state preparation by chirped adiabatic passage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for sweeps and scans (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Reserved; no stochastic component uses it yet.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Propagate one scenario: trace CSV and summary JSON.
    Simulate,
    /// RAP versus ideal ESS gain over a list of atom numbers.
    SweepScaling,
    /// Gain lost when the schedule is designed for a different atom number.
    Robustness,
    /// Diabatic and adiabatic levels plus analytic crossing times.
    Levels,
    /// ESS target state for a given contrast.
    EssTarget,
    /// Wigner function of a trace state on the sphere.
    Wigner,
}

fn execute(cli: &Cli) -> Result<Vec<Artifact>> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    match cli.command {
        Command::Simulate => runner::run_simulate(&config::load::<ScenarioConfig>(path)?),
        Command::Levels => runner::run_levels(&config::load::<ScenarioConfig>(path)?),
        Command::Wigner => runner::run_wigner(&config::load::<ScenarioConfig>(path)?),
        Command::SweepScaling => runner::run_sweep_scaling(&config::load::<SweepConfig>(path)?),
        Command::Robustness => runner::run_robustness(&config::load::<RobustnessConfig>(path)?),
        Command::EssTarget => runner::run_ess_target(&config::load::<EssTargetConfig>(path)?),
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            warn!("could not size the thread pool: {e}");
        }
    }
    if let Some(seed) = cli.seed {
        info!("seed {seed} accepted; no stochastic component uses it");
    }
    let artifacts = execute(cli)?;
    for a in &artifacts {
        write_atomic(&cli.out, &a.name, &a.contents)?;
        info!("wrote {}", cli.out.join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DICKE_RAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
