//! Command-line front end: resolves configs (files or bundled names), runs
//! the simulation library, and reports results with stable exit codes
//! (0 success, 2 configuration error, 3 numerical-invariant violation,
//! 1 I/O failure).

use cavitywalk::config::{bundled, ConfigError, SimulationConfig, BUNDLED_NAMES};
use cavitywalk::sim::{self, RunArtifacts, SimError};
use cavitywalk::witness::{verify_bound_numerically, w_separable_bound};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cavitywalk",
    version,
    about = "Single-excitation quantum walks on networks of lossy atom-cavity nodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configs and write the CSV artifacts they request
    Run {
        /// Config file path or bundled name (fig2_torus, fig3_moebius, …);
        /// passing several fans them out across a worker pool
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output directory; sweeps write one subdirectory per config
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the |alpha|^2 and |beta|^2 grids at one chosen step
    Snapshot {
        /// Config file path or bundled name
        config: String,
        /// Sample step (0 ..= steps)
        #[arg(long)]
        step: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-step total-variation distance between the quantum node
    /// distribution and the classical random walk
    Compare {
        /// Config file path or bundled name
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Numerically cross-check the product-state separability bound
    VerifyBounds {
        /// Number of parties (2 to 8)
        #[arg(long)]
        parties: usize,
        /// Multi-start optimizer trials
        #[arg(long, default_value_t = 32)]
        trials: usize,
        /// RNG seed for the starting points
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(source: &str) -> Result<SimulationConfig, SimError> {
    let path = Path::new(source);
    if path.exists() {
        return Ok(SimulationConfig::load(path)?);
    }
    if let Some(text) = bundled(source) {
        return Ok(SimulationConfig::from_json(text, None)?);
    }
    Err(ConfigError::Invalid {
        field: "config",
        message: format!(
            "`{source}` is neither a readable file nor a bundled config (bundled: {})",
            BUNDLED_NAMES.join(", ")
        ),
    }
    .into())
}

/// Directory label for one config of a sweep: file stem or bundled name.
fn sweep_label(source: &str) -> String {
    Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string())
}

fn report_artifacts(artifacts: &RunArtifacts) {
    for warning in &artifacts.warnings {
        eprintln!("warning: {warning}");
    }
    for file in &artifacts.files {
        println!("wrote {}", file.display());
    }
}

fn fail(err: &SimError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

fn run_command(configs: &[String], out: &Path) -> ExitCode {
    let mut jobs = Vec::new();
    for source in configs {
        let config = match load_config(source) {
            Ok(config) => config,
            Err(err) => return fail(&err),
        };
        let dir = if configs.len() == 1 {
            out.to_path_buf()
        } else {
            out.join(sweep_label(source))
        };
        jobs.push((config, dir));
    }
    let mut exit = ExitCode::SUCCESS;
    for result in sim::run_many(&jobs) {
        match result {
            Ok(artifacts) => report_artifacts(&artifacts),
            Err(err) => exit = fail(&err),
        }
    }
    exit
}

fn verify_bounds_command(parties: usize, trials: usize, seed: u64) -> ExitCode {
    let bound = match w_separable_bound(parties) {
        Ok(bound) => bound,
        Err(err) => return fail(&SimError::from(err)),
    };
    let best = match verify_bound_numerically(parties, trials, seed) {
        Ok(best) => best,
        Err(err) => return fail(&SimError::from(err)),
    };
    println!(
        "parties {parties}: numerical best {best}, closed-form bound {bound}, gap {:e}",
        bound - best
    );
    if best > bound + 1e-6 {
        eprintln!("error: numerical maximum exceeds the closed-form bound");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { configs, out } => run_command(&configs, &out),
        Command::Snapshot { config, step, out } => {
            match load_config(&config).and_then(|config| sim::snapshot(&config, step, &out)) {
                Ok(artifacts) => {
                    report_artifacts(&artifacts);
                    ExitCode::SUCCESS
                }
                Err(err) => fail(&err),
            }
        }
        Command::Compare { config, out } => {
            match load_config(&config).and_then(|config| sim::compare(&config, &out)) {
                Ok(artifacts) => {
                    report_artifacts(&artifacts);
                    ExitCode::SUCCESS
                }
                Err(err) => fail(&err),
            }
        }
        Command::VerifyBounds {
            parties,
            trials,
            seed,
        } => verify_bounds_command(parties, trials, seed),
    }
}
