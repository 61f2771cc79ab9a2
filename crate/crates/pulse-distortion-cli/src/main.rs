use clap::{Args, Parser, Subcommand};
use pulse_distortion::validation::Level;
use pulse_distortion_cli::config::Scenario;
use pulse_distortion_cli::{self as cli, CliError, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Gravitational distortion of single-photon pulses between two radii.
#[derive(Parser)]
#[command(name = "pulse-distortion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file of dotted key = value lines, layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset: earth-leo, earth-geo, earth-surface-lab or desk-scale.
    #[arg(long)]
    preset: Option<String>,
    /// Redshift factor, replacing the geometry.
    #[arg(long)]
    chi: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Convergence tolerance on the optimal shift z̄.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Redshift factor and its expansions.
    Redshift(Common),
    /// Overlaps at a fixed shift.
    Overlap {
        #[command(flatten)]
        common: Common,
        /// Dimensionless shift z̄.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z_bar: f64,
    },
    /// Optimal frequency shift; --out writes a one-row CSV.
    Optimize(Common),
    /// CSV over the scenario's sweep axis.
    Sweep(Common),
    /// Purity and grid fidelities of the discretized states.
    Purity(Common),
    /// Runs the validation battery.
    Validate {
        #[command(flatten)]
        common: Common,
        /// fast or full.
        #[arg(long, default_value = "fast")]
        level: String,
        /// Scales one coefficient by (1 + rel), as name=rel.
        #[arg(long, hide = true)]
        perturb: Option<String>,
    },
    /// Prints the resolved scenario in a form --config reads back.
    DumpConfig(Common),
}

fn scenario(c: &Common) -> Result<Scenario, CliError> {
    let mut s = match &c.preset {
        Some(name) => Scenario::preset(name)?,
        None => Scenario::baseline(),
    };
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        s = s.overlay(&text)?;
    }
    if let Some(chi) = c.chi {
        s.spacetime = cli::config::SpacetimeSpec::Chi(chi);
        s.check()?;
    }
    Ok(s)
}

fn emit(c: &Common, text: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn(e: &cli::Evaluation) {
    if let Some(w) = &e.warning {
        eprintln!("warning: {w}");
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let common = match &command {
        Command::Redshift(c) | Command::Optimize(c) | Command::Sweep(c) | Command::Purity(c) | Command::DumpConfig(c) => c.clone(),
        Command::Overlap { common, .. } | Command::Validate { common, .. } => common.clone(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let opts = RunOptions {
        shift_tol: common.tolerance,
    };
    pool.install(|| match command {
        Command::Validate { level, perturb, .. } => {
            let level: Level = level.parse().map_err(|e: pulse_distortion::Error| CliError::Config(e.to_string()))?;
            let perturb = match &perturb {
                None => None,
                Some(p) => {
                    let (name, rel) = p
                        .split_once('=')
                        .ok_or_else(|| CliError::Config("--perturb expects name=relative".into()))?;
                    let rel: f64 = rel.parse().map_err(|_| CliError::Config(format!("bad relative perturbation '{rel}'")))?;
                    Some((name.to_string(), rel))
                }
            };
            let (text, passed) = cli::cmd_validate(level, perturb.as_ref().map(|(n, r)| (n.as_str(), *r)))?;
            emit(&common, &text)?;
            if passed {
                Ok(())
            } else {
                Err(CliError::ValidationFailed)
            }
        }
        Command::Redshift(_) => emit(&common, &cli::cmd_redshift(&scenario(&common)?)?),
        Command::Overlap { z_bar, .. } => emit(&common, &cli::cmd_overlap(&scenario(&common)?, z_bar, &opts)?),
        Command::Optimize(_) => {
            let s = scenario(&common)?;
            let e = cli::evaluate(&s, &opts)?;
            warn(&e);
            match &common.out {
                Some(_) => emit(&common, &cli::csv(std::slice::from_ref(&e))),
                None => emit(&common, &cli::optimize_report(&e, &s)),
            }
        }
        Command::Sweep(_) => {
            let rows = cli::sweep(&scenario(&common)?, &opts)?;
            rows.iter().for_each(warn);
            emit(&common, &cli::csv(&rows))
        }
        Command::Purity(_) => emit(&common, &cli::cmd_purity(&scenario(&common)?, &opts)?),
        Command::DumpConfig(_) => emit(&common, &scenario(&common)?.dump()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
