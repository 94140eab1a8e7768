use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod output;
mod svg;

use config::{parse_list, Command, RawConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io(_) => 2,
        }
    }
}

/// Steady states, spectra and photon statistics of a driven three-level
/// atom in a single-mode cavity.
#[derive(Debug, Parser)]
#[command(name = "cavity-eit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Transmission and g2(0) versus a detuning-like axis.
    Spectrum(RunArgs),
    /// Drive sweep with all mean-field branches and hysteresis traces.
    Scurve(RunArgs),
    /// Two-dimensional map of the number of mean-field solutions.
    Phase(RunArgs),
    /// Delayed second-order correlation at one parameter point.
    G2tau(RunArgs),
    /// Runs the acceptance suite; exits with the number of failures.
    Validate {
        /// Comma-separated check ids, e.g. A1,A8.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, applied after the other options.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// mfa, qme or mfa,qme.
    #[arg(long)]
    engines: Option<String>,
    /// Grid points, N or N,M for phase diagrams.
    #[arg(long, value_name = "N[,M]")]
    resolution: Option<String>,
    /// Axis range LO,HI or LO,HI,LO2,HI2 for phase diagrams.
    #[arg(long, value_name = "LO,HI[,LO2,HI2]", allow_hyphen_values = true)]
    range: Option<String>,
    /// Read omega, delta_c and u0 in units of g.
    #[arg(long)]
    g_units: bool,
}

impl RunArgs {
    fn raw(&self) -> Result<RawConfig, CliError> {
        let mut raw = RawConfig::default();
        if let Some(path) = &self.config {
            raw.load(path)?;
        }
        let mut put = |k: &str, v: String| raw.insert(k, &v).map_err(CliError::Config);
        if let Some(e) = &self.engines {
            put("engines", e.clone())?;
        }
        if let Some(r) = &self.resolution {
            let n: Vec<usize> = parse_list(r, "resolution")?;
            match n.as_slice() {
                [x] => put("resolution", x.to_string())?,
                [x, y] => {
                    put("resolution", x.to_string())?;
                    put("y_resolution", y.to_string())?;
                }
                _ => return Err(CliError::Config(format!("--resolution expects N or N,M, got `{r}`"))),
            }
        }
        if let Some(r) = &self.range {
            let v: Vec<f64> = parse_list(r, "range")?;
            let keys: &[&str] = match v.len() {
                2 => &["lo", "hi"],
                4 => &["lo", "hi", "y_lo", "y_hi"],
                _ => return Err(CliError::Config(format!("--range expects LO,HI or LO,HI,LO2,HI2, got `{r}`"))),
            };
            for (k, x) in keys.iter().zip(&v) {
                put(k, x.to_string())?;
            }
        }
        if self.g_units {
            put("g_units", "true".into())?;
        }
        for s in &self.set {
            raw.set(s)?;
        }
        Ok(raw)
    }
}

fn run_with(args: &RunArgs, cmd: Command) -> Result<(), CliError> {
    let cfg = args.raw()?.resolve(cmd)?;
    std::fs::create_dir_all(&args.out)?;
    match cmd {
        Command::Spectrum => commands::spectrum(&cfg, &args.out),
        Command::Scurve => commands::scurve(&cfg, &args.out),
        Command::Phase => commands::phase(&cfg, &args.out),
        Command::G2tau => commands::g2tau(&cfg, &args.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Spectrum(a) => run_with(a, Command::Spectrum),
        Cmd::Scurve(a) => run_with(a, Command::Scurve),
        Cmd::Phase(a) => run_with(a, Command::Phase),
        Cmd::G2tau(a) => run_with(a, Command::G2tau),
        Cmd::Validate { only, inject_fault } => match commands::validate(only.as_deref(), inject_fault.as_deref()) {
            Ok(failures) => return ExitCode::from(failures.min(255) as u8),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
