use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gswap::cli::{cmd_swap, cmd_sweep, cmd_validate, OutputFormat, RunConfig};
use gswap::error::Error;
use gswap::protocol::Strategy;

/// Gaussian entanglement swapping and pulsed-optomechanics sweeps.
#[derive(Parser)]
#[command(name = "gswap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep output entanglement versus pulse duration and write CSV/JSON.
    Sweep(SweepArgs),
    /// Swap two resources given as 4x4 covariance matrices in a JSON file.
    Swap {
        /// JSON file with fields `first` and `second` (row-major 4x4 arrays).
        input: PathBuf,
    },
    /// Run the seeded self-validation suite.
    Validate {
        /// Base seed for case generation.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Cases per property.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Inject an artificial error of this size into one oracle comparison
        /// (negative control; the run must then fail).
        #[arg(long, default_value_t = 0.0)]
        inject_error: f64,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Flat JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset (`paper-fig2`).
    #[arg(long)]
    preset: Option<String>,
    /// Detection strategy: `non-assisted` or `assisted`.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// sqrt(theta^2 - chi^2) in 1/s.
    #[arg(long)]
    coupling_rate_diff: Option<f64>,
    /// theta/chi (> 1).
    #[arg(long)]
    coupling_ratio: Option<f64>,
    /// Mechanical frequency in rad/s.
    #[arg(long)]
    mech_frequency: Option<f64>,
    /// Mechanical damping rate in 1/s.
    #[arg(long)]
    mech_damping: Option<f64>,
    /// Comma-separated bath temperatures in kelvin.
    #[arg(long, value_delimiter = ',')]
    temperatures: Option<Vec<f64>>,
    /// Start of the time window in seconds.
    #[arg(long)]
    t_min: Option<f64>,
    /// End of the time window in seconds.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    t_steps: Option<usize>,
    /// Output file path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: `csv` or `json`.
    #[arg(long)]
    format: Option<OutputFormat>,
}

impl SweepArgs {
    fn resolve(self) -> Result<RunConfig, Error> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), None) => RunConfig::preset(name)?,
            (None, Some(path)) => RunConfig::from_file(path)?,
            (None, None) => RunConfig::default(),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput(
                    "pass either --preset or --config, not both".into(),
                ))
            }
        };
        if let Some(v) = self.strategy {
            cfg.strategy = v;
        }
        if let Some(v) = self.coupling_rate_diff {
            cfg.coupling_rate_diff = v;
        }
        if let Some(v) = self.coupling_ratio {
            cfg.coupling_ratio = v;
        }
        if let Some(v) = self.mech_frequency {
            cfg.mech_frequency = v;
        }
        if let Some(v) = self.mech_damping {
            cfg.mech_damping = v;
        }
        if let Some(v) = self.temperatures {
            cfg.temperatures = v;
        }
        if let Some(v) = self.t_min {
            cfg.t_min = v;
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.t_steps {
            cfg.t_steps = v;
        }
        if let Some(v) = self.output {
            cfg.output = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        Ok(cfg)
    }
}

/// Exit codes: 0 success, 1 validation failure, 2 invalid input or
/// configuration, 3 numerical failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::Parse(_)
        | Error::Unphysical(_)
        | Error::InvalidMode { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotSymmetric(_)
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => {
            let cfg = match args.resolve().and_then(|c| c.validate().map(|_| c)) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match cmd_sweep(&cfg) {
                Ok(()) => {
                    println!(
                        "wrote {} ({} temperatures x {} points, {})",
                        cfg.output.display(),
                        cfg.temperatures.len(),
                        cfg.t_steps,
                        cfg.strategy
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code_for(&e))
                }
            }
        }
        Command::Swap { input } => match cmd_swap(&input) {
            Ok(report) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
        Command::Validate {
            seed,
            cases,
            inject_error,
        } => {
            let (reports, all_passed) = cmd_validate(seed, cases, inject_error);
            for report in &reports {
                println!("{}", report.summary_line());
            }
            if all_passed {
                println!("all {} properties passed (seed {seed})", reports.len());
                ExitCode::SUCCESS
            } else {
                println!("validation FAILED (seed {seed})");
                ExitCode::from(1)
            }
        }
    }
}
