//! Configuration, file formats and command entry points behind the `gswap`
//! binary. The heavy lifting stays in the library; the binary only parses
//! arguments and maps errors to exit codes.
//!
//! Output conventions: CSV with header
//! `t_s,temperature_K,eta_minus,log_negativity,xrel_variance,decoherence_time_s`,
//! numbers formatted with 12 significant digits in scientific notation, LF
//! line endings. A row whose output is not entangled leaves the
//! `decoherence_time_s` cell empty. Identical configurations produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, CovarianceMatrix, TwoModeBlocks};
use crate::optomech::OptomechParams;
use crate::protocol::{sweep, time_grid, Strategy, SweepResult};
use crate::swapping::{swap_general, SwapInputs};
use crate::validation::{run_all, PropertyReport};

/// Sweep output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!(
                "unknown format `{other}` (expected `csv` or `json`)"
            ))),
        }
    }
}

/// Flat, SI-unit run configuration. Serializable as a flat JSON object; every
/// field can be overridden from the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// `sqrt(theta^2 - chi^2)` in 1/s.
    pub coupling_rate_diff: f64,
    /// `theta / chi` (dimensionless, > 1).
    pub coupling_ratio: f64,
    /// Mechanical frequency in rad/s.
    pub mech_frequency: f64,
    /// Mechanical damping rate in 1/s.
    pub mech_damping: f64,
    /// Bath temperatures in kelvin, one output series each.
    pub temperatures: Vec<f64>,
    pub strategy: Strategy,
    /// Sweep window in seconds.
    pub t_min: f64,
    pub t_max: f64,
    /// Number of grid points covering `[t_min, t_max]` inclusive.
    pub t_steps: usize,
    pub output: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::paper_fig2()
    }
}

impl RunConfig {
    /// The built-in `paper-fig2` preset: the published reference parameter
    /// set (`sqrt(theta^2 - chi^2) = 1e3 /s`, ratio `1 + 2.5e-7`,
    /// `Omega = 5e8 rad/s`, `1/Gamma = 1 s`) swept over 3 microseconds at
    /// 0 K, 5 mK and 300 K.
    pub fn paper_fig2() -> Self {
        Self {
            coupling_rate_diff: 1.0e3,
            coupling_ratio: 1.0 + 2.5e-7,
            mech_frequency: 5.0e8,
            mech_damping: 1.0,
            temperatures: vec![0.0, 5.0e-3, 300.0],
            strategy: Strategy::NonAssisted,
            t_min: 0.0,
            t_max: 3.0e-6,
            t_steps: 512,
            output: PathBuf::from("sweep.csv"),
            format: OutputFormat::Csv,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-fig2" => Ok(Self::paper_fig2()),
            other => Err(Error::InvalidInput(format!(
                "unknown preset `{other}` (available: paper-fig2)"
            ))),
        }
    }

    /// Load a flat JSON configuration file. Unknown fields are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path:?}: {e}")))?;
        Ok(cfg)
    }

    /// Field-level validation; error messages name the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_rate_diff > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field `coupling_rate_diff` must be positive, got {}",
                self.coupling_rate_diff
            )));
        }
        if !(self.coupling_ratio > 1.0) {
            return Err(Error::InvalidInput(format!(
                "field `coupling_ratio` must exceed 1, got {}",
                self.coupling_ratio
            )));
        }
        if !(self.mech_frequency > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field `mech_frequency` must be positive, got {}",
                self.mech_frequency
            )));
        }
        if !(self.mech_damping > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field `mech_damping` must be positive, got {}",
                self.mech_damping
            )));
        }
        if self.temperatures.is_empty() {
            return Err(Error::InvalidInput(
                "field `temperatures` must be nonempty".into(),
            ));
        }
        if let Some(&t) = self.temperatures.iter().find(|&&t| !(t >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "field `temperatures` must be nonnegative, got {t}"
            )));
        }
        if !(self.t_min <= self.t_max) {
            return Err(Error::InvalidInput(format!(
                "field `t_min` ({}) must not exceed `t_max` ({})",
                self.t_min, self.t_max
            )));
        }
        if !(self.t_min >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "field `t_min` must be nonnegative, got {}",
                self.t_min
            )));
        }
        if self.t_steps < 1 {
            return Err(Error::InvalidInput(
                "field `t_steps` must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<OptomechParams> {
        OptomechParams::from_rate_diff(
            self.coupling_rate_diff,
            self.coupling_ratio,
            self.mech_frequency,
            self.temperatures[0],
            self.mech_damping,
        )
    }
}

/// 12 significant digits, scientific notation.
fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Write the sweep series as CSV (one row per temperature and time).
pub fn write_sweep_csv<W: Write>(results: &[SweepResult], mut w: W) -> Result<()> {
    w.write_all(b"t_s,temperature_K,eta_minus,log_negativity,xrel_variance,decoherence_time_s\n")?;
    for series in results {
        for row in &series.rows {
            let decoherence = row
                .decoherence_time
                .map(fmt_sci)
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_sci(row.t),
                fmt_sci(series.temperature),
                fmt_sci(row.eta_minus),
                fmt_sci(row.log_negativity),
                fmt_sci(row.xrel_variance),
                decoherence
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    config: &'a RunConfig,
    series: &'a [SweepResult],
}

/// Write the sweep series as JSON with the configuration embedded.
pub fn write_sweep_json<W: Write>(config: &RunConfig, results: &[SweepResult], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &SweepDocument {
        config,
        series: results,
    })
    .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Run the configured sweep and write the output file. Honors the
/// `GSWAP_THREADS` environment variable as a worker-count cap.
pub fn cmd_sweep(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let params = config.params()?;
    let grid = time_grid(config.t_min, config.t_max, config.t_steps);

    let results = match thread_cap()? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidInput(format!("GSWAP_THREADS: {e}")))?;
            pool.install(|| sweep(&params, &grid, &config.temperatures, config.strategy))?
        }
        None => sweep(&params, &grid, &config.temperatures, config.strategy)?,
    };

    let file = File::create(&config.output)?;
    let mut writer = BufWriter::new(file);
    match config.format {
        OutputFormat::Csv => write_sweep_csv(&results, &mut writer)?,
        OutputFormat::Json => write_sweep_json(config, &results, &mut writer)?,
    }
    writer.flush()?;
    Ok(())
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("GSWAP_THREADS") {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                Error::InvalidInput(format!("GSWAP_THREADS must be a positive integer, got `{v}`"))
            })?;
            if n == 0 {
                return Err(Error::InvalidInput(
                    "GSWAP_THREADS must be a positive integer, got `0`".into(),
                ));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Input file of the `swap` command: two 4x4 covariance matrices as row-major
/// nested JSON arrays.
#[derive(Debug, Serialize, Deserialize)]
pub struct SwapRequest {
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

/// Output of the `swap` command.
#[derive(Debug, Serialize)]
pub struct SwapReport {
    pub output_cm: Vec<Vec<f64>>,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub log_negativity: f64,
}

fn cm_from_rows(rows: &[Vec<f64>], label: &str) -> Result<CovarianceMatrix> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::InvalidInput(format!(
            "`{label}` must be a 4x4 row-major array"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let cm = CovarianceMatrix::new(nalgebra::DMatrix::from_row_slice(4, 4, &flat))?;
    let defect = cm.physicality_defect();
    if defect < -crate::gaussian::PHYSICALITY_TOL {
        return Err(Error::InvalidInput(format!(
            "`{label}` violates the uncertainty principle: min eigenvalue of V + iJ/2 is {defect:.6e}"
        )));
    }
    Ok(cm)
}

fn cm_to_rows(cm: &CovarianceMatrix) -> Vec<Vec<f64>> {
    (0..cm.dim())
        .map(|i| (0..cm.dim()).map(|j| cm.matrix()[(i, j)]).collect())
        .collect()
}

/// Swap two resources read from a JSON file and report the output matrix and
/// its entanglement.
pub fn cmd_swap(input: &Path) -> Result<SwapReport> {
    let text = std::fs::read_to_string(input)?;
    let request: SwapRequest =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{input:?}: {e}")))?;
    let first = cm_from_rows(&request.first, "first")?;
    let second = cm_from_rows(&request.second, "second")?;
    let inputs = SwapInputs::new(
        TwoModeBlocks::from_cm(&first)?,
        TwoModeBlocks::from_cm(&second)?,
    )?;
    let out = swap_general(&inputs)?;
    let eigs = out.pt_symplectic_eigenvalues()?;
    Ok(SwapReport {
        output_cm: cm_to_rows(&out),
        eta_minus: eigs.eta_minus,
        eta_plus: eigs.eta_plus,
        log_negativity: log_negativity(eigs.eta_minus),
    })
}

/// Run the seeded self-validation suite, printing one line per property.
/// Returns the reports and whether everything passed.
pub fn cmd_validate(seed: u64, cases: usize, inject: f64) -> (Vec<PropertyReport>, bool) {
    let reports = run_all(seed, cases, inject);
    let all_passed = reports.iter().all(|r| r.passed);
    (reports, all_passed)
}
