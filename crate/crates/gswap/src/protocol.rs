//! End-to-end strategies for generating mechanical entanglement from two
//! identical pulsed optomechanical systems.
//!
//! Each pulse entangles a mechanical mode with its Stokes sideband (and
//! correlates it with the anti-Stokes sideband). The detection station either
//! ignores the anti-Stokes beams and Bell-measures the two Stokes beams
//! (non-assisted), or first heterodynes each anti-Stokes beam to sharpen the
//! optomechanical resource before the same Bell measurement (assisted). Both
//! reductions map onto the symmetric swap transform, giving the output
//! entanglement in closed form; the explicit measurement pipeline is kept
//! available as an independent route to the same numbers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, CovarianceMatrix, GaussianState, NormalFormBlocks};
use crate::measurements::{bell_measurement, heterodyne_update};
use crate::optomech::{
    extract_coefficients, propagate, thermal_occupancy, OptomechParams, ThreeModeState,
};
use crate::swapping::{eta_io, swap_symmetric};

/// How the detection station treats the anti-Stokes beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Trace out the anti-Stokes modes, Bell-measure the Stokes modes.
    #[serde(rename = "non-assisted")]
    NonAssisted,
    /// Heterodyne each anti-Stokes mode first, then Bell-measure.
    #[serde(rename = "assisted")]
    Assisted,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::NonAssisted => write!(f, "non-assisted"),
            Strategy::Assisted => write!(f, "assisted"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-assisted" | "non_assisted" | "nonassisted" => Ok(Strategy::NonAssisted),
            "assisted" => Ok(Strategy::Assisted),
            other => Err(Error::Parse(format!(
                "unknown strategy `{other}` (expected `non-assisted` or `assisted`)"
            ))),
        }
    }
}

/// Reduce one propagated three-mode state to the standard-form blocks of the
/// (mechanical, Stokes) resource seen by the swap.
///
/// Non-assisted: `(a, c, d, d') = (B+1/2, A+1/2, C, -C)`.
/// Assisted:     `a = B+1/2 - D^2/(E+1)`, `c = A+1/2 - F^2/(E+1)`,
///               `d = -d' = C + D F/(E+1)`,
/// in terms of the sideband scalars of [`extract_coefficients`]; the assisted
/// replacements are exactly the heterodyne conditioning of the anti-Stokes
/// mode.
pub fn reduce_strategy(state: &ThreeModeState, strategy: Strategy) -> Result<NormalFormBlocks> {
    let co = extract_coefficients(state)?;
    let (a, c, d) = match strategy {
        Strategy::NonAssisted => (
            co.mech_excess + 0.5,
            co.stokes_excess + 0.5,
            co.stokes_mech,
        ),
        Strategy::Assisted => {
            let denom = co.anti_excess + 1.0;
            (
                co.mech_excess + 0.5 - co.mech_anti * co.mech_anti / denom,
                co.stokes_excess + 0.5 - co.stokes_anti * co.stokes_anti / denom,
                co.stokes_mech + co.mech_anti * co.stokes_anti / denom,
            )
        }
    };
    NormalFormBlocks::new(a, c, d, -d).map_err(|e| match e {
        Error::Unphysical(defect) => Error::ModelInconsistency(format!(
            "reduced resource violates the uncertainty principle (defect {defect:.3e})"
        )),
        other => other,
    })
}

/// One evaluated point of a strategy: reduced resource, swap output and its
/// entanglement.
#[derive(Debug, Clone)]
pub struct StrategyPoint {
    pub time: f64,
    pub blocks: NormalFormBlocks,
    pub output_cm: CovarianceMatrix,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub log_negativity: f64,
}

/// Closed-form pipeline: propagate, reduce, swap, quantify.
pub fn run_strategy(
    params: &OptomechParams,
    time: f64,
    strategy: Strategy,
) -> Result<StrategyPoint> {
    let state = propagate(params, time)?;
    let blocks = reduce_strategy(&state, strategy)?;
    let output_cm = swap_symmetric(&blocks)?;
    let eigs = eta_io(&blocks)?;
    Ok(StrategyPoint {
        time,
        blocks,
        output_cm,
        eta_minus: eigs.eta_minus,
        eta_plus: eigs.eta_plus,
        log_negativity: log_negativity(eigs.eta_minus),
    })
}

/// Explicit-measurement pipeline for the same quantity: duplicate the
/// three-mode state, optionally heterodyne both anti-Stokes modes, Bell
/// measure the two Stokes modes, and read the entanglement off the
/// conditional two-mode mechanical state. Used as an independent oracle for
/// [`run_strategy`].
pub fn run_strategy_measured(
    params: &OptomechParams,
    time: f64,
    strategy: Strategy,
) -> Result<(f64, CovarianceMatrix)> {
    let pulse = propagate(params, time)?;
    let one = GaussianState::from_cm(pulse.cm);
    // Mode layout: (stokes1, mech1, anti1, stokes2, mech2, anti2).
    let full = one.tensor(&one);
    let stokes_pair = match strategy {
        Strategy::NonAssisted => full.partial_trace(&[0, 1, 3, 4])?,
        Strategy::Assisted => {
            let after_first = heterodyne_update(&full, 2)?;
            heterodyne_update(&after_first, 4)?
        }
    };
    // Remaining layout: (stokes1, mech1, stokes2, mech2).
    let out = bell_measurement(&stokes_pair, 0, 2)?;
    let eigs = out.cm().pt_symplectic_eigenvalues()?;
    Ok((eigs.eta_minus, out.cm().clone()))
}

/// Entanglement lifetime under thermal damping:
/// `1/gamma = (1/Gamma) ln[(2n + 1 - 2 eta)(2n + 1/e - (2/e) eta)^{-1}]`.
///
/// The `1/e` is the mathematical constant. Limits: `1/Gamma` as `n -> 0`, and
/// roughly `hbar Omega / (2 Gamma k T)` for `k T >> hbar Omega`. Requires an
/// entangled output (`eta_minus < 1/2`).
pub fn decoherence_time(n_bar: f64, eta_minus: f64, mech_damping: f64) -> Result<f64> {
    if !(eta_minus >= 0.0) || !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::InvalidInput(format!(
            "need n_bar >= 0 and eta_minus >= 0, got {n_bar}, {eta_minus}"
        )));
    }
    if !(mech_damping > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mech_damping must be positive, got {mech_damping}"
        )));
    }
    if eta_minus >= 0.5 {
        return Err(Error::NotEntangled(eta_minus));
    }
    let e_inv = std::f64::consts::E.recip();
    let num = 2.0 * n_bar + 1.0 - 2.0 * eta_minus;
    let den = 2.0 * n_bar + e_inv - 2.0 * e_inv * eta_minus;
    Ok((num / den).ln() / mech_damping)
}

/// Variances of the joint quadratures of a symmetric two-mode channel.
#[derive(Debug, Clone, Copy)]
pub struct JointVariances {
    /// `Var(x_a - x_b)`.
    pub x_rel: f64,
    /// `Var(p_a + p_b)`.
    pub p_tot: f64,
    /// False when the diagonal blocks differ beyond 1e-6 (asymmetric channel,
    /// in which case both variances must be examined separately).
    pub symmetric: bool,
}

/// Relative-distance and total-momentum variances of a two-mode output:
/// `Var(x_a - x_b) = V11 + V33 - 2 V13` and `Var(p_a + p_b) = V22 + V44 + 2 V24`.
/// For symmetric swap outputs both equal `2 eta_minus`.
pub fn xrel_variance(v: &CovarianceMatrix) -> Result<JointVariances> {
    if v.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: v.dim(),
        });
    }
    let m = v.matrix();
    let x_rel = m[(0, 0)] + m[(2, 2)] - 2.0 * m[(0, 2)];
    let p_tot = m[(1, 1)] + m[(3, 3)] + 2.0 * m[(1, 3)];
    let block_gap = crate::linalg::max_abs_diff(
        &nalgebra::DMatrix::from_fn(2, 2, |i, j| v.mode_block(0, 0)[(i, j)]),
        &nalgebra::DMatrix::from_fn(2, 2, |i, j| v.mode_block(1, 1)[(i, j)]),
    );
    Ok(JointVariances {
        x_rel,
        p_tot,
        symmetric: block_gap <= 1e-6,
    })
}

/// One row of an entanglement-versus-time sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub eta_minus: f64,
    pub log_negativity: f64,
    pub xrel_variance: f64,
    /// `None` when the output is not entangled (lifetime undefined).
    pub decoherence_time: Option<f64>,
    /// Set when this row failed to evaluate; the numeric fields are NaN.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(t: f64, message: String) -> Self {
        Self {
            t,
            eta_minus: f64::NAN,
            log_negativity: f64::NAN,
            xrel_variance: f64::NAN,
            decoherence_time: None,
            error: Some(message),
        }
    }
}

/// Time series for one strategy at one bath temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub strategy: Strategy,
    pub temperature: f64,
    pub thermal_occupancy: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Row with the largest logarithmic negativity.
    pub fn peak(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.error.is_none())
            .max_by(|a, b| a.log_negativity.total_cmp(&b.log_negativity))
    }
}

/// Uniform grid of `steps` points covering `[t_min, t_max]` inclusive.
pub fn time_grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![t_min];
    }
    let dt = (t_max - t_min) / (steps - 1) as f64;
    (0..steps).map(|i| t_min + dt * i as f64).collect()
}

fn evaluate_row(params: &OptomechParams, n_bar: f64, t: f64, strategy: Strategy) -> SweepRow {
    match run_strategy(params, t, strategy) {
        Ok(point) => {
            let xrel = match xrel_variance(&point.output_cm) {
                Ok(v) => v.x_rel,
                Err(e) => return SweepRow::failed(t, e.to_string()),
            };
            let decoherence_time = if point.eta_minus < 0.5 {
                decoherence_time(n_bar, point.eta_minus, params.mech_damping()).ok()
            } else {
                None
            };
            SweepRow {
                t,
                eta_minus: point.eta_minus,
                log_negativity: point.log_negativity,
                xrel_variance: xrel,
                decoherence_time,
                error: None,
            }
        }
        Err(e) => SweepRow::failed(t, e.to_string()),
    }
}

/// Evaluate the strategy over a time grid for each bath temperature. Rows are
/// independent and evaluated in parallel; results are deterministic given the
/// inputs. A failing row is recorded with its error message rather than
/// dropped.
pub fn sweep(
    params: &OptomechParams,
    t_grid: &[f64],
    temperatures: &[f64],
    strategy: Strategy,
) -> Result<Vec<SweepResult>> {
    use rayon::prelude::*;

    if t_grid.is_empty() || temperatures.is_empty() {
        return Err(Error::InvalidInput(
            "time grid and temperature list must be nonempty".into(),
        ));
    }
    let mut results = Vec::with_capacity(temperatures.len());
    for &temperature in temperatures {
        let p = params.at_temperature(temperature)?;
        let n_bar = thermal_occupancy(p.mech_frequency(), temperature);
        let rows: Vec<SweepRow> = t_grid
            .par_iter()
            .map(|&t| evaluate_row(&p, n_bar, t, strategy))
            .collect();
        results.push(SweepResult {
            strategy,
            temperature,
            thermal_occupancy: n_bar,
            rows,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::normal_form;
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;

    fn paper_params(temperature: f64) -> OptomechParams {
        OptomechParams::from_rate_diff(1.0e3, 1.0 + 2.5e-7, 5.0e8, temperature, 1.0).unwrap()
    }

    #[test]
    fn reduction_at_t_zero_is_separable() {
        let p = paper_params(0.4);
        let st = propagate(&p, 0.0).unwrap();
        let n = p.thermal_occupancy();
        for strategy in [Strategy::NonAssisted, Strategy::Assisted] {
            let nf = reduce_strategy(&st, strategy).unwrap();
            assert_relative_eq!(nf.a(), n + 0.5, max_relative = 1e-12);
            assert_relative_eq!(nf.c(), 0.5, max_relative = 1e-12);
            assert_eq!(nf.d(), 0.0);
            assert_eq!(nf.d_prime(), 0.0);
        }
    }

    #[test]
    fn non_assisted_reduction_matches_trace_plus_normal_form() {
        let p = paper_params(0.005);
        let st = propagate(&p, 0.7e-6).unwrap();
        let nf = reduce_strategy(&st, Strategy::NonAssisted).unwrap();

        // Oracle: trace out the anti-Stokes mode, reorder to (mech, stokes),
        // and reduce to standard form.
        let pair = GaussianState::from_cm(st.cm.clone())
            .partial_trace(&[0, 1])
            .unwrap()
            .permute_modes(&[1, 0])
            .unwrap();
        let oracle = normal_form(pair.cm()).unwrap().blocks;
        assert_relative_eq!(nf.a(), oracle.a(), max_relative = 1e-9);
        assert_relative_eq!(nf.c(), oracle.c(), max_relative = 1e-9);
        assert_relative_eq!(nf.d(), oracle.d(), max_relative = 1e-9);
        assert_relative_eq!(nf.d_prime(), oracle.d_prime(), max_relative = 1e-9);
    }

    #[test]
    fn assisted_reduction_matches_heterodyne_oracle() {
        let p = paper_params(0.005);
        let st = propagate(&p, 0.9e-6).unwrap();
        let nf = reduce_strategy(&st, Strategy::Assisted).unwrap();

        let conditioned = heterodyne_update(&GaussianState::from_cm(st.cm.clone()), 2).unwrap();
        let pair = conditioned.permute_modes(&[1, 0]).unwrap();
        let oracle = normal_form(pair.cm()).unwrap().blocks;
        assert_relative_eq!(nf.a(), oracle.a(), max_relative = 1e-9);
        assert_relative_eq!(nf.c(), oracle.c(), max_relative = 1e-9);
        assert_relative_eq!(nf.d(), oracle.d(), max_relative = 1e-9);
        assert_relative_eq!(nf.d_prime(), oracle.d_prime(), max_relative = 1e-9);
    }

    #[test]
    fn no_entanglement_before_the_pulse() {
        let p = paper_params(0.0);
        for strategy in [Strategy::NonAssisted, Strategy::Assisted] {
            let point = run_strategy(&p, 0.0, strategy).unwrap();
            assert_eq!(point.log_negativity, 0.0);
        }
    }

    #[test]
    fn closed_form_matches_measured_pipeline() {
        let p = paper_params(0.005);
        for strategy in [Strategy::NonAssisted, Strategy::Assisted] {
            for &t in &[0.4e-6, 0.8e-6, 1.3e-6] {
                let closed = run_strategy(&p, t, strategy).unwrap();
                let (eta, cm) = run_strategy_measured(&p, t, strategy).unwrap();
                assert_relative_eq!(closed.eta_minus, eta, max_relative = 1e-9);
                let scale = crate::linalg::max_abs(cm.matrix()).max(1.0);
                assert!(
                    max_abs_diff(closed.output_cm.matrix(), cm.matrix()) < 1e-9 * scale,
                    "output covariance mismatch for {strategy} at t = {t}"
                );
            }
        }
    }

    #[test]
    fn decoherence_time_limits() {
        // n -> 0: the formula collapses to 1/Gamma exactly.
        let g = 2.5;
        let dt = decoherence_time(0.0, 0.2, g).unwrap();
        assert_relative_eq!(dt, 1.0 / g, max_relative = 1e-12);

        // Monotonically decreasing in temperature at fixed eta and damping.
        let etas = 0.1;
        let mut last = f64::INFINITY;
        for t in [0.1, 1.0, 10.0, 300.0] {
            let n = thermal_occupancy(5.0e8, t);
            let dt = decoherence_time(n, etas, 1.0).unwrap();
            assert!(dt < last);
            last = dt;
        }

        assert!(matches!(
            decoherence_time(1.0, 0.5, 1.0),
            Err(Error::NotEntangled(_))
        ));
        assert!(decoherence_time(-1.0, 0.2, 1.0).is_err());
        assert!(decoherence_time(1.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn joint_variances_of_vacuum_and_swap_output() {
        let vac = CovarianceMatrix::vacuum(2);
        let v = xrel_variance(&vac).unwrap();
        assert_relative_eq!(v.x_rel, 1.0, max_relative = 1e-12);
        assert_relative_eq!(v.p_tot, 1.0, max_relative = 1e-12);
        assert!(v.symmetric);

        // Symmetric swap output: both joint variances equal 2 eta_minus.
        let s = 0.5f64;
        let a = (2.0 * s).cosh() / 2.0;
        let d = (2.0 * s).sinh() / 2.0;
        let nf = NormalFormBlocks::new(a, a, d, -d).unwrap();
        let out = swap_symmetric(&nf).unwrap();
        let v = xrel_variance(&out).unwrap();
        let expected = 1.0 / (2.0 * s).cosh();
        assert_relative_eq!(v.x_rel, expected, max_relative = 1e-12);
        assert_relative_eq!(v.p_tot, expected, max_relative = 1e-12);

        // Asymmetric channel flagged.
        let asym = CovarianceMatrix::new(nalgebra::DMatrix::from_diagonal(&nalgebra::dvector![
            0.5, 0.5, 1.5, 1.5
        ]))
        .unwrap();
        assert!(!xrel_variance(&asym).unwrap().symmetric);
    }

    #[test]
    fn sweep_rows_satisfy_row_invariants() {
        let p = paper_params(0.0);
        let grid = time_grid(0.0, 3.0e-6, 16);
        let results = sweep(&p, &grid, &[0.0, 300.0], Strategy::NonAssisted).unwrap();
        assert_eq!(results.len(), 2);
        for series in &results {
            assert_eq!(series.rows.len(), 16);
            for row in &series.rows {
                assert!(row.error.is_none());
                assert_relative_eq!(
                    row.log_negativity,
                    log_negativity(row.eta_minus),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    row.xrel_variance,
                    2.0 * row.eta_minus,
                    max_relative = 1e-9
                );
                assert_eq!(row.decoherence_time.is_some(), row.eta_minus < 0.5);
            }
        }
        // Single t = 0 grid: zero entanglement columns.
        let zero = sweep(&p, &time_grid(0.0, 0.0, 1), &[0.0], Strategy::NonAssisted).unwrap();
        assert_eq!(zero[0].rows.len(), 1);
        assert_eq!(zero[0].rows[0].log_negativity, 0.0);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("assisted".parse::<Strategy>().unwrap(), Strategy::Assisted);
        assert_eq!(
            "non-assisted".parse::<Strategy>().unwrap(),
            Strategy::NonAssisted
        );
        assert_eq!(
            "non_assisted".parse::<Strategy>().unwrap(),
            Strategy::NonAssisted
        );
        assert!("bell".parse::<Strategy>().is_err());
        assert_eq!(Strategy::Assisted.to_string(), "assisted");
    }
}
