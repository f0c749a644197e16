//! Gaussian conditional measurements (homodyne, heterodyne) and linear
//! optics. These updates serve both as protocol machinery and as the
//! brute-force oracle against which the closed-form swap expressions are
//! validated.
//!
//! Measuring quadratures of a Gaussian state leaves the unmeasured modes
//! Gaussian. Partitioning the covariance matrix into kept block `A`, measured
//! block `B` and cross block `C`, a projective quadrature measurement with
//! selector `P` updates `A -> A - C (P B P)^+ C^T`; the conditional covariance
//! is independent of the outcome, which only shifts the mean.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, GaussianState};
use crate::linalg;

/// Which quadrature of a mode a homodyne detector reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// A projective Gaussian measurement: which modes are detected, a diagonal
/// 0/1 projector selecting the measured quadratures within those modes, and
/// an optional outcome vector for the displacement update.
#[derive(Debug, Clone)]
pub struct QuadratureMeasurement {
    measured_modes: Vec<usize>,
    projector: DMatrix<f64>,
    outcome: Option<DVector<f64>>,
}

impl QuadratureMeasurement {
    pub fn new(measured_modes: Vec<usize>, projector: DMatrix<f64>) -> Result<Self> {
        if measured_modes.is_empty() {
            return Err(Error::InvalidInput("no modes selected for measurement".into()));
        }
        let dim = 2 * measured_modes.len();
        if projector.nrows() != dim || projector.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: projector.nrows(),
            });
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = projector[(i, j)];
                let ok = if i == j { v == 0.0 || v == 1.0 } else { v == 0.0 };
                if !ok {
                    return Err(Error::InvalidInput(
                        "projector must be diagonal with 0/1 entries".into(),
                    ));
                }
            }
        }
        Ok(Self {
            measured_modes,
            projector,
            outcome: None,
        })
    }

    /// Single-mode homodyne of one quadrature.
    pub fn homodyne(mode: usize, quadrature: Quadrature) -> Self {
        let mut projector = DMatrix::zeros(2, 2);
        match quadrature {
            Quadrature::X => projector[(0, 0)] = 1.0,
            Quadrature::P => projector[(1, 1)] = 1.0,
        }
        Self {
            measured_modes: vec![mode],
            projector,
            outcome: None,
        }
    }

    /// Attach an outcome vector (length `2 * measured_modes`); entries outside
    /// the projector support are ignored.
    pub fn with_outcome(mut self, outcome: DVector<f64>) -> Result<Self> {
        if outcome.len() != self.projector.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.projector.nrows(),
                actual: outcome.len(),
            });
        }
        self.outcome = Some(outcome);
        Ok(self)
    }

    pub fn measured_modes(&self) -> &[usize] {
        &self.measured_modes
    }
}

/// Beam-splitter symplectic on two modes with the given transmissivity:
/// `out1 = sqrt(t) in1 - sqrt(1-t) in2`, `out2 = sqrt(1-t) in1 + sqrt(t) in2`,
/// acting identically on the x and p quadratures. `t = 1` is the identity;
/// `t = 1/2` is the balanced splitter whose ports carry the difference and
/// sum quadratures scaled by `1/sqrt(2)`.
pub fn beam_splitter_symplectic(transmissivity: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::InvalidInput(format!(
            "transmissivity {transmissivity} outside [0, 1]"
        )));
    }
    let ct = transmissivity.sqrt();
    let st = (1.0 - transmissivity).sqrt();
    Ok(DMatrix::from_row_slice(
        4,
        4,
        &[
            ct, 0.0, -st, 0.0, //
            0.0, ct, 0.0, -st, //
            st, 0.0, ct, 0.0, //
            0.0, st, 0.0, ct,
        ],
    ))
}

/// Apply a beam splitter to modes `(mode1, mode2)` of an n-mode state.
pub fn apply_beam_splitter(
    state: &GaussianState,
    mode1: usize,
    mode2: usize,
    transmissivity: f64,
) -> Result<GaussianState> {
    let n = state.n_modes();
    for &m in &[mode1, mode2] {
        if m >= n {
            return Err(Error::InvalidMode { index: m, n_modes: n });
        }
    }
    if mode1 == mode2 {
        return Err(Error::InvalidInput("beam splitter needs two distinct modes".into()));
    }
    let bs = beam_splitter_symplectic(transmissivity)?;
    let mut full = DMatrix::identity(2 * n, 2 * n);
    let modes = [mode1, mode2];
    for (bi, &mi) in modes.iter().enumerate() {
        for (bj, &mj) in modes.iter().enumerate() {
            full.view_mut((2 * mi, 2 * mj), (2, 2))
                .copy_from(&bs.view((2 * bi, 2 * bj), (2, 2)).into_owned());
        }
    }
    state.apply_symplectic(&full)
}

/// General projective-measurement update. Returns the conditional state of
/// the unmeasured modes; the covariance update uses the pseudo-inverse of the
/// projected measured block (rank-deficient by construction).
pub fn conditional_update(
    state: &GaussianState,
    measurement: &QuadratureMeasurement,
) -> Result<GaussianState> {
    let n = state.n_modes();
    let mut sorted = measurement.measured_modes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != measurement.measured_modes.len() {
        return Err(Error::InvalidInput("duplicate measured mode".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&m| m >= n) {
        return Err(Error::InvalidMode { index: bad, n_modes: n });
    }
    let kept: Vec<usize> = (0..n).filter(|m| !sorted.contains(m)).collect();
    if kept.is_empty() {
        return Err(Error::EmptyState);
    }

    let kept_idx: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    // Quadrature indices of the measured modes, in the order the measurement
    // listed its modes (the projector and outcome follow that order).
    let meas_idx: Vec<usize> = measurement
        .measured_modes
        .iter()
        .flat_map(|&m| [2 * m, 2 * m + 1])
        .collect();

    let v = state.cm().matrix();
    let a = select(v, &kept_idx, &kept_idx);
    let b = select(v, &meas_idx, &meas_idx);
    let c = select(v, &kept_idx, &meas_idx);

    let pbp = &measurement.projector * &b * &measurement.projector;
    let pinv = linalg::pinv_symmetric(&pbp, 1e-12);
    let updated = &a - &c * &pinv * c.transpose();
    let sym = (&updated + updated.transpose()) * 0.5;

    let mut displacement = DVector::zeros(kept_idx.len());
    for (i, &ri) in kept_idx.iter().enumerate() {
        displacement[i] = state.displacement()[ri];
    }
    if let Some(outcome) = &measurement.outcome {
        let mut d_meas = DVector::zeros(meas_idx.len());
        for (i, &ri) in meas_idx.iter().enumerate() {
            d_meas[i] = state.displacement()[ri];
        }
        let innovation = &measurement.projector * (outcome - d_meas);
        displacement += &c * &pinv * innovation;
    }

    GaussianState::new(CovarianceMatrix::new(sym)?, displacement)
}

/// Homodyne one quadrature of one mode; the mode is removed from the state.
pub fn homodyne_update(
    state: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
) -> Result<GaussianState> {
    conditional_update(state, &QuadratureMeasurement::homodyne(mode, quadrature))
}

/// Homodyne with a recorded outcome, conditioning the displacement.
pub fn homodyne_update_with_outcome(
    state: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
    outcome: f64,
) -> Result<GaussianState> {
    let v = match quadrature {
        Quadrature::X => nalgebra::dvector![outcome, 0.0],
        Quadrature::P => nalgebra::dvector![0.0, outcome],
    };
    conditional_update(
        state,
        &QuadratureMeasurement::homodyne(mode, quadrature).with_outcome(v)?,
    )
}

fn heterodyne_core(
    state: &GaussianState,
    mode: usize,
    outcome: Option<(f64, f64)>,
) -> Result<GaussianState> {
    let n = state.n_modes();
    if mode >= n {
        return Err(Error::InvalidMode { index: mode, n_modes: n });
    }
    if n == 1 {
        return Err(Error::EmptyState);
    }
    let kept: Vec<usize> = (0..n).filter(|&m| m != mode).collect();
    let kept_idx: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let meas_idx = [2 * mode, 2 * mode + 1];

    let v = state.cm().matrix();
    let a = select(v, &kept_idx, &kept_idx);
    let b = state.cm().mode_block(mode, mode) + Matrix2::identity() * 0.5;
    let c = select(v, &kept_idx, &meas_idx);

    // (B + I/2) is positive definite for any physical state; guard against
    // numerically degenerate inputs anyway.
    let eigs = nalgebra::SymmetricEigen::new(b);
    let (min_e, max_e) = (
        eigs.eigenvalues.min(),
        eigs.eigenvalues.max(),
    );
    if min_e <= 1e-12 * max_e.max(1.0) {
        return Err(Error::NumericalDomain(format!(
            "ill-conditioned heterodyne block (eigenvalues {min_e:.3e}, {max_e:.3e})"
        )));
    }
    let b_inv = b.try_inverse().ok_or_else(|| {
        Error::NumericalDomain("singular heterodyne block".into())
    })?;

    let b_inv_dyn = DMatrix::from_fn(2, 2, |i, j| b_inv[(i, j)]);
    let updated = &a - &c * &b_inv_dyn * c.transpose();
    let sym = (&updated + updated.transpose()) * 0.5;

    let mut displacement = DVector::zeros(kept_idx.len());
    for (i, &ri) in kept_idx.iter().enumerate() {
        displacement[i] = state.displacement()[ri];
    }
    if let Some((ox, op)) = outcome {
        let innovation = nalgebra::dvector![
            ox - state.displacement()[meas_idx[0]],
            op - state.displacement()[meas_idx[1]]
        ];
        displacement += &c * &b_inv_dyn * innovation;
    }
    GaussianState::new(CovarianceMatrix::new(sym)?, displacement)
}

/// Heterodyne (simultaneous noisy x and p) detection of one mode:
/// `A -> A - C (B + I/2)^{-1} C^T` on the kept modes. The extra `I/2` is the
/// vacuum unit of the heterodyne ancilla.
pub fn heterodyne_update(state: &GaussianState, mode: usize) -> Result<GaussianState> {
    heterodyne_core(state, mode, None)
}

/// Heterodyne with a recorded `(x, p)` outcome pair.
pub fn heterodyne_update_with_outcome(
    state: &GaussianState,
    mode: usize,
    x_outcome: f64,
    p_outcome: f64,
) -> Result<GaussianState> {
    heterodyne_core(state, mode, Some((x_outcome, p_outcome)))
}

fn bell_core(
    state: &GaussianState,
    mode1: usize,
    mode2: usize,
    outcome: Option<(f64, f64)>,
) -> Result<GaussianState> {
    let n = state.n_modes();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "Bell measurement needs at least 3 modes, state has {n}"
        )));
    }
    if mode1 == mode2 {
        return Err(Error::InvalidInput("Bell measurement needs two distinct modes".into()));
    }
    let mixed = apply_beam_splitter(state, mode1, mode2, 0.5)?;
    // Difference port (mode1) carries the x homodyne, sum port (mode2) the p
    // homodyne, matching the measured quadratures (x2 - x1) and (p1 + p2) up
    // to the overall sign of the difference port.
    let after_x = match outcome {
        Some((x, _)) => homodyne_update_with_outcome(&mixed, mode1, Quadrature::X, x)?,
        None => homodyne_update(&mixed, mode1, Quadrature::X)?,
    };
    let mode2_shifted = if mode2 > mode1 { mode2 - 1 } else { mode2 };
    let mut out = match outcome {
        Some((_, p)) => homodyne_update_with_outcome(&after_x, mode2_shifted, Quadrature::P, p)?,
        None => homodyne_update(&after_x, mode2_shifted, Quadrature::P)?,
    };
    if let Some((x, p)) = outcome {
        // Unit-gain classical correction on the last surviving mode (the
        // partner of the second measured mode in the swap layout): the
        // communicated outcomes map through the balanced-splitter relations
        // with gain sqrt(2).
        let last = out.n_modes() - 1;
        let mut d = out.displacement().clone();
        d[2 * last] += std::f64::consts::SQRT_2 * x;
        d[2 * last + 1] += std::f64::consts::SQRT_2 * p;
        out = GaussianState::new(out.cm().clone(), d)?;
    }
    Ok(out)
}

/// Continuous-variable Bell measurement: balanced beam splitter on the two
/// modes, then homodyne of x on the difference port and p on the sum port.
/// Returns the conditional state of the remaining modes.
pub fn bell_measurement(
    state: &GaussianState,
    mode1: usize,
    mode2: usize,
) -> Result<GaussianState> {
    bell_core(state, mode1, mode2, None)
}

/// Bell measurement with recorded port outcomes. The covariance matrix is
/// outcome-independent; the displacement receives the conditional update plus
/// a unit-gain correction on the last remaining mode.
pub fn bell_measurement_with_outcomes(
    state: &GaussianState,
    mode1: usize,
    mode2: usize,
    x_difference: f64,
    p_sum: f64,
) -> Result<GaussianState> {
    bell_core(state, mode1, mode2, Some((x_difference, p_sum)))
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
