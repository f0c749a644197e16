//! Pulsed radiation-pressure dynamics of a vibrational mode coupled to its
//! back-scattered optical sidebands.
//!
//! An intense pulse at frequency `omega` reflecting off a mechanical
//! oscillator of frequency `Omega` couples the vibrational mode to the two
//! first-order sidebands: the lower (Stokes) sideband through a two-mode
//! squeezing term with rate `chi`, the upper (anti-Stokes) sideband through a
//! beam-splitter term with rate `theta = r chi`, where
//! `r = sqrt((omega + Omega)/(omega - Omega)) >= 1`. The pulse is assumed
//! much shorter than the mechanical relaxation time, so the evolution is
//! unitary and the Gaussian state of the three modes is fully described by
//! its 6x6 covariance matrix, propagated here by the exact matrix exponential
//! of the quadrature drift matrix.
//!
//! Mode order is `(stokes, mechanical, anti_stokes)` throughout.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::linalg;

/// CODATA 2018 reduced Planck constant, J s.
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;
/// CODATA 2018 Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Relative tolerance on the sideband block structure of a propagated state.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Physical parameters of the radiation-pressure model.
#[derive(Debug, Clone, Copy)]
pub struct OptomechParams {
    stokes_coupling: f64,
    anti_stokes_coupling: f64,
    coupling_ratio: f64,
    mech_frequency: f64,
    laser_frequency: Option<f64>,
    temperature: f64,
    mech_damping: f64,
}

impl OptomechParams {
    /// Build from the two coupling rates (1/s), the mechanical frequency
    /// (rad/s), the bath temperature (K) and the mechanical damping rate (1/s).
    ///
    /// Requires `anti_stokes_coupling > stokes_coupling > 0` (the propagation
    /// is parameterized by `sqrt(theta^2 - chi^2)`).
    pub fn new(
        stokes_coupling: f64,
        anti_stokes_coupling: f64,
        mech_frequency: f64,
        temperature: f64,
        mech_damping: f64,
    ) -> Result<Self> {
        if !(stokes_coupling > 0.0) {
            return Err(Error::InvalidInput(format!(
                "stokes_coupling must be positive, got {stokes_coupling}"
            )));
        }
        if !(anti_stokes_coupling > stokes_coupling) {
            return Err(Error::InvalidInput(format!(
                "anti_stokes_coupling ({anti_stokes_coupling}) must exceed stokes_coupling ({stokes_coupling})"
            )));
        }
        if !(mech_frequency > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mech_frequency must be positive, got {mech_frequency}"
            )));
        }
        if !(temperature >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "temperature must be nonnegative, got {temperature}"
            )));
        }
        if !(mech_damping > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mech_damping must be positive, got {mech_damping}"
            )));
        }
        Ok(Self {
            stokes_coupling,
            anti_stokes_coupling,
            coupling_ratio: anti_stokes_coupling / stokes_coupling,
            mech_frequency,
            laser_frequency: None,
            temperature,
            mech_damping,
        })
    }

    /// Build from the rate difference `sqrt(theta^2 - chi^2)` and the ratio
    /// `r = theta/chi`: `chi = rate_diff / sqrt(r^2 - 1)`, `theta = r chi`.
    pub fn from_rate_diff(
        rate_diff: f64,
        coupling_ratio: f64,
        mech_frequency: f64,
        temperature: f64,
        mech_damping: f64,
    ) -> Result<Self> {
        if !(rate_diff > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rate_diff must be positive, got {rate_diff}"
            )));
        }
        if !(coupling_ratio > 1.0) {
            return Err(Error::InvalidInput(format!(
                "coupling_ratio must exceed 1, got {coupling_ratio}"
            )));
        }
        let chi = rate_diff / (coupling_ratio * coupling_ratio - 1.0).sqrt();
        Self::new(
            chi,
            coupling_ratio * chi,
            mech_frequency,
            temperature,
            mech_damping,
        )
    }

    /// Record the drive frequency (rad/s), checking the sideband consistency
    /// relation `r^2 = (omega + Omega)/(omega - Omega)` to 1e-9 relative.
    pub fn with_laser_frequency(mut self, laser_frequency: f64) -> Result<Self> {
        if !(laser_frequency > self.mech_frequency) {
            return Err(Error::InvalidInput(format!(
                "laser frequency {laser_frequency} must exceed the mechanical frequency"
            )));
        }
        let expected =
            (laser_frequency + self.mech_frequency) / (laser_frequency - self.mech_frequency);
        let r2 = self.coupling_ratio * self.coupling_ratio;
        if ((r2 - expected) / expected).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "coupling ratio squared {r2:.12e} inconsistent with sideband frequencies (expected {expected:.12e})"
            )));
        }
        self.laser_frequency = Some(laser_frequency);
        Ok(self)
    }

    /// Laser frequency consistent with the coupling ratio,
    /// `omega = Omega (r^2 + 1)/(r^2 - 1)`, whether or not one was recorded.
    pub fn implied_laser_frequency(&self) -> f64 {
        let r2 = self.coupling_ratio * self.coupling_ratio;
        self.mech_frequency * (r2 + 1.0) / (r2 - 1.0)
    }

    pub fn stokes_coupling(&self) -> f64 {
        self.stokes_coupling
    }

    pub fn anti_stokes_coupling(&self) -> f64 {
        self.anti_stokes_coupling
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.coupling_ratio
    }

    pub fn mech_frequency(&self) -> f64 {
        self.mech_frequency
    }

    pub fn laser_frequency(&self) -> Option<f64> {
        self.laser_frequency
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mech_damping(&self) -> f64 {
        self.mech_damping
    }

    /// `sqrt(theta^2 - chi^2)`, the rate that scales the slow dynamics.
    pub fn rate_diff(&self) -> f64 {
        (self.anti_stokes_coupling * self.anti_stokes_coupling
            - self.stokes_coupling * self.stokes_coupling)
            .sqrt()
    }

    /// Mean thermal phonon occupancy at this temperature.
    pub fn thermal_occupancy(&self) -> f64 {
        thermal_occupancy(self.mech_frequency, self.temperature)
    }

    /// Same parameters at a different bath temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "temperature must be nonnegative, got {temperature}"
            )));
        }
        Ok(Self {
            temperature,
            ..*self
        })
    }
}

/// Mean phonon number `n = 1/(exp(hbar Omega / k T) - 1)`; exactly zero at `T = 0`.
pub fn thermal_occupancy(mech_frequency: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = REDUCED_PLANCK * mech_frequency / (BOLTZMANN * temperature);
    1.0 / (x.exp() - 1.0)
}

/// Quadrature drift matrix `K` of the interaction, with
/// `d xi / dt = K xi` for `xi = (x_c, p_c, x_a, p_a, x_c', p_c')`:
///
/// ```text
/// dx_c  =  chi x_a            dp_c  = -chi p_a
/// dx_a  =  chi x_c - theta x_c'   dp_a  = -chi p_c - theta p_c'
/// dx_c' =  theta x_a           dp_c' =  theta p_a
/// ```
///
/// `K J + J K^T = 0` (Hamiltonian flow), so `exp(K t)` is symplectic.
pub fn drift_matrix(params: &OptomechParams) -> DMatrix<f64> {
    let chi = params.stokes_coupling;
    let theta = params.anti_stokes_coupling;
    let mut k = DMatrix::zeros(6, 6);
    k[(0, 2)] = chi;
    k[(1, 3)] = -chi;
    k[(2, 0)] = chi;
    k[(2, 4)] = -theta;
    k[(3, 1)] = -chi;
    k[(3, 5)] = -theta;
    k[(4, 2)] = theta;
    k[(5, 3)] = theta;
    k
}

/// Three-mode Gaussian state of (stokes, mechanical, anti_stokes) after a
/// pulse of duration `time`.
#[derive(Debug, Clone)]
pub struct ThreeModeState {
    pub cm: CovarianceMatrix,
    /// Pulse duration in seconds.
    pub time: f64,
    /// Dimensionless `t * sqrt(theta^2 - chi^2)`.
    pub scaled_time: f64,
}

/// The six scalars parameterizing the sideband covariance matrix
///
/// ```text
/// [ (A+1/2) I    C R      F R   ]
/// [   C R     (B+1/2) I  -D I   ]      R = diag(1, -1)
/// [   F R      -D I    (E+1/2) I ]
/// ```
///
/// in mode order (stokes, mechanical, anti_stokes): `A = stokes_excess`,
/// `B = mech_excess`, `E = anti_excess` are the variances above 1/2, and
/// `C = stokes_mech`, `D = mech_anti`, `F = stokes_anti` set the cross blocks.
#[derive(Debug, Clone, Copy)]
pub struct SidebandCoefficients {
    pub stokes_excess: f64,
    pub mech_excess: f64,
    pub stokes_mech: f64,
    pub mech_anti: f64,
    pub anti_excess: f64,
    pub stokes_anti: f64,
}

impl SidebandCoefficients {
    /// Rebuild the 6x6 covariance matrix from the six scalars.
    pub fn assemble(&self) -> CovarianceMatrix {
        let mut m = DMatrix::zeros(6, 6);
        let diag = [
            self.stokes_excess + 0.5,
            self.mech_excess + 0.5,
            self.anti_excess + 0.5,
        ];
        for (mode, v) in diag.iter().enumerate() {
            m[(2 * mode, 2 * mode)] = *v;
            m[(2 * mode + 1, 2 * mode + 1)] = *v;
        }
        // (stokes, mech): C R
        m[(0, 2)] = self.stokes_mech;
        m[(1, 3)] = -self.stokes_mech;
        // (mech, anti): -D I
        m[(2, 4)] = -self.mech_anti;
        m[(3, 5)] = -self.mech_anti;
        // (stokes, anti): F R
        m[(0, 4)] = self.stokes_anti;
        m[(1, 5)] = -self.stokes_anti;
        let sym = &m + m.transpose() - DMatrix::from_diagonal(&m.diagonal());
        CovarianceMatrix::new(sym).expect("assembled sideband matrix is symmetric")
    }
}

/// Propagate vacuum sidebands and a thermal mechanical mode through the
/// interaction for `time` seconds: `V(t) = e^{Kt} V(0) e^{K^T t}` with
/// `V(0) = diag(1/2, 1/2, n+1/2, n+1/2, 1/2, 1/2)`.
pub fn propagate(params: &OptomechParams, time: f64) -> Result<ThreeModeState> {
    if !(time >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "pulse duration must be nonnegative, got {time}"
        )));
    }
    let m = params.thermal_occupancy() + 0.5;
    let v0 = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, m, m, 0.5, 0.5]));
    let s = linalg::expm(&(drift_matrix(params) * time))?;
    let v = &s * v0 * s.transpose();
    let sym = (&v + v.transpose()) * 0.5;
    Ok(ThreeModeState {
        cm: CovarianceMatrix::new(sym)?,
        time,
        scaled_time: time * params.rate_diff(),
    })
}

/// Largest deviation of a 6x6 covariance matrix from the sideband block
/// pattern, in absolute units.
pub fn structure_defect(cm: &CovarianceMatrix) -> Result<f64> {
    if cm.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            actual: cm.dim(),
        });
    }
    let v = cm.matrix();
    let mut defect = 0.0f64;
    for bi in 0..3 {
        for bj in 0..3 {
            let b = cm.mode_block(bi, bj);
            // Off-diagonals vanish in every block (no x-p mixing).
            defect = defect.max(b[(0, 1)].abs()).max(b[(1, 0)].abs());
            let relation = if bi == bj || (bi.min(bj) == 1 && bi.max(bj) == 2) {
                // Diagonal blocks and the (mech, anti) block are multiples of I.
                b[(0, 0)] - b[(1, 1)]
            } else {
                // (stokes, mech) and (stokes, anti) blocks are multiples of R.
                b[(0, 0)] + b[(1, 1)]
            };
            defect = defect.max(relation.abs());
        }
    }
    let _ = v;
    Ok(defect)
}

/// Read the six sideband scalars off a structurally valid propagated state.
///
/// Errors with the defect when the block pattern is violated beyond
/// [`STRUCTURE_TOL`] of the leading scale (which would indicate an
/// inconsistent drift matrix or convention drift).
pub fn extract_coefficients(state: &ThreeModeState) -> Result<SidebandCoefficients> {
    let defect = structure_defect(&state.cm)?;
    let scale = linalg::max_abs(state.cm.matrix()).max(1.0);
    if defect > STRUCTURE_TOL * scale {
        return Err(Error::StructureViolation(defect));
    }
    let v = state.cm.matrix();
    Ok(SidebandCoefficients {
        stokes_excess: v[(0, 0)] - 0.5,
        mech_excess: v[(2, 2)] - 0.5,
        anti_excess: v[(4, 4)] - 0.5,
        stokes_mech: v[(0, 2)],
        mech_anti: -v[(2, 4)],
        stokes_anti: v[(0, 4)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_defect, symplectic_form};
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;

    fn paper_like_params(temperature: f64) -> OptomechParams {
        OptomechParams::from_rate_diff(1.0e3, 1.0 + 2.5e-7, 5.0e8, temperature, 1.0).unwrap()
    }

    /// Strong-coupling parameters exercise the generator away from the
    /// near-degenerate regime.
    fn strong_params(temperature: f64) -> OptomechParams {
        OptomechParams::new(1.0e6, 1.6e6, 5.0e8, temperature, 1.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(OptomechParams::new(1.0, 0.5, 5.0e8, 0.0, 1.0).is_err());
        assert!(OptomechParams::new(-1.0, 2.0, 5.0e8, 0.0, 1.0).is_err());
        assert!(OptomechParams::from_rate_diff(1.0e3, 1.0, 5.0e8, 0.0, 1.0).is_err());
        assert!(OptomechParams::new(1.0, 2.0, 5.0e8, -1.0, 1.0).is_err());

        let p = paper_like_params(0.0);
        assert_relative_eq!(p.coupling_ratio(), 1.0 + 2.5e-7, max_relative = 1e-12);
        assert_relative_eq!(p.rate_diff(), 1.0e3, max_relative = 1e-9);
        assert_relative_eq!(p.stokes_coupling(), 1.414_213e6, max_relative = 1e-4);
    }

    #[test]
    fn laser_frequency_consistency() {
        let p = paper_like_params(0.0);
        let omega = p.implied_laser_frequency();
        assert!(p.with_laser_frequency(omega).is_ok());
        assert!(paper_like_params(0.0).with_laser_frequency(omega * 1.001).is_err());
    }

    #[test]
    fn zero_temperature_occupancy_is_zero() {
        assert_eq!(thermal_occupancy(5.0e8, 0.0), 0.0);
    }

    #[test]
    fn occupancy_of_one_at_ln2_ratio() {
        // hbar Omega / k T = ln 2 gives n = 1.
        let omega = 5.0e8;
        let t = REDUCED_PLANCK * omega / (BOLTZMANN * std::f64::consts::LN_2);
        assert_relative_eq!(thermal_occupancy(omega, t), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn room_temperature_occupancy() {
        // Recomputed from the constants: x = hbar*5e8/(k*300), n = 1/(e^x - 1).
        let x: f64 = REDUCED_PLANCK * 5.0e8 / (BOLTZMANN * 300.0);
        let expected = 1.0 / (x.exp() - 1.0);
        let n = thermal_occupancy(5.0e8, 300.0);
        assert_relative_eq!(n, expected, max_relative = 1e-14);
        assert_relative_eq!(n, 7.855e4, max_relative = 1e-3);
    }

    #[test]
    fn drift_matrix_limits() {
        // theta -> chi+ leaves the anti-Stokes rows nearly empty relative to chi.
        let p = OptomechParams::new(2.0, 2.0 + 1e-12, 5.0e8, 0.0, 1.0).unwrap();
        let k = drift_matrix(&p);
        assert_relative_eq!(k[(0, 2)], 2.0);
        assert_relative_eq!(k[(2, 0)], 2.0);
        assert_relative_eq!(k[(1, 3)], -2.0);
        assert!(k[(4, 2)] > 0.0);

        // Hamiltonian-flow condition K J + J K^T = 0.
        let p = strong_params(0.0);
        let k = drift_matrix(&p);
        let j = symplectic_form(3);
        assert!(max_abs_diff(&(&k * &j), &(-(&j * k.transpose()))) < 1e-12);
    }

    #[test]
    fn propagator_is_symplectic() {
        let p = strong_params(0.0);
        let k = drift_matrix(&p);
        for factor in [0.1, 1.0, 10.0] {
            let t = factor / p.stokes_coupling();
            let s = linalg::expm(&(&k * t)).unwrap();
            assert!(
                symplectic_defect(&s) < 1e-10,
                "defect {} at factor {}",
                symplectic_defect(&s),
                factor
            );
        }
    }

    #[test]
    fn initial_state_is_exact_at_t_zero() {
        let p = strong_params(1.0);
        let st = propagate(&p, 0.0).unwrap();
        let n = p.thermal_occupancy();
        let expected = DMatrix::from_diagonal(&nalgebra::dvector![
            0.5,
            0.5,
            n + 0.5,
            n + 0.5,
            0.5,
            0.5
        ]);
        assert!(max_abs_diff(st.cm.matrix(), &expected) < 1e-12);
        assert_eq!(st.scaled_time, 0.0);
    }

    #[test]
    fn squeezing_only_limit_matches_closed_form() {
        // With the anti-Stokes coupling negligible the (stokes, mech) pair is a
        // two-mode squeezed thermal state and the anti-Stokes mode stays vacuum.
        let chi = 1.0e6;
        let p = OptomechParams::new(chi, chi * (1.0 + 1e-9), 5.0e8, 0.3, 1.0).unwrap();
        let n = p.thermal_occupancy();
        let m = n + 0.5;
        let t = 1.1 / chi;
        let st = propagate(&p, t).unwrap();

        let (ch, sh) = ((chi * t).cosh(), (chi * t).sinh());
        let mut expected = DMatrix::zeros(6, 6);
        // x sector of (stokes, mech)
        expected[(0, 0)] = ch * ch * 0.5 + sh * sh * m;
        expected[(2, 2)] = sh * sh * 0.5 + ch * ch * m;
        expected[(0, 2)] = ch * sh * (0.5 + m);
        expected[(2, 0)] = expected[(0, 2)];
        // p sector mirrors with flipped cross sign
        expected[(1, 1)] = expected[(0, 0)];
        expected[(3, 3)] = expected[(2, 2)];
        expected[(1, 3)] = -expected[(0, 2)];
        expected[(3, 1)] = -expected[(0, 2)];
        expected[(4, 4)] = 0.5;
        expected[(5, 5)] = 0.5;
        // The 1e-9 ratio offset perturbs entries at the 1e-9 * scale level.
        assert!(max_abs_diff(st.cm.matrix(), &expected) < 1e-5);

        let co = extract_coefficients(&st).unwrap();
        assert!(co.anti_excess.abs() < 1e-5);
        assert!(co.mech_anti.abs() < 1e-2);
        assert!(co.stokes_anti.abs() < 1e-2);
        assert!(co.stokes_mech > 0.0);
    }

    #[test]
    fn propagation_preserves_purity_at_zero_temperature() {
        let p = strong_params(0.0);
        for &t in &[0.3e-6, 0.9e-6, 2.0e-6] {
            let st = propagate(&p, t).unwrap();
            for nu in st.cm.symplectic_eigenvalues() {
                assert_relative_eq!(nu, 0.5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let p = strong_params(2.0);
        let (t1, t2) = (0.4e-6, 0.7e-6);
        let direct = propagate(&p, t1 + t2).unwrap();
        let k = drift_matrix(&p);
        let s1 = linalg::expm(&(&k * t1)).unwrap();
        let via = crate::gaussian::GaussianState::from_cm(propagate(&p, t2).unwrap().cm)
            .apply_symplectic(&s1)
            .unwrap();
        let scale = linalg::max_abs(direct.cm.matrix());
        assert!(max_abs_diff(direct.cm.matrix(), via.cm().matrix()) < 1e-9 * scale);
    }

    #[test]
    fn coefficients_at_t_zero() {
        let p = strong_params(1.5);
        let st = propagate(&p, 0.0).unwrap();
        let co = extract_coefficients(&st).unwrap();
        assert_eq!(co.stokes_excess, 0.0);
        assert_relative_eq!(co.mech_excess, p.thermal_occupancy(), max_relative = 1e-12);
        assert_eq!(co.anti_excess, 0.0);
        assert_eq!(co.stokes_mech, 0.0);
        assert_eq!(co.mech_anti, 0.0);
        assert_eq!(co.stokes_anti, 0.0);
    }

    #[test]
    fn coefficient_roundtrip_reassembles_the_state() {
        let p = strong_params(0.7);
        let st = propagate(&p, 1.3e-6).unwrap();
        let co = extract_coefficients(&st).unwrap();
        let scale = linalg::max_abs(st.cm.matrix());
        assert!(max_abs_diff(co.assemble().matrix(), st.cm.matrix()) < 1e-10 * scale);
        assert!(co.stokes_excess >= 0.0);
        assert!(co.mech_excess >= 0.0);
        assert!(co.anti_excess >= 0.0);
    }

    #[test]
    fn structure_violation_detected() {
        let p = strong_params(0.0);
        let mut st = propagate(&p, 1.0e-6).unwrap();
        let mut m = st.cm.matrix().clone();
        m[(0, 3)] += 1.0;
        m[(3, 0)] += 1.0;
        st.cm = CovarianceMatrix::new(m).unwrap();
        assert!(matches!(
            extract_coefficients(&st),
            Err(Error::StructureViolation(_))
        ));
    }
}
