//! Seeded self-validation: every closed-form expression in the crate is
//! cross-checked against an independent route to the same quantity
//! (dense eigensolvers, explicit measurement pipelines, an adaptive ODE
//! integrator). The checks run from `gswap validate` and from the test suite.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{normal_form, partial_transpose_second, symplectic_form, GaussianState};
use crate::linalg;
use crate::measurements::{
    apply_beam_splitter, bell_measurement, bell_measurement_with_outcomes, heterodyne_update,
    homodyne_update, Quadrature,
};
use crate::optomech::{drift_matrix, propagate, structure_defect, OptomechParams};
use crate::protocol::{run_strategy, run_strategy_measured, xrel_variance, Strategy};
use crate::random;
use crate::swapping::{eta_io, swap_general, swap_symmetric};

/// Outcome of one validation property.
#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Seed of the first failing case, when any.
    pub failing_seed: Option<u64>,
}

impl PropertyReport {
    fn from_runs(
        name: &'static str,
        tolerance: f64,
        runs: impl IntoIterator<Item = (u64, f64)>,
    ) -> Self {
        let mut cases = 0;
        let mut max_error = 0.0f64;
        let mut failing_seed = None;
        for (seed, err) in runs {
            cases += 1;
            if err > max_error {
                max_error = err;
            }
            if err > tolerance && failing_seed.is_none() {
                failing_seed = Some(seed);
            }
        }
        PropertyReport {
            name,
            cases,
            max_error,
            tolerance,
            passed: failing_seed.is_none() && max_error.is_finite(),
            failing_seed,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<34} cases={:<5} max_err={:.3e} tol={:.1e}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance,
            match self.failing_seed {
                Some(s) => format!(" failing_seed={s}"),
                None => String::new(),
            }
        )
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Closed-form partial-transpose symplectic eigenvalues against the moduli of
/// the eigenvalues of `i J (L V L)` from a dense eigensolver.
pub fn check_pt_eigenvalues(seed: u64, cases: usize) -> PropertyReport {
    let lambda = partial_transpose_second();
    let j = symplectic_form(2);
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64);
        let v = random::random_physical_cm(&mut random::rng(case_seed), 2);
        let closed = match v.pt_symplectic_eigenvalues() {
            Ok(e) => e,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let flipped = &lambda * v.matrix() * &lambda;
        let moduli = linalg::eigenvalue_moduli(&(&j * flipped));
        let err = rel_err(moduli[0], closed.eta_minus).max(rel_err(moduli[3], closed.eta_plus));
        (case_seed, err)
    });
    PropertyReport::from_runs("pt_eigenvalues_vs_dense_solver", 1e-9, runs)
}

/// Standard-form reduction preserves the local invariants `det A`, `det C`,
/// `det D`, `det V` and the partial-transpose eigenvalues, and its local
/// transformations are symplectic.
pub fn check_normal_form(seed: u64, cases: usize) -> PropertyReport {
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(3);
        let v = random::random_physical_cm(&mut random::rng(case_seed), 2);
        let nf = match normal_form(&v) {
            Ok(nf) => nf,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let b = nf.blocks;
        let mut err = rel_err(v.mode_block(0, 0).determinant(), b.a() * b.a());
        err = err.max(rel_err(v.mode_block(1, 1).determinant(), b.c() * b.c()));
        err = err.max(rel_err(
            v.mode_block(0, 1).determinant(),
            b.d() * b.d_prime(),
        ));
        err = err.max(rel_err(v.det(), b.assemble().det()));
        let before = match v.pt_symplectic_eigenvalues() {
            Ok(e) => e,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let after = match b.assemble().pt_symplectic_eigenvalues() {
            Ok(e) => e,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        err = err.max(rel_err(before.eta_minus, after.eta_minus));
        err = err.max(rel_err(before.eta_plus, after.eta_plus));
        let s_defect = |s: nalgebra::Matrix2<f64>| {
            let j = nalgebra::Matrix2::new(0.0, 1.0, -1.0, 0.0);
            let d = s * j * s.transpose() - j;
            d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
        };
        err = err.max(s_defect(nf.s_first)).max(s_defect(nf.s_second));
        (case_seed, err)
    });
    PropertyReport::from_runs("normal_form_invariants", 1e-9, runs)
}

/// The blockwise swap expression against the explicit pipeline: assemble the
/// four-mode state, mix the station modes on a balanced splitter, homodyne
/// the difference-x and sum-p ports, compare conditional covariances.
/// `inject` adds a known artificial error (used as a negative control).
pub fn check_swap_oracle(seed: u64, cases: usize, inject: f64) -> PropertyReport {
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(5);
        let inputs = random::random_swap_inputs(&mut random::rng(case_seed));
        let closed = match swap_general(&inputs) {
            Ok(v) => v,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        // Modes (a, c1, b, c2); Bell on the station modes 1 and 3.
        let state = GaussianState::from_cm(
            inputs.alice.assemble().direct_sum(&inputs.bob.assemble()),
        );
        let measured = match bell_measurement(&state, 1, 3) {
            Ok(s) => s,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let err = linalg::max_abs_diff(closed.matrix(), measured.cm().matrix()) + inject;
        let phys = if closed.is_physical() { 0.0 } else { f64::INFINITY };
        (case_seed, err.max(phys))
    });
    PropertyReport::from_runs("swap_general_vs_measurement", 1e-9, runs)
}

/// Input-output eigenvalue relations for symmetric resources against the
/// direct eigenvalues of the assembled output.
pub fn check_eta_io(seed: u64, cases: usize) -> PropertyReport {
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(7);
        let nf = random::random_symmetric_blocks(&mut random::rng(case_seed));
        let io = match eta_io(&nf) {
            Ok(io) => io,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let direct = match swap_symmetric(&nf).and_then(|v| v.pt_symplectic_eigenvalues()) {
            Ok(e) => e,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let err = rel_err(io.eta_minus, direct.eta_minus).max(rel_err(io.eta_plus, direct.eta_plus));
        (case_seed, err)
    });
    PropertyReport::from_runs("eta_io_vs_direct_eigenvalues", 1e-9, runs)
}

/// Swapping symmetric resources never increases entanglement, and the output
/// is a symmetric channel with both joint variances equal to `2 eta_minus`.
pub fn check_swap_monotonicity(seed: u64, cases: usize) -> PropertyReport {
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(11);
        let nf = random::random_symmetric_blocks(&mut random::rng(case_seed));
        let input_eta = match nf.assemble().pt_symplectic_eigenvalues() {
            Ok(e) => e.eta_minus,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let out = match eta_io(&nf) {
            Ok(e) => e,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let monotone = (crate::gaussian::log_negativity(out.eta_minus)
            - crate::gaussian::log_negativity(input_eta))
        .max(0.0);
        let v = match swap_symmetric(&nf).and_then(|v| xrel_variance(&v).map(|j| (v, j))) {
            Ok((_, j)) => j,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let err = monotone
            .max(rel_err(v.x_rel, v.p_tot))
            .max(rel_err(v.x_rel, 2.0 * out.eta_minus));
        (case_seed, err)
    });
    PropertyReport::from_runs("swap_monotonicity_and_symmetry", 1e-9, runs)
}

/// Conditional measurements: covariances are outcome-independent, never
/// inflate the unconditional marginal, and heterodyne equals its physical
/// model (balanced splitter against vacuum, then dual homodyne).
pub fn check_measurements(seed: u64, cases: usize) -> PropertyReport {
    let runs = (0..cases).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(13);
        let mut rng = random::rng(case_seed);
        let n_modes = rng.gen_range(2..=4usize);
        let state = random::random_state(&mut rng, n_modes);
        let mode = rng.gen_range(0..n_modes);

        let mut err = 0.0f64;

        // Outcome independence of the Bell covariance on 4-mode states.
        if n_modes == 4 {
            let a = match bell_measurement_with_outcomes(&state, 1, 3, 0.7, -0.2) {
                Ok(s) => s,
                Err(_) => return (case_seed, f64::INFINITY),
            };
            let b = match bell_measurement_with_outcomes(&state, 1, 3, -1.4, 2.2) {
                Ok(s) => s,
                Err(_) => return (case_seed, f64::INFINITY),
            };
            err = err.max(linalg::max_abs_diff(a.cm().matrix(), b.cm().matrix()));
        }

        // Heterodyne against its beam-splitter-plus-vacuum model.
        let closed = match heterodyne_update(&state, mode) {
            Ok(s) => s,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let with_ancilla = state.tensor(&GaussianState::vacuum(1));
        let ancilla = n_modes; // index of the vacuum mode
        let model = apply_beam_splitter(&with_ancilla, mode, ancilla, 0.5)
            .and_then(|s| homodyne_update(&s, mode, Quadrature::X))
            .and_then(|s| homodyne_update(&s, ancilla - 1, Quadrature::P));
        let model = match model {
            Ok(s) => s,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        err = err.max(linalg::max_abs_diff(closed.cm().matrix(), model.cm().matrix()));

        // Conditioning never inflates the kept marginal.
        let keep: Vec<usize> = (0..n_modes).filter(|&m| m != mode).collect();
        let marginal = match state.partial_trace(&keep) {
            Ok(s) => s,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let gap = marginal.cm().matrix() - closed.cm().matrix();
        let min_eig = linalg::min_symmetric_eigenvalue(&gap);
        err = err.max((-min_eig).max(0.0));
        if !closed.cm().is_physical() {
            err = f64::INFINITY;
        }
        (case_seed, err)
    });
    PropertyReport::from_runs("conditional_measurement_laws", 1e-9, runs)
}

/// Adaptive embedded Runge-Kutta (Dormand-Prince 4/5) integration of the
/// covariance flow `dV/dt = K V + V K^T`, used as the independent oracle for
/// the matrix-exponential propagation.
pub fn propagate_ode(params: &OptomechParams, time: f64, tol: f64) -> Result<DMatrix<f64>> {
    let k = drift_matrix(params);
    let n = params.thermal_occupancy() + 0.5;
    let mut v = DMatrix::from_diagonal(&nalgebra::dvector![0.5, 0.5, n, n, 0.5, 0.5]);
    if time == 0.0 {
        return Ok(v);
    }
    let deriv = |v: &DMatrix<f64>| &k * v + v * k.transpose();

    // Dormand-Prince coefficients.
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut t = 0.0f64;
    let mut h = time / 64.0;
    let mut steps = 0usize;
    while time - t > 1e-14 * time {
        if steps > 200_000 {
            return Err(Error::NumericalDomain(
                "ODE oracle exceeded the step budget".into(),
            ));
        }
        steps += 1;
        let h_step = h.min(time - t);
        let mut ks: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        ks.push(deriv(&v));
        for stage in 0..6 {
            let mut arg = v.clone();
            for (j, kj) in ks.iter().enumerate() {
                let w = A[stage][j];
                if w != 0.0 {
                    arg += kj * (h_step * w);
                }
            }
            ks.push(deriv(&arg));
        }
        let mut v5 = v.clone();
        let mut v4 = v.clone();
        for (j, kj) in ks.iter().enumerate() {
            if B5[j] != 0.0 {
                v5 += kj * (h_step * B5[j]);
            }
            if B4[j] != 0.0 {
                v4 += kj * (h_step * B4[j]);
            }
        }
        let scale = linalg::max_abs(&v5).max(1.0);
        let err = linalg::max_abs_diff(&v5, &v4) / scale;
        if err <= tol {
            t += h_step;
            v = v5;
        }
        let grow = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            4.0
        };
        h = (h_step * grow.clamp(0.2, 4.0)).max(1e-13 * time);
    }
    Ok((&v + v.transpose()) * 0.5)
}

/// Symplectic propagation laws: `exp(K t)` symplectic, zero-temperature
/// purity conserved, block structure maintained, and the matrix exponential
/// against the ODE oracle at the operating parameters.
pub fn check_optomech_flow(seed: u64, cases: usize) -> PropertyReport {
    let runs = (0..cases.max(1)).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(17);
        let mut rng = random::rng(case_seed);
        let rate_diff = 10f64.powf(rng.gen_range(2.0..4.0));
        let ratio = 1.0 + 10f64.powf(rng.gen_range(-7.5..-5.5));
        let params =
            match OptomechParams::from_rate_diff(rate_diff, ratio, 5.0e8, 0.0, 1.0) {
                Ok(p) => p,
                Err(_) => return (case_seed, f64::INFINITY),
            };
        let t = rng.gen_range(0.1e-6..3.0e-6);
        let mut err = 0.0f64;

        let s = match linalg::expm(&(drift_matrix(&params) * t)) {
            Ok(s) => s,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        err = err.max(crate::gaussian::symplectic_defect(&s));

        let st = match propagate(&params, t) {
            Ok(st) => st,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        for nu in st.cm.symplectic_eigenvalues() {
            err = err.max((nu - 0.5).abs());
        }
        let defect = match structure_defect(&st.cm) {
            Ok(d) => d,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        err = err.max(defect / linalg::max_abs(st.cm.matrix()).max(1.0));

        let ode = match propagate_ode(&params, t, 1e-12) {
            Ok(v) => v,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let scale = linalg::max_abs(&ode).max(1.0);
        err = err.max(linalg::max_abs_diff(st.cm.matrix(), &ode) / scale);
        (case_seed, err)
    });
    PropertyReport::from_runs("optomech_flow_vs_ode_oracle", 1e-8, runs)
}

/// Protocol consistency across both routes: closed-form sweep values equal
/// the explicit measurement pipeline, heterodyne assistance never hurts, and
/// every row satisfies the detection relation `Var(x_a - x_b) = 2 eta_minus`.
pub fn check_protocol(seed: u64, cases: usize) -> PropertyReport {
    let params = OptomechParams::from_rate_diff(1.0e3, 1.0 + 2.5e-7, 5.0e8, 0.0, 1.0)
        .expect("reference parameters are valid");
    let runs = (0..cases.max(1)).map(|k| {
        let case_seed = seed.wrapping_add(k as u64).wrapping_mul(19);
        let mut rng = random::rng(case_seed);
        let t = rng.gen_range(0.0..3.0e-6);
        let temperature = *[0.0, 0.005, 300.0]
            .get(rng.gen_range(0..3usize))
            .unwrap();
        let p = match params.at_temperature(temperature) {
            Ok(p) => p,
            Err(_) => return (case_seed, f64::INFINITY),
        };
        let mut err = 0.0f64;
        let mut etas = [0.0f64; 2];
        for (i, strategy) in [Strategy::NonAssisted, Strategy::Assisted].iter().enumerate() {
            let closed = match run_strategy(&p, t, *strategy) {
                Ok(c) => c,
                Err(_) => return (case_seed, f64::INFINITY),
            };
            let (eta, cm) = match run_strategy_measured(&p, t, *strategy) {
                Ok(x) => x,
                Err(_) => return (case_seed, f64::INFINITY),
            };
            err = err.max(rel_err(closed.eta_minus, eta));
            let scale = linalg::max_abs(cm.matrix()).max(1.0);
            err = err.max(linalg::max_abs_diff(closed.output_cm.matrix(), cm.matrix()) / scale);
            let v = match xrel_variance(&closed.output_cm) {
                Ok(v) => v,
                Err(_) => return (case_seed, f64::INFINITY),
            };
            err = err.max(rel_err(v.x_rel, 2.0 * closed.eta_minus));
            err = err.max(rel_err(v.x_rel, v.p_tot));
            etas[i] = closed.eta_minus;
        }
        // Assistance can only lower eta_minus.
        err = err.max((etas[1] - etas[0]).max(0.0));
        (case_seed, err)
    });
    PropertyReport::from_runs("protocol_two_route_consistency", 1e-9, runs)
}

/// Run every property with `cases` scaled per check. `inject` perturbs the
/// swap-oracle comparison by a known amount (negative control; zero for
/// normal operation).
pub fn run_all(seed: u64, cases: usize, inject: f64) -> Vec<PropertyReport> {
    vec![
        check_pt_eigenvalues(seed, cases),
        check_normal_form(seed, cases),
        check_swap_oracle(seed, cases, inject),
        check_eta_io(seed, cases),
        check_swap_monotonicity(seed, cases),
        check_measurements(seed, (cases / 2).max(1)),
        check_optomech_flow(seed, (cases / 20).clamp(1, 25)),
        check_protocol(seed, (cases / 20).clamp(1, 25)),
    ]
}
