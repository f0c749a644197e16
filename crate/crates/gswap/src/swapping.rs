//! Closed-form entanglement-swapping updates.
//!
//! Two resource pairs `(a, c1)` and `(b, c2)` are held by the outer parties
//! and a middle station; the station mixes `c1, c2` on a balanced beam
//! splitter and homodynes the difference-x and sum-p ports. The conditional
//! state of `(a, b)` is Gaussian with a covariance matrix given blockwise in
//! terms of the input blocks. The formula is implemented exactly as the
//! blockwise expression (no algebraic simplification) so that the
//! measurement-pipeline oracle in [`crate::validation`] exercises it as
//! printed.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::gaussian::{
    symplectic_form, CovarianceMatrix, NormalFormBlocks, PtEigenvalues, TwoModeBlocks,
};

/// Threshold below which the measured-noise normalization is considered
/// degenerate (possible only for zero-variance station modes).
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The two bipartite resources entering a swap, each as blocks
/// `[[outer, cross], [cross^T, station]]`.
#[derive(Debug, Clone, Copy)]
pub struct SwapInputs {
    /// Resource shared by the first outer party and the station (blocks A, C1, D1).
    pub alice: TwoModeBlocks,
    /// Resource shared by the second outer party and the station (blocks B, C2, D2).
    pub bob: TwoModeBlocks,
}

impl SwapInputs {
    /// Build from two block decompositions, requiring both assembled
    /// covariance matrices to be physical.
    pub fn new(alice: TwoModeBlocks, bob: TwoModeBlocks) -> Result<Self> {
        for (name, blocks) in [("first", &alice), ("second", &bob)] {
            let cm = blocks.assemble();
            let defect = cm.physicality_defect();
            if defect < -crate::gaussian::PHYSICALITY_TOL {
                return Err(Error::InvalidInput(format!(
                    "{name} swap resource is unphysical (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self { alice, bob })
    }
}

/// Normalization of the Bell-measurement noise,
/// `g^{-1} = det C1 + det C2 + Tr(R C2 R J C1 J^T)`.
#[derive(Debug, Clone, Copy)]
pub struct GFactor {
    value: f64,
}

impl GFactor {
    pub fn from_station_blocks(c1: &Matrix2<f64>, c2: &Matrix2<f64>) -> Result<Self> {
        let r = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        let inv = c1.determinant()
            + c2.determinant()
            + (r * c2 * r * j * c1 * j.transpose()).trace();
        if inv <= DEGENERACY_TOL {
            return Err(Error::DegenerateMeasurement(format!(
                "measured-noise normalization g^-1 = {inv:.3e} is not positive"
            )));
        }
        Ok(Self { value: 1.0 / inv })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

fn tile(block: &Matrix2<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for bi in 0..2 {
        for bj in 0..2 {
            m.view_mut((2 * bi, 2 * bj), (2, 2)).copy_from(block);
        }
    }
    m
}

fn block_diag(d1: &Matrix2<f64>, d2: &Matrix2<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(d1);
    m.view_mut((2, 2), (2, 2)).copy_from(d2);
    m
}

/// General swap output for arbitrary bipartite Gaussian resources:
///
/// `V_ab = A ⊕ B - g D [ L_b T(C1) L_b + L_a T(C2) L_a ]_J D^T`
///
/// where `T(C)` tiles the station block into a 4x4 array, `L_a = R ⊕ I` and
/// `L_b = I ⊕ R` are the partial-transpose signs of the two outer parties,
/// `[.]_J` denotes conjugation by `J ⊕ J`, and `D = D1 ⊕ D2` collects the
/// cross blocks.
pub fn swap_general(inputs: &SwapInputs) -> Result<CovarianceMatrix> {
    let g = GFactor::from_station_blocks(&inputs.alice.second, &inputs.bob.second)?;

    let r = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let i2 = Matrix2::identity();
    let lambda_a = block_diag(&r, &i2);
    let lambda_b = block_diag(&i2, &r);
    let j = symplectic_form(2);

    let sandwich = &lambda_b * tile(&inputs.alice.second) * &lambda_b
        + &lambda_a * tile(&inputs.bob.second) * &lambda_a;
    let d = block_diag(&inputs.alice.cross, &inputs.bob.cross);
    let correction = &d * &j * sandwich * j.transpose() * d.transpose();

    let traced = block_diag(&inputs.alice.first, &inputs.bob.first);
    let out = traced - correction * g.value();
    let sym = (&out + out.transpose()) * 0.5;
    CovarianceMatrix::new(sym)
}

/// Swap output when both resources are in standard form: diagonal blocks
/// `a I - diag(d1^2, d1'^2)/(c1+c2)` and `b I - diag(d2^2, d2'^2)/(c1+c2)`,
/// cross block `-diag(-d1 d2, d1' d2')/(c1+c2)`.
pub fn swap_normal_form(
    nf_first: &NormalFormBlocks,
    nf_second: &NormalFormBlocks,
) -> Result<CovarianceMatrix> {
    let c_sum = nf_first.c() + nf_second.c();
    if c_sum <= DEGENERACY_TOL {
        return Err(Error::DegenerateMeasurement(format!(
            "station variance sum {c_sum:.3e} is not positive"
        )));
    }
    let (d1, d1p) = (nf_first.d(), nf_first.d_prime());
    let (d2, d2p) = (nf_second.d(), nf_second.d_prime());
    let mut mat = DMatrix::zeros(4, 4);
    mat[(0, 0)] = nf_first.a() - d1 * d1 / c_sum;
    mat[(1, 1)] = nf_first.a() - d1p * d1p / c_sum;
    mat[(2, 2)] = nf_second.a() - d2 * d2 / c_sum;
    mat[(3, 3)] = nf_second.a() - d2p * d2p / c_sum;
    mat[(0, 2)] = d1 * d2 / c_sum;
    mat[(2, 0)] = d1 * d2 / c_sum;
    mat[(1, 3)] = -d1p * d2p / c_sum;
    mat[(3, 1)] = -d1p * d2p / c_sum;
    CovarianceMatrix::new(mat)
}

/// Swap output for identical resources `(a, c, d, d')`:
///
/// `V_out = (1/2c) [[diag(2ac-d^2, 2ac-d'^2), diag(d^2, -d'^2)],
///                  [diag(d^2, -d'^2), diag(2ac-d^2, 2ac-d'^2)]]`.
pub fn swap_symmetric(nf: &NormalFormBlocks) -> Result<CovarianceMatrix> {
    let c = nf.c();
    if c <= DEGENERACY_TOL {
        return Err(Error::DegenerateMeasurement(format!(
            "station variance {c:.3e} is not positive"
        )));
    }
    let (a, d, dp) = (nf.a(), nf.d(), nf.d_prime());
    let diag_x = (2.0 * a * c - d * d) / (2.0 * c);
    let diag_p = (2.0 * a * c - dp * dp) / (2.0 * c);
    let cross_x = d * d / (2.0 * c);
    let cross_p = -dp * dp / (2.0 * c);
    let mut mat = DMatrix::zeros(4, 4);
    mat[(0, 0)] = diag_x;
    mat[(1, 1)] = diag_p;
    mat[(2, 2)] = diag_x;
    mat[(3, 3)] = diag_p;
    mat[(0, 2)] = cross_x;
    mat[(2, 0)] = cross_x;
    mat[(1, 3)] = cross_p;
    mat[(3, 1)] = cross_p;
    CovarianceMatrix::new(mat)
}

/// Input-output relations for the symmetric swap:
/// `eta_out_minus = sqrt(det V_in)/c = eta_in_plus * eta_in_minus / c` and
/// `eta_out_plus = a`.
pub fn eta_io(nf: &NormalFormBlocks) -> Result<PtEigenvalues> {
    let c = nf.c();
    if c <= DEGENERACY_TOL {
        return Err(Error::DegenerateMeasurement(format!(
            "station variance {c:.3e} is not positive"
        )));
    }
    let det_v = nf.det_v();
    if det_v < 0.0 {
        return Err(Error::NumericalDomain(format!(
            "negative input determinant {det_v:.3e}"
        )));
    }
    Ok(PtEigenvalues {
        eta_plus: nf.a(),
        eta_minus: det_v.sqrt() / c,
        clamped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::log_negativity;
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;

    fn tms_blocks(s: f64) -> NormalFormBlocks {
        let a = (2.0 * s).cosh() / 2.0;
        let d = (2.0 * s).sinh() / 2.0;
        NormalFormBlocks::new(a, a, d, -d).unwrap()
    }

    #[test]
    fn uncorrelated_resources_swap_to_their_marginals() {
        let zero = Matrix2::zeros();
        let alice = TwoModeBlocks::new(Matrix2::identity() * 1.5, Matrix2::identity() * 0.5, zero)
            .unwrap();
        let bob = TwoModeBlocks::new(Matrix2::identity() * 0.7, Matrix2::identity() * 2.0, zero)
            .unwrap();
        let out = swap_general(&SwapInputs::new(alice, bob).unwrap()).unwrap();
        let expected = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![
            1.5, 1.5, 0.7, 0.7
        ]))
        .unwrap();
        assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn general_swap_of_identical_squeezed_pairs_matches_symmetric_form() {
        let s = 0.5;
        let v = CovarianceMatrix::two_mode_squeezed(s);
        let blocks = TwoModeBlocks::from_cm(&v).unwrap();
        let general = swap_general(&SwapInputs::new(blocks, blocks).unwrap()).unwrap();
        let symmetric = swap_symmetric(&tms_blocks(s)).unwrap();
        assert!(max_abs_diff(general.matrix(), symmetric.matrix()) < 1e-12);
    }

    #[test]
    fn normal_form_swap_consistency() {
        // Uncorrelated first resource: its party keeps a bare a I block.
        let sep = NormalFormBlocks::new(1.1, 0.9, 0.0, 0.0).unwrap();
        let other = tms_blocks(0.4);
        let out = swap_normal_form(&sep, &other).unwrap();
        assert_relative_eq!(out.matrix()[(0, 0)], 1.1, max_relative = 1e-12);
        assert_eq!(out.matrix()[(0, 2)], 0.0);

        // Symmetric inputs reproduce the dedicated symmetric transform.
        let nf = tms_blocks(0.6);
        let a = swap_normal_form(&nf, &nf).unwrap();
        let b = swap_symmetric(&nf).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-13);

        // Generic standard-form blocks agree with the general expression
        // applied to the assembled matrices.
        let mut r = crate::random::rng(123);
        for _ in 0..50 {
            let nf1 = crate::random::random_normal_form_blocks(&mut r);
            let nf2 = crate::random::random_normal_form_blocks(&mut r);
            let via_nf = swap_normal_form(&nf1, &nf2).unwrap();
            let b1 = TwoModeBlocks::from_cm(&nf1.assemble()).unwrap();
            let b2 = TwoModeBlocks::from_cm(&nf2.assemble()).unwrap();
            let via_general = swap_general(&SwapInputs::new(b1, b2).unwrap()).unwrap();
            assert!(max_abs_diff(via_nf.matrix(), via_general.matrix()) < 1e-12);
        }
    }

    #[test]
    fn symmetric_swap_of_separable_input_is_separable() {
        let nf = NormalFormBlocks::new(0.8, 1.7, 0.0, 0.0).unwrap();
        let out = swap_symmetric(&nf).unwrap();
        let expected = CovarianceMatrix::new(DMatrix::identity(4, 4) * 0.8).unwrap();
        assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-13);
        let eigs = eta_io(&nf).unwrap();
        assert_relative_eq!(eigs.eta_minus, 0.8, max_relative = 1e-12);
        assert_eq!(log_negativity(eigs.eta_minus), 0.0);
    }

    #[test]
    fn squeezed_input_swap_eigenvalue() {
        // Pure squeezed resources: eta_out_minus = 1/(2 cosh 2s).
        let s = 0.5;
        let nf = tms_blocks(s);
        let eigs = eta_io(&nf).unwrap();
        assert_relative_eq!(
            eigs.eta_minus,
            1.0 / (2.0 * (2.0 * s).cosh()),
            max_relative = 1e-12
        );
        let direct = swap_symmetric(&nf).unwrap().pt_symplectic_eigenvalues().unwrap();
        assert_relative_eq!(eigs.eta_minus, direct.eta_minus, max_relative = 1e-10);
        assert_relative_eq!(eigs.eta_plus, direct.eta_plus, max_relative = 1e-10);
    }

    #[test]
    fn threshold_input_swaps_to_threshold_output() {
        // a = 1, c = 2, d = -d' = 1: det V_in = 1, eta_out_minus = 1/2 exactly.
        let nf = NormalFormBlocks::new(1.0, 2.0, 1.0, -1.0).unwrap();
        let eigs = eta_io(&nf).unwrap();
        assert_relative_eq!(eigs.eta_minus, 0.5, max_relative = 1e-12);
        let direct = swap_symmetric(&nf).unwrap().pt_symplectic_eigenvalues().unwrap();
        assert_relative_eq!(direct.eta_minus, 0.5, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_station_blocks_are_rejected() {
        let zero = Matrix2::zeros();
        assert!(matches!(
            GFactor::from_station_blocks(&zero, &zero),
            Err(Error::DegenerateMeasurement(_))
        ));
    }

    #[test]
    fn swap_output_is_physical_for_random_inputs() {
        let mut r = crate::random::rng(9);
        for _ in 0..40 {
            let inputs = crate::random::random_swap_inputs(&mut r);
            let out = swap_general(&inputs).unwrap();
            assert!(out.is_physical());
        }
    }
}
