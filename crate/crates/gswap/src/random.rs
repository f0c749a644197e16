//! Seeded generators of random symplectic matrices and physical covariance
//! matrices, used by the self-validation suite and the property tests.
//!
//! Physicality is guaranteed by construction: a covariance matrix is drawn as
//! `S diag(nu_1, nu_1, ..., nu_n, nu_n) S^T` with symplectic eigenvalues
//! `nu_i >= 1/2` (log-uniform in `[1/2, 5]`) and `S` a random symplectic built
//! from passive layers and single-mode squeezes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gaussian::{
    embed_single_mode, rotation_symplectic, squeeze_symplectic, CovarianceMatrix, GaussianState,
    NormalFormBlocks, TwoModeBlocks,
};
use crate::measurements::beam_splitter_symplectic;
use crate::swapping::SwapInputs;

/// Deterministic RNG for reproducible case generation.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const MAX_SQUEEZE: f64 = 1.2;

fn embed_pair(s4: &DMatrix<f64>, mode1: usize, mode2: usize, n_modes: usize) -> DMatrix<f64> {
    let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let modes = [mode1, mode2];
    for (bi, &mi) in modes.iter().enumerate() {
        for (bj, &mj) in modes.iter().enumerate() {
            full.view_mut((2 * mi, 2 * mj), (2, 2))
                .copy_from(&s4.view((2 * bi, 2 * bj), (2, 2)).into_owned());
        }
    }
    full
}

/// A random passive (orthogonal symplectic) transformation: per-mode phase
/// rotations interleaved with beam splitters on adjacent mode pairs.
pub fn random_passive<R: Rng>(rng: &mut R, n_modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for _ in 0..2 {
        for m in 0..n_modes {
            let rot = rotation_symplectic(rng.gen_range(0.0..std::f64::consts::TAU));
            s = embed_single_mode(&rot, m, n_modes) * s;
        }
        for m in 0..n_modes.saturating_sub(1) {
            let bs = beam_splitter_symplectic(rng.gen_range(0.0..=1.0))
                .expect("transmissivity in range");
            s = embed_pair(&bs, m, m + 1, n_modes) * s;
        }
    }
    s
}

/// Random symplectic in Euler form: passive * squeeze * passive.
pub fn random_symplectic<R: Rng>(rng: &mut R, n_modes: usize) -> DMatrix<f64> {
    let k1 = random_passive(rng, n_modes);
    let k2 = random_passive(rng, n_modes);
    let mut z = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        let sq = squeeze_symplectic(rng.gen_range(-MAX_SQUEEZE..MAX_SQUEEZE));
        z = embed_single_mode(&sq, m, n_modes) * z;
    }
    k1 * z * k2
}

/// Random physical covariance matrix with symplectic eigenvalues log-uniform
/// in `[1/2, 5]`.
pub fn random_physical_cm<R: Rng>(rng: &mut R, n_modes: usize) -> CovarianceMatrix {
    let s = random_symplectic(rng, n_modes);
    let mut nus = DVector::zeros(2 * n_modes);
    for m in 0..n_modes {
        let nu = (rng.gen_range((0.5f64).ln()..(5.0f64).ln())).exp();
        nus[2 * m] = nu;
        nus[2 * m + 1] = nu;
    }
    let v = &s * DMatrix::from_diagonal(&nus) * s.transpose();
    let sym = (&v + v.transpose()) * 0.5;
    CovarianceMatrix::new(sym).expect("construction preserves symmetry")
}

/// Random physical Gaussian state with a small random displacement.
pub fn random_state<R: Rng>(rng: &mut R, n_modes: usize) -> GaussianState {
    let cm = random_physical_cm(rng, n_modes);
    let d = DVector::from_fn(2 * n_modes, |_, _| rng.gen_range(-1.0..1.0));
    GaussianState::new(cm, d).expect("matching dimensions")
}

/// Random two-mode block decomposition of a physical covariance matrix.
pub fn random_two_mode_blocks<R: Rng>(rng: &mut R) -> TwoModeBlocks {
    TwoModeBlocks::from_cm(&random_physical_cm(rng, 2)).expect("two-mode matrix")
}

/// Random pair of physical swap resources.
pub fn random_swap_inputs<R: Rng>(rng: &mut R) -> SwapInputs {
    SwapInputs::new(random_two_mode_blocks(rng), random_two_mode_blocks(rng))
        .expect("generated resources are physical")
}

/// Random standard-form blocks obtained by reducing a random physical matrix.
pub fn random_normal_form_blocks<R: Rng>(rng: &mut R) -> NormalFormBlocks {
    crate::gaussian::normal_form(&random_physical_cm(rng, 2))
        .expect("random physical matrix reduces")
        .blocks
}

/// Random symmetric resource: a two-mode squeezed state with extra thermal
/// noise, `a = c = cosh(2s)/2 + w`, `d = -d' = sinh(2s)/2`.
pub fn random_symmetric_blocks<R: Rng>(rng: &mut R) -> NormalFormBlocks {
    let s: f64 = rng.gen_range(0.0..1.0);
    let w: f64 = rng.gen_range(0.0..1.0);
    let a = (2.0 * s).cosh() / 2.0 + w;
    let d = (2.0 * s).sinh() / 2.0;
    NormalFormBlocks::new(a, a, d, -d).expect("noisy squeezed pair is physical")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symplectic_defect;

    #[test]
    fn random_symplectic_is_symplectic() {
        let mut r = rng(11);
        for n in 1..=4 {
            let s = random_symplectic(&mut r, n);
            assert!(symplectic_defect(&s) < 1e-12, "defect at n = {n}");
        }
    }

    #[test]
    fn random_cms_are_physical() {
        let mut r = rng(5);
        for _ in 0..50 {
            let v = random_physical_cm(&mut r, 2);
            assert!(v.is_physical());
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = random_physical_cm(&mut rng(42), 3);
        let b = random_physical_cm(&mut rng(42), 3);
        assert_eq!(a.matrix(), b.matrix());
    }
}
