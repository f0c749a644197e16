//! Continuous-variable Gaussian toolkit for entanglement swapping, with an
//! application to pulsed optomechanics: two mechanical oscillators that never
//! interact become entangled through purely optical measurements on their
//! back-scattered sidebands.
//!
//! What the crate provides:
//!
//! - [`gaussian`]: covariance matrices, symplectic transformations,
//!   physicality checks, partial-transpose symplectic eigenvalues,
//!   logarithmic negativity, and reduction of two-mode states to their
//!   standard form by local symplectics.
//! - [`measurements`]: Gaussian conditional updates (homodyne, heterodyne),
//!   beam splitters, and the continuous-variable Bell measurement.
//! - [`swapping`]: closed-form covariance updates for entanglement swapping
//!   between arbitrary bipartite Gaussian resources, plus the input-output
//!   eigenvalue relations for symmetric resources.
//! - [`optomech`]: the radiation-pressure model coupling a vibrational mode
//!   to its Stokes and anti-Stokes sidebands, propagated exactly by the
//!   matrix exponential of the quadrature drift matrix.
//! - [`protocol`]: the non-assisted and assisted detection strategies,
//!   entanglement-versus-time sweeps, thermal decoherence lifetimes, and the
//!   relative-distance variance observable.
//! - [`validation`]: seeded self-checks that cross-validate every closed form
//!   against the explicit measurement pipeline.
//! - [`cli`]: configuration, CSV/JSON emission and the command entry points
//!   used by the `gswap` binary (`sweep`, `swap`, `validate`).
//!
//! Conventions: quadrature order `(x1, p1, x2, p2, ...)`, `[x, p] = i`,
//! vacuum variance 1/2.
//!
//! ```
//! use gswap::gaussian::{log_negativity, CovarianceMatrix};
//!
//! let v = CovarianceMatrix::two_mode_squeezed(0.5);
//! assert!(v.is_physical());
//! let eigs = v.pt_symplectic_eigenvalues().unwrap();
//! // A squeezed pair with s = 0.5 carries E_N = 2s = 1.
//! assert!((log_negativity(eigs.eta_minus) - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod measurements;
pub mod optomech;
pub mod protocol;
pub mod random;
pub mod swapping;
pub mod validation;

pub use error::{Error, Result};
pub use gaussian::{
    log_negativity, normal_form, CovarianceMatrix, GaussianState, NormalFormBlocks,
    PtEigenvalues, TwoModeBlocks,
};
pub use optomech::{thermal_occupancy, OptomechParams, SidebandCoefficients, ThreeModeState};
pub use protocol::{decoherence_time, run_strategy, sweep, Strategy, SweepResult, SweepRow};
pub use swapping::{eta_io, swap_general, swap_normal_form, swap_symmetric, SwapInputs};
