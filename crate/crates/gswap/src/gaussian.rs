//! Covariance-matrix representation of Gaussian states and symplectic algebra.
//!
//! Conventions used throughout the crate:
//! - quadrature ordering `(x1, p1, x2, p2, ...)`,
//! - commutator `[x, p] = i`, so the vacuum variance is 1/2,
//! - a covariance matrix `V` is physical iff `V + iJ/2 >= 0`, with `J` the
//!   symplectic form returned by [`symplectic_form`].
//!
//! Entanglement of a two-mode state is quantified through the minimum
//! partial-transpose symplectic eigenvalue and the logarithmic negativity
//! `E_N = max(0, -ln 2*eta_minus)`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::linalg;

/// Absolute tolerance for symmetry checks on covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance on the symplectic defect `||S J S^T - J||_max`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Tolerance on the minimum eigenvalue of `V + iJ/2` for physicality.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Roundoff window in which slightly negative eigenvalue radicands clamp to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// The symplectic form `J ⊕ J ⊕ ...` (n copies of `[[0, 1], [-1, 0]]`).
///
/// It is antisymmetric and squares to minus the identity.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// `||S J S^T - J||_max`: zero for exactly symplectic matrices.
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let n_modes = s.nrows() / 2;
    let j = symplectic_form(n_modes);
    linalg::max_abs_diff(&(s * &j * s.transpose()), &j)
}

/// Phase-space rotation of a single mode by `phi`.
pub fn rotation_symplectic(phi: f64) -> Matrix2<f64> {
    Matrix2::new(phi.cos(), phi.sin(), -phi.sin(), phi.cos())
}

/// Single-mode squeeze `diag(e^s, e^-s)`.
pub fn squeeze_symplectic(s: f64) -> Matrix2<f64> {
    Matrix2::new(s.exp(), 0.0, 0.0, (-s).exp())
}

/// Two-mode squeezing symplectic with parameter `s`: applied to vacuum it
/// produces the covariance matrix of [`CovarianceMatrix::two_mode_squeezed`].
pub fn two_mode_squeezing_symplectic(s: f64) -> DMatrix<f64> {
    let (ch, sh) = (s.cosh(), s.sinh());
    DMatrix::from_row_slice(
        4,
        4,
        &[
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        ],
    )
}

/// Embed a 2x2 symplectic acting on one mode into the full 2n x 2n space.
pub fn embed_single_mode(s: &Matrix2<f64>, mode: usize, n_modes: usize) -> DMatrix<f64> {
    let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
    full.view_mut((2 * mode, 2 * mode), (2, 2)).copy_from(s);
    full
}

/// Partial-transpose sign matrix over the second mode of a two-mode system:
/// `diag(1, 1, 1, -1)`, i.e. `I ⊕ R` with `R = diag(1, -1)`.
pub fn partial_transpose_second() -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, 1.0, -1.0])
}

/// Minimum partial-transpose symplectic eigenvalue pair of a two-mode state.
#[derive(Debug, Clone, Copy)]
pub struct PtEigenvalues {
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// True when a roundoff-negative radicand in `[-CLAMP_TOL, 0]` was clamped to zero.
    pub clamped: bool,
}

/// Logarithmic negativity `max(0, -ln 2*eta_minus)`.
///
/// `eta_minus = 0` (an unphysical pure limit) maps to positive infinity.
pub fn log_negativity(eta_minus: f64) -> f64 {
    debug_assert!(eta_minus >= 0.0, "eta_minus must be nonnegative");
    if eta_minus == 0.0 {
        return f64::INFINITY;
    }
    (-(2.0 * eta_minus).ln()).max(0.0)
}

/// Real symmetric covariance matrix of an n-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    mat: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wrap a `2n x 2n` matrix, requiring symmetry to within [`SYMMETRY_TOL`].
    /// The stored matrix is exactly symmetrized.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim || dim == 0 || dim % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                actual: mat.ncols(),
            });
        }
        let asym = linalg::max_abs_diff(&mat, &mat.transpose());
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self {
            n_modes: dim / 2,
            mat: sym,
        })
    }

    /// Vacuum of `n_modes` modes: `(1/2) I`.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            mat: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    /// Single-mode thermal state with mean occupancy `n_bar`: `(n_bar + 1/2) I`.
    pub fn thermal(n_bar: f64) -> Self {
        Self {
            n_modes: 1,
            mat: DMatrix::identity(2, 2) * (n_bar + 0.5),
        }
    }

    /// Two-mode squeezed state with parameter `s`:
    /// diagonal blocks `cosh(2s)/2 I`, cross block `sinh(2s)/2 diag(1, -1)`.
    pub fn two_mode_squeezed(s: f64) -> Self {
        let ch = (2.0 * s).cosh() / 2.0;
        let sh = (2.0 * s).sinh() / 2.0;
        let mat = DMatrix::from_row_slice(
            4,
            4,
            &[
                ch, 0.0, sh, 0.0, //
                0.0, ch, 0.0, -sh, //
                sh, 0.0, ch, 0.0, //
                0.0, -sh, 0.0, ch,
            ],
        );
        Self { n_modes: 2, mat }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn det(&self) -> f64 {
        self.mat.determinant()
    }

    /// The 2x2 block coupling modes `i` and `j`.
    pub fn mode_block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.mat.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    /// Minimum eigenvalue of the Hermitian matrix `V + iJ/2`, computed through
    /// the real symmetric embedding `[[V, -J/2], [J/2, V]]`.
    pub fn physicality_defect(&self) -> f64 {
        let d = self.dim();
        let j = symplectic_form(self.n_modes);
        let mut emb = DMatrix::zeros(2 * d, 2 * d);
        emb.view_mut((0, 0), (d, d)).copy_from(&self.mat);
        emb.view_mut((d, d), (d, d)).copy_from(&self.mat);
        emb.view_mut((0, d), (d, d)).copy_from(&(-&j * 0.5));
        emb.view_mut((d, 0), (d, d)).copy_from(&(&j * 0.5));
        linalg::min_symmetric_eigenvalue(&emb)
    }

    /// Uncertainty-principle check: true iff all eigenvalues of `V + iJ/2`
    /// are at least `-PHYSICALITY_TOL`.
    pub fn is_physical(&self) -> bool {
        self.physicality_defect() >= -PHYSICALITY_TOL
    }

    /// Symplectic eigenvalues (moduli of the eigenvalues of `iJV`), one per
    /// mode, sorted ascending. Physical states have all of them >= 1/2.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let j = symplectic_form(self.n_modes);
        let moduli = linalg::eigenvalue_moduli(&(&j * &self.mat));
        // Eigenvalues of iJV come in +- pairs; keep one representative of each.
        moduli.into_iter().step_by(2).collect()
    }

    /// Partial-transpose symplectic eigenvalues of a two-mode state:
    ///
    /// `eta_pm = sqrt((Sigma ± sqrt(Sigma^2 - 4 det V)) / 2)` with
    /// `Sigma = det A + det C - 2 det D`. The minus branch is evaluated in the
    /// cancellation-free form `2 det V / (Sigma + sqrt(...))`.
    pub fn pt_symplectic_eigenvalues(&self) -> Result<PtEigenvalues> {
        if self.n_modes != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: self.dim(),
            });
        }
        let a = self.mode_block(0, 0);
        let c = self.mode_block(1, 1);
        let d = self.mode_block(0, 1);
        let sigma = a.determinant() + c.determinant() - 2.0 * d.determinant();
        let det_v = self.det();

        let scale = (sigma * sigma).max(1.0);
        let mut clamped = false;
        let mut disc = sigma * sigma - 4.0 * det_v;
        if disc < 0.0 {
            if disc >= -CLAMP_TOL * scale {
                disc = 0.0;
                clamped = true;
            } else {
                return Err(Error::NumericalDomain(format!(
                    "negative discriminant {disc:.3e} in symplectic eigenvalue formula"
                )));
            }
        }
        let root = disc.sqrt();
        let plus_sq = 0.5 * (sigma + root);
        let minus_sq = if sigma + root > 0.0 {
            2.0 * det_v / (sigma + root)
        } else {
            0.5 * (sigma - root)
        };
        let clamp_sq = |v: f64, clamped: &mut bool| -> Result<f64> {
            if v < 0.0 {
                if v >= -CLAMP_TOL * scale.sqrt().max(1.0) {
                    *clamped = true;
                    Ok(0.0)
                } else {
                    Err(Error::NumericalDomain(format!(
                        "negative squared symplectic eigenvalue {v:.3e}"
                    )))
                }
            } else {
                Ok(v)
            }
        };
        let plus_sq = clamp_sq(plus_sq, &mut clamped)?;
        let minus_sq = clamp_sq(minus_sq, &mut clamped)?;
        Ok(PtEigenvalues {
            eta_plus: plus_sq.sqrt(),
            eta_minus: minus_sq.sqrt(),
            clamped,
        })
    }

    /// Block direct sum with another covariance matrix.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim(), other.dim());
        let mut mat = DMatrix::zeros(d1 + d2, d1 + d2);
        mat.view_mut((0, 0), (d1, d1)).copy_from(&self.mat);
        mat.view_mut((d1, d1), (d2, d2)).copy_from(&other.mat);
        Self {
            n_modes: self.n_modes + other.n_modes,
            mat,
        }
    }
}

/// The three 2x2 blocks `[[A, D], [D^T, C]]` of a two-mode covariance matrix.
///
/// `first` is the block of the party that keeps its mode across a swap,
/// `second` the block of the mode handed to the measuring station.
#[derive(Debug, Clone, Copy)]
pub struct TwoModeBlocks {
    pub first: Matrix2<f64>,
    pub second: Matrix2<f64>,
    pub cross: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn new(first: Matrix2<f64>, second: Matrix2<f64>, cross: Matrix2<f64>) -> Result<Self> {
        for m in [&first, &second] {
            let asym = (m[(0, 1)] - m[(1, 0)]).abs();
            if asym > SYMMETRY_TOL {
                return Err(Error::NotSymmetric(asym));
            }
        }
        Ok(Self {
            first,
            second,
            cross,
        })
    }

    pub fn from_cm(v: &CovarianceMatrix) -> Result<Self> {
        if v.n_modes() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: v.dim(),
            });
        }
        Ok(Self {
            first: v.mode_block(0, 0),
            second: v.mode_block(1, 1),
            cross: v.mode_block(0, 1),
        })
    }

    pub fn assemble(&self) -> CovarianceMatrix {
        let mut mat = DMatrix::zeros(4, 4);
        mat.view_mut((0, 0), (2, 2)).copy_from(&self.first);
        mat.view_mut((2, 2), (2, 2)).copy_from(&self.second);
        mat.view_mut((0, 2), (2, 2)).copy_from(&self.cross);
        mat.view_mut((2, 0), (2, 2))
            .copy_from(&self.cross.transpose());
        CovarianceMatrix::new(mat).expect("assembled block matrix is symmetric")
    }
}

/// Scalars `(a, c, d, d')` of a two-mode covariance matrix in standard form:
/// diagonal blocks `a I` and `c I`, cross block `diag(d, d')`.
///
/// Construction canonicalizes the overall cross-block sign: whenever
/// `|d| >= |d'|` the representative with `d >= 0` is stored (a joint sign flip
/// of `(d, d')` is a local pi-rotation and changes no invariant). The
/// assembled matrix must satisfy the uncertainty principle.
#[derive(Debug, Clone, Copy)]
pub struct NormalFormBlocks {
    a: f64,
    c: f64,
    d: f64,
    d_prime: f64,
}

impl NormalFormBlocks {
    pub fn new(a: f64, c: f64, d: f64, d_prime: f64) -> Result<Self> {
        let (d, d_prime) = if d < 0.0 && d.abs() >= d_prime.abs() {
            (-d, -d_prime)
        } else {
            (d, d_prime)
        };
        let blocks = Self { a, c, d, d_prime };
        let cm = blocks.assemble();
        let defect = cm.physicality_defect();
        if defect < -PHYSICALITY_TOL {
            return Err(Error::Unphysical(defect));
        }
        Ok(blocks)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn d_prime(&self) -> f64 {
        self.d_prime
    }

    pub fn assemble(&self) -> CovarianceMatrix {
        let mat = DMatrix::from_row_slice(
            4,
            4,
            &[
                self.a, 0.0, self.d, 0.0, //
                0.0, self.a, 0.0, self.d_prime, //
                self.d, 0.0, self.c, 0.0, //
                0.0, self.d_prime, 0.0, self.c,
            ],
        );
        CovarianceMatrix {
            n_modes: 2,
            mat,
        }
    }

    /// Determinant of the assembled matrix: `(ac - d^2)(ac - d'^2)`.
    pub fn det_v(&self) -> f64 {
        (self.a * self.c - self.d * self.d) * (self.a * self.c - self.d_prime * self.d_prime)
    }
}

/// Result of the standard-form reduction of a two-mode covariance matrix:
/// `(s_first ⊕ s_second) V (s_first ⊕ s_second)^T` equals `blocks.assemble()`.
#[derive(Debug, Clone)]
pub struct LocalNormalForm {
    pub blocks: NormalFormBlocks,
    pub s_first: Matrix2<f64>,
    pub s_second: Matrix2<f64>,
}

/// Inverse square root of a 2x2 symmetric positive matrix with determinant 1,
/// via the closed form `sqrt(M) = (M + I)/sqrt(tr M + 2)` and the adjugate.
fn inv_sqrt_det_one(m: &Matrix2<f64>) -> Matrix2<f64> {
    let s = (m + Matrix2::identity()) / (m.trace() + 2.0).sqrt();
    Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)])
}

/// Reduce a physical two-mode covariance matrix to standard form by local
/// symplectic transformations.
///
/// Each diagonal block is first Williamson-diagonalized to `sqrt(det) I` by a
/// local squeeze, then local rotations chosen from the SVD of the cross block
/// diagonalize it with `d >= |d'|`. Inputs already in standard form map to
/// identity transformations. Local invariants (`det A`, `det C`, `det D`,
/// `det V`) and the partial-transpose eigenvalues are preserved.
pub fn normal_form(v: &CovarianceMatrix) -> Result<LocalNormalForm> {
    if v.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: v.dim(),
        });
    }
    let a_block = v.mode_block(0, 0);
    let c_block = v.mode_block(1, 1);
    let d_block = v.mode_block(0, 1);

    let a = a_block.determinant();
    let c = c_block.determinant();
    if a <= 0.0 || c <= 0.0 {
        return Err(Error::Unphysical(a.min(c)));
    }
    let (a, c) = (a.sqrt(), c.sqrt());

    let s1 = inv_sqrt_det_one(&(a_block / a));
    let s2 = inv_sqrt_det_one(&(c_block / c));
    let cross = s1 * d_block * s2.transpose();

    let scale = linalg::max_abs(v.matrix()).max(1.0);
    let diag_tol = 1e-13 * scale;
    let (r1, r2, d, d_prime) = if cross[(0, 1)].abs() <= diag_tol
        && cross[(1, 0)].abs() <= diag_tol
        && cross[(0, 0)] >= cross[(1, 1)].abs()
    {
        // Already diagonal with the right ordering; keep rotations at identity.
        (
            Matrix2::identity(),
            Matrix2::identity(),
            cross[(0, 0)],
            cross[(1, 1)],
        )
    } else {
        let svd = cross.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::ReductionFailure(f64::INFINITY)),
        };
        // Fold any reflection into the singular-value signs so both local
        // transformations are proper rotations.
        let (su, sv) = (u.determinant().signum(), v_t.determinant().signum());
        let fu = Matrix2::new(1.0, 0.0, 0.0, su);
        let fv = Matrix2::new(1.0, 0.0, 0.0, sv);
        let r1 = (u * fu).transpose();
        let r2 = fv * v_t;
        let d = svd.singular_values[0];
        let d_prime = su * sv * svd.singular_values[1];
        (r1, r2, d, d_prime)
    };

    let s_first = r1 * s1;
    let s_second = r2 * s2;
    let blocks = NormalFormBlocks::new(a, c, d, d_prime)?;

    let mut s_full = DMatrix::zeros(4, 4);
    s_full.view_mut((0, 0), (2, 2)).copy_from(&s_first);
    s_full.view_mut((2, 2), (2, 2)).copy_from(&s_second);
    let reduced = &s_full * v.matrix() * s_full.transpose();
    let residual = linalg::max_abs_diff(&reduced, blocks.assemble().matrix());
    if residual > 1e-9 * scale {
        return Err(Error::ReductionFailure(residual));
    }

    Ok(LocalNormalForm {
        blocks,
        s_first,
        s_second,
    })
}

/// A Gaussian state: covariance matrix plus displacement (mean) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cm: CovarianceMatrix,
    displacement: DVector<f64>,
}

impl GaussianState {
    pub fn new(cm: CovarianceMatrix, displacement: DVector<f64>) -> Result<Self> {
        if displacement.len() != cm.dim() {
            return Err(Error::DimensionMismatch {
                expected: cm.dim(),
                actual: displacement.len(),
            });
        }
        Ok(Self { cm, displacement })
    }

    /// State with the given covariance matrix and zero mean.
    pub fn from_cm(cm: CovarianceMatrix) -> Self {
        let dim = cm.dim();
        Self {
            cm,
            displacement: DVector::zeros(dim),
        }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_cm(CovarianceMatrix::vacuum(n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.cm.n_modes()
    }

    pub fn cm(&self) -> &CovarianceMatrix {
        &self.cm
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    /// Apply a symplectic transformation: `V -> S V S^T`, `d -> S d`.
    /// Rejects matrices whose symplectic defect exceeds [`SYMPLECTIC_TOL`].
    pub fn apply_symplectic(&self, s: &DMatrix<f64>) -> Result<Self> {
        let dim = self.cm.dim();
        if s.nrows() != dim || s.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.nrows(),
            });
        }
        let defect = symplectic_defect(s);
        if defect > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(defect));
        }
        let mat = s * self.cm.matrix() * s.transpose();
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self {
            cm: CovarianceMatrix {
                n_modes: self.cm.n_modes(),
                mat: sym,
            },
            displacement: s * &self.displacement,
        })
    }

    /// Tensor product: block direct sum of covariance matrices, concatenated
    /// displacements.
    pub fn tensor(&self, other: &Self) -> Self {
        let cm = self.cm.direct_sum(&other.cm);
        let mut displacement = DVector::zeros(cm.dim());
        displacement
            .rows_mut(0, self.cm.dim())
            .copy_from(&self.displacement);
        displacement
            .rows_mut(self.cm.dim(), other.cm.dim())
            .copy_from(&other.displacement);
        Self { cm, displacement }
    }

    /// Keep the listed modes (strictly increasing indices), deleting the rows
    /// and columns of all others.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        if keep.is_empty() {
            return Err(Error::EmptyState);
        }
        for w in keep.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput(
                    "kept mode indices must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&bad) = keep.iter().find(|&&m| m >= n) {
            return Err(Error::InvalidMode {
                index: bad,
                n_modes: n,
            });
        }
        let rows: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let dim = rows.len();
        let mut mat = DMatrix::zeros(dim, dim);
        let mut displacement = DVector::zeros(dim);
        for (i, &ri) in rows.iter().enumerate() {
            displacement[i] = self.displacement[ri];
            for (j, &rj) in rows.iter().enumerate() {
                mat[(i, j)] = self.cm.matrix()[(ri, rj)];
            }
        }
        Ok(Self {
            cm: CovarianceMatrix {
                n_modes: keep.len(),
                mat,
            },
            displacement,
        })
    }

    /// Reorder modes: output mode `i` is input mode `perm[i]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        for &p in perm {
            if p >= n {
                return Err(Error::InvalidMode {
                    index: p,
                    n_modes: n,
                });
            }
            if seen[p] {
                return Err(Error::InvalidInput("duplicate mode in permutation".into()));
            }
            seen[p] = true;
        }
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for (i, &p) in perm.iter().enumerate() {
            s[(2 * i, 2 * p)] = 1.0;
            s[(2 * i + 1, 2 * p + 1)] = 1.0;
        }
        self.apply_symplectic(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symplectic_form_structure() {
        let j = symplectic_form(3);
        assert_eq!(linalg::max_abs_diff(&j, &(-j.transpose())), 0.0);
        let j2 = &j * &j;
        assert_eq!(
            linalg::max_abs_diff(&j2, &(-DMatrix::<f64>::identity(6, 6))),
            0.0
        );
        // Block structure: J on each mode pair, zero elsewhere.
        for k in 0..3 {
            assert_eq!(j[(2 * k, 2 * k + 1)], 1.0);
            assert_eq!(j[(2 * k + 1, 2 * k)], -1.0);
        }
        assert_eq!(j[(0, 2)], 0.0);
    }

    #[test]
    fn vacuum_is_physical() {
        assert!(CovarianceMatrix::vacuum(2).is_physical());
    }

    #[test]
    fn sub_vacuum_variance_is_unphysical() {
        let v = CovarianceMatrix::new(DMatrix::identity(4, 4) * 0.25).unwrap();
        assert!(!v.is_physical());
    }

    #[test]
    fn thermal_state_is_physical() {
        assert!(CovarianceMatrix::thermal(3.0).is_physical());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1e-6;
        assert!(matches!(
            CovarianceMatrix::new(m),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn odd_dimension_rejected() {
        let m = DMatrix::identity(3, 3);
        assert!(CovarianceMatrix::new(m).is_err());
    }

    #[test]
    fn pt_eigenvalues_of_vacuum() {
        let eigs = CovarianceMatrix::vacuum(2).pt_symplectic_eigenvalues().unwrap();
        assert_relative_eq!(eigs.eta_plus, 0.5, max_relative = 1e-12);
        assert_relative_eq!(eigs.eta_minus, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn pt_eigenvalues_of_product_state() {
        let v = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![
            1.0, 1.0, 2.0, 2.0
        ]))
        .unwrap();
        let eigs = v.pt_symplectic_eigenvalues().unwrap();
        assert_relative_eq!(eigs.eta_plus, 2.0, max_relative = 1e-12);
        assert_relative_eq!(eigs.eta_minus, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn pt_eigenvalues_of_two_mode_squeezed_state() {
        // eta_minus of a squeezed pair is exp(-2s)/2; cross-checked against the
        // dense eigensolver applied to i J Lambda V Lambda.
        let s = 0.5;
        let v = CovarianceMatrix::two_mode_squeezed(s);
        let eigs = v.pt_symplectic_eigenvalues().unwrap();
        assert_relative_eq!(eigs.eta_minus, (-2.0 * s).exp() / 2.0, max_relative = 1e-12);

        let lambda = partial_transpose_second();
        let flipped = &lambda * v.matrix() * &lambda;
        let moduli = linalg::eigenvalue_moduli(&(symplectic_form(2) * flipped));
        assert_relative_eq!(moduli[0], eigs.eta_minus, max_relative = 1e-9);
        assert_relative_eq!(moduli[3], eigs.eta_plus, max_relative = 1e-9);
    }

    #[test]
    fn log_negativity_values() {
        assert_eq!(log_negativity(0.5), 0.0);
        assert_eq!(log_negativity(1.0), 0.0);
        let eta = (-0.88f64).exp() / 2.0;
        assert_relative_eq!(log_negativity(eta), 0.88, max_relative = 1e-12);
        assert!(log_negativity(0.0).is_infinite());
    }

    #[test]
    fn symplectic_eigenvalues_of_mixed_product() {
        let v = CovarianceMatrix::vacuum(1).direct_sum(&CovarianceMatrix::thermal(2.0));
        let nu = v.symplectic_eigenvalues();
        assert_relative_eq!(nu[0], 0.5, max_relative = 1e-10);
        assert_relative_eq!(nu[1], 2.5, max_relative = 1e-10);
    }

    #[test]
    fn normal_form_of_normal_form_is_identity() {
        let blocks = NormalFormBlocks::new(1.2, 0.9, 0.6, -0.4).unwrap();
        let nf = normal_form(&blocks.assemble()).unwrap();
        assert_relative_eq!(nf.blocks.a(), 1.2, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.c(), 0.9, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.d(), 0.6, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.d_prime(), -0.4, max_relative = 1e-12);
        assert_eq!(nf.s_first, Matrix2::identity());
        assert_eq!(nf.s_second, Matrix2::identity());
    }

    #[test]
    fn normal_form_of_two_mode_squeezed_state() {
        let s = 0.3;
        let nf = normal_form(&CovarianceMatrix::two_mode_squeezed(s)).unwrap();
        assert_relative_eq!(nf.blocks.a(), (2.0 * s).cosh() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.c(), (2.0 * s).cosh() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.d(), (2.0 * s).sinh() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(nf.blocks.d_prime(), -(2.0 * s).sinh() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn apply_symplectic_identity_and_rotation() {
        let state = GaussianState::vacuum(1);
        let id = DMatrix::identity(2, 2);
        assert_eq!(state.apply_symplectic(&id).unwrap(), state);

        let rot = embed_single_mode(&rotation_symplectic(std::f64::consts::PI), 0, 1);
        let rotated = state.apply_symplectic(&rot).unwrap();
        assert!(linalg::max_abs_diff(rotated.cm().matrix(), state.cm().matrix()) < 1e-15);
    }

    #[test]
    fn two_mode_squeezer_on_vacuum_gives_squeezed_cm() {
        let s = 0.5;
        let state = GaussianState::vacuum(2)
            .apply_symplectic(&two_mode_squeezing_symplectic(s))
            .unwrap();
        let expected = CovarianceMatrix::two_mode_squeezed(s);
        assert!(linalg::max_abs_diff(state.cm().matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn non_symplectic_rejected_with_defect() {
        let state = GaussianState::vacuum(1);
        let bad = DMatrix::identity(2, 2) * 2.0;
        match state.apply_symplectic(&bad) {
            Err(Error::NotSymplectic(defect)) => assert!(defect > 1.0),
            other => panic!("expected NotSymplectic, got {other:?}"),
        }
    }

    #[test]
    fn tensor_and_partial_trace_roundtrip() {
        let a = GaussianState::from_cm(CovarianceMatrix::thermal(1.5));
        let b = GaussianState::vacuum(1);
        let joint = a.tensor(&b);
        assert_eq!(joint.n_modes(), 2);
        assert!(linalg::max_abs_diff(joint.cm().matrix(), &DMatrix::from_diagonal(
            &nalgebra::dvector![2.0, 2.0, 0.5, 0.5]
        )) < 1e-15);

        let back = joint.partial_trace(&[0]).unwrap();
        assert_eq!(back.cm().matrix(), a.cm().matrix());
        let second = joint.partial_trace(&[1]).unwrap();
        assert_eq!(second.cm().matrix(), b.cm().matrix());
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let state = GaussianState::vacuum(2);
        assert!(matches!(
            state.partial_trace(&[2]),
            Err(Error::InvalidMode { .. })
        ));
        assert!(matches!(state.partial_trace(&[]), Err(Error::EmptyState)));
    }

    #[test]
    fn permute_modes_swaps_blocks() {
        let v = CovarianceMatrix::two_mode_squeezed(0.4);
        let state = GaussianState::from_cm(v.clone());
        let swapped = state.permute_modes(&[1, 0]).unwrap();
        // Diagonal blocks are equal here; cross block transposes.
        assert!(linalg::max_abs_diff(swapped.cm().matrix(), v.matrix()) < 1e-12);
        let thermal = GaussianState::from_cm(
            CovarianceMatrix::thermal(2.0).direct_sum(&CovarianceMatrix::vacuum(1)),
        );
        let sw = thermal.permute_modes(&[1, 0]).unwrap();
        assert_eq!(sw.cm().mode_block(0, 0), Matrix2::identity() * 0.5);
        assert_eq!(sw.cm().mode_block(1, 1), Matrix2::identity() * 2.5);
    }
}
