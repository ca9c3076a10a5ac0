//! Dense reference predictors built from a known subspace.
//!
//! None of these are learned. They serve as comparators for the learner and
//! as oracles in tests:
//!
//! * [`DensePredictorF0`] computes `(P_o w) · Q_{o,o}^† · (P_o x)`, a linear
//!   rule applied after reconstructing `x` from its observed part through
//!   the subspace. With `Q = P_E` and `w = P_E w*` it reproduces `w* · x`
//!   exactly on data lying in `E`.
//! * [`DensePredictorFGamma`] replaces the pseudo-inverse with the truncated
//!   series `Σ_{j<γ} (Q_{o,o})^j`. Used with `Q = I − P_E` this is a Neumann
//!   series for `(P_E)_{o,o}^†` on the relevant range.
//! * [`improper_weights`] turns such a series predictor into a single weight
//!   vector over the sequence-indexed feature space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{ExplicitEmbedding, DEFAULT_EMBED_CAP};
use crate::linalg::{self, idempotency_defect, orthonormalize, pinv_symmetric, restrict};
use crate::observed::ObservedVector;

/// Relative singular-value cutoff used for `Q_{o,o}^†` unless overridden.
pub const DEFAULT_PINV_TOLERANCE: f64 = 1e-10;

/// An `r`-dimensional subspace `E ⊆ R^d` stored as an orthonormal basis and
/// the orthogonal projection `P_E` onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSpec {
    basis: DMatrix<f64>,
    projection: DMatrix<f64>,
}

impl SubspaceSpec {
    /// Orthonormalizes the columns of `columns` (d × r) before use.
    pub fn from_basis(columns: &DMatrix<f64>) -> Result<Self> {
        if columns.nrows() == 0 {
            return Err(Error::param("subspace needs an ambient dimension >= 1"));
        }
        if columns.ncols() == 0 || columns.ncols() > columns.nrows() {
            return Err(Error::param(format!(
                "subspace rank must be in 1..={}, got {}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let basis = orthonormalize(columns)?;
        let projection = &basis * basis.transpose();
        Ok(Self { basis, projection })
    }

    /// Keeps `columns` unchanged when they are already orthonormal to
    /// `1e-10`, so a saved basis reloads bit for bit. Otherwise behaves like
    /// [`SubspaceSpec::from_basis`].
    pub fn from_orthonormal(columns: DMatrix<f64>) -> Result<Self> {
        let r = columns.ncols();
        if r == 0 || r > columns.nrows() {
            return Self::from_basis(&columns);
        }
        let defect = (columns.transpose() * &columns - DMatrix::identity(r, r)).amax();
        if defect > 1e-10 {
            return Self::from_basis(&columns);
        }
        let projection = &columns * columns.transpose();
        Ok(Self {
            basis: columns,
            projection,
        })
    }

    pub fn from_columns(dim: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
        let m = DMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
        Self::from_basis(&m)
    }

    /// The whole space `R^d`.
    pub fn full(dim: usize) -> Result<Self> {
        Self::from_basis(&DMatrix::identity(dim, dim))
    }

    /// Uniformly random subspace: Gaussian columns, then orthonormalized.
    pub fn random<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<Self> {
        if rank == 0 || rank > dim {
            return Err(Error::param(format!(
                "rank must satisfy 1 <= r <= d, got r = {rank}, d = {dim}"
            )));
        }
        loop {
            let g = DMatrix::from_fn(dim, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
            // a Gaussian matrix is singular with probability zero; retry just in case
            if let Ok(s) = Self::from_basis(&g) {
                return Ok(s);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis, d × r.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `Q = P_E`.
    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    /// `I − P_E`.
    pub fn complement(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) - &self.projection
    }

    pub fn project(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        Ok(&self.projection * DVector::from_column_slice(x))
    }

    /// `‖(I − P_E) x‖`.
    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        let v = DVector::from_column_slice(x);
        Ok((&v - self.project(x)?).norm())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            })
        }
    }

    /// Basis columns as plain vectors, for serialization.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.basis
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }
}

fn observed_parts(w: &DVector<f64>, x: &ObservedVector) -> (DVector<f64>, DVector<f64>) {
    let pw = linalg::select_entries(w, x.indices());
    let px = DVector::from_column_slice(x.values());
    (pw, px)
}

/// `f_{w,Q}(x_o) = (P_o w) · Q_{o,o}^† · (P_o x)` with `Q = P_E`.
#[derive(Debug, Clone)]
pub struct DensePredictorF0 {
    w: DVector<f64>,
    subspace: SubspaceSpec,
    pinv_tolerance: f64,
}

impl DensePredictorF0 {
    pub fn new(w: &[f64], subspace: SubspaceSpec) -> Result<Self> {
        Self::with_tolerance(w, subspace, DEFAULT_PINV_TOLERANCE)
    }

    pub fn with_tolerance(w: &[f64], subspace: SubspaceSpec, pinv_tolerance: f64) -> Result<Self> {
        subspace.check_len(w.len())?;
        let w = DVector::from_column_slice(w);
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::param(format!(
                "weight norm {} exceeds 1",
                w.norm()
            )));
        }
        if !(pinv_tolerance >= 0.0) {
            return Err(Error::param("pinv tolerance must be non-negative"));
        }
        Ok(Self {
            w,
            subspace,
            pinv_tolerance,
        })
    }

    /// The realizing predictor for a ground-truth direction: `w = P_Eᵀ w*`.
    pub fn realizing(wstar: &[f64], subspace: SubspaceSpec) -> Result<Self> {
        let w = subspace.project(wstar)?;
        Self::new(w.as_slice(), subspace)
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn subspace(&self) -> &SubspaceSpec {
        &self.subspace
    }

    pub fn predict(&self, x: &ObservedVector) -> Result<f64> {
        self.subspace.check_len(x.dim())?;
        if x.is_empty() {
            return Ok(0.0);
        }
        let q_oo = restrict(self.subspace.projection(), x.indices());
        let pinv = pinv_symmetric(&q_oo, self.pinv_tolerance);
        let (pw, px) = observed_parts(&self.w, x);
        Ok(pw.dot(&(pinv * px)))
    }
}

/// `f^γ_{w,Q}(x_o) = (P_o w) · Σ_{j=0}^{γ−1} (Q_{o,o})^j · (P_o x)`.
#[derive(Debug, Clone)]
pub struct DensePredictorFGamma {
    w: DVector<f64>,
    q: DMatrix<f64>,
    gamma: usize,
}

impl DensePredictorFGamma {
    /// `q` must be idempotent to 1e-8; it need not be symmetric.
    pub fn new(w: &[f64], q: DMatrix<f64>, gamma: usize) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::param("gamma must be at least 1"));
        }
        if !q.is_square() || q.nrows() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                found: q.nrows(),
            });
        }
        let defect = idempotency_defect(&q);
        if defect > 1e-8 {
            return Err(Error::param(format!(
                "Q is not a projection: max |Q² − Q| = {defect:e}"
            )));
        }
        Ok(Self {
            w: DVector::from_column_slice(w),
            q,
            gamma,
        })
    }

    /// Uses `Q = I − P_E`.
    pub fn complement_of(w: &[f64], subspace: &SubspaceSpec, gamma: usize) -> Result<Self> {
        Self::new(w, subspace.complement(), gamma)
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.w
    }

    /// Powers of `Q_{o,o}` are applied to the vector one at a time, so the
    /// cost is `O(γ |o|²)`.
    pub fn predict(&self, x: &ObservedVector) -> Result<f64> {
        if x.dim() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: x.dim(),
            });
        }
        if x.is_empty() {
            return Ok(0.0);
        }
        let q_oo = restrict(&self.q, x.indices());
        let (pw, px) = observed_parts(&self.w, x);
        let mut term = px.clone();
        let mut acc = px;
        for _ in 1..self.gamma {
            term = &q_oo * term;
            acc += &term;
        }
        Ok(pw.dot(&acc))
    }
}

/// Weight vector `v` over sequences with `v · φ_γ(x_o) = f^γ_{w,Q}(x_o)`:
/// `v_s = w_{s_1} Q_{s_1 s_2} ⋯ Q_{s_{l−1} s_l}`.
pub fn improper_weights(w: &[f64], q: &DMatrix<f64>, gamma: usize) -> Result<ExplicitEmbedding> {
    improper_weights_with_cap(w, q, gamma, DEFAULT_EMBED_CAP)
}

pub fn improper_weights_with_cap(
    w: &[f64],
    q: &DMatrix<f64>,
    gamma: usize,
    cap: usize,
) -> Result<ExplicitEmbedding> {
    let d = w.len();
    if q.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: q.nrows(),
        });
    }
    let mut v = ExplicitEmbedding::zeros(d, gamma, cap)?;
    let coords = v.coords_mut();
    coords[..d].copy_from_slice(w);
    // sequences of length l+1 extend those of length l by one trailing index
    let mut prev_start = 0;
    let mut prev_len = d;
    for _ in 1..gamma {
        let start = prev_start + prev_len;
        for p in 0..prev_len {
            let base = coords[prev_start + p];
            let last = p % d;
            for k in 0..d {
                coords[start + p * d + k] = base * q[(last, k)];
            }
        }
        prev_start = start;
        prev_len *= d;
    }
    Ok(v)
}
