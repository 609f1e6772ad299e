//! Sparse codes for a learned orthogonal dictionary.
//!
//! With `D` orthogonal, the least-squares code of `y` is `Dᵀy`, and the best
//! `T₀`-sparse approximation of that code keeps its `T₀` largest-magnitude
//! entries.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dims, HrpError, Result};
use crate::manifold::OrthoDict;
use crate::synth::{DataMatrix, SparseCodeMatrix};

/// Number of nonzeros kept per code, `1 ≤ t0 ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityBudget {
    t0: usize,
}

impl SparsityBudget {
    pub fn new(t0: usize, n: usize) -> Result<Self> {
        if t0 == 0 || t0 > n {
            return Err(HrpError::InvalidInput(format!(
                "sparsity budget must satisfy 1 <= t0 <= {n}, got {t0}"
            )));
        }
        Ok(Self { t0 })
    }

    pub fn t0(&self) -> usize {
        self.t0
    }
}

/// `X̂ = DᵀY`.
pub fn direct_codes(d: &OrthoDict, y: &DataMatrix) -> Result<SparseCodeMatrix> {
    check_dims("data", (d.n(), y.ncols()), y.as_matrix().shape())?;
    Ok(SparseCodeMatrix(d.as_matrix().tr_mul(y.as_matrix())))
}

/// Keeps the `t0` largest-magnitude entries of `v` and zeroes the rest.
///
/// Equal magnitudes are resolved in favour of the lower index.
pub fn hard_threshold(v: &DVector<f64>, b: SparsityBudget) -> DVector<f64> {
    let mut order: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    let mut out = DVector::zeros(v.len());
    for &i in order.iter().take(b.t0()) {
        out[i] = v[i];
    }
    out
}

/// Columnwise `𝒯_{T₀}(Dᵀyᵢ)`.
pub fn sparse_codes(d: &OrthoDict, y: &DataMatrix, b: SparsityBudget) -> Result<SparseCodeMatrix> {
    let direct = direct_codes(d, y)?.into_inner();
    Ok(SparseCodeMatrix(threshold_columns(&direct, b)))
}

pub(crate) fn threshold_columns(x: &DMatrix<f64>, b: SparsityBudget) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for (j, col) in x.column_iter().enumerate() {
        out.set_column(j, &hard_threshold(&col.into_owned(), b));
    }
    out
}

/// `Ŷ = D·X`.
pub fn reconstruct(d: &OrthoDict, x: &SparseCodeMatrix) -> Result<DataMatrix> {
    check_dims(
        "codes",
        (d.n(), x.as_matrix().ncols()),
        x.as_matrix().shape(),
    )?;
    DataMatrix::new(d.as_matrix() * x.as_matrix())
}
