use nalgebra::DMatrix;

use crate::error::{check_dims, Result};
use crate::manifold::{OrthoDict, SquareMatrix};
use crate::synth::DataMatrix;

/// Anything that can be viewed as a dense dictionary matrix.
pub trait AsMatrix {
    fn matrix(&self) -> &DMatrix<f64>;
}

impl AsMatrix for DMatrix<f64> {
    fn matrix(&self) -> &DMatrix<f64> {
        self
    }
}

impl AsMatrix for OrthoDict {
    fn matrix(&self) -> &DMatrix<f64> {
        self.as_matrix()
    }
}

fn correlations(d: &DMatrix<f64>, y: &DataMatrix) -> Result<DMatrix<f64>> {
    let n = y.nrows();
    check_dims("dictionary", (n, n), d.shape())?;
    Ok(d.tr_mul(y.as_matrix()))
}

fn inv_len(y: &DataMatrix) -> f64 {
    1.0 / y.ncols().max(1) as f64
}

/// `-(1/L) Σᵢ ‖Dᵀyᵢ‖³₃`.
pub fn l3_objective<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<f64> {
    let x = correlations(d.matrix(), y)?;
    Ok(-inv_len(y) * x.iter().map(|v| v.abs().powi(3)).sum::<f64>())
}

/// `(1/L)·Y·(|DᵀY| ⊙ DᵀY)ᵀ`.
///
/// This is one third of the gradient of `+(1/L) Σ ‖Dᵀyᵢ‖³₃`; the factor is
/// dropped because the polar step is invariant to positive scaling.
pub fn l3_gradient<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<SquareMatrix> {
    let x = correlations(d.matrix(), y)?;
    let z = x.map(|v| v.abs() * v);
    Ok(y.as_matrix() * z.transpose() * inv_len(y))
}

/// `-(1/L) Σᵢ ‖Dᵀyᵢ‖⁴₄`.
pub fn l4_objective<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<f64> {
    let x = correlations(d.matrix(), y)?;
    Ok(-inv_len(y) * x.iter().map(|v| v.powi(4)).sum::<f64>())
}

/// `(1/L)·Y·((DᵀY)^{∘3})ᵀ`, a quarter of the gradient of `+(1/L) Σ ‖Dᵀyᵢ‖⁴₄`.
pub fn l4_gradient<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<SquareMatrix> {
    let x = correlations(d.matrix(), y)?;
    let z = x.map(|v| v * v * v);
    Ok(y.as_matrix() * z.transpose() * inv_len(y))
}

/// `(1/L) Σᵢ ‖Dᵀyᵢ‖₁`.
pub fn l1_objective<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<f64> {
    let x = correlations(d.matrix(), y)?;
    Ok(inv_len(y) * x.iter().map(|v| v.abs()).sum::<f64>())
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(1/L)·Y·sign(DᵀY)ᵀ` with `sign(0) = 0`.
pub fn l1_subgradient<M: AsMatrix>(d: &M, y: &DataMatrix) -> Result<SquareMatrix> {
    let x = correlations(d.matrix(), y)?;
    let s = x.map(sign);
    Ok(y.as_matrix() * s.transpose() * inv_len(y))
}
