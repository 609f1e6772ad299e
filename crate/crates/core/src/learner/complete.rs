use nalgebra::{DMatrix, SymmetricEigen};

use crate::codes::{threshold_columns, SparsityBudget};
use crate::error::{HrpError, Result};
use crate::manifold::OrthoDict;
use crate::synth::{DataMatrix, SparseCodeMatrix};

use super::{ensure_nonzero, hrp_learn, HrpConfig, RecoveryReport};

/// Relative eigenvalue floor below which the covariance counts as singular.
const CONDITION_FLOOR: f64 = 1e-12;

/// `W = ((1/L)·Y·Yᵀ)^{-1/2}` from a symmetric eigendecomposition.
///
/// Fails when `λ_min / λ_max ≤ 1e-12`.
pub fn whitening_transform(y: &DataMatrix) -> Result<DMatrix<f64>> {
    ensure_nonzero(y)?;
    let ym = y.as_matrix();
    let cov = ym * ym.transpose() / ym.ncols() as f64;
    let eig = SymmetricEigen::new(cov);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let ratio = min / max;
    if !(max > 0.0) || !(ratio > CONDITION_FLOOR) {
        return Err(HrpError::Conditioning { ratio });
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose())
}

/// `Ȳ = ((1/L)·Y·Yᵀ)^{-1/2}·Y`, so that `(1/L)·Ȳ·Ȳᵀ = I`.
///
/// The `1/(Lθ)`-style scalar of other whitening schemes is left out: every
/// later step is invariant to a positive rescaling of the data.
pub fn precondition(y: &DataMatrix) -> Result<DataMatrix> {
    let w = whitening_transform(y)?;
    DataMatrix::new(w * y.as_matrix())
}

/// Support-restricted least-squares passes applied after the closed-form
/// dictionary estimate.
///
/// The closed form returns `D*·M⁻¹`, where `M` carries the sampling error of
/// the empirical whitening. Each pass recomputes codes `D̂⁻¹Y`, zeroes every
/// entry below `threshold` times its row RMS, and re-solves the least
/// squares on the surviving support. Off-support leakage then no longer
/// biases the fit. `passes = 0` keeps the closed form as is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportRefinement {
    pub threshold: f64,
    pub passes: usize,
}

impl Default for SupportRefinement {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            passes: 3,
        }
    }
}

impl SupportRefinement {
    pub fn none() -> Self {
        Self {
            threshold: 0.0,
            passes: 0,
        }
    }
}

/// Result of [`complete_dict_learn`].
#[derive(Debug, Clone)]
pub struct CompleteDictionary {
    /// Estimated complete (invertible, not necessarily orthogonal) dictionary.
    pub dictionary: DMatrix<f64>,
    /// Codes `D̂⁻¹·Y`, hard-thresholded when a budget was given.
    pub codes: SparseCodeMatrix,
    /// Orthogonal dictionary learned on the whitened data.
    pub whitened_dictionary: OrthoDict,
    pub report: RecoveryReport,
}

/// `D̂ = Y·Xᵀ·(X·Xᵀ)⁻¹`, by Cholesky with an LU fallback.
fn least_squares_dictionary(y: &DMatrix<f64>, x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let gram = x * x.transpose();
    let rhs = x * y.transpose();
    // D̂ᵀ = (XXᵀ)⁻¹·XYᵀ since the Gram matrix is symmetric.
    let dt = match gram.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        None => gram.lu().solve(&rhs)?,
    };
    dt.iter().all(|v| v.is_finite()).then(|| dt.transpose())
}

fn restrict_to_support(x: &mut DMatrix<f64>, threshold: f64) {
    let l = x.ncols().max(1) as f64;
    for mut row in x.row_iter_mut() {
        let cut = threshold * (row.norm_squared() / l).sqrt();
        row.apply(|v| {
            if v.abs() <= cut {
                *v = 0.0
            }
        });
    }
}

/// Complete-dictionary pipeline: whiten, learn an orthogonal dictionary
/// `D̄` on `Ȳ`, take `X̄ = D̄ᵀȲ`, solve `D̂ = Y·X̄ᵀ·(X̄·X̄ᵀ)⁻¹`, then apply the
/// default [`SupportRefinement`].
pub fn complete_dict_learn(
    y: &DataMatrix,
    cfg: &HrpConfig,
    budget: Option<SparsityBudget>,
) -> Result<CompleteDictionary> {
    complete_dict_learn_with(y, cfg, budget, SupportRefinement::default())
}

/// [`complete_dict_learn`] with an explicit refinement schedule.
pub fn complete_dict_learn_with(
    y: &DataMatrix,
    cfg: &HrpConfig,
    budget: Option<SparsityBudget>,
    refine: SupportRefinement,
) -> Result<CompleteDictionary> {
    if !(refine.threshold >= 0.0) {
        return Err(HrpError::InvalidInput(format!(
            "support threshold must be nonnegative, got {}",
            refine.threshold
        )));
    }
    let ybar = precondition(y)?;
    let (dbar, report) = hrp_learn(&ybar, cfg)?;
    let ym = y.as_matrix();
    let mut x = dbar.as_matrix().tr_mul(ybar.as_matrix());
    let mut dhat = least_squares_dictionary(ym, &x)
        .ok_or_else(|| HrpError::Degenerate("intermediate code Gram matrix is singular".into()))?;
    for pass in 0..refine.passes {
        if pass > 0 {
            match dhat.clone().lu().solve(ym) {
                Some(next) => x = next,
                None => break,
            }
        }
        restrict_to_support(&mut x, refine.threshold);
        match least_squares_dictionary(ym, &x) {
            Some(d) => dhat = d,
            None => {
                log::debug!("support refinement stopped at pass {pass}: singular Gram matrix");
                break;
            }
        }
    }
    let codes = dhat
        .clone()
        .lu()
        .solve(ym)
        .ok_or_else(|| HrpError::Degenerate("recovered dictionary is singular".into()))?;
    let codes = match budget {
        Some(b) => threshold_columns(&codes, b),
        None => codes,
    };
    Ok(CompleteDictionary {
        dictionary: dhat,
        codes: SparseCodeMatrix::new(codes)?,
        whitened_dictionary: dbar,
        report,
    })
}
