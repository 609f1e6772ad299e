//! Evaluation metrics.
//!
//! # Sign-permutation RMSE
//!
//! Dictionaries are identifiable only up to `J = ΣΠ`, a permutation `Π`
//! followed by column sign flips `Σ`. Column `i` of `D*J` is
//! `sᵢ·d*_{π(i)}`, so
//!
//! ```text
//! ‖D̂ - D*J‖²_F = Σᵢ ‖d̂ᵢ‖² + ‖d*_{π(i)}‖² - 2 sᵢ ⟨d*_{π(i)}, d̂ᵢ⟩.
//! ```
//!
//! The norms do not depend on `J`. For a fixed `π` each term is minimized by
//! `sᵢ = sign⟨d*_{π(i)}, d̂ᵢ⟩`, leaving `-2 |⟨d*_{π(i)}, d̂ᵢ⟩|`. Hence
//!
//! ```text
//! min_J ‖D̂ - D*J‖²_F = ‖D̂‖²_F + ‖D*‖²_F - 2 max_π Σᵢ |(D*ᵀD̂)_{π(i), i}|,
//! ```
//!
//! which for orthogonal arguments is `2N - 2·maxassign(|D*ᵀD̂|)`. The inner
//! maximum is a linear assignment problem, solved exactly by the Hungarian
//! method in O(N³). A greedy match would only give an upper bound.
//!
//! The reported value recomputes `‖D̂ - D*J‖_F / ‖D*J‖_F` directly for the
//! optimal `J` rather than through the expanded form, which avoids
//! cancellation when the error is tiny.

pub mod assignment;

use nalgebra::DMatrix;

use crate::codes::SparsityBudget;
use crate::error::{check_dims, HrpError, Result};
use crate::manifold::{OrthoDict, UnitVector};

/// Default success threshold on the recovery error.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-3;

/// A signed permutation `J = ΣΠ`: column `i` of `D*J` is
/// `signs[i] · D*[:, perm[i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPermutation {
    perm: Vec<usize>,
    signs: Vec<f64>,
}

impl SignPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(HrpError::DimensionMismatch {
                expected: format!("{n} signs"),
                found: signs.len().to_string(),
            });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(HrpError::InvalidInput(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(HrpError::InvalidInput("signs must be ±1".into()));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1.0; n],
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// `D·J`.
    pub fn apply(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(d.nrows(), self.perm.len(), |r, i| {
            self.signs[i] * d[(r, self.perm[i])]
        })
    }
}

/// N×L observation mask, `true` = observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask(DMatrix<bool>);

impl ObservationMask {
    pub fn new(mask: DMatrix<bool>) -> Self {
        Self(mask)
    }

    pub fn all_observed(n: usize, l: usize) -> Self {
        Self(DMatrix::from_element(n, l, true))
    }

    pub fn as_matrix(&self) -> &DMatrix<bool> {
        &self.0
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.0[(i, j)]
    }

    pub fn observed_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

/// Relative RMSE `min_J ‖D̂ - D*J‖_F / ‖D*J‖_F` for two orthogonal
/// dictionaries, together with the minimizing `J`.
pub fn sign_perm_rmse(dhat: &OrthoDict, dstar: &OrthoDict) -> Result<(f64, SignPermutation)> {
    sign_perm_rmse_matrix(dhat.as_matrix(), dstar.as_matrix())
}

/// Same as [`sign_perm_rmse`] for arbitrary N×N matrices (used for
/// complete, non-orthogonal dictionaries).
pub fn sign_perm_rmse_matrix(
    dhat: &DMatrix<f64>,
    dstar: &DMatrix<f64>,
) -> Result<(f64, SignPermutation)> {
    check_dims("estimate", dstar.shape(), dhat.shape())?;
    let denom = dstar.norm();
    if denom == 0.0 {
        return Err(HrpError::Degenerate("reference dictionary is zero".into()));
    }
    let inner = dstar.transpose() * dhat;
    // Row i of `weights` is estimate column i, column k is reference column k.
    let weights = DMatrix::from_fn(inner.ncols(), inner.nrows(), |i, k| inner[(k, i)].abs());
    let perm = assignment::max_weight_assignment(&weights);
    let signs = perm
        .iter()
        .enumerate()
        .map(|(i, &k)| if inner[(k, i)] < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let j = SignPermutation { perm, signs };
    let err = (dhat - j.apply(dstar)).norm() / denom;
    Ok((err, j))
}

/// `min over n, s ∈ {±1}` of `‖d̂ - s·D*[:, n]‖ / ‖D*[:, n]‖`.
pub fn atom_error(dhat: &UnitVector, dstar: &OrthoDict) -> Result<f64> {
    check_dims("atom", (dstar.n(), 1), (dhat.len(), 1))?;
    let d = dhat.as_vector();
    let mut best = f64::INFINITY;
    for col in dstar.as_matrix().column_iter() {
        let norm = col.norm();
        for s in [1.0, -1.0] {
            let e = (d - col * s).norm() / norm;
            best = best.min(e);
        }
    }
    Ok(best)
}

/// Fraction of `errors` strictly below `threshold`.
pub fn success_rate(errors: &[f64], threshold: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(HrpError::InvalidInput(
            "success rate of an empty list".into(),
        ));
    }
    let hits = errors.iter().filter(|e| **e < threshold).count();
    Ok(hits as f64 / errors.len() as f64)
}

/// `sqrt(Σ_Λ (ŷ - y)² / Σ_Λ y²)` over the observed set Λ.
pub fn masked_rmse(yhat: &DMatrix<f64>, y: &DMatrix<f64>, mask: &ObservationMask) -> Result<f64> {
    check_dims("reconstruction", y.shape(), yhat.shape())?;
    check_dims("mask", y.shape(), mask.as_matrix().shape())?;
    let mut err = 0.0;
    let mut energy = 0.0;
    let mut observed = 0usize;
    for ((a, b), &seen) in yhat.iter().zip(y.iter()).zip(mask.as_matrix().iter()) {
        if seen {
            observed += 1;
            err += (a - b) * (a - b);
            energy += b * b;
        }
    }
    if observed == 0 {
        return Err(HrpError::InvalidInput(
            "mask has no observed entries".into(),
        ));
    }
    if energy == 0.0 {
        return Err(HrpError::Degenerate(
            "observed reference entries are all zero".into(),
        ));
    }
    Ok((err / energy).sqrt())
}

/// `⌊N / T₀⌋`.
pub fn compression_ratio(n: usize, b: SparsityBudget) -> usize {
    n / b.t0()
}

/// Columnwise unit-normalized copy; zero columns are left as is.
pub fn normalize_columns(d: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = d.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Median of a nonempty slice; NaNs are not expected.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
