//! The two-stage HRP dictionary learner and its relatives.
//!
//! - [`gpm_stage_one`]: `D ← Polar((1/L)·Y·(|DᵀY| ⊙ DᵀY)ᵀ)` on 𝕆(N).
//! - [`rpg_stage_two`]: `D ← D - τ·𝒫_{R⊥}((1/L)·Y·sign(DᵀY)ᵀ)`, `τ ← η·τ`,
//!   starting and anchored at the Stage-One point `R`.
//! - [`hrp_learn`]: random orthogonal start, both stages, projection back
//!   onto 𝕆(N).
//! - [`hrp_learn_atom`]: the same scheme on the unit sphere for one atom,
//!   with random restarts.
//! - [`msp_l4_learn`]: ℓ4 matching-stretching-projection baseline.
//! - [`complete_dict_learn`]: whitening plus least squares for general
//!   complete dictionaries, with support-restricted refinement passes.

mod complete;
mod objective;
mod sphere;
mod stage_one;
mod stage_two;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{HrpError, Result};
use crate::manifold::{project_orthogonal, OrthoDict};
use crate::synth::{gen_random_orthogonal, DataMatrix};

pub use complete::{
    complete_dict_learn, complete_dict_learn_with, precondition, whitening_transform,
    CompleteDictionary, SupportRefinement,
};
pub use objective::{
    l1_objective, l1_subgradient, l3_gradient, l3_objective, l4_gradient, l4_objective, AsMatrix,
};
pub use sphere::{
    hrp_learn_atom, hrp_learn_atom_from, sphere_l3_objective, sphere_l3_riemannian_gradient,
};
pub use stage_one::{gpm_stage_one, msp_l4_learn, msp_l4_learn_from};
pub use stage_two::{constraint_residual, rpg_stage_two, rpg_stage_two_traced};

/// Solver knobs shared by every learner in this module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrpConfig {
    /// Stage One stops when `‖D⁽ᵗ⁺¹⁾ - D⁽ᵗ⁾‖_F / √N` drops below this.
    pub stage1_tol: f64,
    pub stage1_max_iters: usize,
    /// Initial Stage-Two step `τ⁰`.
    pub tau0: f64,
    /// Geometric step decay `τ⁽ᵗ⁾ = η·τ⁽ᵗ⁻¹⁾`.
    pub eta: f64,
    /// Stage Two stops once the step falls below this.
    pub stage2_min_step: f64,
    pub stage2_max_iters: usize,
    /// Random restarts for the sphere variant; `None` means `⌈5 ln N⌉`.
    pub restarts: Option<usize>,
    pub seed: u64,
}

impl Default for HrpConfig {
    fn default() -> Self {
        Self {
            stage1_tol: 1e-8,
            stage1_max_iters: 500,
            tau0: 0.1,
            eta: 0.8,
            stage2_min_step: 1e-12,
            stage2_max_iters: 200,
            restarts: None,
            seed: 0,
        }
    }
}

impl HrpConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Defaults for the sphere variant: a slower step decay and a longer
    /// Stage-Two budget. With `η = 0.8` the total travel `τ⁰/(1-η)` is too
    /// short to close the gap left by the sphere Stage One.
    pub fn sphere(seed: u64) -> Self {
        Self {
            eta: 0.95,
            stage2_max_iters: 600,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HrpError::InvalidInput(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.tau0 > 0.0) || !self.tau0.is_finite() {
            return bad(format!("tau0 must be positive, got {}", self.tau0));
        }
        if !(self.stage1_tol > 0.0) {
            return bad(format!(
                "stage1_tol must be positive, got {}",
                self.stage1_tol
            ));
        }
        if !(self.stage2_min_step > 0.0) {
            return bad(format!(
                "stage2_min_step must be positive, got {}",
                self.stage2_min_step
            ));
        }
        if self.restarts == Some(0) {
            return bad("restarts must be at least 1".into());
        }
        Ok(())
    }

    /// Restart count for dimension `n`.
    pub fn restarts_for(&self, n: usize) -> usize {
        self.restarts.unwrap_or_else(|| default_restarts(n))
    }
}

/// `⌈5 ln N⌉`, at least one.
pub fn default_restarts(n: usize) -> usize {
    ((5.0 * (n as f64).ln()).ceil() as usize).max(1)
}

/// Diagnostics of one learner run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// Stage-One objective after each iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub stage1_iters: usize,
    pub stage2_iters: usize,
    pub stage1_converged: bool,
    pub wall_time_seconds: f64,
    /// Per-restart objective of the refined atom (sphere variant only).
    pub restart_objectives: Option<Vec<f64>>,
}

/// Full HRP run from a seeded random orthogonal start.
pub fn hrp_learn(y: &DataMatrix, cfg: &HrpConfig) -> Result<(OrthoDict, RecoveryReport)> {
    let init = gen_random_orthogonal(y.nrows().max(1), cfg.seed)?;
    hrp_learn_from(y, cfg, &init)
}

/// Full HRP run from a given orthogonal start.
pub fn hrp_learn_from(
    y: &DataMatrix,
    cfg: &HrpConfig,
    init: &OrthoDict,
) -> Result<(OrthoDict, RecoveryReport)> {
    cfg.validate()?;
    if y.ncols() < y.nrows() {
        log::warn!(
            "only {} samples for dimension {}; recovery is unlikely",
            y.ncols(),
            y.nrows()
        );
    }
    let start = Instant::now();
    let (r, mut report) = gpm_stage_one(y, cfg, init)?;
    let (d, refine) = rpg_stage_two(y, &r, cfg)?;
    let dhat = project_orthogonal(&d)?;
    report.stage2_iters = refine.stage2_iters;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((dhat, report))
}

/// Stage One alone, from a seeded random orthogonal start.
pub fn stage_one_learn(y: &DataMatrix, cfg: &HrpConfig) -> Result<(OrthoDict, RecoveryReport)> {
    let init = gen_random_orthogonal(y.nrows().max(1), cfg.seed)?;
    gpm_stage_one(y, cfg, &init)
}

pub(crate) fn ensure_nonzero(y: &DataMatrix) -> Result<()> {
    if y.nrows() == 0 || y.ncols() == 0 {
        return Err(HrpError::InvalidInput("data matrix is empty".into()));
    }
    if y.is_zero() {
        return Err(HrpError::Degenerate(
            "all-zero data: the gradient vanishes identically".into(),
        ));
    }
    Ok(())
}
