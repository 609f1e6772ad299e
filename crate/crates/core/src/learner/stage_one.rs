use std::time::Instant;

use crate::error::{check_dims, Result};
use crate::manifold::{polar, OrthoDict, SquareMatrix};
use crate::synth::{gen_random_orthogonal, DataMatrix};

use super::objective::{l3_gradient, l3_objective, l4_gradient, l4_objective};
use super::{ensure_nonzero, HrpConfig, RecoveryReport};

type Step = fn(&OrthoDict, &DataMatrix) -> Result<SquareMatrix>;
type Objective = fn(&OrthoDict, &DataMatrix) -> Result<f64>;

/// Generalized power iteration `D ← Polar(grad(D))` on 𝕆(N).
///
/// Each step maximizes the linearization of a convex function over a
/// compact set, so the tracked (negated) objective never increases.
fn power_iterate(
    y: &DataMatrix,
    cfg: &HrpConfig,
    init: &OrthoDict,
    step: Step,
    objective: Objective,
) -> Result<(OrthoDict, RecoveryReport)> {
    cfg.validate()?;
    ensure_nonzero(y)?;
    let n = y.nrows();
    check_dims("initial dictionary", (n, n), init.as_matrix().shape())?;

    let start = Instant::now();
    let scale = (n as f64).sqrt();
    let mut d = init.clone();
    let mut report = RecoveryReport {
        objective_trace: vec![objective(&d, y)?],
        ..RecoveryReport::default()
    };
    for it in 1..=cfg.stage1_max_iters {
        let next = polar(&step(&d, y)?)?;
        let change = (next.as_matrix() - d.as_matrix()).norm() / scale;
        d = next;
        report.objective_trace.push(objective(&d, y)?);
        report.stage1_iters = it;
        if change < cfg.stage1_tol {
            report.stage1_converged = true;
            break;
        }
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((d, report))
}

/// Stage One: `D⁽ᵗ⁺¹⁾ = Polar((1/L)·Y·(|D⁽ᵗ⁾ᵀY| ⊙ D⁽ᵗ⁾ᵀY)ᵀ)` until the
/// scaled iterate change drops below `stage1_tol`.
pub fn gpm_stage_one(
    y: &DataMatrix,
    cfg: &HrpConfig,
    init: &OrthoDict,
) -> Result<(OrthoDict, RecoveryReport)> {
    power_iterate(
        y,
        cfg,
        init,
        l3_gradient::<OrthoDict>,
        l3_objective::<OrthoDict>,
    )
}

/// ℓ4 baseline, seeded random start.
pub fn msp_l4_learn(y: &DataMatrix, cfg: &HrpConfig) -> Result<(OrthoDict, RecoveryReport)> {
    let init = gen_random_orthogonal(y.nrows().max(1), cfg.seed)?;
    msp_l4_learn_from(y, cfg, &init)
}

/// ℓ4 baseline: `D⁽ᵗ⁺¹⁾ = Polar((1/L)·Y·((D⁽ᵗ⁾ᵀY)^{∘3})ᵀ)`; the trace holds
/// `-(1/L) Σ ‖Dᵀyᵢ‖⁴₄`.
pub fn msp_l4_learn_from(
    y: &DataMatrix,
    cfg: &HrpConfig,
    init: &OrthoDict,
) -> Result<(OrthoDict, RecoveryReport)> {
    power_iterate(
        y,
        cfg,
        init,
        l4_gradient::<OrthoDict>,
        l4_objective::<OrthoDict>,
    )
}
