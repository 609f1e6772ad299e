use std::time::Instant;

use nalgebra::DMatrix;

use crate::error::{check_dims, Result};
use crate::manifold::{tangent_project, OrthoDict, SquareMatrix};
use crate::synth::DataMatrix;

use super::objective::l1_subgradient;
use super::{HrpConfig, RecoveryReport};

/// `max |RᵀD + DᵀR - 2I|`.
pub fn constraint_residual(r: &OrthoDict, d: &DMatrix<f64>) -> f64 {
    let rd = r.as_matrix().tr_mul(d);
    let sym = &rd + rd.transpose();
    let n = sym.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 2.0 } else { 0.0 };
            worst = worst.max((sym[(i, j)] - target).abs());
        }
    }
    worst
}

/// Stage Two: projected subgradient descent on `(1/L) Σ ‖Dᵀyᵢ‖₁` over the
/// affine set `RᵀD + DᵀR = 2I`, starting at `D = R`.
///
/// Steps follow `τ⁽ᵗ⁾ = η·τ⁽ᵗ⁻¹⁾` from `τ⁰ = tau0` and stop once the step
/// drops below `stage2_min_step` or after `stage2_max_iters` steps. Every
/// direction is a tangent vector at `R`, which keeps the constraint exact
/// up to rounding. The output is not orthogonal; project it afterwards.
pub fn rpg_stage_two(
    y: &DataMatrix,
    r: &OrthoDict,
    cfg: &HrpConfig,
) -> Result<(SquareMatrix, RecoveryReport)> {
    rpg_stage_two_traced(y, r, cfg, |_, _| {})
}

/// [`rpg_stage_two`] with a callback invoked on every iterate (including
/// the starting point) with its iteration index.
pub fn rpg_stage_two_traced(
    y: &DataMatrix,
    r: &OrthoDict,
    cfg: &HrpConfig,
    mut on_iterate: impl FnMut(usize, &SquareMatrix),
) -> Result<(SquareMatrix, RecoveryReport)> {
    cfg.validate()?;
    let n = r.n();
    check_dims("data", (n, y.ncols()), y.as_matrix().shape())?;
    let start = Instant::now();
    let mut d = r.as_matrix().clone();
    on_iterate(0, &d);
    let mut tau = cfg.tau0;
    let mut iters = 0;
    while iters < cfg.stage2_max_iters && tau >= cfg.stage2_min_step {
        let g = l1_subgradient(&d, y)?;
        let p = tangent_project(r, &g)?;
        d -= p * tau;
        tau *= cfg.eta;
        iters += 1;
        on_iterate(iters, &d);
    }
    let report = RecoveryReport {
        stage2_iters: iters,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        ..RecoveryReport::default()
    };
    Ok((d, report))
}
