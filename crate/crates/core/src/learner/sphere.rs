use std::time::Instant;

use nalgebra::DVector;

use crate::error::{check_dims, HrpError, Result};
use crate::manifold::{normalize_to_sphere, sphere_tangent_project, UnitVector};
use crate::synth::{derive_seed, gaussian_matrix, rng_from_seed, DataMatrix};

use super::{ensure_nonzero, HrpConfig, RecoveryReport};

/// `(1/L) Σᵢ |dᵀyᵢ|³`.
pub fn sphere_l3_objective(d: &UnitVector, y: &DataMatrix) -> Result<f64> {
    let c = correlations(d.as_vector(), y)?;
    Ok(c.iter().map(|v| v.abs().powi(3)).sum::<f64>() / y.ncols() as f64)
}

/// Riemannian gradient on the sphere of `f(d) = -(1/L) Σᵢ |dᵀyᵢ|³`:
/// `-(3/L)·(I - d dᵀ)·Y·(|Yᵀd| ⊙ Yᵀd)`.
pub fn sphere_l3_riemannian_gradient(d: &UnitVector, y: &DataMatrix) -> Result<DVector<f64>> {
    let euclid = l3_direction(d.as_vector(), y)? * (-3.0);
    sphere_tangent_project(d, &euclid)
}

fn correlations(d: &DVector<f64>, y: &DataMatrix) -> Result<DVector<f64>> {
    check_dims("atom", (y.nrows(), 1), (d.len(), 1))?;
    Ok(y.as_matrix().tr_mul(d))
}

/// `(1/L)·Y·(|Yᵀd| ⊙ Yᵀd)`.
fn l3_direction(d: &DVector<f64>, y: &DataMatrix) -> Result<DVector<f64>> {
    let c = correlations(d, y)?.map(|v| v.abs() * v);
    Ok(y.as_matrix() * c / y.ncols() as f64)
}

/// `(1/L)·Y·sign(Yᵀd)` with `sign(0) = 0`.
fn l1_direction(d: &DVector<f64>, y: &DataMatrix) -> Result<DVector<f64>> {
    let c = correlations(d, y)?.map(|v| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    });
    Ok(y.as_matrix() * c / y.ncols() as f64)
}

struct AtomRun {
    atom: UnitVector,
    objective: f64,
    stage1_iters: usize,
    stage2_iters: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn refine_atom(y: &DataMatrix, cfg: &HrpConfig, init: &UnitVector) -> Result<AtomRun> {
    // Stage One: the polar factor of a vector is its normalization.
    let mut d = init.clone();
    let mut trace = vec![-sphere_l3_objective(&d, y)?];
    let mut stage1_iters = 0;
    let mut converged = false;
    for it in 1..=cfg.stage1_max_iters {
        let next = normalize_to_sphere(&l3_direction(d.as_vector(), y)?)?;
        let change = (next.as_vector() - d.as_vector()).norm();
        d = next;
        trace.push(-sphere_l3_objective(&d, y)?);
        stage1_iters = it;
        if change < cfg.stage1_tol {
            converged = true;
            break;
        }
    }

    // Stage Two on the tangent line rᵀd = 1 around the Stage-One point.
    let r = d;
    let mut v = r.as_vector().clone();
    let mut tau = cfg.tau0;
    let mut stage2_iters = 0;
    while stage2_iters < cfg.stage2_max_iters && tau >= cfg.stage2_min_step {
        let g = sphere_tangent_project(&r, &l1_direction(&v, y)?)?;
        v -= g * tau;
        tau *= cfg.eta;
        stage2_iters += 1;
    }
    let atom = normalize_to_sphere(&v)?;
    let objective = sphere_l3_objective(&atom, y)?;
    Ok(AtomRun {
        atom,
        objective,
        stage1_iters,
        stage2_iters,
        converged,
        trace,
    })
}

/// Recovers one atom on the unit sphere.
///
/// Runs `cfg.restarts_for(N)` uniformly random starts, each through the
/// sphere versions of both stages, and keeps the refined atom with the
/// largest `(1/L) Σ |dᵀyᵢ|³`. The report's trace and iteration counts refer
/// to the selected restart.
pub fn hrp_learn_atom(y: &DataMatrix, cfg: &HrpConfig) -> Result<(UnitVector, RecoveryReport)> {
    cfg.validate()?;
    ensure_nonzero(y)?;
    let n = y.nrows();
    let restarts = cfg.restarts_for(n);
    let inits = (0..restarts)
        .map(|k| {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, k as u64));
            let g = gaussian_matrix(n, 1, &mut rng).column(0).into_owned();
            normalize_to_sphere(&g)
        })
        .collect::<Result<Vec<_>>>()?;
    hrp_learn_atom_from(y, cfg, &inits)
}

/// [`hrp_learn_atom`] from explicit starting points.
pub fn hrp_learn_atom_from(
    y: &DataMatrix,
    cfg: &HrpConfig,
    inits: &[UnitVector],
) -> Result<(UnitVector, RecoveryReport)> {
    cfg.validate()?;
    ensure_nonzero(y)?;
    if inits.is_empty() {
        return Err(HrpError::InvalidInput(
            "at least one restart is required".into(),
        ));
    }
    let start = Instant::now();
    let mut best: Option<AtomRun> = None;
    let mut objectives = Vec::with_capacity(inits.len());
    for init in inits {
        let run = refine_atom(y, cfg, init)?;
        objectives.push(run.objective);
        if best.as_ref().is_none_or(|b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("nonempty restarts");
    let report = RecoveryReport {
        objective_trace: best.trace,
        stage1_iters: best.stage1_iters,
        stage2_iters: best.stage2_iters,
        stage1_converged: best.converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        restart_objectives: Some(objectives),
    };
    Ok((best.atom, report))
}
