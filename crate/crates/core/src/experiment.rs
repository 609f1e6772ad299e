//! Monte-Carlo trial runners behind the `phase`, `bench` and `compress`
//! commands.
//!
//! Trial `k` of a run with base seed `s` uses the seed `s ^ k`; the
//! dictionary, the codes and the solver start are drawn from separate
//! streams of that seed via [`derive_seed`]. Results therefore do not depend
//! on how trials are scheduled, and all methods see identical data for the
//! same trial.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{reconstruct, sparse_codes, SparsityBudget};
use crate::error::{HrpError, Result};
use crate::ingest::{mean_fill, SensorTable};
use crate::learner::{
    hrp_learn, hrp_learn_atom, msp_l4_learn, stage_one_learn, HrpConfig, RecoveryReport,
};
use crate::manifold::OrthoDict;
use crate::metrics::{
    atom_error, compression_ratio, masked_rmse, mean, median, sign_perm_rmse, success_rate,
};
use crate::synth::{
    derive_seed, gen_bernoulli_gaussian, gen_observations, gen_random_orthogonal, BgParams,
    DataMatrix, SparseCodeMatrix,
};

const DICT_STREAM: u64 = 1;
const CODE_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

/// Dictionary learners available to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Both stages.
    Hrp,
    /// Stage One only.
    Stage1Only,
    /// ℓ4 power iteration baseline.
    L4Msp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hrp, Method::Stage1Only, Method::L4Msp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hrp => "hrp",
            Method::Stage1Only => "stage1-only",
            Method::L4Msp => "l4-msp",
        }
    }

    pub fn learn(&self, y: &DataMatrix, cfg: &HrpConfig) -> Result<(OrthoDict, RecoveryReport)> {
        match self {
            Method::Hrp => hrp_learn(y, cfg),
            Method::Stage1Only => stage_one_learn(y, cfg),
            Method::L4Msp => msp_l4_learn(y, cfg),
        }
    }
}

impl FromStr for Method {
    type Err = HrpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hrp" => Ok(Method::Hrp),
            "stage1-only" | "l3-s1" => Ok(Method::Stage1Only),
            "l4-msp" => Ok(Method::L4Msp),
            other => Err(HrpError::InvalidInput(format!(
                "unknown method {other:?} (expected hrp, stage1-only or l4-msp)"
            ))),
        }
    }
}

/// Whether the true dictionary is shared by all trials of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryMode {
    Fixed,
    Resampled,
}

impl DictionaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DictionaryMode::Fixed => "fixed",
            DictionaryMode::Resampled => "resampled",
        }
    }
}

impl FromStr for DictionaryMode {
    type Err = HrpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(DictionaryMode::Fixed),
            "resampled" => Ok(DictionaryMode::Resampled),
            other => Err(HrpError::InvalidInput(format!(
                "unknown dictionary mode {other:?} (expected fixed or resampled)"
            ))),
        }
    }
}

/// Whole dictionary on 𝕆(N) or a single atom on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Group,
    Sphere,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Group => "group",
            Variant::Sphere => "sphere",
        }
    }
}

impl FromStr for Variant {
    type Err = HrpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(Variant::Group),
            "sphere" => Ok(Variant::Sphere),
            other => Err(HrpError::InvalidInput(format!(
                "unknown variant {other:?} (expected group or sphere)"
            ))),
        }
    }
}

pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base ^ trial
}

/// `L = round(10·N^exponent)`, at least one.
pub fn sample_count(n: usize, exponent: f64) -> usize {
    ((10.0 * (n as f64).powf(exponent)).round() as usize).max(1)
}

/// One synthetic problem `Y = D*·X*`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub dictionary: OrthoDict,
    pub codes: SparseCodeMatrix,
    pub data: DataMatrix,
}

/// Data for trial `trial` of a run with base seed `base`.
pub fn trial_problem(
    n: usize,
    l: usize,
    theta: f64,
    base: u64,
    trial: u64,
    mode: DictionaryMode,
) -> Result<Problem> {
    let seed = trial_seed(base, trial);
    let dict_seed = match mode {
        DictionaryMode::Fixed => derive_seed(base, DICT_STREAM),
        DictionaryMode::Resampled => derive_seed(seed, DICT_STREAM),
    };
    let dictionary = gen_random_orthogonal(n, dict_seed)?;
    let codes =
        gen_bernoulli_gaussian(&BgParams::new(n, l, theta, derive_seed(seed, CODE_STREAM))?)?;
    let data = gen_observations(&dictionary, &codes)?;
    Ok(Problem {
        dictionary,
        codes,
        data,
    })
}

/// Solver configuration for a trial: `cfg` with its seed replaced by the
/// trial's start stream.
pub fn trial_config(cfg: &HrpConfig, base: u64, trial: u64) -> HrpConfig {
    HrpConfig {
        seed: derive_seed(trial_seed(base, trial), INIT_STREAM),
        ..cfg.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    /// Sign-permutation RMSE (group) or atom error (sphere).
    pub error: f64,
    pub wall_time_seconds: f64,
    pub stage1_iters: usize,
    pub stage2_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub n: usize,
    pub l: usize,
    pub theta: f64,
    pub base_seed: u64,
    pub mode: DictionaryMode,
}

/// Runs one trial of `method` on the whole dictionary.
pub fn run_group_trial(
    spec: &TrialSpec,
    trial: u64,
    method: Method,
    cfg: &HrpConfig,
) -> Result<TrialOutcome> {
    let p = trial_problem(spec.n, spec.l, spec.theta, spec.base_seed, trial, spec.mode)?;
    let (d, report) = method.learn(&p.data, &trial_config(cfg, spec.base_seed, trial))?;
    let (error, _) = sign_perm_rmse(&d, &p.dictionary)?;
    Ok(TrialOutcome {
        trial,
        error,
        wall_time_seconds: report.wall_time_seconds,
        stage1_iters: report.stage1_iters,
        stage2_iters: report.stage2_iters,
    })
}

/// Runs one trial of the single-atom sphere variant.
pub fn run_sphere_trial(spec: &TrialSpec, trial: u64, cfg: &HrpConfig) -> Result<TrialOutcome> {
    let p = trial_problem(spec.n, spec.l, spec.theta, spec.base_seed, trial, spec.mode)?;
    let (d, report) = hrp_learn_atom(&p.data, &trial_config(cfg, spec.base_seed, trial))?;
    Ok(TrialOutcome {
        trial,
        error: atom_error(&d, &p.dictionary)?,
        wall_time_seconds: report.wall_time_seconds,
        stage1_iters: report.stage1_iters,
        stage2_iters: report.stage2_iters,
    })
}

fn run_trials<F>(trials: usize, parallel: bool, f: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
{
    if trials == 0 {
        return Err(HrpError::InvalidInput("trials must be at least 1".into()));
    }
    if parallel {
        (0..trials as u64).into_par_iter().map(&f).collect()
    } else {
        (0..trials as u64).map(&f).collect()
    }
}

/// One cell of the success-rate phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub variant: Variant,
    pub n: usize,
    pub theta: f64,
    pub exponent: f64,
    pub l: usize,
    pub trials: usize,
    pub threshold: f64,
    pub success_rate: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub variant: Variant,
    pub n: usize,
    pub theta: f64,
    pub exponent: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub mode: DictionaryMode,
    pub threshold: f64,
}

pub fn phase_cell(spec: &PhaseSpec, cfg: &HrpConfig, parallel: bool) -> Result<PhaseCell> {
    let l = sample_count(spec.n, spec.exponent);
    let trial = TrialSpec {
        n: spec.n,
        l,
        theta: spec.theta,
        base_seed: spec.base_seed,
        mode: spec.mode,
    };
    let outcomes = run_trials(spec.trials, parallel, |k| match spec.variant {
        Variant::Group => run_group_trial(&trial, k, Method::Hrp, cfg),
        Variant::Sphere => run_sphere_trial(&trial, k, cfg),
    })?;
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    Ok(PhaseCell {
        variant: spec.variant,
        n: spec.n,
        theta: spec.theta,
        exponent: spec.exponent,
        l,
        trials: spec.trials,
        threshold: spec.threshold,
        success_rate: success_rate(&errors, spec.threshold)?,
        errors,
    })
}

/// RMSE and timing summary for one method on one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub method: Method,
    pub n: usize,
    pub theta: f64,
    pub l: usize,
    pub trials: usize,
    pub mean_rmse: f64,
    pub median_rmse: f64,
    pub mean_time_seconds: f64,
    pub rmse: Vec<f64>,
}

/// Trials run sequentially when `parallel` is false so that wall times are
/// not skewed by contention.
pub fn bench_cell(
    method: Method,
    spec: &TrialSpec,
    trials: usize,
    cfg: &HrpConfig,
    parallel: bool,
) -> Result<BenchCell> {
    let outcomes = run_trials(trials, parallel, |k| run_group_trial(spec, k, method, cfg))?;
    let rmse: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    let times: Vec<f64> = outcomes.iter().map(|o| o.wall_time_seconds).collect();
    Ok(BenchCell {
        method,
        n: spec.n,
        theta: spec.theta,
        l: spec.l,
        trials,
        mean_rmse: mean(&rmse).unwrap_or(f64::NAN),
        median_rmse: median(&rmse).unwrap_or(f64::NAN),
        mean_time_seconds: mean(&times).unwrap_or(f64::NAN),
        rmse,
    })
}

/// One budget of a compression run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionRow {
    pub t0: usize,
    pub compression_ratio: usize,
    pub masked_rmse: f64,
    pub learn_time_seconds: f64,
    pub code_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CompressionRun {
    pub dictionary: OrthoDict,
    pub report: RecoveryReport,
    pub rows: Vec<CompressionRow>,
}

/// Mean-fills the table, learns one dictionary with `method`, then codes and
/// reconstructs at every budget in `t0_list`, scoring only observed cells.
pub fn compress_table(
    table: &SensorTable,
    t0_list: &[usize],
    method: Method,
    cfg: &HrpConfig,
) -> Result<CompressionRun> {
    let n = table.n_sensors();
    let budgets = t0_list
        .iter()
        .map(|&t0| SparsityBudget::new(t0, n))
        .collect::<Result<Vec<_>>>()?;
    let y = mean_fill(table)?;
    let mask = y.observed();
    let start = Instant::now();
    let (dictionary, report) = method.learn(&y, cfg)?;
    let learn_time = start.elapsed().as_secs_f64();
    let mut rows = Vec::with_capacity(budgets.len());
    for b in budgets {
        let start = Instant::now();
        let x = sparse_codes(&dictionary, &y, b)?;
        let yhat = reconstruct(&dictionary, &x)?;
        let code_time = start.elapsed().as_secs_f64();
        rows.push(CompressionRow {
            t0: b.t0(),
            compression_ratio: compression_ratio(n, b),
            masked_rmse: masked_rmse(yhat.as_matrix(), y.as_matrix(), &mask)?,
            learn_time_seconds: learn_time,
            code_time_seconds: code_time,
        });
    }
    Ok(CompressionRun {
        dictionary,
        report,
        rows,
    })
}
