//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Run with `cargo test -p hrp-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use hrp_core::codes::{hard_threshold, SparsityBudget};
use hrp_core::experiment::{
    bench_cell, compress_table, phase_cell, DictionaryMode, Method, PhaseSpec, TrialSpec, Variant,
};
use hrp_core::ingest::SensorTable;
use hrp_core::learner::{
    complete_dict_learn, constraint_residual, gpm_stage_one, l1_objective, l1_subgradient,
    l3_gradient, l3_objective, msp_l4_learn_from, rpg_stage_two_traced, HrpConfig,
};
use hrp_core::manifold::{polar, tangent_project};
use hrp_core::metrics::{
    compression_ratio, median, normalize_columns, sign_perm_rmse, sign_perm_rmse_matrix,
    ObservationMask,
};
use hrp_core::synth::{
    gaussian_matrix, gen_bernoulli_gaussian, gen_observations, gen_random_orthogonal,
    rng_from_seed, BgParams,
};
use hrp_core::{DataMatrix, OrthoDict};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const SUCCESS_THRESHOLD: f64 = 1e-3;
const ATOM_THRESHOLD: f64 = 1e-6;
const PHASE_HIGH: f64 = 0.9;
const PHASE_LOW: f64 = 0.1;
const DESCENT_SLACK: f64 = 1e-12;
const POLAR_TOL: f64 = 1e-10;
const SKEW_TOL: f64 = 1e-12;
const CONSTRAINT_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-12;
const FD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-5;
const KINK_MARGIN: f64 = 1e-3;
const ROUND_TRIP_TOL: f64 = 1e-10;
const COMPLETE_TOL: f64 = 5e-2;
const TIMING_FACTOR: f64 = 100.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn phase_transition() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [10, 20] {
        for (exponent, want_high) in [(2.0, true), (0.5, false)] {
            let spec = PhaseSpec {
                variant: Variant::Group,
                n,
                theta: 0.2,
                exponent,
                trials: 10,
                base_seed: 2024 + n as u64,
                mode: DictionaryMode::Fixed,
                threshold: SUCCESS_THRESHOLD,
            };
            let cell = phase_cell(&spec, &HrpConfig::default(), true).unwrap();
            let ok = if want_high {
                cell.success_rate >= PHASE_HIGH
            } else {
                cell.success_rate <= PHASE_LOW
            };
            pass &= ok;
            detail.push(format!("N={n} L={} rate={:.1}", cell.l, cell.success_rate));
        }
    }
    outcome(pass, detail.join(", "))
}

fn sphere_recovery() -> Outcome {
    let spec = PhaseSpec {
        variant: Variant::Sphere,
        n: 10,
        theta: 0.2,
        exponent: 2.0,
        trials: 10,
        base_seed: 77,
        mode: DictionaryMode::Resampled,
        threshold: ATOM_THRESHOLD,
    };
    let cell = phase_cell(&spec, &HrpConfig::sphere(0), true).unwrap();
    let hits = cell.errors.iter().filter(|e| **e < ATOM_THRESHOLD).count();
    let worst = cell.errors.iter().cloned().fold(0.0, f64::max);
    outcome(
        hits >= 9,
        format!("{hits}/10 below {ATOM_THRESHOLD:e}, worst {worst:.2e}"),
    )
}

fn refinement_helps() -> Outcome {
    let spec = TrialSpec {
        n: 20,
        l: 5000,
        theta: 0.3,
        base_seed: 31,
        mode: DictionaryMode::Resampled,
    };
    let cfg = HrpConfig::default();
    let med = |m: Method| bench_cell(m, &spec, 20, &cfg, true).unwrap().median_rmse;
    let (hrp, s1, l4) = (
        med(Method::Hrp),
        med(Method::Stage1Only),
        med(Method::L4Msp),
    );
    outcome(
        hrp <= s1 && hrp <= l4,
        format!("median hrp {hrp:.2e}, stage1-only {s1:.2e}, l4-msp {l4:.2e}"),
    )
}

fn is_non_increasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + DESCENT_SLACK)
}

fn monotone_descent() -> Outcome {
    let mut bad_l3 = 0;
    let mut bad_l4 = 0;
    let mut rng = rng_from_seed(4);
    for k in 0..100u64 {
        let n = rng.random_range(2..=20);
        let l = rng.random_range(n..=20 * n);
        let theta = rng.random_range(0.1..0.6);
        let d = gen_random_orthogonal(n, k).unwrap();
        let x = gen_bernoulli_gaussian(&BgParams::new(n, l, theta, 500 + k).unwrap()).unwrap();
        let Ok(y) = gen_observations(&d, &x) else {
            continue;
        };
        if y.is_zero() {
            continue;
        }
        let init = gen_random_orthogonal(n, 900 + k).unwrap();
        let cfg = HrpConfig::default();
        let (_, r3) = gpm_stage_one(&y, &cfg, &init).unwrap();
        let (_, r4) = msp_l4_learn_from(&y, &cfg, &init).unwrap();
        bad_l3 += usize::from(!is_non_increasing(&r3.objective_trace));
        bad_l4 += usize::from(!is_non_increasing(&r4.objective_trace));
    }
    outcome(
        bad_l3 == 0 && bad_l4 == 0,
        format!("violations: l3 {bad_l3}/100, l4 {bad_l4}/100"),
    )
}

fn manifold_invariants() -> Outcome {
    let mut rng = rng_from_seed(5);
    let mut worst_polar = 0.0f64;
    let mut worst_skew = 0.0f64;
    let mut worst_constraint = 0.0f64;
    for k in 0..1000u64 {
        let n = rng.random_range(2..=16);
        let rank = rng.random_range(1..=n);
        let c = gaussian_matrix(n, rank, &mut rng) * gaussian_matrix(rank, n, &mut rng);
        worst_polar = worst_polar.max(polar(&c).unwrap().residual());

        let r = gen_random_orthogonal(n, k).unwrap();
        let p = tangent_project(&r, &gaussian_matrix(n, n, &mut rng)).unwrap();
        let skew = r.as_matrix().tr_mul(&p) + p.tr_mul(r.as_matrix());
        worst_skew = worst_skew.max(skew.amax());

        let m = rng.random_range(2..=6);
        let y = DataMatrix::new(gaussian_matrix(m, 10 * m, &mut rng)).unwrap();
        let anchor = gen_random_orthogonal(m, 5000 + k).unwrap();
        rpg_stage_two_traced(&y, &anchor, &HrpConfig::default(), |_, d| {
            worst_constraint = worst_constraint.max(constraint_residual(&anchor, d));
        })
        .unwrap();
    }
    outcome(
        worst_polar <= POLAR_TOL && worst_skew <= SKEW_TOL && worst_constraint <= CONSTRAINT_TOL,
        format!(
            "polar {worst_polar:.1e}, skew {worst_skew:.1e}, constraint {worst_constraint:.1e}"
        ),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `min over all 2ᴺ·N! signed permutations` of `‖D̂ - D*J‖_F / ‖D*‖_F`.
fn brute_force_rmse(dhat: &DMatrix<f64>, dstar: &DMatrix<f64>) -> f64 {
    let n = dhat.ncols();
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        for mask in 0..(1u32 << n) {
            let mut err = 0.0;
            for (i, &k) in perm.iter().enumerate() {
                let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                err += (dhat.column(i) - dstar.column(k) * s).norm_squared();
            }
            best = best.min(err);
        }
    }
    best.sqrt() / dstar.norm()
}

fn metric_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..50u64 {
        let n = 2 + (k % 3) as usize;
        let a = gen_random_orthogonal(n, 100 + k).unwrap();
        let b = gen_random_orthogonal(n, 200 + k).unwrap();
        let (fast, _) = sign_perm_rmse(&a, &b).unwrap();
        worst = worst.max((fast - brute_force_rmse(a.as_matrix(), b.as_matrix())).abs());
    }
    outcome(
        worst <= ORACLE_TOL,
        format!("max gap {worst:.1e} over 50 pairs"),
    )
}

/// Smallest squared error over every support of size `t0`.
fn best_support_error(v: &DVector<f64>, t0: usize) -> f64 {
    let n = v.len();
    let total: f64 = v.iter().map(|x| x * x).sum();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != t0 {
            continue;
        }
        let kept: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| v[i] * v[i])
            .sum();
        best = best.min(total - kept);
    }
    best
}

fn thresholding_optimality() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let t0 = rng.random_range(1..=n);
        let v = gaussian_matrix(n, 1, &mut rng).column(0).into_owned();
        let kept = hard_threshold(&v, SparsityBudget::new(t0, n).unwrap());
        let err = (&v - kept).norm_squared();
        worst = worst.max((err - best_support_error(&v, t0)).abs());
    }
    outcome(
        worst <= ORACLE_TOL,
        format!("max gap {worst:.1e} over 200 vectors"),
    )
}

fn central_difference(f: impl Fn(&DMatrix<f64>) -> f64, d: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
        let mut plus = d.clone();
        let mut minus = d.clone();
        plus[(i, j)] += FD_STEP;
        minus[(i, j)] -= FD_STEP;
        (f(&plus) - f(&minus)) / (2.0 * FD_STEP)
    })
}

fn gradient_correctness() -> Outcome {
    let (n, l) = (5, 7);
    let mut rng = rng_from_seed(8);
    let mut worst_l3 = 0.0f64;
    for _ in 0..20 {
        let y = DataMatrix::new(gaussian_matrix(n, l, &mut rng)).unwrap();
        let d = gaussian_matrix(n, n, &mut rng);
        // The implemented l3 direction drops the factor 3 and the sign of
        // the objective's gradient.
        let fd = central_difference(|m| l3_objective(m, &y).unwrap(), &d);
        let g = l3_gradient(&d, &y).unwrap() * -3.0;
        worst_l3 = worst_l3.max((fd - g).amax());
    }
    let mut worst_l1 = 0.0f64;
    let mut points = 0;
    while points < 20 {
        let y = DataMatrix::new(gaussian_matrix(n, l, &mut rng)).unwrap();
        let d = gaussian_matrix(n, n, &mut rng);
        if d.tr_mul(y.as_matrix())
            .iter()
            .any(|v| v.abs() < KINK_MARGIN)
        {
            continue;
        }
        let fd = central_difference(|m| l1_objective(m, &y).unwrap(), &d);
        let g = l1_subgradient(&d, &y).unwrap();
        worst_l1 = worst_l1.max((fd - g).amax());
        points += 1;
    }
    outcome(
        worst_l3 <= FD_TOL && worst_l1 <= FD_TOL,
        format!("max gap l3 {worst_l3:.1e}, l1 {worst_l1:.1e} over 20 points each"),
    )
}

fn random_table(n: usize, l: usize, seed: u64, missing: f64) -> SensorTable {
    let d = gen_random_orthogonal(n, seed).unwrap();
    let x = gen_bernoulli_gaussian(&BgParams::new(n, l, 0.1, seed + 1).unwrap()).unwrap();
    let y = d.as_matrix() * x.as_matrix() + DMatrix::from_element(n, l, 0.5);
    let mut rng = rng_from_seed(seed + 2);
    let mut mask = DMatrix::from_fn(n, l, |_, _| rng.random::<f64>() >= missing);
    mask[(0, 0)] = true;
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    let stamps = (0..l).map(|j| format!("t{j}")).collect();
    SensorTable::new(y, ObservationMask::new(mask), ids, stamps).unwrap()
}

fn compression_round_trip() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, l, seed) in [(8, 200, 1u64), (12, 300, 2), (56, 600, 3)] {
        let table = random_table(n, l, seed, 0.05);
        let t0s: Vec<usize> = (1..=n).collect();
        let run = compress_table(&table, &t0s, Method::Hrp, &HrpConfig::with_seed(seed)).unwrap();
        let errs: Vec<f64> = run.rows.iter().map(|r| r.masked_rmse).collect();
        let full = *errs.last().unwrap();
        let monotone = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        pass &= full <= ROUND_TRIP_TOL && monotone;
        detail.push(format!("N={n} full-budget {full:.1e} monotone={monotone}"));
    }
    let r5 = compression_ratio(56, SparsityBudget::new(5, 56).unwrap());
    let r28 = compression_ratio(56, SparsityBudget::new(28, 56).unwrap());
    pass &= r5 == 11 && r28 == 2;
    detail.push(format!("ratio(56,5)={r5} ratio(56,28)={r28}"));
    outcome(pass, detail.join(", "))
}

fn complete_pipeline() -> Outcome {
    let n = 10;
    let mut hits = 0;
    let mut errs = Vec::new();
    for k in 0..10u64 {
        let q: OrthoDict = gen_random_orthogonal(n, 40 + k).unwrap();
        let diag = DVector::from_fn(n, |i, _| 1.0 + i as f64 / (n - 1) as f64);
        let truth = q.as_matrix() * DMatrix::from_diagonal(&diag);
        let x =
            gen_bernoulli_gaussian(&BgParams::new(n, 10 * n * n, 0.2, 60 + k).unwrap()).unwrap();
        let y = DataMatrix::new(&truth * x.as_matrix()).unwrap();
        let out = complete_dict_learn(&y, &HrpConfig::with_seed(80 + k), None).unwrap();
        let (e, _) = sign_perm_rmse_matrix(
            &normalize_columns(&out.dictionary),
            &normalize_columns(&truth),
        )
        .unwrap();
        hits += usize::from(e < COMPLETE_TOL);
        errs.push(e);
    }
    outcome(
        hits >= 8,
        format!(
            "{hits}/10 below {COMPLETE_TOL:e}, median {:.2e}",
            median(&errs).unwrap()
        ),
    )
}

fn timing_sanity() -> Outcome {
    let spec = TrialSpec {
        n: 20,
        l: 1000,
        theta: 0.2,
        base_seed: 11,
        mode: DictionaryMode::Resampled,
    };
    let cfg = HrpConfig::default();
    let s1 = bench_cell(Method::Stage1Only, &spec, 5, &cfg, false)
        .unwrap()
        .mean_time_seconds;
    let hrp = bench_cell(Method::Hrp, &spec, 5, &cfg, false)
        .unwrap()
        .mean_time_seconds;
    outcome(
        s1 < hrp && hrp < TIMING_FACTOR * s1,
        format!("stage1-only {:.2} ms, hrp {:.2} ms", s1 * 1e3, hrp * 1e3),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("phase transition", phase_transition),
        ("sphere exact recovery", sphere_recovery),
        ("refinement helps at finite samples", refinement_helps),
        ("monotone power-iteration descent", monotone_descent),
        ("manifold invariants", manifold_invariants),
        ("metric oracle equivalence", metric_oracle),
        ("thresholding optimality", thresholding_optimality),
        ("gradient correctness", gradient_correctness),
        ("compression round trip", compression_round_trip),
        ("complete-dictionary pipeline", complete_pipeline),
        ("timing sanity", timing_sanity),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!o.pass);
        println!(
            "{verdict} {:>2} {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
