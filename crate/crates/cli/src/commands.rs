use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hrp_core::codes::{direct_codes, sparse_codes, SparsityBudget};
use hrp_core::experiment::{
    bench_cell, compress_table, phase_cell, trial_problem, BenchCell, CompressionRow,
    DictionaryMode, PhaseCell, PhaseSpec, TrialSpec, Variant,
};
use hrp_core::ingest::{load_table, mean_fill, write_delimited, LoadOptions, SensorTable};
use hrp_core::metrics::sign_perm_rmse_matrix;
use serde::Serialize;

use crate::args::{BenchArgs, CompressArgs, LearnArgs, PhaseArgs, SynthArgs, TableArgs};
use crate::dictfile::{read_dictionary, write_dictionary, write_json};

pub const DICTIONARY_FILE: &str = "dictionary.json";
pub const CODES_FILE: &str = "codes.csv";
pub const REPORT_FILE: &str = "report.json";
pub const DATA_FILE: &str = "data.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMPRESSION_FILE: &str = "compression.csv";

fn load_options(t: &TableArgs) -> LoadOptions {
    let mut opts = LoadOptions {
        header: t.header,
        row_labels: t.row_labels,
        transpose: t.transpose,
        missing_sentinel: t.missing_value,
        ..LoadOptions::default()
    };
    if !t.missing_tokens.is_empty() {
        opts.missing_tokens = t.missing_tokens.clone();
    }
    opts
}

fn read_table(t: &TableArgs) -> Result<SensorTable> {
    load_table(&t.input, &load_options(t)).with_context(|| format!("loading {}", t.input.display()))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn emit_csv(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Contents of `report.json` written by `learn`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnReport {
    pub method: String,
    pub n: usize,
    pub l: usize,
    pub t0: Option<usize>,
    pub seed: u64,
    pub stage1_iters: usize,
    pub stage2_iters: usize,
    pub stage1_converged: bool,
    /// Solver time only; file I/O is excluded.
    pub wall_time_seconds: f64,
    pub objective_trace: Vec<f64>,
    pub ortho_residual: f64,
    /// Sign-permutation RMSE against `--truth`, when given.
    pub rmse: Option<f64>,
    pub threshold: f64,
    pub success: Option<bool>,
}

pub fn cmd_learn(a: &LearnArgs) -> Result<LearnReport> {
    let table = read_table(&a.table)?;
    let n = table.n_sensors();
    let budget = a.t0.map(|t0| SparsityBudget::new(t0, n)).transpose()?;
    let truth = a.truth.as_deref().map(read_dictionary).transpose()?;
    let cfg = a.solver.config(false);
    cfg.validate()?;

    let y = mean_fill(&table)?;
    let (d, report) = a.method.learn(&y, &cfg)?;
    let codes = match budget {
        Some(b) => sparse_codes(&d, &y, b)?,
        None => direct_codes(&d, &y)?,
    };
    let rmse = truth
        .as_ref()
        .map(|t| sign_perm_rmse_matrix(d.as_matrix(), t).map(|(e, _)| e))
        .transpose()?;

    let out = LearnReport {
        method: a.method.as_str().into(),
        n,
        l: y.ncols(),
        t0: a.t0,
        seed: cfg.seed,
        stage1_iters: report.stage1_iters,
        stage2_iters: report.stage2_iters,
        stage1_converged: report.stage1_converged,
        wall_time_seconds: report.wall_time_seconds,
        objective_trace: report.objective_trace,
        ortho_residual: d.residual(),
        rmse,
        threshold: a.threshold,
        success: rmse.map(|e| e < a.threshold),
    };
    prepare_dir(&a.output)?;
    write_dictionary(&a.output.join(DICTIONARY_FILE), d.as_matrix())?;
    write_delimited(a.output.join(CODES_FILE), codes.as_matrix(), ',')?;
    write_json(&a.output.join(REPORT_FILE), &out)?;
    Ok(out)
}

/// Contents of `manifest.json` written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthManifest {
    pub n: usize,
    pub l: usize,
    pub theta: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub data: &'static str,
    pub dictionary: &'static str,
    pub codes: &'static str,
}

pub fn cmd_synth(a: &SynthArgs) -> Result<SynthManifest> {
    let p = trial_problem(a.n, a.l, a.theta, a.seed, 0, DictionaryMode::Resampled)?;
    prepare_dir(&a.output)?;
    write_delimited(a.output.join(DATA_FILE), p.data.as_matrix(), ',')?;
    write_dictionary(&a.output.join(DICTIONARY_FILE), p.dictionary.as_matrix())?;
    write_delimited(a.output.join(CODES_FILE), p.codes.as_matrix(), ',')?;
    let manifest = SynthManifest {
        n: a.n,
        l: a.l,
        theta: a.theta,
        seed: a.seed,
        rng: "chacha8",
        data: DATA_FILE,
        dictionary: DICTIONARY_FILE,
        codes: CODES_FILE,
    };
    write_json(&a.output.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut s = String::from("variant,n,theta,exponent,l,trials,threshold,success_rate\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            c.variant.as_str(),
            c.n,
            c.theta,
            c.exponent,
            c.l,
            c.trials,
            c.threshold,
            c.success_rate
        );
    }
    s
}

pub fn cmd_phase(a: &PhaseArgs) -> Result<Vec<PhaseCell>> {
    let sphere = a.variant == Variant::Sphere;
    let cfg = a.solver.config(sphere);
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &a.n {
        for &theta in &a.theta {
            for &exponent in &a.exponents {
                let spec = PhaseSpec {
                    variant: a.variant,
                    n,
                    theta,
                    exponent,
                    trials: a.trials,
                    base_seed: a.solver.seed,
                    mode: a.dict_mode,
                    threshold: a.threshold,
                };
                cells.push(phase_cell(&spec, &cfg, !a.sequential)?);
            }
        }
    }
    emit_csv(&phase_csv(&cells), a.output.as_ref())?;
    Ok(cells)
}

pub fn bench_csv(cells: &[BenchCell]) -> String {
    let mut s = String::from("method,n,theta,l,trials,mean_rmse,median_rmse,mean_time_seconds\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            c.method.as_str(),
            c.n,
            c.theta,
            c.l,
            c.trials,
            c.mean_rmse,
            c.median_rmse,
            c.mean_time_seconds
        );
    }
    s
}

pub fn cmd_bench(a: &BenchArgs) -> Result<Vec<BenchCell>> {
    let cfg = a.solver.config(false);
    cfg.validate()?;
    let mut cells = Vec::new();
    for &theta in &a.theta {
        for &l in &a.l {
            let spec = TrialSpec {
                n: a.n,
                l,
                theta,
                base_seed: a.solver.seed,
                mode: a.dict_mode,
            };
            for &method in &a.methods {
                cells.push(bench_cell(method, &spec, a.trials, &cfg, a.parallel)?);
            }
        }
    }
    emit_csv(&bench_csv(&cells), a.output.as_ref())?;
    Ok(cells)
}

/// Contents of `report.json` written by `compress`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressReport {
    pub method: String,
    pub n: usize,
    pub l: usize,
    pub observed: usize,
    pub stage1_iters: usize,
    pub stage2_iters: usize,
    pub learn_time_seconds: f64,
    pub rows: Vec<CompressionRow>,
}

pub fn compression_csv(rows: &[CompressionRow]) -> String {
    let mut s =
        String::from("t0,compression_ratio,masked_rmse,learn_time_seconds,code_time_seconds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.t0, r.compression_ratio, r.masked_rmse, r.learn_time_seconds, r.code_time_seconds
        );
    }
    s
}

pub fn cmd_compress(a: &CompressArgs) -> Result<CompressReport> {
    let table = read_table(&a.table)?;
    let cfg = a.solver.config(false);
    let run = compress_table(&table, &a.t0, a.method, &cfg)?;
    let report = CompressReport {
        method: a.method.as_str().into(),
        n: table.n_sensors(),
        l: table.n_slots(),
        observed: table.mask().observed_count(),
        stage1_iters: run.report.stage1_iters,
        stage2_iters: run.report.stage2_iters,
        learn_time_seconds: run.report.wall_time_seconds,
        rows: run.rows,
    };
    prepare_dir(&a.output)?;
    let csv_path = a.output.join(COMPRESSION_FILE);
    fs::write(&csv_path, compression_csv(&report.rows))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    write_dictionary(&a.output.join(DICTIONARY_FILE), run.dictionary.as_matrix())?;
    write_json(&a.output.join(REPORT_FILE), &report)?;
    Ok(report)
}
