//! Command-line front end for `hrp-core`: `learn`, `synth`, `phase`,
//! `bench` and `compress`.
//!
//! Exit codes: 0 on success, 2 for usage errors (reported by clap), 1 for
//! anything that fails at run time.

pub mod args;
pub mod commands;
pub mod dictfile;

use anyhow::Result;

pub use args::{Cli, Command};

/// Runs one parsed command, printing a short summary for commands that
/// write to a directory.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Learn(a) => {
            let r = commands::cmd_learn(a)?;
            let rmse = r
                .rmse
                .map_or_else(|| "n/a".to_string(), |e| format!("{e:e}"));
            println!(
                "learned {}x{} dictionary with {} in {:.3}s (stage one {} iters, stage two {}); rmse {rmse}",
                r.n, r.n, r.method, r.wall_time_seconds, r.stage1_iters, r.stage2_iters
            );
        }
        Command::Synth(a) => {
            let m = commands::cmd_synth(a)?;
            println!(
                "wrote N={} L={} theta={} seed={} to {}",
                m.n,
                m.l,
                m.theta,
                m.seed,
                a.output.display()
            );
        }
        Command::Phase(a) => {
            commands::cmd_phase(a)?;
        }
        Command::Bench(a) => {
            commands::cmd_bench(a)?;
        }
        Command::Compress(a) => {
            let r = commands::cmd_compress(a)?;
            print!("{}", commands::compression_csv(&r.rows));
        }
    }
    Ok(())
}
