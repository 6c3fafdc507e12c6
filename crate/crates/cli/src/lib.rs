//! Experiment orchestration for `normflate`: configuration, trial-parallel
//! runners, and JSONL/CSV/JSON reporting.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub mod besov_conv;
pub mod cli;
pub mod config;
pub mod identities;
pub mod inflation;
pub mod output;
pub mod sampling;
pub mod tables;

use cli::{Cli, Command};
use config::Config;
use output::{Flag, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] normflate::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FLAGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Resolved global settings shared by every subcommand.
pub struct Context {
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(seed: u64, threads: usize, out: PathBuf) -> Result<Self> {
        if threads == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { seed, threads, out, pool })
    }

    /// `f(0), ..., f(n - 1)` on the pool, returned in index order so that
    /// every reduction downstream is independent of the thread count.
    pub fn map_trials<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        self.pool.install(|| (0..n as u64).into_par_iter().map(&f).collect())
    }

    pub fn ensure_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

/// Parses arguments, runs one subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            for f in &summary.flags {
                println!("{} {}: {}", if f.pass { "PASS" } else { "FAIL" }, f.name, f.detail);
            }
            if summary.passed() {
                EXIT_PASS
            } else {
                EXIT_FLAGS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Summary> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli
        .seed
        .or(config.seed)
        .ok_or_else(|| CliError::Config("a seed is required (--seed or `seed` in the config)".into()))?;
    let threads = cli.threads.or(config.threads).unwrap_or(1);
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context::new(seed, threads, out)?;
    ctx.ensure_out()?;
    let summary = match &cli.command {
        Command::Sample => sampling::run_sample(&config.sample, &ctx)?,
        Command::Solve => sampling::run_solve(&config.solve, &config.sample, &ctx)?,
        Command::Inflate => inflation::run_inflate(&config.inflate, &ctx)?,
        Command::Perturb => inflation::run_perturb(&config.perturb, &config.inflate, &ctx)?,
        Command::Remainder => inflation::run_remainder(&config.inflate, &ctx)?,
        Command::Besov => besov_conv::run_besov(&config.besov, &ctx)?,
        Command::Tables => tables::run_tables(&config.tables, &ctx)?,
        Command::Identities => identities::run_identities(&config.identities, &ctx)?,
    };
    summary.write(&ctx.out.join("summary.json"))?;
    Ok(summary)
}

pub(crate) fn all_pass(flags: &[Flag]) -> bool {
    flags.iter().all(|f| f.pass)
}
