//! Convergence of truncated fields: Cauchy differences `X^N - X^{N_max}` in
//! `B^{-(d+gamma)/2}_{inf,q}` for log-corrected and uncorrected profiles.

use normflate::besov::{aggregate, besov_norm, block_norms, BesovParams};
use normflate::gfs::{sample_real_gfs, StreamKey, VarianceProfile};
use normflate::spectral::{project_band, TorusGrid};
use normflate::stats;
use serde::Serialize;

use crate::config::{BesovCase, BesovConfig, Expectation};
use crate::output::{self, fmt_list, Flag, Summary};
use crate::{CliError, Context, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyRecord {
    pub case: String,
    pub trial: u64,
    pub n: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesovRow {
    pub case: String,
    pub n: usize,
    pub trials: usize,
    pub median: f64,
    pub q90: f64,
}

pub struct BesovOutcome {
    pub records: Vec<CauchyRecord>,
    pub rows: Vec<BesovRow>,
    pub flags: Vec<Flag>,
}

/// Weighted block norms `2^{alpha ell} |Delta_ell f|_{L^inf}` of one field;
/// `ell` is empty on the aggregate row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRow {
    pub case: String,
    pub n: usize,
    pub ell: Option<i32>,
    pub weighted: f64,
}

/// Block table of the Cauchy difference at the smallest N, trial 0.
pub fn block_table(cfg: &BesovConfig, seed: u64) -> Result<Vec<BlockRow>> {
    validate(cfg)?;
    let grid = TorusGrid::for_radius(cfg.dim, cfg.n_max)?;
    let alpha = -(cfg.dim as f64 + cfg.gamma) / 2.0;
    let n = cfg.n_list[0];
    let mut rows = Vec::new();
    for case in &cfg.cases {
        let x = sample_real_gfs(&profile(cfg, case)?, grid, StreamKey::new(seed, 0))?;
        let blocks = block_norms(&(&x - &project_band(&x, n as f64)), f64::INFINITY)?;
        rows.extend(blocks.iter().map(|b| BlockRow {
            case: case.name.clone(),
            n,
            ell: Some(b.ell),
            weighted: b.weighted(alpha),
        }));
        rows.push(BlockRow {
            case: case.name.clone(),
            n,
            ell: None,
            weighted: aggregate(&blocks, alpha, case.q),
        });
    }
    Ok(rows)
}

fn validate(cfg: &BesovConfig) -> Result<()> {
    if cfg.n_list.is_empty() {
        return Err(CliError::Config("N list is empty".into()));
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    if cfg.n_list.iter().any(|&n| n >= cfg.n_max) {
        return Err(CliError::Config(format!("every N must be below n_max = {}", cfg.n_max)));
    }
    for c in &cfg.cases {
        if c.theta < -1.0 && c.q.is_finite() && !(c.q > -2.0 / (c.theta + 1.0)) {
            return Err(CliError::Config(format!(
                "case {}: q = {} must exceed -2/(theta + 1) = {}",
                c.name,
                c.q,
                -2.0 / (c.theta + 1.0)
            )));
        }
        BesovParams::new(0.0, f64::INFINITY, c.q)?;
    }
    Ok(())
}

fn profile(cfg: &BesovConfig, case: &BesovCase) -> Result<VarianceProfile> {
    let p = VarianceProfile::log_power(cfg.gamma, case.theta, case.eta, cfg.n_max as f64);
    p.validate()?;
    Ok(p)
}

/// Cauchy norms of one trial, indexed `[case][n]`.
fn trial_norms(cfg: &BesovConfig, profiles: &[VarianceProfile], seed: u64, trial: u64) -> Result<Vec<Vec<f64>>> {
    let grid = TorusGrid::for_radius(cfg.dim, cfg.n_max)?;
    let alpha = -(cfg.dim as f64 + cfg.gamma) / 2.0;
    let key = StreamKey::new(seed, trial);
    cfg.cases
        .iter()
        .zip(profiles)
        .map(|(case, p)| {
            let x = sample_real_gfs(p, grid, key)?;
            let params = BesovParams::new(alpha, f64::INFINITY, case.q)?;
            cfg.n_list
                .iter()
                .map(|&n| {
                    let diff = &x - &project_band(&x, n as f64);
                    Ok(besov_norm(&diff, &params)?)
                })
                .collect()
        })
        .collect()
}

pub fn run_besov_convergence(cfg: &BesovConfig, ctx: &Context) -> Result<BesovOutcome> {
    validate(cfg)?;
    let profiles = cfg.cases.iter().map(|c| profile(cfg, c)).collect::<Result<Vec<_>>>()?;
    let per_trial: Vec<Vec<Vec<f64>>> = ctx
        .map_trials(cfg.trials, |trial| trial_norms(cfg, &profiles, ctx.seed, trial))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for (ci, case) in cfg.cases.iter().enumerate() {
        let mut medians = Vec::new();
        for (ni, &n) in cfg.n_list.iter().enumerate() {
            let v: Vec<f64> = per_trial.iter().map(|t| t[ci][ni]).collect();
            for (trial, norm) in v.iter().enumerate() {
                records.push(CauchyRecord {
                    case: case.name.clone(),
                    trial: trial as u64,
                    n,
                    norm: *norm,
                });
            }
            let median = stats::median(&v);
            medians.push(median);
            rows.push(BesovRow {
                case: case.name.clone(),
                n,
                trials: cfg.trials,
                median,
                q90: stats::quantile(&v, 0.9),
            });
        }
        let flag = match case.expect {
            Expectation::Decreasing => Flag::new(
                &format!("{}_decreasing", case.name),
                output::decreasing(&medians),
                format!("medians {}", fmt_list(&medians)),
            ),
            Expectation::Flat => {
                let s = stats::spread(&medians);
                Flag::new(
                    &format!("{}_flat", case.name),
                    s < cfg.flat_tolerance,
                    format!("medians {}, spread {s:.3} < {}", fmt_list(&medians), cfg.flat_tolerance),
                )
            }
        };
        flags.push(flag);
    }
    Ok(BesovOutcome { records, rows, flags })
}

pub fn run_besov(cfg: &BesovConfig, ctx: &Context) -> Result<Summary> {
    let out = run_besov_convergence(cfg, ctx)?;
    output::write_jsonl(&ctx.out.join("besov_records.jsonl"), &out.records)?;
    output::write_csv(&ctx.out.join("besov.csv"), &out.rows)?;
    output::write_csv(&ctx.out.join("besov_blocks.csv"), &block_table(cfg, ctx.seed)?)?;
    Summary::new("besov", ctx.seed, out.flags, &out.rows)
}
