//! Bound tables: `E Z_t`, `I_t`, the weighted drift integrals, the moment
//! statistics and a partition-of-unity check, with pass/fail flags.

use normflate::besov::DyadicPartition;
use normflate::correlation::{
    decorrelated_statistic, verify_ezt_bounds, verify_it_bounds, z_statistic, BoundRow, ExpectedZ, MomentConfig,
    MomentReport, MomentRow, PairKind, ParameterSet, WEIGHTED_DRIFT_CASES,
};
use normflate::solver::{self, asymmetry_witness, drift_direction};
use normflate::stats::{self, geometric_grid, FLAT_SLOPE, GROWING_SLOPE};
use std::time::Instant;

use serde::Serialize;

use crate::config::{parse_algebra, MomentsTable, TablesConfig};
use crate::output::{self, fmt_list, Flag, Summary};
use crate::{CliError, Context, Result};

/// Geometric grid on `[lo, hi]`, both ends included.
pub fn closed_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(CliError::Config(format!("bad time grid [{lo}, {hi}] with {per_decade} per decade")));
    }
    let mut g = geometric_grid(lo, hi, per_decade);
    g.push(hi);
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
struct WeightedDriftRow {
    a: f64,
    b: f64,
    p: f64,
    n: usize,
    t: f64,
    value: f64,
    bound: f64,
    ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
struct MomentCsvRow {
    statistic: &'static str,
    n: usize,
    trials: usize,
    mean: f64,
    std_error: f64,
    median: f64,
    q90: f64,
}

#[derive(Clone, Debug, Serialize)]
struct TrendRow {
    statistic: &'static str,
    slope: f64,
    trend: stats::Trend,
}

#[derive(Clone, Debug, Serialize)]
struct PartitionRow {
    r: f64,
    sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Statistic {
    Decorrelated,
    Control,
    PositiveControl,
    CenteredZ,
}

impl Statistic {
    const ALL: [Statistic; 4] = [
        Statistic::Decorrelated,
        Statistic::Control,
        Statistic::PositiveControl,
        Statistic::CenteredZ,
    ];

    fn name(self) -> &'static str {
        match self {
            Statistic::Decorrelated => "adversarial_mean_removed",
            Statistic::Control => "control_pair",
            Statistic::PositiveControl => "adversarial_with_mean",
            Statistic::CenteredZ => "centered_z",
        }
    }
}

/// Moment statistics per `(statistic, N)`, in `Statistic::ALL` order.
pub fn moment_reports(cfg: &MomentsTable, ctx: &Context) -> Result<Vec<(&'static str, MomentReport)>> {
    let params = ParameterSet::new(cfg.delta, cfg.beta, cfg.eta);
    let t_grid = geometric_grid(cfg.t_lo, cfg.t_hi, cfg.per_decade);
    let base = MomentConfig {
        dim: cfg.dim,
        profile: cfg.profile.build(cfg.dim, 1.0)?,
        params,
        axis: cfg.axis,
        t_grid,
        master_seed: ctx.seed,
    };
    base.validate()?;
    let mut zcfg = base.clone();
    zcfg.params.delta = cfg.z_delta;
    zcfg.validate_z()?;
    if cfg.trials == 0 || cfg.n_list.len() < 2 {
        return Err(CliError::Config("moments need trials > 0 and at least two cutoffs".into()));
    }
    let mut out = Vec::new();
    for stat in Statistic::ALL {
        let mut rows = Vec::new();
        for &n in &cfg.n_list {
            let ez = (stat == Statistic::CenteredZ)
                .then(|| ExpectedZ::new(&zcfg.profile.clone().with_cutoff(n as f64), cfg.dim));
            let samples: Vec<f64> = ctx
                .map_trials(cfg.trials, |trial| match stat {
                    Statistic::Decorrelated => decorrelated_statistic(&base, n, PairKind::Adversarial, true, trial),
                    Statistic::Control => decorrelated_statistic(&base, n, PairKind::Control, false, trial),
                    Statistic::PositiveControl => decorrelated_statistic(&base, n, PairKind::Adversarial, false, trial),
                    Statistic::CenteredZ => z_statistic(&zcfg, n, ez.as_ref().expect("expected Z"), trial),
                })
                .into_iter()
                .collect::<normflate::Result<_>>()?;
            rows.push(MomentRow::from_samples(n, &samples));
        }
        out.push((stat.name(), MomentReport::from_rows(rows)));
    }
    Ok(out)
}

fn weighted_drift_flag_name(a: f64, b: f64, p: f64) -> String {
    format!("weighted_drift_a{a}_b{b}_p{p}")
}

pub fn run_tables(cfg: &TablesConfig, ctx: &Context) -> Result<Summary> {
    let t_grid = closed_grid(cfg.t_lo, cfg.t_hi, cfg.per_decade)?;
    let mut flags = Vec::new();
    for n_list in [&cfg.ezt.n_list, &cfg.drift.n_list] {
        if n_list.len() < 2 {
            return Err(CliError::Config("bound tables need at least two cutoffs".into()));
        }
    }

    let clock = Instant::now();
    let lap = || clock.elapsed().as_secs_f64() * 1e3;
    let mut marks = Vec::new();

    // E Z_t
    let ez_profile = cfg.ezt.profile.build(cfg.ezt.dim, 1.0)?;
    let ezt = verify_ezt_bounds(&ez_profile, cfg.ezt.dim, &cfg.ezt.n_list, &t_grid)?;
    output::write_csv(&ctx.out.join("ezt_upper.csv"), &ezt.upper)?;
    output::write_csv(&ctx.out.join("ezt_lower.csv"), &ezt.lower)?;
    let tol = cfg.ezt.spread_tolerance;
    let maxes: Vec<f64> = ezt.upper_summary.iter().map(|s| s.max_ratio).collect();
    let mins: Vec<f64> = ezt.lower_summary.iter().map(|s| s.min_ratio).collect();
    flags.push(Flag::new(
        "ezt_upper_spread",
        ezt.upper_spread < tol,
        format!("max ratios {}, spread {:.3} < {tol}", fmt_list(&maxes), ezt.upper_spread),
    ));
    flags.push(Flag::new("ezt_lower_positive", ezt.min_lower() > 0.0, format!("min ratio {:.4}", ezt.min_lower())));
    flags.push(Flag::new(
        "ezt_lower_spread",
        ezt.lower_spread < tol,
        format!("min ratios {}, spread {:.3} < {tol}", fmt_list(&mins), ezt.lower_spread),
    ));

    marks.push(lap());

    // I_t
    let spec = solver::preset(&cfg.drift.preset, cfg.drift.dim, parse_algebra(&cfg.drift.algebra)?)?;
    let w = asymmetry_witness(&spec).ok_or(normflate::Error::NoWitness)?;
    let direction = drift_direction(&spec, w);
    let it_profile = cfg.drift.profile.build(cfg.drift.dim, 1.0)?;
    let it = verify_it_bounds(&it_profile, cfg.drift.dim, &direction, &cfg.drift.n_list, &t_grid, &WEIGHTED_DRIFT_CASES)?;
    output::write_csv(&ctx.out.join("it_upper.csv"), &it.rows)?;
    output::write_csv(&ctx.out.join("it_lower.csv"), &it.lower)?;
    let maxes: Vec<f64> = it.summary.iter().map(|s| s.max_ratio).collect();
    flags.push(Flag::new(
        "it_upper_spread",
        it.upper_spread < cfg.drift.spread_tolerance,
        format!("max ratios {}, spread {:.3} < {}", fmt_list(&maxes), it.upper_spread, cfg.drift.spread_tolerance),
    ));
    let mut wd = Vec::new();
    for rep in &it.weighted_drift {
        let e = rep.exponents;
        wd.extend(rep.rows.iter().map(|r: &BoundRow| WeightedDriftRow {
            a: e.a,
            b: e.b,
            p: e.p,
            n: r.n,
            t: r.t,
            value: r.value,
            bound: r.bound,
            ratio: r.ratio,
        }));
        let maxes: Vec<f64> = rep.summary.iter().map(|s| s.max_ratio).collect();
        flags.push(Flag::new(
            &weighted_drift_flag_name(e.a, e.b, e.p),
            rep.spread < cfg.drift.weighted_drift_tolerance,
            format!("max ratios {}, spread {:.3} < {}", fmt_list(&maxes), rep.spread, cfg.drift.weighted_drift_tolerance),
        ));
    }
    output::write_csv(&ctx.out.join("weighted_drift.csv"), &wd)?;

    marks.push(lap());

    // Moments
    let reports = moment_reports(&cfg.moments, ctx)?;
    let mut moment_rows = Vec::new();
    let mut trend_rows = Vec::new();
    for (name, rep) in &reports {
        moment_rows.extend(rep.rows.iter().map(|r| MomentCsvRow {
            statistic: name,
            n: r.n,
            trials: r.trials,
            mean: r.mean,
            std_error: r.std_error,
            median: r.median,
            q90: r.q90,
        }));
        trend_rows.push(TrendRow {
            statistic: name,
            slope: rep.slope,
            trend: rep.trend,
        });
        let flag = if *name == Statistic::PositiveControl.name() {
            Flag::new(
                &format!("{name}_growing"),
                rep.slope > GROWING_SLOPE,
                format!("slope {:.4} > {GROWING_SLOPE}", rep.slope),
            )
        } else {
            Flag::new(
                &format!("{name}_flat"),
                rep.slope.abs() < FLAT_SLOPE,
                format!("|slope| {:.4} < {FLAT_SLOPE}", rep.slope.abs()),
            )
        };
        flags.push(flag);
    }
    let q90: Vec<f64> = reports[0].1.rows.iter().map(|r| r.q90).collect();
    flags.push(Flag::new(
        "adversarial_mean_removed_q90_spread",
        stats::spread(&q90) < 2.0,
        format!("90th percentiles {}, spread {:.3} < 2", fmt_list(&q90), stats::spread(&q90)),
    ));
    output::write_csv(&ctx.out.join("moments.csv"), &moment_rows)?;
    output::write_csv(&ctx.out.join("trends.csv"), &trend_rows)?;

    marks.push(lap());

    // Partition of unity
    let part = DyadicPartition;
    let rows: Vec<PartitionRow> = (0..=1024)
        .map(|j| {
            let r = j as f64 / 16.0;
            PartitionRow {
                r,
                sum: (-1..=12).map(|l| part.chi_l(l, r)).sum(),
            }
        })
        .collect();
    let dev = rows.iter().map(|r| (r.sum - 1.0).abs()).fold(0.0, f64::max);
    flags.push(Flag::new("partition_of_unity", dev < 1e-12, format!("max |sum - 1| {dev:.2e}")));
    output::write_csv(&ctx.out.join("partition.csv"), &rows)?;

    let data = serde_json::json!({
        "ezt": { "upper_summary": ezt.upper_summary, "lower_summary": ezt.lower_summary },
        "it": { "summary": it.summary, "weighted_drift": it.weighted_drift.iter().map(|r| (r.exponents, &r.summary)).collect::<Vec<_>>() },
        "moments": trend_rows,
        "wall_ms": { "ezt": marks[0], "it": marks[1] - marks[0], "moments": marks[2] - marks[1] },
    });
    Summary::new("tables", ctx.seed, flags, data)
}
