//! `sample` and `solve`: single fields and single trajectories on disk.

use normflate::besov::holder_norm;
use normflate::correlation::compute_zt;
use normflate::gfs::{build_adversarial_pair, sample_control_pair, sample_e_valued, GfsSpec, TrialStreams};
use normflate::io::{load_field, save_field, SnapshotHeader};
use normflate::solver::{self, SolveConfig, Status};
use normflate::spectral::{SpectralField, TorusGrid};
use serde::Serialize;

use crate::config::{parse_algebra, PairChoice, SampleConfig, SolveSection};
use crate::output::{self, Flag, Summary};
use crate::{CliError, Context, Result};

/// `(X, Y)` for the configured pair; `Y` is absent for a single field.
pub fn sample_pair(cfg: &SampleConfig, seed: u64) -> Result<(SpectralField, Option<SpectralField>)> {
    if cfg.cutoff == 0 || cfg.components == 0 {
        return Err(CliError::Config("cutoff and components must be positive".into()));
    }
    let grid = TorusGrid::for_radius(cfg.dim, cfg.cutoff)?;
    let profile = cfg.profile.build(cfg.dim, cfg.cutoff as f64)?;
    let spec = GfsSpec::uniform(grid, profile, cfg.components);
    let streams = TrialStreams::new(seed, cfg.trial, cfg.components);
    Ok(match cfg.pair {
        PairChoice::Adversarial => {
            let (x, y) = build_adversarial_pair(&spec, cfg.a, cfg.b, &streams)?;
            (x, Some(y))
        }
        PairChoice::Control => {
            let (x, y) = sample_control_pair(&spec, &streams)?;
            (x, Some(y))
        }
        PairChoice::Single => (sample_e_valued(&spec, &streams.x_keys())?, None),
    })
}

#[derive(Serialize)]
struct SampleData {
    header: SnapshotHeader,
    files: Vec<String>,
    /// `Z_0` of `X^a`.
    z0: f64,
    holder_minus_half: f64,
}

pub fn run_sample(cfg: &SampleConfig, ctx: &Context) -> Result<Summary> {
    let (x, y) = sample_pair(cfg, ctx.seed)?;
    let mut files = vec!["x.gfsf".to_string()];
    save_field(&ctx.out.join("x.gfsf"), &x)?;
    let u0 = match &y {
        Some(y) => {
            save_field(&ctx.out.join("y.gfsf"), y)?;
            files.push("y.gfsf".into());
            &x + y
        }
        None => x.clone(),
    };
    save_field(&ctx.out.join("u0.gfsf"), &u0)?;
    files.push("u0.gfsf".into());
    let data = SampleData {
        header: SnapshotHeader::of(&x),
        files,
        z0: compute_zt(&x.component_field(cfg.a.min(x.components() - 1))?, 0.0),
        holder_minus_half: holder_norm(&u0, -0.5)?,
    };
    Summary::new("sample", ctx.seed, Vec::new(), data)
}

#[derive(Serialize)]
struct PathRow {
    t: f64,
    zero_mode_norm: f64,
    rhs_zero_mode_norm: f64,
    sup: f64,
}

/// One line of `trajectory.jsonl`, per snapshot.
#[derive(Serialize)]
struct SnapshotRecord {
    t: f64,
    zero_mode: Vec<f64>,
    sup: f64,
    holder_minus_half: f64,
}

#[derive(Serialize)]
struct SolveData {
    t_end: f64,
    steps: usize,
    status: Status,
    final_zero_mode: Vec<f64>,
    max_zero_mode: f64,
    snapshots: Vec<(f64, String)>,
}

pub fn run_solve(cfg: &SolveSection, sample: &SampleConfig, ctx: &Context) -> Result<Summary> {
    let u0 = match &cfg.input {
        Some(p) => load_field(p)?,
        None => {
            let (x, y) = sample_pair(sample, ctx.seed)?;
            y.map(|y| &x + &y).unwrap_or(x)
        }
    };
    let grid = u0.grid();
    let spec = solver::preset(&cfg.preset, grid.dim(), parse_algebra(&cfg.algebra)?)?;
    if spec.components != u0.components() {
        return Err(CliError::Config(format!(
            "preset `{}` has {} components, the initial datum has {}",
            cfg.preset,
            spec.components,
            u0.components()
        )));
    }
    let n = grid.half_width().max(2) as f64;
    let t_end = cfg.t_end.unwrap_or_else(|| n.ln().powf(-cfg.m_exponent));
    let mut solve = match cfg.steps {
        Some(steps) => SolveConfig::new(t_end, steps),
        None => SolveConfig::for_cutoff(t_end, n, cfg.step_constant),
    }
    .with_scheme(cfg.scheme);
    if !cfg.snapshot_times.is_empty() {
        solve = solve.with_snapshots(cfg.snapshot_times.clone());
    }
    solve.validate()?;
    let traj = solver::solve(&u0, &spec, &solve)?;
    let rows: Vec<PathRow> = (0..traj.path_times.len())
        .map(|j| PathRow {
            t: traj.path_times[j],
            zero_mode_norm: solver::norm(&traj.zero_mode_path[j]),
            rhs_zero_mode_norm: traj.rhs_zero_mode.get(j).map(|v| solver::norm(v)).unwrap_or(f64::NAN),
            sup: traj.sup_path.get(j).copied().unwrap_or(f64::NAN),
        })
        .collect();
    output::write_csv(&ctx.out.join("trajectory.csv"), &rows)?;
    let records = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .map(|(&t, u)| {
            Ok(SnapshotRecord {
                t,
                zero_mode: normflate::spectral::zero_mode(u)?,
                sup: normflate::spectral::synthesize(u).sup_norm(),
                holder_minus_half: holder_norm(u, -0.5)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    output::write_jsonl(&ctx.out.join("trajectory.jsonl"), &records)?;
    let mut snapshots = Vec::new();
    if cfg.save_snapshots {
        for (j, (t, u)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
            let name = format!("u_{j:03}.gfsf");
            save_field(&ctx.out.join(&name), u)?;
            snapshots.push((*t, name));
        }
    }
    let flags = vec![Flag::new(
        "completed",
        traj.completed(),
        match traj.status {
            Status::Completed => format!("reached t = {t_end:.4e} in {} steps", solve.steps),
            Status::BlewUp { t } => format!("blow-up at t = {t:.4e}"),
        },
    )];
    let data = SolveData {
        t_end,
        steps: solve.steps,
        status: traj.status,
        final_zero_mode: traj.final_zero_mode().to_vec(),
        max_zero_mode: traj.max_zero_mode(),
        snapshots,
    };
    Summary::new("solve", ctx.seed, flags, data)
}
