//! Zero-mode inflation runs: adversarial, control and self pairs solved to
//! `T = (log N)^{-M}`, with the remainder against the mean drift.

use std::time::Instant;

use normflate::besov::holder_norm;
use normflate::correlation::DriftPath;
use normflate::gfs::{build_adversarial_pair, sample_control_pair, GfsSpec, TrialStreams};
use normflate::solver::{self, asymmetry_witness_on, drift_direction, NonlinearitySpec, SolveConfig, Status, Witness};
use normflate::spectral::{SpectralField, TorusGrid};
use normflate::stats;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{parse_algebra, BasePoint, InflateConfig, PerturbConfig};
use crate::output::{self, fmt_list, Flag, Summary};
use crate::{CliError, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Adversarial,
    Control,
    SelfPair,
}

/// One line of the JSONL output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub arm: Arm,
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub epsilon: f64,
    pub status: String,
    pub blowup_time: Option<f64>,
    /// `sup_{t <= T} |Pi_0 u_t|`.
    pub sup_zero_mode: f64,
    /// `sup_{t <= T} |Pi_0 u_t - Pi_0 x|` for the base point `x`.
    pub sup_zero_shift: f64,
    /// `|I_T|` of the drift removed in the remainder.
    pub drift: f64,
    /// `sup_t |u_t - P_t u_0 - I_t|_{C^beta_hat}` over the sampled times.
    pub remainder: f64,
    /// `|u_0|_{C^eta}`.
    pub u0_holder: f64,
    /// `|u_0 - x|_{C^eta}`.
    pub distance: f64,
    pub wall_ms: f64,
}

/// Everything shared by the trials at one cutoff.
pub struct Setup {
    pub n: usize,
    pub t_end: f64,
    pub spec: NonlinearitySpec,
    pub witness: Witness,
    pub gfs: GfsSpec,
    pub drift: DriftPath,
    pub solve: SolveConfig,
    pub beta_hat: f64,
    pub eta: f64,
}

pub fn validate_n_list(n_list: &[usize], trials: usize) -> Result<()> {
    if n_list.is_empty() {
        return Err(CliError::Config("N list is empty".into()));
    }
    if n_list.iter().any(|&n| n < 2) {
        return Err(CliError::Config("every N must be at least 2".into()));
    }
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    Ok(())
}

impl Setup {
    pub fn new(cfg: &InflateConfig, n: usize) -> Result<Self> {
        let spec = solver::preset(&cfg.preset, cfg.dim, parse_algebra(&cfg.algebra)?)?;
        let witness = asymmetry_witness_on(&spec, cfg.axis).ok_or(normflate::Error::NoWitness)?;
        let grid = TorusGrid::for_radius(cfg.dim, n)?;
        let profile = cfg.profile.build(cfg.dim, n as f64)?;
        let gfs = GfsSpec::uniform(grid, profile.clone(), spec.components);
        let drift = DriftPath::new(&profile, cfg.dim, drift_direction(&spec, witness));
        let t_end = (n as f64).ln().powf(-cfg.m_exponent);
        let times: Vec<f64> = (0..cfg.remainder_times.max(1))
            .rev()
            .map(|j| t_end * 0.5f64.powi(j as i32))
            .collect();
        let solve = SolveConfig::for_cutoff(t_end, n as f64, cfg.step_constant)
            .with_scheme(cfg.scheme)
            .with_snapshots(times);
        solve.validate()?;
        Ok(Self {
            n,
            t_end,
            spec,
            witness,
            gfs,
            drift,
            solve,
            beta_hat: cfg.beta_hat,
            eta: cfg.eta,
        })
    }

    /// `(X, Y)` of one trial. All arms share `X` and every `Y^c` except the
    /// rotated component.
    pub fn pair(&self, arm: Arm, seed: u64, trial: u64) -> Result<(SpectralField, SpectralField)> {
        let streams = TrialStreams::new(seed, trial, self.spec.components);
        Ok(match arm {
            Arm::Adversarial => build_adversarial_pair(&self.gfs, self.witness.a, self.witness.b, &streams)?,
            Arm::Control => sample_control_pair(&self.gfs, &streams)?,
            Arm::SelfPair => {
                let (x, _) = sample_control_pair(&self.gfs, &streams)?;
                (x.clone(), x)
            }
        })
    }

    pub fn run_trial(
        &self,
        arm: Arm,
        seed: u64,
        trial: u64,
        epsilon: f64,
        base: Option<&SpectralField>,
    ) -> Result<ExperimentRecord> {
        let start = Instant::now();
        let (x, y) = self.pair(arm, seed, trial)?;
        let noise = &(&x + &y) * epsilon;
        let u0 = match base {
            Some(b) => b + &noise,
            None => noise.clone(),
        };
        let traj = solver::solve(&u0, &self.spec, &self.solve)?;
        let base_zero = match base {
            Some(b) => normflate::spectral::zero_mode(b)?,
            None => vec![0.0; u0.components()],
        };
        let sup_zero_shift = traj
            .zero_mode_path
            .iter()
            .map(|z| {
                let d: Vec<f64> = z.iter().zip(&base_zero).map(|(a, b)| a - b).collect();
                solver::norm(&d)
            })
            .fold(0.0, f64::max);
        let scale = epsilon * epsilon;
        let adversarial = arm == Arm::Adversarial;
        let remainder = solver::remainder(
            &traj,
            &u0,
            |t| {
                if adversarial {
                    self.drift.i(t).iter().map(|v| v * scale).collect()
                } else {
                    vec![0.0; u0.components()]
                }
            },
            self.beta_hat,
        )?;
        let (status, blowup_time) = match traj.status {
            Status::Completed => ("completed".to_string(), None),
            Status::BlewUp { t } => ("blew_up".to_string(), Some(t)),
        };
        Ok(ExperimentRecord {
            experiment: String::new(),
            arm,
            trial,
            seed,
            n: self.n,
            epsilon,
            status,
            blowup_time,
            sup_zero_mode: traj.max_zero_mode(),
            sup_zero_shift,
            drift: if adversarial { scale * self.drift.i_norm(self.t_end) } else { 0.0 },
            remainder: remainder.iter().map(|r| r.1).fold(0.0, f64::max),
            u0_holder: holder_norm(&u0, self.eta)?,
            distance: holder_norm(&noise, self.eta)?,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// Per-cutoff medians of an inflation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InflationRow {
    pub n: usize,
    pub t_end: f64,
    pub steps: usize,
    pub trials: usize,
    pub adversarial_median: f64,
    pub control_median: f64,
    pub self_median: Option<f64>,
    pub ratio: f64,
    pub drift: f64,
    pub adversarial_remainder_median: f64,
    pub control_remainder_median: f64,
    pub self_remainder_median: Option<f64>,
    pub remainder_over_drift: f64,
    pub blowups: usize,
}

pub struct InflationOutcome {
    pub records: Vec<ExperimentRecord>,
    pub rows: Vec<InflationRow>,
    pub inflation_flags: Vec<Flag>,
    pub remainder_flags: Vec<Flag>,
}

fn median_of(records: &[ExperimentRecord], f: impl Fn(&ExperimentRecord) -> f64) -> f64 {
    let v: Vec<f64> = records.iter().map(f).collect();
    stats::median(&v)
}

fn run_arm(setup: &Setup, arm: Arm, trials: usize, ctx: &Context, experiment: &str) -> Result<Vec<ExperimentRecord>> {
    ctx.map_trials(trials, |trial| {
        setup.run_trial(arm, ctx.seed, trial, 1.0, None).map(|mut r| {
            r.experiment = experiment.into();
            r
        })
    })
    .into_iter()
    .collect()
}

pub fn run_inflation(cfg: &InflateConfig, ctx: &Context, experiment: &str) -> Result<InflationOutcome> {
    validate_n_list(&cfg.n_list, cfg.trials)?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let setup = Setup::new(cfg, n)?;
        let adv = run_arm(&setup, Arm::Adversarial, cfg.trials, ctx, experiment)?;
        let ctl = run_arm(&setup, Arm::Control, cfg.trials, ctx, experiment)?;
        let slf = if cfg.self_arm {
            Some(run_arm(&setup, Arm::SelfPair, cfg.trials, ctx, experiment)?)
        } else {
            None
        };
        let adversarial_median = median_of(&adv, |r| r.sup_zero_mode);
        let control_median = median_of(&ctl, |r| r.sup_zero_mode);
        let drift = setup.drift.i_norm(setup.t_end);
        rows.push(InflationRow {
            n,
            t_end: setup.t_end,
            steps: setup.solve.steps,
            trials: cfg.trials,
            adversarial_median,
            control_median,
            self_median: slf.as_ref().map(|s| median_of(s, |r| r.sup_zero_mode)),
            ratio: adversarial_median / control_median,
            drift,
            adversarial_remainder_median: median_of(&adv, |r| r.remainder),
            control_remainder_median: median_of(&ctl, |r| r.remainder),
            self_remainder_median: slf.as_ref().map(|s| median_of(s, |r| r.remainder)),
            remainder_over_drift: median_of(&adv, |r| r.remainder / drift),
            blowups: adv.iter().chain(&ctl).chain(slf.iter().flatten()).filter(|r| r.blowup_time.is_some()).count(),
        });
        records.extend(adv);
        records.extend(ctl);
        records.extend(slf.into_iter().flatten());
    }
    let col = |f: fn(&InflationRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let adv = col(|r| r.adversarial_median);
    let ctl = col(|r| r.control_median);
    let last_ratio = rows.last().map(|r| r.ratio).unwrap_or(f64::NAN);
    let inflation_flags = vec![
        Flag::new("adversarial_increasing", output::increasing(&adv), format!("medians {}", fmt_list(&adv))),
        Flag::new(
            "control_flat",
            stats::spread(&ctl) < cfg.control_tolerance,
            format!("medians {}, spread {:.3} < {}", fmt_list(&ctl), stats::spread(&ctl), cfg.control_tolerance),
        ),
        Flag::new(
            "ratio_at_largest_n",
            last_ratio > cfg.ratio_threshold,
            format!("adversarial/control {last_ratio:.3} > {}", cfg.ratio_threshold),
        ),
    ];
    let rem = col(|r| r.adversarial_remainder_median);
    let drift = col(|r| r.drift);
    let rel = col(|r| r.remainder_over_drift);
    let mut remainder_flags = vec![
        Flag::new(
            "remainder_flat",
            stats::spread(&rem) < cfg.remainder_tolerance,
            format!("medians {}, spread {:.3} < {}", fmt_list(&rem), stats::spread(&rem), cfg.remainder_tolerance),
        ),
        Flag::new("drift_growing", output::increasing(&drift), format!("|I_T| {}", fmt_list(&drift))),
        Flag::new(
            "remainder_over_drift_decreasing",
            output::decreasing(&rel),
            format!("medians {}", fmt_list(&rel)),
        ),
    ];
    if cfg.self_arm {
        let s: Vec<f64> = rows.iter().filter_map(|r| r.self_remainder_median).collect();
        remainder_flags.push(Flag::new(
            "self_remainder_flat",
            stats::spread(&s) < cfg.remainder_tolerance,
            format!("medians {}, spread {:.3}", fmt_list(&s), stats::spread(&s)),
        ));
    }
    Ok(InflationOutcome {
        records,
        rows,
        inflation_flags,
        remainder_flags,
    })
}

pub fn run_inflate(cfg: &InflateConfig, ctx: &Context) -> Result<Summary> {
    let out = run_inflation(cfg, ctx, "inflate")?;
    output::write_jsonl(&ctx.out.join("inflate_records.jsonl"), &out.records)?;
    output::write_csv(&ctx.out.join("inflate.csv"), &out.rows)?;
    let flags = out.inflation_flags.into_iter().chain(out.remainder_flags).collect();
    Summary::new("inflate", ctx.seed, flags, &out.rows)
}

pub fn run_remainder(cfg: &InflateConfig, ctx: &Context) -> Result<Summary> {
    let mut cfg = cfg.clone();
    cfg.self_arm = true;
    let out = run_inflation(&cfg, ctx, "remainder")?;
    output::write_jsonl(&ctx.out.join("remainder_records.jsonl"), &out.records)?;
    output::write_csv(&ctx.out.join("remainder.csv"), &out.rows)?;
    Summary::new("remainder", ctx.seed, out.remainder_flags, &out.rows)
}

pub fn base_point(base: &BasePoint, grid: TorusGrid, components: usize) -> Result<SpectralField> {
    match base {
        BasePoint::Zero => Ok(SpectralField::zeros(grid, components)),
        BasePoint::Constant { value } => {
            if value.len() != components {
                return Err(CliError::Config(format!(
                    "base constant has {} entries, the equation has {components} components",
                    value.len()
                )));
            }
            Ok(SpectralField::constant(grid, value))
        }
        BasePoint::Mode { component, k, amplitude } => {
            if *component >= components {
                return Err(normflate::Error::ComponentOutOfRange {
                    component: *component,
                    components,
                }
                .into());
            }
            let mode = SpectralField::real_mode(grid, k, Complex64::new(amplitude / 2.0, 0.0))?;
            let mut f = SpectralField::zeros(grid, components);
            f.set_component(*component, &mode)?;
            Ok(f)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbRow {
    pub epsilon: f64,
    pub n: usize,
    pub trials: usize,
    pub distance_median: f64,
    pub sup_zero_mode_median: f64,
    pub sup_zero_shift_median: f64,
    pub blowups: usize,
}

pub fn run_perturb(cfg: &PerturbConfig, inflate: &InflateConfig, ctx: &Context) -> Result<Summary> {
    validate_n_list(&cfg.n_list, cfg.trials)?;
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(CliError::Config("epsilons must be nonempty and positive".into()));
    }
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for &eps in &cfg.epsilons {
        let mut shifts = Vec::new();
        for &n in &cfg.n_list {
            let setup = Setup::new(inflate, n)?;
            let base = base_point(&cfg.base, setup.gfs.grid, setup.spec.components)?;
            let recs: Vec<ExperimentRecord> = ctx
                .map_trials(cfg.trials, |trial| {
                    setup.run_trial(Arm::Adversarial, ctx.seed, trial, eps, Some(&base)).map(|mut r| {
                        r.experiment = "perturb".into();
                        r
                    })
                })
                .into_iter()
                .collect::<Result<_>>()?;
            let row = PerturbRow {
                epsilon: eps,
                n,
                trials: cfg.trials,
                distance_median: median_of(&recs, |r| r.distance),
                sup_zero_mode_median: median_of(&recs, |r| r.sup_zero_mode),
                sup_zero_shift_median: median_of(&recs, |r| r.sup_zero_shift),
                blowups: recs.iter().filter(|r| r.blowup_time.is_some()).count(),
            };
            shifts.push(row.sup_zero_shift_median);
            rows.push(row);
            records.extend(recs);
        }
        flags.push(Flag::new(
            &format!("shift_increasing_eps_{eps}"),
            output::increasing(&shifts),
            format!("medians {}", fmt_list(&shifts)),
        ));
    }
    output::write_jsonl(&ctx.out.join("perturb_records.jsonl"), &records)?;
    output::write_csv(&ctx.out.join("perturb.csv"), &rows)?;
    Summary::new("perturb", ctx.seed, flags, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> InflateConfig {
        InflateConfig {
            n_list: vec![8, 16],
            trials: 3,
            ..InflateConfig::default()
        }
    }

    #[test]
    fn arms_share_x() {
        let s = Setup::new(&small(), 8).unwrap();
        let (xa, ya) = s.pair(Arm::Adversarial, 3, 1).unwrap();
        let (xc, yc) = s.pair(Arm::Control, 3, 1).unwrap();
        assert_eq!(xa, xc);
        assert_ne!(ya.component(1), yc.component(1));
    }

    #[test]
    fn trial_replay_is_identical() {
        let s = Setup::new(&small(), 8).unwrap();
        let mut a = s.run_trial(Arm::Adversarial, 9, 2, 1.0, None).unwrap();
        let mut b = s.run_trial(Arm::Adversarial, 9, 2, 1.0, None).unwrap();
        a.wall_ms = 0.0;
        b.wall_ms = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_b_is_a_configuration_error() {
        let mut cfg = small();
        cfg.preset = "zero".into();
        assert!(matches!(Setup::new(&cfg, 8), Err(CliError::Core(normflate::Error::NoWitness))));
    }

    #[test]
    fn base_points() {
        let g = TorusGrid::for_radius(1, 4).unwrap();
        let c = base_point(&BasePoint::Constant { value: vec![1.0, 2.0] }, g, 2).unwrap();
        assert_eq!(normflate::spectral::zero_mode(&c).unwrap(), vec![1.0, 2.0]);
        assert!(base_point(&BasePoint::Constant { value: vec![1.0] }, g, 2).is_err());
        let m = base_point(&BasePoint::Mode { component: 1, k: vec![2], amplitude: 3.0 }, g, 2).unwrap();
        assert!((m.max_abs() - 1.5).abs() < 1e-15);
    }
}
