//! The resonant zero-mode quantities of rotated pairs and their bounds.
//!
//! For a real scalar GFS `X`, `Z_t = sum_{n_1 > 0} 2 exp(-2|n|^2 t) n_1 |X_n|^2`
//! is the zero mode of `P_t R X * d_1 P_t X`. Its expectation, integral and
//! variance only depend on the shell sums `S1(r2) = sum n_1` and
//! `S2(r2) = sum n_1^2` over `{n : n_1 > 0, |n|^2 = r2}`, which are tabulated
//! once per dimension and cutoff.

use serde::{Deserialize, Serialize};

use crate::besov::holder_norm;
use crate::error::{Error, Result};
use crate::gfs::{build_adversarial_pair, sample_control_pair, GfsSpec, TrialStreams, VarianceProfile};
use crate::quadrature::Composite;
use crate::spectral::{heat_semigroup, partial_derivative, pointwise_product, remove_mean, SpectralField, TorusGrid};
use crate::stats::{self, Trend};

/// Regularity exponents `delta, beta, beta_hat = beta + 2(1 - delta), eta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
}

impl ParameterSet {
    pub fn new(delta: f64, beta: f64, eta: f64) -> Self {
        Self { delta, beta, eta }
    }

    pub fn beta_hat(&self) -> f64 {
        self.beta + 2.0 * (1.0 - self.delta)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let lo = 1.0 - dim as f64 / 4.0;
        let bh = self.beta_hat();
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.delta > lo && self.delta < 1.0) {
            return fail(format!("delta = {} must lie in ({lo}, 1)", self.delta));
        }
        if !(self.beta > -1.0 && self.beta < 0.0) {
            return fail(format!("beta = {} must lie in (-1, 0)", self.beta));
        }
        if !(bh > -0.5 && bh < 0.0) {
            return fail(format!("beta_hat = {bh} must lie in (-1/2, 0)"));
        }
        if !(self.eta > -2.0 / 3.0 && self.eta < -0.5) {
            return fail(format!("eta = {} must lie in (-2/3, -1/2)", self.eta));
        }
        if !(self.eta + bh > -1.0) {
            return fail(format!("eta + beta_hat = {} must exceed -1", self.eta + bh));
        }
        Ok(())
    }
}

/// `Z_t` of a real scalar field.
pub fn compute_zt(xa: &SpectralField, t: f64) -> f64 {
    let mut z = 0.0;
    let c = xa.component(0);
    xa.grid().for_each_mode(|idx, k| {
        if k[0] > 0 {
            let k2: i64 = k.iter().map(|v| v * v).sum();
            z += 2.0 * (-2.0 * k2 as f64 * t).exp() * k[0] as f64 * c[idx].norm_sqr();
        }
    });
    z
}

/// `Z_t` for many `t` at once: the field is first reduced to shell weights.
pub fn compute_zt_many(xa: &SpectralField, times: &[f64]) -> Vec<f64> {
    let grid = xa.grid();
    let max_r2 = (grid.half_width().pow(2) * grid.dim() as i64) as usize;
    let mut w = vec![0.0; max_r2 + 1];
    let c = xa.component(0);
    grid.for_each_mode(|idx, k| {
        if k[0] > 0 {
            let k2: i64 = k.iter().map(|v| v * v).sum();
            w[k2 as usize] += 2.0 * k[0] as f64 * c[idx].norm_sqr();
        }
    });
    let shells: Vec<(f64, f64)> = w
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(r2, v)| (r2 as f64, *v))
        .collect();
    times
        .iter()
        .map(|t| shells.iter().map(|(r2, v)| (-2.0 * r2 * t).exp() * v).sum())
        .collect()
}

/// Number of points of `Z^dims` on each sphere `|n|^2 = m`, `m <= max_r2`.
fn lattice_counts(dims: usize, max_r2: usize) -> Vec<f64> {
    let mut c = vec![0.0; max_r2 + 1];
    c[0] = 1.0;
    for _ in 0..dims {
        let mut next = vec![0.0; max_r2 + 1];
        let mut j = 0usize;
        while j * j <= max_r2 {
            let mult = if j == 0 { 1.0 } else { 2.0 };
            for m in j * j..=max_r2 {
                next[m] += mult * c[m - j * j];
            }
            j += 1;
        }
        c = next;
    }
    c
}

/// Shell sums over `{n : n_1 > 0, |n| <= cutoff}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellSums {
    pub r2: Vec<i64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

impl ShellSums {
    pub fn new(dim: usize, cutoff: f64) -> Self {
        let max_r2 = (cutoff * cutoff + 1e-9).floor() as usize;
        let rest = lattice_counts(dim - 1, max_r2);
        let mut s1 = vec![0.0; max_r2 + 1];
        let mut s2 = vec![0.0; max_r2 + 1];
        let mut n1 = 1usize;
        while n1 * n1 <= max_r2 {
            let x = n1 as f64;
            for m in 0..=max_r2 - n1 * n1 {
                let c = rest[m];
                if c != 0.0 {
                    s1[n1 * n1 + m] += x * c;
                    s2[n1 * n1 + m] += x * x * c;
                }
            }
            n1 += 1;
        }
        let mut out = Self {
            r2: Vec::new(),
            s1: Vec::new(),
            s2: Vec::new(),
        };
        for r2 in 1..=max_r2 {
            if s1[r2] != 0.0 {
                out.r2.push(r2 as i64);
                out.s1.push(s1[r2]);
                out.s2.push(s2[r2]);
            }
        }
        out
    }
}

/// Exact moments of `Z_t` under a variance profile.
#[derive(Clone, Debug)]
pub struct ExpectedZ {
    r2: Vec<f64>,
    /// `2 sigma^2 S1` per shell.
    a: Vec<f64>,
    /// `4 sigma^4 S2` per shell.
    v: Vec<f64>,
    /// `tail[j] = sum_{i >= j} a_i / (2 r2_i)`.
    tail: Vec<f64>,
    /// `moments[k] = sum a_i r2_i^k`, for the short-time series.
    moments: Vec<f64>,
}

/// Terms of the short-time series, used while `2 r2_max t <= SERIES_RADIUS`.
const SERIES_TERMS: usize = 24;
const SERIES_RADIUS: f64 = 0.5;

/// Past this exponent `1 - exp(-x)` rounds to exactly one.
const SATURATED: f64 = 40.0;

impl ExpectedZ {
    pub fn new(profile: &VarianceProfile, dim: usize) -> Self {
        let shells = ShellSums::new(dim, profile.cutoff);
        let mut out = Self {
            r2: Vec::new(),
            a: Vec::new(),
            v: Vec::new(),
            tail: Vec::new(),
            moments: Vec::new(),
        };
        for i in 0..shells.r2.len() {
            let s = profile.variance_sq(shells.r2[i]);
            if s == 0.0 {
                continue;
            }
            out.r2.push(shells.r2[i] as f64);
            out.a.push(2.0 * s * shells.s1[i]);
            out.v.push(4.0 * s * s * shells.s2[i]);
        }
        out.tail = vec![0.0; out.r2.len() + 1];
        for j in (0..out.r2.len()).rev() {
            out.tail[j] = out.tail[j + 1] + out.a[j] / (2.0 * out.r2[j]);
        }
        out.moments = (0..SERIES_TERMS)
            .map(|k| out.r2.iter().zip(&out.a).map(|(r2, a)| a * r2.powi(k as i32)).sum())
            .collect();
        out
    }

    /// First shell index with `2 r2 t >= SATURATED`.
    fn saturation_index(&self, t: f64) -> usize {
        self.r2.partition_point(|r2| 2.0 * r2 * t < SATURATED)
    }

    /// `E Z_t = sum 2 exp(-2 n^2 t) n_1 sigma^2(n)`.
    pub fn mean(&self, t: f64) -> f64 {
        self.r2.iter().zip(&self.a).map(|(r2, a)| a * (-2.0 * r2 * t).exp()).sum()
    }

    /// `int_0^t E Z_s ds`, integrated mode by mode.
    pub fn integral(&self, t: f64) -> f64 {
        let r2_max = self.r2.last().copied().unwrap_or(0.0);
        if 2.0 * r2_max * t <= SERIES_RADIUS {
            // (1 - e^{-2 r2 t}) / (2 r2) = sum_{k>=1} (-1)^{k+1} (2t)^k r2^{k-1} / (2 k!)
            let mut coef = 1.0;
            let mut total = 0.0;
            for k in 1..=SERIES_TERMS {
                coef *= 2.0 * t / k as f64;
                let term = coef * self.moments[k - 1];
                total += if k % 2 == 1 { term } else { -term };
            }
            return 0.5 * total;
        }
        let j = self.saturation_index(t);
        let head: f64 = self.r2[..j]
            .iter()
            .zip(&self.a)
            .map(|(r2, a)| a * -(-2.0 * r2 * t).exp_m1() / (2.0 * r2))
            .sum();
        head + self.tail[j]
    }

    /// `Var Z_t = sum 4 exp(-4 n^2 t) n_1^2 sigma^4(n)`.
    pub fn variance(&self, t: f64) -> f64 {
        self.r2.iter().zip(&self.v).map(|(r2, v)| v * (-4.0 * r2 * t).exp()).sum()
    }
}

/// `E Z_t` for one profile.
pub fn expected_zt(profile: &VarianceProfile, dim: usize, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(ExpectedZ::new(profile, dim).mean(t))
}

/// Deterministic mean forcing of the zero mode by a rotated pair and its
/// time integral: `H_t = -direction E Z_t` and `I_t = int_0^t H_s ds`.
///
/// The sign is that of `Pi_0 B(P_t (X + Y), D P_t (X + Y))`, whose resonant
/// part equals `-direction Z_t`, so that `u_t - P_t u_0 - I_t` stays centered.
#[derive(Clone, Debug)]
pub struct DriftPath {
    pub direction: Vec<f64>,
    pub expected: ExpectedZ,
}

impl DriftPath {
    pub fn new(profile: &VarianceProfile, dim: usize, direction: Vec<f64>) -> Self {
        Self {
            direction,
            expected: ExpectedZ::new(profile, dim),
        }
    }

    pub fn h(&self, t: f64) -> Vec<f64> {
        let z = self.expected.mean(t);
        self.direction.iter().map(|d| -d * z).collect()
    }

    pub fn i(&self, t: f64) -> Vec<f64> {
        let z = self.expected.integral(t);
        self.direction.iter().map(|d| -d * z).collect()
    }

    pub fn i_norm(&self, t: f64) -> f64 {
        crate::solver::norm(&self.i(t))
    }
}

/// `I_t` for one profile and direction.
pub fn drift_i(profile: &VarianceProfile, dim: usize, direction: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(DriftPath::new(profile, dim, direction.to_vec()).i(t))
}

/// One row of a bound table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Per-cutoff extremes of a ratio table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub n: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EztReport {
    pub upper: Vec<BoundRow>,
    pub lower: Vec<BoundRow>,
    pub upper_summary: Vec<RatioSummary>,
    pub lower_summary: Vec<RatioSummary>,
    /// `max/min` across N of the per-N maximum upper ratio.
    pub upper_spread: f64,
    /// `max/min` across N of the per-N minimum lower ratio.
    pub lower_spread: f64,
}

impl EztReport {
    pub fn min_lower(&self) -> f64 {
        self.lower_summary.iter().map(|s| s.min_ratio).fold(f64::INFINITY, f64::min)
    }
}

fn summarize(rows: &[BoundRow], n_list: &[usize]) -> Vec<RatioSummary> {
    n_list
        .iter()
        .filter_map(|&n| {
            let r: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.ratio).collect();
            (!r.is_empty()).then(|| RatioSummary {
                n,
                max_ratio: r.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                min_ratio: r.iter().cloned().fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

fn spread_of(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        f64::NAN
    } else {
        stats::spread(&v)
    }
}

/// Ratios `E Z_t / (N^2 ^ t^-1)` everywhere on the grid and
/// `E Z_t t |log t| log|log t|` on the region `N > t^{-1/2}`, `t < 1/e`.
/// `profile` supplies the shape; its cutoff is replaced by each `N`.
pub fn verify_ezt_bounds(profile: &VarianceProfile, dim: usize, n_list: &[usize], t_grid: &[f64]) -> Result<EztReport> {
    if n_list.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty N list or t grid".into()));
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &n in n_list {
        let ez = ExpectedZ::new(&profile.clone().with_cutoff(n as f64), dim);
        for &t in t_grid {
            if !(t > 0.0) {
                return Err(Error::NegativeTime(t));
            }
            let value = ez.mean(t);
            let bound = ((n * n) as f64).min(1.0 / t);
            upper.push(BoundRow { n, t, value, bound, ratio: value / bound });
            if (n as f64) > t.powf(-0.5) && t < (-1.0f64).exp() {
                let l = t.ln().abs();
                let lower_bound = 1.0 / (t * l * l.ln());
                lower.push(BoundRow { n, t, value, bound: lower_bound, ratio: value / lower_bound });
            }
        }
    }
    let upper_summary = summarize(&upper, n_list);
    let lower_summary = summarize(&lower, n_list);
    if lower_summary.len() != n_list.len() {
        return Err(Error::InvalidParameter(
            "t grid has no point with N > t^{-1/2} for some N".into(),
        ));
    }
    Ok(EztReport {
        upper_spread: spread_of(upper_summary.iter().map(|s| s.max_ratio)),
        lower_spread: spread_of(lower_summary.iter().map(|s| s.min_ratio)),
        upper,
        lower,
        upper_summary,
        lower_summary,
    })
}

/// Exponents of a weighted time integral `int_0^t (t-s)^a |I_s|^p s^b ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDriftExponents {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

pub const WEIGHTED_DRIFT_CASES: [WeightedDriftExponents; 2] = [
    WeightedDriftExponents { a: -0.5, b: -0.5, p: 1.0 },
    WeightedDriftExponents { a: 0.0, b: -0.75, p: 3.0 },
];

/// `int_0^t (t-s)^a f(s) s^b ds` for `a, b > -1` on graded panels: each half
/// of `[0, t]` is mapped so the endpoint power becomes a constant weight,
/// then split into `panels` geometrically shrinking panels toward the
/// singular end, each with an `order`-point Gauss rule.
pub fn singular_integral(
    t: f64,
    a: f64,
    b: f64,
    f: impl Fn(f64) -> f64,
    order: usize,
    panels: usize,
) -> Result<f64> {
    if a <= -1.0 || b <= -1.0 {
        return Err(Error::InvalidParameter(format!("exponents a = {a}, b = {b} must exceed -1")));
    }
    let rule = Composite::new(order, 1);
    let half = t / 2.0;
    let graded = |g: &dyn Fn(f64) -> f64| {
        let mut total = 0.0;
        let mut hi = 1.0;
        for j in 0..panels {
            let lo = if j + 1 == panels { 0.0 } else { hi / 2.0 };
            total += rule.integrate(lo, hi, g);
            hi = lo;
        }
        total
    };
    // s = half * v^{1/(b+1)} on [0, t/2]; s^b ds = half^{b+1}/(b+1) dv.
    let left = graded(&|v: f64| {
        let s = half * v.powf(1.0 / (b + 1.0));
        (t - s).powf(a) * f(s)
    }) * half.powf(b + 1.0)
        / (b + 1.0);
    // s = t - half * w^{1/(a+1)} on [t/2, t].
    let right = graded(&|w: f64| {
        let s = t - half * w.powf(1.0 / (a + 1.0));
        s.powf(b) * f(s)
    }) * half.powf(a + 1.0)
        / (a + 1.0);
    Ok(left + right)
}

/// Quadrature size used for the drift integrals: 25 panels of 20 nodes on
/// each half, 1000 nodes in total.
pub const WEIGHTED_DRIFT_ORDER: usize = 20;
pub const WEIGHTED_DRIFT_PANELS: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDriftReport {
    pub exponents: WeightedDriftExponents,
    pub rows: Vec<BoundRow>,
    pub summary: Vec<RatioSummary>,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItReport {
    pub rows: Vec<BoundRow>,
    pub summary: Vec<RatioSummary>,
    /// `max/min` across N of the per-N maximum ratio.
    pub upper_spread: f64,
    /// Rows of the lower bound `log log log N - log log log t^{-1}`, on
    /// `t < e^{-e}` and `N > t^{-1/2}` where it is positive.
    pub lower: Vec<BoundRow>,
    pub weighted_drift: Vec<WeightedDriftReport>,
}

/// `(N^2 t) ^ 1 + log((N^2 t) v 1)`.
pub fn i_upper_bound(n: usize, t: f64) -> f64 {
    let x = (n * n) as f64 * t;
    x.min(1.0) + x.max(1.0).ln()
}

fn lll(x: f64) -> f64 {
    x.ln().ln().ln()
}

/// Drift ratio tables against the upper bound, the triple-log lower bound
/// where it is meaningful, and the weighted integrals of `|I|`.
pub fn verify_it_bounds(
    profile: &VarianceProfile,
    dim: usize,
    direction: &[f64],
    n_list: &[usize],
    t_grid: &[f64],
    cases: &[WeightedDriftExponents],
) -> Result<ItReport> {
    if n_list.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty N list or t grid".into()));
    }
    let mut rows = Vec::new();
    let mut lower = Vec::new();
    let mut wd: Vec<Vec<BoundRow>> = vec![Vec::new(); cases.len()];
    for &n in n_list {
        let drift = DriftPath::new(&profile.clone().with_cutoff(n as f64), dim, direction.to_vec());
        for &t in t_grid {
            if !(t > 0.0) {
                return Err(Error::NegativeTime(t));
            }
            let value = drift.i_norm(t);
            let bound = i_upper_bound(n, t);
            rows.push(BoundRow { n, t, value, bound, ratio: value / bound });
            let nf = n as f64;
            if t < (-std::f64::consts::E).exp() && nf > t.powf(-0.5) && nf.ln().ln() > 1.0 {
                let lb = lll(nf) - lll(1.0 / t);
                if lb > 0.0 {
                    lower.push(BoundRow { n, t, value, bound: lb, ratio: value / lb });
                }
            }
            for (case, out) in cases.iter().zip(wd.iter_mut()) {
                let v = singular_integral(
                    t,
                    case.a,
                    case.b,
                    |s| drift.i_norm(s).powf(case.p),
                    WEIGHTED_DRIFT_ORDER,
                    WEIGHTED_DRIFT_PANELS,
                )?;
                let bound = t.powf(case.a + case.b + 1.0) * nf.ln().powf(case.p);
                out.push(BoundRow { n, t, value: v, bound, ratio: v / bound });
            }
        }
    }
    let summary = summarize(&rows, n_list);
    let weighted_drift = cases
        .iter()
        .zip(wd)
        .map(|(c, rows)| {
            let summary = summarize(&rows, n_list);
            WeightedDriftReport {
                exponents: *c,
                spread: spread_of(summary.iter().map(|s| s.max_ratio)),
                rows,
                summary,
            }
        })
        .collect();
    Ok(ItReport {
        upper_spread: spread_of(summary.iter().map(|s| s.max_ratio)),
        summary,
        rows,
        lower,
        weighted_drift,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `Y^b = R X^a`.
    Adversarial,
    /// `Y` independent of `X`.
    Control,
    /// `Y = X`.
    SelfPair,
}

/// Setup of the Monte Carlo moment experiments on scalar components
/// `X = X^a` and `Y = Y^b` (`a = 0`, `b = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct MomentConfig {
    pub dim: usize,
    /// Profile shape; the cutoff is replaced by each `N`.
    pub profile: VarianceProfile,
    pub params: ParameterSet,
    pub axis: usize,
    pub t_grid: Vec<f64>,
    pub master_seed: u64,
}

impl MomentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate(self.dim)?;
        self.validate_grid()
    }

    /// The centered `Z` statistic only constrains `delta > 1 - d/4`.
    pub fn validate_z(&self) -> Result<()> {
        let lo = 1.0 - self.dim as f64 / 4.0;
        if !(self.params.delta > lo && self.params.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must lie in ({lo}, 1)",
                self.params.delta
            )));
        }
        self.validate_grid()
    }

    fn validate_grid(&self) -> Result<()> {
        if self.axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis: self.axis, dim: self.dim });
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidParameter("t grid must be nonempty and positive".into()));
        }
        Ok(())
    }

    fn spec(&self, n: usize) -> Result<GfsSpec> {
        let grid = TorusGrid::for_radius(self.dim, n)?;
        Ok(GfsSpec::uniform(grid, self.profile.clone().with_cutoff(n as f64), 2))
    }
}

/// `(X^a, Y^b)` of one trial, embedded in a band twice as wide so that
/// their products are exact.
pub fn trial_pair(cfg: &MomentConfig, n: usize, kind: PairKind, trial: u64) -> Result<(SpectralField, SpectralField)> {
    let spec = cfg.spec(n)?;
    let streams = TrialStreams::new(cfg.master_seed, trial, 2);
    let (x, y) = match kind {
        PairKind::Adversarial => build_adversarial_pair(&spec, 0, 1, &streams)?,
        PairKind::Control | PairKind::SelfPair => sample_control_pair(&spec, &streams)?,
    };
    let modes = 4 * n + 1;
    let xa = x.component_field(0)?.resized(modes)?;
    let yb = match kind {
        PairKind::SelfPair => xa.clone(),
        _ => y.component_field(1)?.resized(modes)?,
    };
    Ok((xa, yb))
}

/// `sup_t t^delta |pi(P_t X d_i P_t Y)|_{C^beta}` with `pi = pi_0` (mean
/// removed) or the identity.
pub fn decorrelated_statistic(
    cfg: &MomentConfig,
    n: usize,
    kind: PairKind,
    mean_removed: bool,
    trial: u64,
) -> Result<f64> {
    let (x, y) = trial_pair(cfg, n, kind, trial)?;
    let mut sup = 0.0f64;
    for &t in &cfg.t_grid {
        let px = heat_semigroup(&x, t)?;
        let dpy = partial_derivative(&heat_semigroup(&y, t)?, cfg.axis)?;
        let mut prod = pointwise_product(&px, &dpy)?;
        if mean_removed {
            prod = remove_mean(&prod);
        }
        sup = sup.max(t.powf(cfg.params.delta) * holder_norm(&prod, cfg.params.beta)?);
    }
    Ok(sup)
}

/// `sup_t t^delta |Z_t - E Z_t|` for the `X^a` sample of one trial.
pub fn z_statistic(cfg: &MomentConfig, n: usize, ez: &ExpectedZ, trial: u64) -> Result<f64> {
    let (x, _) = trial_pair(cfg, n, PairKind::Control, trial)?;
    let z = compute_zt_many(&x, &cfg.t_grid);
    Ok(cfg
        .t_grid
        .iter()
        .zip(z)
        .map(|(t, z)| t.powf(cfg.params.delta) * (z - ez.mean(*t)).abs())
        .fold(0.0, f64::max))
}

/// Distribution of one statistic at one cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
    pub q90: f64,
}

impl MomentRow {
    pub fn from_samples(n: usize, samples: &[f64]) -> Self {
        Self {
            n,
            trials: samples.len(),
            mean: stats::mean(samples),
            std_error: if samples.len() > 1 { stats::std_error(samples) } else { 0.0 },
            median: stats::median(samples),
            q90: stats::quantile(samples, 0.9),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// Slope of `log mean` against `log N`.
    pub slope: f64,
    pub trend: Trend,
}

impl MomentReport {
    pub fn from_rows(rows: Vec<MomentRow>) -> Self {
        let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let m: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        let slope = if rows.len() > 1 { stats::log_log_slope(&n, &m) } else { f64::NAN };
        Self {
            rows,
            slope,
            trend: Trend::classify(slope),
        }
    }
}

/// Sequential driver for the pair statistic.
pub fn moment_experiment_decorrelated(
    cfg: &MomentConfig,
    kind: PairKind,
    mean_removed: bool,
    trials: usize,
    n_list: &[usize],
) -> Result<MomentReport> {
    cfg.validate()?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let s = (0..trials as u64)
                .map(|trial| decorrelated_statistic(cfg, n, kind, mean_removed, trial))
                .collect::<Result<Vec<_>>>()?;
            Ok(MomentRow::from_samples(n, &s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport::from_rows(rows))
}

/// Sequential driver for the centered `Z` statistic.
pub fn moment_experiment_z(cfg: &MomentConfig, trials: usize, n_list: &[usize]) -> Result<MomentReport> {
    cfg.validate_z()?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let ez = ExpectedZ::new(&cfg.profile.clone().with_cutoff(n as f64), cfg.dim);
            let s = (0..trials as u64)
                .map(|trial| z_statistic(cfg, n, &ez, trial))
                .collect::<Result<Vec<_>>>()?;
            Ok(MomentRow::from_samples(n, &s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parameter_constraints() {
        assert!(ParameterSet::new(0.8, -0.6, -0.6).validate(1).is_ok());
        assert!((ParameterSet::new(0.8, -0.6, -0.6).beta_hat() + 0.2).abs() < 1e-15);
        assert!(ParameterSet::new(0.7, -0.6, -0.6).validate(1).is_err());
        assert!(ParameterSet::new(0.8, -0.1, -0.6).validate(1).is_err());
        assert!(ParameterSet::new(0.8, -0.6, -0.4).validate(1).is_err());
        assert!(ParameterSet::new(0.8, -0.6, -0.7).validate(1).is_err());
        assert!(ParameterSet::new(0.6, -0.9, -0.6).validate(3).is_ok());
        assert!(ParameterSet::new(0.6, -0.9, -0.6).validate(1).is_err());
    }

    #[test]
    fn zt_single_mode() {
        let g = TorusGrid::new(1, 5).unwrap();
        let x = SpectralField::real_mode(g, &[1], Complex64::new(1.0, 0.0)).unwrap();
        assert!((compute_zt(&x, 0.0) - 2.0).abs() < 1e-15);
        assert!((compute_zt(&x, 0.3) - 2.0 * (-0.6f64).exp()).abs() < 1e-15);
        let g2 = TorusGrid::new(2, 5).unwrap();
        let y = SpectralField::real_mode(g2, &[0, 2], Complex64::new(1.0, 0.5)).unwrap();
        assert_eq!(compute_zt(&y, 0.1), 0.0);
        let many = compute_zt_many(&x, &[0.0, 0.3]);
        assert!((many[1] - compute_zt(&x, 0.3)).abs() < 1e-15);
    }

    #[test]
    fn lattice_counts_small_cases() {
        let c = lattice_counts(2, 5);
        assert_eq!(c, vec![1.0, 4.0, 4.0, 0.0, 4.0, 8.0]);
        let c3 = lattice_counts(3, 3);
        assert_eq!(c3, vec![1.0, 6.0, 12.0, 8.0]);
        assert_eq!(lattice_counts(0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn shell_sums_match_brute_force() {
        for dim in 1..=3 {
            let cutoff = 6.5;
            let s = ShellSums::new(dim, cutoff);
            let g = TorusGrid::for_radius(dim, 7).unwrap();
            let mut s1 = std::collections::BTreeMap::new();
            g.for_each_mode(|_, k| {
                let r2: i64 = k.iter().map(|v| v * v).sum();
                if k[0] > 0 && (r2 as f64) <= cutoff * cutoff {
                    *s1.entry(r2).or_insert(0.0) += k[0] as f64;
                }
            });
            let got: std::collections::BTreeMap<i64, f64> = s.r2.iter().cloned().zip(s.s1.iter().cloned()).collect();
            assert_eq!(got, s1, "dim {dim}");
        }
    }

    #[test]
    fn expected_zt_examples() {
        let p = VarianceProfile::white(2.0);
        assert_eq!(expected_zt(&p, 1, 0.0).unwrap(), 6.0);
        let ez = ExpectedZ::new(&VarianceProfile::gff(20.0), 3);
        let ts = stats::geometric_grid(1e-4, 1.0, 10);
        let v: Vec<f64> = ts.iter().map(|t| ez.mean(*t)).collect();
        for w in v.windows(3) {
            assert!(w[1] < w[0]);
        }
        // convexity on a uniform grid
        let h = 1e-3;
        for j in 1..50 {
            let t = j as f64 * h;
            assert!(ez.mean(t - h) + ez.mean(t + h) - 2.0 * ez.mean(t) > 0.0);
        }
        assert!(ez.mean(50.0) < 1e-30);
        assert!(expected_zt(&p, 1, -1.0).is_err());
    }

    #[test]
    fn short_time_series_matches_direct_sum() {
        let ez = ExpectedZ::new(&VarianceProfile::gff(40.0), 3);
        let r2_max = *ez.r2.last().unwrap();
        for x in [1e-9, 1e-4, 0.1, 0.49, 0.5] {
            let t = x / (2.0 * r2_max);
            let direct: f64 = ez
                .r2
                .iter()
                .zip(&ez.a)
                .map(|(r2, a)| a * -(-2.0 * r2 * t).exp_m1() / (2.0 * r2))
                .sum();
            let got = ez.integral(t);
            assert!((got - direct).abs() <= 1e-13 * direct, "x={x} {got} {direct}");
        }
    }

    #[test]
    fn drift_examples() {
        let one = VarianceProfile::custom(vec![(1, 1.0)], 1.0);
        let d = [2.0, 0.0];
        assert_eq!(drift_i(&one, 1, &d, 0.0).unwrap(), vec![0.0, 0.0]);
        let far = drift_i(&one, 1, &d, 100.0).unwrap();
        assert!((far[0] + 2.0).abs() < 1e-15 && far[1] == 0.0);

        let path = DriftPath::new(&VarianceProfile::white(16.0), 1, d.to_vec());
        let t = 0.01;
        for h in [1e-4, 1e-5, 1e-6] {
            let fd = (path.i(t + h)[0] - path.i(t)[0]) / h;
            let rel = (fd - path.h(t)[0]).abs() / path.h(t)[0].abs();
            assert!(rel < 300.0 * h, "h={h} rel={rel}");
        }
        let ts = stats::geometric_grid(1e-6, 1.0, 20);
        let norms: Vec<f64> = ts.iter().map(|t| path.i_norm(*t)).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn singular_integral_closed_forms() {
        // int_0^t (t-s)^a s^b ds = t^{a+b+1} B(a+1, b+1).
        let beta_half = std::f64::consts::PI; // B(1/2, 1/2)
        let v = singular_integral(0.3, -0.5, -0.5, |_| 1.0, 20, 25).unwrap();
        assert!((v - beta_half).abs() < 1e-12);
        let v = singular_integral(2.0, 0.0, -0.75, |_| 1.0, 20, 25).unwrap();
        assert!((v - 2f64.powf(0.25) / 0.25).abs() < 1e-12);
        // int_0^1 (1-s)^{-1/2} s s^{-1/2} ds = B(1/2, 3/2) = pi/2
        let v = singular_integral(1.0, -0.5, -0.5, |s| s, 20, 25).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(singular_integral(1.0, -1.0, 0.0, |_| 1.0, 4, 4).is_err());
    }

    #[test]
    fn upper_bound_formula() {
        assert!((i_upper_bound(10, 0.001) - 0.1).abs() < 1e-15);
        assert!((i_upper_bound(10, 0.1) - (1.0 + 10f64.ln())).abs() < 1e-15);
    }
}
