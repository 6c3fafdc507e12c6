//! Gaussian Fourier series sampling.
//!
//! Modes are split by the lexicographic half-space: `k` is drawn when its
//! first nonzero coordinate is positive and `X_{-k}` is set to the conjugate.
//! Every mode draws from its own ChaCha stream keyed by `(StreamKey, k)`, so a
//! sample does not depend on the band it is stored in: sampling with cutoff
//! `N` gives exactly `Pi_N` of the sample with any larger cutoff.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{rotate, SpectralField, TorusGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `sigma^2 = 1`.
    White,
    /// `sigma^2 = |k|^gamma`.
    Power { gamma: f64 },
    /// `sigma^2 = |k|^gamma (log |k|)^theta (log log |k|)^eta`.
    LogPower { gamma: f64, theta: f64, eta: f64 },
    /// Explicit values keyed by `|k|^2`; missing shells have zero variance.
    Custom { table: Vec<(i64, f64)> },
}

/// Rule `k -> sigma^2(k)` with a radial cutoff.
///
/// Inside `|k| < k0` (and at `k = 0`) the variance is `small_value`. Log
/// corrected tails are additionally capped at `small_value`, which keeps the
/// profile bounded near `k0` where `log log |k|` is tiny.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub kind: ProfileKind,
    pub cutoff: f64,
    pub k0: f64,
    pub small_value: f64,
}

impl VarianceProfile {
    pub fn white(cutoff: f64) -> Self {
        Self::with_kind(ProfileKind::White, cutoff, 1.0)
    }

    pub fn power(gamma: f64, cutoff: f64) -> Self {
        Self::with_kind(ProfileKind::Power { gamma }, cutoff, 1.0)
    }

    /// Gaussian free field, `sigma^2 = |k|^-2`.
    pub fn gff(cutoff: f64) -> Self {
        Self::power(-2.0, cutoff)
    }

    pub fn log_power(gamma: f64, theta: f64, eta: f64, cutoff: f64) -> Self {
        if theta == 0.0 && eta == 0.0 {
            return Self::power(gamma, cutoff);
        }
        Self::with_kind(ProfileKind::LogPower { gamma, theta, eta }, cutoff, 3.0)
    }

    /// Critical profile `|k|^{1-d} (log |k|)^theta (log log |k|)^eta`.
    pub fn critical(dim: usize, theta: f64, eta: f64, cutoff: f64) -> Self {
        Self::log_power(1.0 - dim as f64, theta, eta, cutoff)
    }

    pub fn custom(table: Vec<(i64, f64)>, cutoff: f64) -> Self {
        Self::with_kind(ProfileKind::Custom { table }, cutoff, 0.0)
    }

    fn with_kind(kind: ProfileKind, cutoff: f64, k0: f64) -> Self {
        Self {
            kind,
            cutoff,
            k0,
            small_value: 1.0,
        }
    }

    pub fn with_k0(mut self, k0: f64) -> Self {
        self.k0 = k0;
        self
    }

    pub fn with_small_value(mut self, v: f64) -> Self {
        self.small_value = v;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff >= 0.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidParameter(format!("cutoff {} must be finite and >= 0", self.cutoff)));
        }
        if !(self.small_value >= 0.0) || !self.small_value.is_finite() {
            return Err(Error::InvalidParameter("small_value must be finite and >= 0".into()));
        }
        if !(self.k0 >= 0.0) {
            return Err(Error::InvalidParameter("k0 must be >= 0".into()));
        }
        if let ProfileKind::LogPower { .. } = self.kind {
            if self.k0 < 3.0 {
                return Err(Error::InvalidParameter(
                    "log-corrected profiles need k0 >= 3 so that log log |k| > 0".into(),
                ));
            }
        }
        if let ProfileKind::Custom { table } = &self.kind {
            if table.iter().any(|(r2, v)| *r2 < 0 || !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidParameter("custom table needs |k|^2 >= 0 and finite values >= 0".into()));
            }
        }
        Ok(())
    }

    /// `sigma^2` on the shell `|k|^2 = r2`.
    pub fn variance_sq(&self, r2: i64) -> f64 {
        let r = (r2 as f64).sqrt();
        if r > self.cutoff {
            return 0.0;
        }
        if let ProfileKind::Custom { table } = &self.kind {
            return table.iter().find(|(s, _)| *s == r2).map_or(0.0, |(_, v)| *v);
        }
        if r2 == 0 || r < self.k0 {
            return self.small_value;
        }
        match self.kind {
            ProfileKind::White => 1.0,
            ProfileKind::Power { gamma } => r.powf(gamma),
            ProfileKind::LogPower { gamma, theta, eta } => {
                let l = r.ln();
                (r.powf(gamma) * l.powf(theta) * l.ln().powf(eta)).min(self.small_value)
            }
            ProfileKind::Custom { .. } => unreachable!(),
        }
    }

    pub fn variance(&self, k: &[i64]) -> f64 {
        self.variance_sq(k.iter().map(|c| c * c).sum())
    }

    /// Largest integer radius that can carry energy.
    pub fn radius(&self) -> i64 {
        (self.cutoff + 1e-9).floor() as i64
    }
}

/// Whether `k` lies in the lexicographic half-space (first nonzero
/// coordinate positive).
pub fn in_half_space(k: &[i64]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mode_code(k: &[i64]) -> u64 {
    k.iter().fold(0x5EED_u64, |h, &c| {
        let zigzag = ((c << 1) ^ (c >> 63)) as u64;
        splitmix64(h ^ zigzag)
    })
}

/// Independent random stream, derived as `splitmix64(master ^ splitmix64(id))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey(pub u64);

impl StreamKey {
    pub fn new(master: u64, stream_id: u64) -> Self {
        Self(splitmix64(master ^ splitmix64(stream_id)))
    }
}

/// Stream layout of one trial with `components` field components: the X
/// sample uses ids `trial * 2 * components + c`, the Y sample the following
/// `components` ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialStreams {
    pub master: u64,
    pub trial: u64,
    pub components: usize,
}

impl TrialStreams {
    pub fn new(master: u64, trial: u64, components: usize) -> Self {
        Self {
            master,
            trial,
            components,
        }
    }

    fn id(&self, slot: usize) -> u64 {
        self.trial * 2 * self.components as u64 + slot as u64
    }

    pub fn x(&self, c: usize) -> StreamKey {
        StreamKey::new(self.master, self.id(c))
    }

    pub fn y(&self, c: usize) -> StreamKey {
        StreamKey::new(self.master, self.id(self.components + c))
    }

    pub fn x_keys(&self) -> Vec<StreamKey> {
        (0..self.components).map(|c| self.x(c)).collect()
    }

    pub fn y_keys(&self) -> Vec<StreamKey> {
        (0..self.components).map(|c| self.y(c)).collect()
    }
}

/// Grid plus per-component variance profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct GfsSpec {
    pub grid: TorusGrid,
    pub profiles: Vec<VarianceProfile>,
}

impl GfsSpec {
    pub fn uniform(grid: TorusGrid, profile: VarianceProfile, components: usize) -> Self {
        Self {
            grid,
            profiles: vec![profile; components],
        }
    }

    pub fn components(&self) -> usize {
        self.profiles.len()
    }
}

/// One scalar real GFS sample.
pub fn sample_real_gfs(profile: &VarianceProfile, grid: TorusGrid, key: StreamKey) -> Result<SpectralField> {
    profile.validate()?;
    if profile.radius() > grid.half_width() {
        return Err(Error::InvalidParameter(format!(
            "profile cutoff {} exceeds band half-width {}",
            profile.cutoff,
            grid.half_width()
        )));
    }
    let base = ChaCha8Rng::seed_from_u64(key.0);
    let mut field = SpectralField::zeros(grid, 1);
    let sigma2 = shell_table(profile, grid);
    let coeffs = field.coeffs_mut();
    grid.for_each_mode(|idx, k| {
        let r2: i64 = k.iter().map(|c| c * c).sum();
        let s2 = sigma2[r2 as usize];
        if s2 == 0.0 {
            return;
        }
        let zero = r2 == 0;
        if !zero && !in_half_space(k) {
            return;
        }
        let mut rng = base.clone();
        rng.set_stream(mode_code(k));
        let a: f64 = StandardNormal.sample(&mut rng);
        let sigma = s2.sqrt();
        if zero {
            coeffs[idx] = Complex64::new(sigma * a, 0.0);
        } else {
            let b: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(a, b) * (sigma / std::f64::consts::SQRT_2);
            coeffs[idx] = z;
            coeffs[grid.len() - 1 - idx] = z.conj();
        }
    });
    Ok(field)
}

fn shell_table(profile: &VarianceProfile, grid: TorusGrid) -> Vec<f64> {
    let max_r2 = grid.half_width().pow(2) * grid.dim() as i64;
    (0..=max_r2).map(|r2| profile.variance_sq(r2)).collect()
}

/// Independent real GFS per component, component `c` drawn from `keys[c]`.
pub fn sample_e_valued(spec: &GfsSpec, keys: &[StreamKey]) -> Result<SpectralField> {
    if keys.len() != spec.components() {
        return Err(Error::InvalidParameter(format!(
            "{} stream keys for {} components",
            keys.len(),
            spec.components()
        )));
    }
    let parts = spec
        .profiles
        .iter()
        .zip(keys)
        .map(|(p, k)| sample_real_gfs(p, spec.grid, *k))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_components(&parts)
}

/// `(X, Y)` with `Y^b = R X^a` and every other `Y^c` a fresh sample.
pub fn build_adversarial_pair(
    spec: &GfsSpec,
    a: usize,
    b: usize,
    streams: &TrialStreams,
) -> Result<(SpectralField, SpectralField)> {
    let n = spec.components();
    if a == b {
        return Err(Error::InvalidParameter("adversarial pair needs distinct components a != b".into()));
    }
    if a >= n || b >= n {
        return Err(Error::ComponentOutOfRange {
            component: a.max(b),
            components: n,
        });
    }
    let x = sample_e_valued(spec, &streams.x_keys())?;
    let mut parts = Vec::with_capacity(n);
    for c in 0..n {
        if c == b {
            parts.push(rotate(&x.component_field(a)?));
        } else {
            parts.push(sample_real_gfs(&spec.profiles[c], spec.grid, streams.y(c))?);
        }
    }
    Ok((x, SpectralField::from_components(&parts)?))
}

/// `(X, Y)` independent with identical laws. Shares `X` and every `Y^c` with
/// the adversarial pair of the same streams except the rotated component.
pub fn sample_control_pair(spec: &GfsSpec, streams: &TrialStreams) -> Result<(SpectralField, SpectralField)> {
    let x = sample_e_valued(spec, &streams.x_keys())?;
    let y = sample_e_valued(spec, &streams.y_keys())?;
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::project_band;

    #[test]
    fn half_space_partitions_nonzero_lattice() {
        let g = TorusGrid::new(3, 5).unwrap();
        g.for_each_mode(|_, k| {
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            if k.iter().all(|&c| c == 0) {
                assert!(!in_half_space(k));
            } else {
                assert_ne!(in_half_space(k), in_half_space(&neg));
            }
        });
    }

    #[test]
    fn profile_values() {
        let w = VarianceProfile::white(4.0);
        assert_eq!(w.variance(&[3, 0]), 1.0);
        assert_eq!(w.variance(&[3, 3]), 0.0);
        let g = VarianceProfile::gff(10.0);
        assert!((g.variance(&[1, 1, 1]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.variance(&[0, 0, 0]), 1.0);
        let c = VarianceProfile::critical(3, -1.0, -1.0, 100.0);
        let r: f64 = 50.0;
        let expected = r.powi(-2) / r.ln() / r.ln().ln();
        assert!((c.variance(&[50, 0, 0]) - expected).abs() < 1e-15);
        assert_eq!(c.variance(&[2, 0, 0]), 1.0);
        assert_eq!(c.variance(&[3, 0, 0]), 1.0);
        assert_eq!(c.variance(&[4, 0, 0]), 1.0 / 16.0 / 4f64.ln() / 4f64.ln().ln());
        let t = VarianceProfile::custom(vec![(1, 2.0), (4, 0.5)], 3.0);
        assert_eq!(t.variance(&[1]), 2.0);
        assert_eq!(t.variance(&[2]), 0.5);
        assert_eq!(t.variance(&[0]), 0.0);
        assert!(VarianceProfile::critical(3, -1.0, -1.0, 9.0).with_k0(2.0).validate().is_err());
    }

    #[test]
    fn log_tail_is_capped_near_k0() {
        let p = VarianceProfile::critical(1, -1.0, -1.0, 64.0);
        for r2 in 0..4096 {
            assert!(p.variance_sq(r2) <= 1.0);
        }
    }

    #[test]
    fn reality_support_and_determinism() {
        let g = TorusGrid::new(2, 13).unwrap();
        let p = VarianceProfile::power(-1.0, 4.5);
        let key = StreamKey::new(7, 3);
        let x = sample_real_gfs(&p, g, key).unwrap();
        assert_eq!(x.reality_defect(), 0.0);
        assert_eq!(x, sample_real_gfs(&p, g, key).unwrap());
        assert_ne!(x, sample_real_gfs(&p, g, StreamKey::new(7, 4)).unwrap());
        g.for_each_mode(|idx, k| {
            let r2: i64 = k.iter().map(|c| c * c).sum();
            if r2 as f64 > 4.5 * 4.5 {
                assert_eq!(x.coeffs()[idx].norm(), 0.0);
            } else {
                assert!(x.coeffs()[idx].norm() > 0.0);
            }
        });
        assert_eq!(x.coeff(0, &[0, 0]).unwrap().im, 0.0);
    }

    #[test]
    fn samples_are_nested_across_cutoffs() {
        let big = TorusGrid::new(2, 17).unwrap();
        let small = TorusGrid::new(2, 9).unwrap();
        let key = StreamKey::new(1, 1);
        let xn = sample_real_gfs(&VarianceProfile::white(3.0), small, key).unwrap();
        let xmax = sample_real_gfs(&VarianceProfile::white(8.0), big, key).unwrap();
        let projected = project_band(&xmax, 3.0).resized(9).unwrap();
        assert_eq!(projected, xn);
    }

    #[test]
    fn cutoff_beyond_band_is_rejected() {
        let g = TorusGrid::new(1, 9).unwrap();
        assert!(sample_real_gfs(&VarianceProfile::white(5.0), g, StreamKey(0)).is_err());
    }

    #[test]
    fn adversarial_pair_rotates_exactly_and_shares_x_with_control() {
        let g = TorusGrid::new(1, 17).unwrap();
        let spec = GfsSpec::uniform(g, VarianceProfile::white(8.0), 3);
        let s = TrialStreams::new(42, 5, 3);
        let (x, y) = build_adversarial_pair(&spec, 0, 1, &s).unwrap();
        assert_eq!(y.component(1), rotate(&x.component_field(0).unwrap()).coeffs());
        let (xc, yc) = sample_control_pair(&spec, &s).unwrap();
        assert_eq!(x, xc);
        assert_eq!(y.component(0), yc.component(0));
        assert_eq!(y.component(2), yc.component(2));
        assert_ne!(y.component(1), yc.component(1));
        assert!(build_adversarial_pair(&spec, 1, 1, &s).is_err());
        assert!(build_adversarial_pair(&spec, 0, 3, &s).is_err());
    }

    #[test]
    fn stream_ids_are_distinct_across_trials() {
        let a = TrialStreams::new(9, 0, 2);
        let b = TrialStreams::new(9, 1, 2);
        let mut keys = a.x_keys();
        keys.extend(a.y_keys());
        keys.extend(b.x_keys());
        keys.extend(b.y_keys());
        let mut dedup = keys.clone();
        dedup.sort_by_key(|k| k.0);
        dedup.dedup();
        assert_eq!(dedup.len(), keys.len());
    }
}
