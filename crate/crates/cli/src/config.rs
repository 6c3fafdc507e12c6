//! TOML experiment configuration. Every section is optional and falls back to
//! the desk-scale defaults below; unknown keys are rejected.

use std::path::{Path, PathBuf};

use normflate::gfs::VarianceProfile;
use normflate::solver::{Algebra, Scheme};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub sample: SampleConfig,
    pub solve: SolveSection,
    pub inflate: InflateConfig,
    pub perturb: PerturbConfig,
    pub besov: BesovConfig,
    pub tables: TablesConfig,
    pub identities: IdentitiesConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Shape of a variance profile; the cutoff is supplied per run.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    White,
    Gff,
    Power { gamma: f64 },
    LogPower { gamma: f64, theta: f64, eta: f64 },
    /// `k^{-d+1} |log k|^theta |log log k|^eta`.
    Critical { theta: f64, eta: f64 },
    Custom { table: Vec<(i64, f64)> },
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig::White
    }
}

impl ProfileConfig {
    pub fn build(&self, dim: usize, cutoff: f64) -> Result<VarianceProfile, CliError> {
        let p = match self {
            ProfileConfig::White => VarianceProfile::white(cutoff),
            ProfileConfig::Gff => VarianceProfile::gff(cutoff),
            ProfileConfig::Power { gamma } => VarianceProfile::power(*gamma, cutoff),
            ProfileConfig::LogPower { gamma, theta, eta } => VarianceProfile::log_power(*gamma, *theta, *eta, cutoff),
            ProfileConfig::Critical { theta, eta } => VarianceProfile::critical(dim, *theta, *eta, cutoff),
            ProfileConfig::Custom { table } => VarianceProfile::custom(table.clone(), cutoff),
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn parse_algebra(name: &str) -> Result<Algebra, CliError> {
    Ok(Algebra::parse(name)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairChoice {
    Adversarial,
    Control,
    Single,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub dim: usize,
    pub cutoff: usize,
    pub components: usize,
    pub profile: ProfileConfig,
    pub pair: PairChoice,
    /// Components of the rotated pair `Y^b = R X^a`.
    pub a: usize,
    pub b: usize,
    pub trial: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            cutoff: 64,
            components: 2,
            profile: ProfileConfig::White,
            pair: PairChoice::Adversarial,
            a: 0,
            b: 1,
            trial: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// GFSF snapshot with the initial datum; sampled from `[sample]` if absent.
    pub input: Option<PathBuf>,
    pub preset: String,
    pub algebra: String,
    /// Defaults to `(log N)^{-m_exponent}` with `N` the sample cutoff.
    pub t_end: Option<f64>,
    pub m_exponent: f64,
    pub steps: Option<usize>,
    pub step_constant: f64,
    pub scheme: Scheme,
    pub snapshot_times: Vec<f64>,
    pub save_snapshots: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            input: None,
            preset: "antisym2".into(),
            algebra: "so3".into(),
            t_end: None,
            m_exponent: 4.0,
            steps: None,
            step_constant: 0.5,
            scheme: Scheme::EtdRk2,
            snapshot_times: Vec::new(),
            save_snapshots: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct InflateConfig {
    pub dim: usize,
    pub preset: String,
    pub algebra: String,
    /// Derivative axis of the asymmetry witness.
    pub axis: usize,
    pub profile: ProfileConfig,
    pub n_list: Vec<usize>,
    pub trials: usize,
    /// `T = (log N)^{-m_exponent}`.
    pub m_exponent: f64,
    /// Time step `step_constant / N^2`.
    pub step_constant: f64,
    pub scheme: Scheme,
    /// Remainder exponent of the Hölder norm.
    pub beta_hat: f64,
    /// Exponent of the reported `|u_0|_{C^eta}`.
    pub eta: f64,
    /// Remainder is sampled at `T 2^{-j}`, `j < remainder_times`.
    pub remainder_times: usize,
    /// Also run the pair `Y = X`.
    pub self_arm: bool,
    pub control_tolerance: f64,
    pub ratio_threshold: f64,
    pub remainder_tolerance: f64,
}

impl Default for InflateConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            preset: "antisym2".into(),
            algebra: "so3".into(),
            axis: 0,
            profile: ProfileConfig::White,
            n_list: vec![64, 256, 1024],
            trials: 100,
            m_exponent: 4.0,
            step_constant: 0.5,
            scheme: Scheme::EtdRk2,
            beta_hat: -0.35,
            eta: -0.55,
            remainder_times: 8,
            self_arm: false,
            control_tolerance: 1.5,
            ratio_threshold: 2.0,
            remainder_tolerance: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasePoint {
    Zero,
    Constant { value: Vec<f64> },
    /// `amplitude * cos(k . x)` in one component.
    Mode { component: usize, k: Vec<i64>, amplitude: f64 },
}

/// Solver, nonlinearity and profile settings come from `[inflate]`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    pub base: BasePoint,
    pub epsilons: Vec<f64>,
    pub n_list: Vec<usize>,
    pub trials: usize,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            base: BasePoint::Constant { value: vec![0.5, 0.0] },
            epsilons: vec![1.0, 0.5],
            n_list: vec![64, 256, 1024],
            trials: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Decreasing,
    Flat,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BesovCase {
    pub name: String,
    pub theta: f64,
    pub eta: f64,
    /// Summability index; `inf` for the Hölder scale.
    pub q: f64,
    pub expect: Expectation,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesovConfig {
    pub dim: usize,
    pub gamma: f64,
    pub n_list: Vec<usize>,
    /// Reference cutoff of the Cauchy differences `X^N - X^{n_max}`.
    pub n_max: usize,
    pub trials: usize,
    pub flat_tolerance: f64,
    pub cases: Vec<BesovCase>,
}

impl Default for BesovConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            gamma: 0.0,
            n_list: (4..=10).map(|j| 1usize << j).collect(),
            n_max: 2048,
            trials: 50,
            flat_tolerance: 1.3,
            cases: vec![
                BesovCase {
                    name: "log_corrected".into(),
                    theta: -1.0,
                    eta: -1.0,
                    q: f64::INFINITY,
                    expect: Expectation::Decreasing,
                },
                BesovCase {
                    name: "uncorrected".into(),
                    theta: 0.0,
                    eta: 0.0,
                    q: f64::INFINITY,
                    expect: Expectation::Flat,
                },
                BesovCase {
                    name: "summable".into(),
                    theta: -2.0,
                    eta: 0.0,
                    q: 4.0,
                    expect: Expectation::Decreasing,
                },
            ],
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesConfig {
    pub t_lo: f64,
    pub t_hi: f64,
    pub per_decade: usize,
    pub ezt: EztTable,
    pub drift: DriftTable,
    pub moments: MomentsTable,
}

impl Default for TablesConfig {
    fn default() -> Self {
        Self {
            t_lo: 1e-4,
            t_hi: 1e-1,
            per_decade: 40,
            ezt: EztTable::default(),
            drift: DriftTable::default(),
            moments: MomentsTable::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EztTable {
    pub dim: usize,
    pub profile: ProfileConfig,
    pub n_list: Vec<usize>,
    pub spread_tolerance: f64,
}

impl Default for EztTable {
    fn default() -> Self {
        Self {
            dim: 3,
            profile: ProfileConfig::Critical { theta: -1.0, eta: -1.0 },
            n_list: vec![16, 32, 64],
            spread_tolerance: 2.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftTable {
    pub dim: usize,
    pub profile: ProfileConfig,
    pub preset: String,
    pub algebra: String,
    pub n_list: Vec<usize>,
    pub spread_tolerance: f64,
    pub weighted_drift_tolerance: f64,
}

impl Default for DriftTable {
    fn default() -> Self {
        Self {
            dim: 3,
            profile: ProfileConfig::Gff,
            preset: "antisym2".into(),
            algebra: "so3".into(),
            n_list: vec![16, 32, 64, 128, 256],
            spread_tolerance: 2.0,
            weighted_drift_tolerance: 3.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsTable {
    pub dim: usize,
    pub profile: ProfileConfig,
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
    /// Time weight of the centered `Z` statistic.
    pub z_delta: f64,
    pub axis: usize,
    pub trials: usize,
    pub n_list: Vec<usize>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub per_decade: usize,
}

impl Default for MomentsTable {
    fn default() -> Self {
        Self {
            dim: 1,
            profile: ProfileConfig::White,
            delta: 0.8,
            beta: -0.75,
            eta: -0.55,
            z_delta: 0.9,
            axis: 0,
            trials: 200,
            n_list: vec![32, 64, 128],
            t_lo: 1e-6,
            t_hi: 1.0,
            per_decade: 40,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub fields: usize,
    pub dims: Vec<usize>,
    /// Band radius per entry of `dims`.
    pub radii: Vec<usize>,
    pub z_samples: usize,
    pub z_times: Vec<f64>,
    pub z_cutoff: usize,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self {
            fields: 50,
            dims: vec![1, 2, 3],
            radii: vec![24, 10, 5],
            z_samples: 20,
            z_times: vec![0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0],
            z_cutoff: 32,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.inflate.n_list, vec![64, 256, 1024]);
        assert_eq!(c.besov.cases.len(), 3);
        assert!(c.besov.cases[0].q.is_infinite());
        assert!(c.seed.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("sed = 3").is_err());
        assert!(Config::parse("[inflate]\ntrails = 3").is_err());
        assert!(Config::parse("[inflate.profile]\nkind = \"power\"\ngamma = 1.0\ngama = 2.0").is_err());
    }

    #[test]
    fn sections_parse() {
        let c = Config::parse(
            r#"
seed = 7
[inflate]
n_list = [8, 16]
scheme = "exponential-euler"
[inflate.profile]
kind = "log_power"
gamma = 0.0
theta = -1.0
eta = -1.0
[perturb.base]
kind = "mode"
component = 0
k = [1]
amplitude = 0.5
[[besov.cases]]
name = "x"
theta = -2.0
eta = 0.0
q = inf
expect = "decreasing"
"#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.inflate.scheme, Scheme::ExponentialEuler);
        assert_eq!(c.besov.cases.len(), 1);
        assert!(matches!(c.perturb.base, BasePoint::Mode { .. }));
        assert!(c.inflate.profile.build(1, 8.0).is_ok());
    }

    #[test]
    fn shipped_example_spells_out_the_defaults() {
        let text = include_str!("../../../configs/default.toml");
        let mut c = Config::parse(text).unwrap();
        assert_eq!(c.seed, Some(20241));
        (c.seed, c.threads, c.out) = (None, None, None);
        let json = |c: &Config| serde_json::to_string(c).unwrap();
        assert_eq!(json(&c), json(&Config::default()));
    }
}
