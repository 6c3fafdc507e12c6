use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Norm-inflation experiments for nonlinear heat equations with Gaussian
/// random initial data on the torus.
#[derive(Debug, Parser)]
#[command(name = "normflate", version)]
pub struct Cli {
    /// TOML configuration; every section defaults to the desk-scale setup.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed. Overrides `seed` in the config; one of the two is required.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, value_name = "INT")]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a Gaussian Fourier series (or a rotated pair) to GFSF snapshots.
    Sample,
    /// Integrate the equation from a snapshot or a fresh sample.
    Solve,
    /// Zero-mode inflation: adversarial against control pairs across N.
    Inflate,
    /// Inflation around a base point, u_0 = x + eps (X + Y).
    Perturb,
    /// Cauchy differences of truncated fields in Besov norms.
    Besov,
    /// Remainder tracking u_t - P_t u_0 - I_t across N.
    Remainder,
    /// Bound tables for E Z_t, I_t, the weighted drift integrals and the moment statistics.
    Tables,
    /// Exact Fourier identities on random fields.
    Identities,
}
