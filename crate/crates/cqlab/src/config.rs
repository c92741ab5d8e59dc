//! Command-line configuration.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Default seed for every seeded run.
pub const DEFAULT_SEED: u64 = 2718;

/// Output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated values with `#` header lines.
    Csv,
    /// `{"header": …, "data": …}`.
    Json,
}

/// What to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Solve one ground state (`--omega`).
    Solve,
    /// Sweep the branch and report derivative checks and monotonicity scans.
    Sweep,
    /// Rescaled solitons with `V = 0`, `β = 1/3`.
    Rescaled,
    /// Thresholds, the envelope `E^V_min` and `D` (`--mass`, `--energy`).
    Region,
    /// Gagliardo-Nirenberg-Hölder constants and their property test (`--alpha`).
    Gnh,
    /// Linearized operator at one frequency (`--omega`) or across the sweep.
    Linearize,
    /// Radial time evolution of a soliton (`--omega`), a profile file
    /// (`--input`) or a Gaussian of given mass (`--mass`).
    Evolve,
    /// Small- and large-frequency asymptotics.
    Asymptotics,
    /// Run the full acceptance suite.
    VerifyAll,
}

/// Command-line arguments.
#[derive(Clone, Debug, Parser)]
#[command(name = "cqlab", version, about = "Ground states and the virial region of the 3-D cubic-quintic NLS")]
pub struct Cli {
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
    /// Frequency in (0, 3/16).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// GNH exponent.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Target mass.
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// Energy, paired with `--mass` for a `D` query.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    /// Relative bisection tolerance on the centre value.
    #[arg(long = "tol-b", global = true, default_value_t = 1e-15)]
    pub tol_b: f64,
    /// Grid points: shooting grid for ground states, intervals for evolution.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Outer radius: shooting radius for ground states, domain for evolution.
    #[arg(long = "r-max", global = true)]
    pub r_max: Option<f64>,
    /// Evolution time step.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub dt: f64,
    /// Evolution end time.
    #[arg(long = "t-end", global = true, default_value_t = 1.0)]
    pub t_end: f64,
    /// Seed for randomized property runs.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of trials per property run.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory (overridden by `CQLAB_OUT`).
    #[arg(long, global = true, default_value = "cqlab-out")]
    pub out: PathBuf,
    /// Output formats.
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
    /// Initial data for `evolve`: a profile written by `solve` (JSON or CSV).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// Subcommand.
    pub command: Command,
    /// Frequency.
    pub omega: Option<f64>,
    /// GNH exponent.
    pub alpha: Option<f64>,
    /// Target mass.
    pub mass: Option<f64>,
    /// Energy.
    pub energy: Option<f64>,
    /// Bisection tolerance.
    pub tol_b: f64,
    /// Grid points.
    pub grid_n: Option<usize>,
    /// Outer radius.
    pub r_max: Option<f64>,
    /// Time step.
    pub dt: f64,
    /// End time.
    pub t_end: f64,
    /// Seed.
    pub seed: u64,
    /// Trials per property run.
    pub trials: Option<u64>,
    /// Initial data file.
    pub input: Option<PathBuf>,
    /// Worker threads; excluded from the hash.
    #[serde(skip)]
    pub jobs: usize,
    /// Output directory; excluded from the hash.
    #[serde(skip)]
    pub out: PathBuf,
    /// Output formats; excluded from the hash.
    #[serde(skip)]
    pub formats: Vec<Format>,
}

impl RunConfig {
    /// Validate arguments; `env_out` is the value of `CQLAB_OUT`, if set.
    pub fn from_cli(cli: Cli, env_out: Option<PathBuf>) -> Result<Self> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("--{name} must be a positive number, got {v}");
            }
            Ok(())
        };
        positive("tol-b", cli.tol_b)?;
        positive("dt", cli.dt)?;
        positive("t-end", cli.t_end)?;
        if let Some(r) = cli.r_max {
            positive("r-max", r)?;
        }
        if let Some(a) = cli.alpha {
            positive("alpha", a)?;
        }
        if let Some(m) = cli.mass {
            positive("mass", m)?;
        }
        if cli.grid_n.is_some_and(|n| n < 16) {
            bail!("--grid-n must be at least 16");
        }
        if cli.trials == Some(0) {
            bail!("--trials must be at least 1");
        }
        let mut formats = cli.format;
        formats.dedup();
        if formats.is_empty() {
            bail!("--format needs at least one of csv, json");
        }
        Ok(RunConfig {
            command: cli.command,
            omega: cli.omega,
            alpha: cli.alpha,
            mass: cli.mass,
            energy: cli.energy,
            tol_b: cli.tol_b,
            grid_n: cli.grid_n,
            r_max: cli.r_max,
            dt: cli.dt,
            t_end: cli.t_end,
            seed: cli.seed,
            trials: cli.trials,
            input: cli.input,
            jobs: cli.jobs,
            out: env_out.unwrap_or(cli.out),
            formats,
        })
    }

    /// Hex SHA-256 of the options that affect results.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("cqlab").chain(args.iter().copied()))?;
        RunConfig::from_cli(cli, None)
    }

    #[test]
    fn defaults() {
        let c = parse(&["solve", "--omega", "0.05"]).unwrap();
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.omega, Some(0.05));
        assert_eq!(c.formats, [Format::Csv, Format::Json]);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(parse(&["solve", "--tol-b", "0"]).is_err());
        assert!(parse(&["evolve", "--dt", "-1e-3"]).is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = parse(&["sweep", "--out", "a", "--jobs", "1"]).unwrap();
        let b = parse(&["sweep", "--out", "b"]).unwrap();
        let c = parse(&["sweep", "--seed", "1"]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn env_overrides_out() {
        let cli = Cli::try_parse_from(["cqlab", "sweep", "--out", "a"]).unwrap();
        let c = RunConfig::from_cli(cli, Some("b".into())).unwrap();
        assert_eq!(c.out, PathBuf::from("b"));
    }
}
