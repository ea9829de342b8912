use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use vqd_core::analysis::{OverlapSampler, ShotLevel};
use vqd_core::deflation::{BetaStrategy, DeflationMethod};

#[derive(Debug, Parser)]
#[command(name = "vqd", version, about = "Variational quantum deflation experiments on a statevector simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one Hamiltonian and write the spectrum estimate as JSON.
    Vqd(VqdArgs),
    /// Solve every fixture in a directory and write a dissociation table.
    Spectrum(SpectrumArgs),
    /// Optimal shot allocation for a Hamiltonian and a list of β values.
    Budget(BudgetArgs),
    /// Median error per level with and without exact earlier levels.
    Accumulate(AccumulateArgs),
    /// Error-accumulation bounds for a perturbed ground state.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzChoice {
    /// UCCGSD when the electron count is known, universal otherwise.
    #[default]
    Auto,
    Uccgsd,
    Universal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapChoice {
    Exact,
    Inverse,
    Swap,
    Filtered { flip_probability: f64 },
}

/// Solver settings shared by `vqd`, `spectrum` and `accumulate`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Number of levels to find; defaults to every level the ansatz can reach.
    #[arg(long)]
    pub k_max: Option<usize>,

    #[arg(long, value_enum, default_value_t = AnsatzChoice::Auto)]
    pub ansatz: AnsatzChoice,

    /// Electron count for UCCGSD; read from the file's `n_electrons` metadata
    /// when omitted.
    #[arg(long)]
    pub electrons: Option<usize>,

    /// `fixed:V`, `spectral` or `hotelling:E`.
    #[arg(long, default_value = "fixed:3", value_parser = parse_beta)]
    pub beta: BetaStrategy,

    /// `hotelling` or `projection:E`.
    #[arg(long, default_value = "hotelling", value_parser = parse_method)]
    pub method: DeflationMethod,

    /// Replace the exact projector product by its first-order form.
    #[arg(long)]
    pub approximate_projection: bool,

    #[arg(long, default_value_t = 1e-2)]
    pub xatol: f64,

    #[arg(long, default_value_t = 1e-2)]
    pub fatol: f64,

    #[arg(long, default_value_t = 2)]
    pub restarts: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VqdArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub solve: SolveArgs,

    /// `exact`, `inverse`, `swap` or `filtered:p`.
    #[arg(long, default_value = "exact", value_parser = parse_overlap)]
    pub overlap: OverlapChoice,

    /// Shots per Hamiltonian term and per overlap term; exact energies when
    /// omitted.
    #[arg(long)]
    pub shots: Option<u64>,

    /// Output file; standard output when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    /// Directory of `.ham` files carrying `bond_length_angstrom` metadata.
    #[arg(long)]
    pub fixtures: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub solve: SolveArgs,

    #[arg(long, default_value = "exact", value_parser = parse_overlap)]
    pub overlap: OverlapChoice,

    #[arg(long)]
    pub shots: Option<u64>,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BudgetArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,

    /// Target standard deviation of the objective.
    #[arg(long)]
    pub epsilon: f64,

    /// Stage index `k`: the number of overlap terms.
    #[arg(long, default_value_t = 0)]
    pub k: usize,

    /// β for each earlier level (`k` values); `--beta` is used when omitted.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,

    /// `fixed:V` or `spectral`.
    #[arg(long, default_value = "fixed:3", value_parser = parse_beta)]
    pub beta: BetaStrategy,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AccumulateArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub solve: SolveArgs,

    /// `inverse` or `swap`.
    #[arg(long, default_value = "inverse", value_parser = parse_overlap)]
    pub overlap: OverlapChoice,

    /// Comma-separated shot levels; `exact` is allowed.
    #[arg(long, value_delimiter = ',', default_value = "10000,100000", value_parser = parse_shot_level)]
    pub shots: Vec<ShotLevel>,

    #[arg(long, default_value_t = 30)]
    pub runs: usize,

    #[arg(long, default_value_t = 30)]
    pub baseline_runs: usize,

    #[arg(long, default_value_t = 1000)]
    pub bootstrap_resamples: usize,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub e0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub e1: f64,
    #[arg(long)]
    pub beta0: f64,
    #[arg(long)]
    pub eps0: f64,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn split_value(s: &str, name: &str) -> Result<f64, String> {
    let (_, v) = s.split_once(':').ok_or_else(|| format!("expected {name}:VALUE, got {s:?}"))?;
    v.parse::<f64>().map_err(|e| format!("bad number in {s:?}: {e}"))
}

pub fn parse_beta(s: &str) -> Result<BetaStrategy, String> {
    match s {
        "spectral" => Ok(BetaStrategy::SpectralBound),
        _ if s.starts_with("fixed:") => Ok(BetaStrategy::Fixed(split_value(s, "fixed")?)),
        _ if s.starts_with("hotelling:") => Ok(BetaStrategy::HotellingShift(split_value(s, "hotelling")?)),
        _ => Err(format!("expected fixed:V, spectral or hotelling:E, got {s:?}")),
    }
}

pub fn parse_method(s: &str) -> Result<DeflationMethod, String> {
    match s {
        "hotelling" => Ok(DeflationMethod::Hotelling),
        _ if s.starts_with("projection:") => Ok(DeflationMethod::Projection {
            shift: split_value(s, "projection")?,
            approximate: false,
        }),
        _ => Err(format!("expected hotelling or projection:E, got {s:?}")),
    }
}

pub fn parse_overlap(s: &str) -> Result<OverlapChoice, String> {
    match s {
        "exact" => Ok(OverlapChoice::Exact),
        "inverse" => Ok(OverlapChoice::Inverse),
        "swap" => Ok(OverlapChoice::Swap),
        _ if s.starts_with("filtered:") => Ok(OverlapChoice::Filtered {
            flip_probability: split_value(s, "filtered")?,
        }),
        _ => Err(format!("expected exact, inverse, swap or filtered:p, got {s:?}")),
    }
}

pub fn parse_shot_level(s: &str) -> Result<ShotLevel, String> {
    if s == "exact" {
        return Ok(ShotLevel::Exact);
    }
    match s.parse::<u64>() {
        Ok(0) => Err("shot levels must be at least 1".into()),
        Ok(m) => Ok(ShotLevel::Shots(m)),
        Err(e) => Err(format!("bad shot level {s:?}: {e}")),
    }
}

impl OverlapChoice {
    pub fn sampler(self) -> Option<OverlapSampler> {
        match self {
            OverlapChoice::Inverse => Some(OverlapSampler::InverseCircuit),
            OverlapChoice::Swap => Some(OverlapSampler::DestructiveSwap),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_specs() {
        assert_eq!(parse_beta("fixed:3").unwrap(), BetaStrategy::Fixed(3.0));
        assert_eq!(parse_beta("spectral").unwrap(), BetaStrategy::SpectralBound);
        assert_eq!(parse_beta("hotelling:1.5").unwrap(), BetaStrategy::HotellingShift(1.5));
        assert!(parse_beta("fixed").is_err());
        assert_eq!(
            parse_method("projection:-0.5").unwrap(),
            DeflationMethod::Projection { shift: -0.5, approximate: false }
        );
        assert_eq!(parse_overlap("filtered:0.01").unwrap(), OverlapChoice::Filtered { flip_probability: 0.01 });
        assert!(parse_overlap("qpe").is_err());
        assert_eq!(parse_shot_level("exact").unwrap(), ShotLevel::Exact);
        assert!(parse_shot_level("0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
