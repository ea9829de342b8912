use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use vqd_core::analysis::{
    accumulation_bounds, error_accumulation_experiment, exact_spectrum, lower_bound_first_order_coefficient,
    sector_spectrum, taylor_first_order_coefficient, AccumulationBounds, AccumulationConfig, AccumulationRow,
    ExactSpectrum,
};
use vqd_core::ansatz::{Ansatz, UccgsdAnsatz, UniversalAnsatz};
use vqd_core::deflation::{
    vqd_solve, BetaStrategy, DeflationMethod, NelderMeadOptions, EnergyMode, ObjectiveConfig, OverlapMode, SolveConfig,
    SpectrumEstimate,
};
use vqd_core::fermion::SymmetryOperator;
use vqd_core::pauli::{parse_hamiltonian_file, HamiltonianFile};
use vqd_core::shots::{optimal_vqd_allocation, total_samples_bound, worst_case_ratio, Shots, VarianceModel};

use crate::args::{
    AccumulateArgs, AnsatzChoice, BoundsArgs, BudgetArgs, OverlapChoice, SolveArgs, SpectrumArgs, VqdArgs,
};

/// The full invocation, embedded in every output so that a run can be
/// repeated from its own output file.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho<'a, T> {
    pub command: &'a str,
    pub version: &'a str,
    pub args: &'a T,
}

fn echo<'a, T>(command: &'a str, args: &'a T) -> ConfigEcho<'a, T> {
    ConfigEcho {
        command,
        version: env!("CARGO_PKG_VERSION"),
        args,
    }
}

pub fn load_hamiltonian(path: &Path) -> Result<HamiltonianFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_hamiltonian_file(&text).with_context(|| format!("parsing {}", path.display()))
}

/// The ansatz selected by `args`, and the electron count it conserves.
pub fn build_ansatz(args: &SolveArgs, file: &HamiltonianFile) -> Result<(Box<dyn Ansatz>, Option<usize>)> {
    let n = file.hamiltonian.n_qubits();
    let electrons = args
        .electrons
        .or_else(|| file.metadata_f64("n_electrons").map(|e| e as usize));
    match (args.ansatz, electrons) {
        (AnsatzChoice::Universal, _) | (AnsatzChoice::Auto, None) => Ok((Box::new(UniversalAnsatz::new(n)), None)),
        (AnsatzChoice::Uccgsd | AnsatzChoice::Auto, Some(e)) => {
            ensure!(e <= n, "{e} electrons do not fit in {n} spin orbitals");
            Ok((Box::new(UccgsdAnsatz::new(n, e)), Some(e)))
        }
        (AnsatzChoice::Uccgsd, None) => {
            bail!("UCCGSD needs an electron count: pass --electrons or add n_electrons metadata")
        }
    }
}

/// Exact levels the ansatz can reach: the fixed-electron sector for UCCGSD,
/// the whole space otherwise.
pub fn reference_spectrum(file: &HamiltonianFile, electrons: Option<usize>) -> Result<ExactSpectrum> {
    let h = &file.hamiltonian;
    Ok(match electrons {
        Some(e) => sector_spectrum(h, SymmetryOperator::ElectronNumber, e)?,
        None => exact_spectrum(h)?,
    })
}

pub fn objective_config(solve: &SolveArgs, overlap: OverlapChoice, shots: Option<u64>) -> Result<ObjectiveConfig> {
    let sampled = |m: Option<u64>| -> Result<Shots> {
        match m {
            Some(0) => bail!("--shots must be at least 1"),
            Some(m) => Ok(Shots::Uniform(m)),
            None => bail!("overlap estimator {overlap:?} needs --shots"),
        }
    };
    let overlap = match overlap {
        OverlapChoice::Exact => OverlapMode::Exact,
        OverlapChoice::Inverse => OverlapMode::InverseCircuit(sampled(shots)?),
        OverlapChoice::Swap => OverlapMode::DestructiveSwap(sampled(shots)?),
        OverlapChoice::Filtered { flip_probability } => OverlapMode::SymmetryFiltered {
            shots: sampled(shots)?,
            flip_probability,
        },
    };
    let energy = match shots {
        Some(m) => EnergyMode::Sampled(sampled(Some(m))?),
        None => EnergyMode::Exact,
    };
    let method = match solve.method {
        DeflationMethod::Projection { shift, .. } => DeflationMethod::Projection {
            shift,
            approximate: solve.approximate_projection,
        },
        m => m,
    };
    Ok(ObjectiveConfig {
        energy,
        overlap,
        method,
        ..ObjectiveConfig::default()
    })
}

pub fn solve_config(solve: &SolveArgs, objective: ObjectiveConfig) -> Result<SolveConfig> {
    ensure!(solve.restarts >= 1, "--restarts must be at least 1");
    ensure!(
        solve.xatol > 0.0 && solve.fatol > 0.0,
        "--xatol and --fatol must be positive"
    );
    let defaults = SolveConfig::default();
    Ok(SolveConfig {
        objective,
        beta: solve.beta,
        optimizer: NelderMeadOptions {
            xatol: solve.xatol,
            fatol: solve.fatol,
            ..defaults.optimizer
        },
        restarts: solve.restarts,
        seed: solve.seed,
        ..defaults
    })
}

fn k_max_for(solve: &SolveArgs, reference: &ExactSpectrum) -> Result<usize> {
    let k = solve.k_max.unwrap_or(reference.dimension());
    ensure!(
        k <= reference.dimension(),
        "--k-max {k} exceeds the {} levels the ansatz can reach",
        reference.dimension()
    );
    Ok(k)
}

/// `C(n, e)` basis states with `e` electrons, or `2^n` without a constraint.
fn reachable_levels(n: usize, electrons: Option<usize>) -> usize {
    match electrons {
        Some(e) => (0..e).fold(1, |acc, i| acc * (n - i) / (i + 1)),
        None => 1 << n,
    }
}

#[derive(Debug, Serialize)]
pub struct VqdReport<'a> {
    pub config: ConfigEcho<'a, VqdArgs>,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub energies: Vec<Option<f64>>,
    pub estimate: SpectrumEstimate,
}

pub fn cmd_vqd(args: &VqdArgs) -> Result<VqdReport<'_>> {
    let file = load_hamiltonian(&args.hamiltonian)?;
    let h = &file.hamiltonian;
    let (ansatz, electrons) = build_ansatz(&args.solve, &file)?;
    let k_max = args.solve.k_max.unwrap_or_else(|| reachable_levels(h.n_qubits(), electrons));
    let cfg = solve_config(&args.solve, objective_config(&args.solve, args.overlap, args.shots)?)?;
    let estimate = vqd_solve(h, ansatz.as_ref(), k_max, &cfg)?;
    Ok(VqdReport {
        config: echo("vqd", args),
        n_qubits: h.n_qubits(),
        n_terms: h.terms().len(),
        energies: estimate.energies(),
        estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub bond_length: f64,
    pub k: usize,
    pub energy: Option<f64>,
    pub exact: f64,
    pub abs_error: Option<f64>,
    pub converged: bool,
    pub out_of_order: bool,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct FixtureFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug)]
pub struct SpectrumTable<'a> {
    pub config: ConfigEcho<'a, SpectrumArgs>,
    pub rows: Vec<SpectrumRow>,
    pub failures: Vec<FixtureFailure>,
}

fn fixture_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "ham") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn spectrum_rows(args: &SpectrumArgs, path: &Path) -> Result<Vec<SpectrumRow>> {
    let file = load_hamiltonian(path)?;
    let bond_length = file
        .metadata_f64("bond_length_angstrom")
        .context("missing bond_length_angstrom metadata")?;
    let (ansatz, electrons) = build_ansatz(&args.solve, &file)?;
    let reference = reference_spectrum(&file, electrons)?;
    let k_max = k_max_for(&args.solve, &reference)?;
    let cfg = solve_config(&args.solve, objective_config(&args.solve, args.overlap, args.shots)?)?;
    let estimate = vqd_solve(&file.hamiltonian, ansatz.as_ref(), k_max, &cfg)?;
    Ok(estimate
        .stages
        .iter()
        .map(|s| {
            let exact = reference.eigenvalues[s.k];
            SpectrumRow {
                bond_length,
                k: s.k,
                energy: s.energy,
                exact,
                abs_error: s.energy.map(|e| (e - exact).abs()),
                converged: s.converged,
                out_of_order: s.out_of_order,
                error: s.error.clone(),
            }
        })
        .collect())
}

/// Solves every fixture with the same seed, so that a fixture's rows do not
/// depend on which other fixtures share the directory.
pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<SpectrumTable<'_>> {
    let paths = fixture_paths(&args.fixtures)?;
    ensure!(!paths.is_empty(), "no .ham files in {}", args.fixtures.display());
    let results: Vec<(PathBuf, Result<Vec<SpectrumRow>>)> = paths
        .into_par_iter()
        .map(|p| {
            let r = spectrum_rows(args, &p);
            (p, r)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (path, result) in results {
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => failures.push(FixtureFailure {
                path,
                error: format!("{e:#}"),
            }),
        }
    }
    rows.sort_by(|a, b| a.bond_length.total_cmp(&b.bond_length).then(a.k.cmp(&b.k)));
    Ok(SpectrumTable {
        config: echo("spectrum", args),
        rows,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    /// `term`, `overlap`, `total`, `bound` or `worst_case_ratio`.
    pub kind: &'static str,
    pub index: Option<usize>,
    pub label: String,
    /// `c_j` for terms, `β_i` for overlaps.
    pub weight: Option<f64>,
    /// Real-valued optimum before rounding; the ratio itself for
    /// `worst_case_ratio`.
    pub allocation: Option<f64>,
    pub shots: Option<u64>,
}

#[derive(Debug)]
pub struct BudgetTable<'a> {
    pub config: ConfigEcho<'a, BudgetArgs>,
    pub rows: Vec<BudgetRow>,
}

pub fn cmd_budget(args: &BudgetArgs) -> Result<BudgetTable<'_>> {
    let file = load_hamiltonian(&args.hamiltonian)?;
    let h = &file.hamiltonian;
    let betas = match &args.betas {
        Some(b) => {
            ensure!(
                args.k == 0 || args.k == b.len(),
                "--k {} disagrees with {} --betas values",
                args.k,
                b.len()
            );
            b.clone()
        }
        None => {
            if let BetaStrategy::HotellingShift(_) = args.beta {
                bail!("hotelling β depends on level energies; pass --betas explicitly");
            }
            vec![args.beta.beta(h, 0.0); args.k]
        }
    };
    let coeffs = h.coefficients();
    let model = VarianceModel::worst_case(coeffs.len(), betas.len());
    let plan = optimal_vqd_allocation(&coeffs, &betas, &model, args.epsilon)?;
    let mut rows = Vec::new();
    for (j, t) in h.terms().iter().enumerate() {
        rows.push(BudgetRow {
            kind: "term",
            index: Some(j),
            label: t.string.to_string(),
            weight: Some(t.coefficient),
            allocation: Some(plan.term_allocations[j]),
            shots: Some(plan.term_shots[j]),
        });
    }
    for (i, &b) in betas.iter().enumerate() {
        rows.push(BudgetRow {
            kind: "overlap",
            index: Some(i),
            label: format!("overlap_{i}"),
            weight: Some(b),
            allocation: Some(plan.overlap_allocations[i]),
            shots: Some(plan.overlap_shots[i]),
        });
    }
    rows.push(BudgetRow {
        kind: "total",
        index: None,
        label: "optimal".into(),
        weight: None,
        allocation: Some(plan.total_allocation()),
        shots: Some(plan.total_shots()),
    });
    rows.push(BudgetRow {
        kind: "bound",
        index: None,
        label: "(sum|c| + sum(beta)/2)^2 / eps^2".into(),
        weight: None,
        allocation: None,
        shots: Some(total_samples_bound(&coeffs, &betas, args.epsilon)?),
    });
    rows.push(BudgetRow {
        kind: "worst_case_ratio",
        index: Some(betas.len()),
        label: "(1+k)^2".into(),
        weight: None,
        allocation: Some(worst_case_ratio(betas.len())),
        shots: None,
    });
    Ok(BudgetTable {
        config: echo("budget", args),
        rows,
    })
}

/// One CSV line of the accumulation table; shot level and mode are written
/// as `exact`/`10000` and `standard`/`exact_prior`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccumulationCsvRow {
    pub k: usize,
    pub shots: String,
    pub n_runs: usize,
    pub n_discarded: usize,
    pub median_error: Option<f64>,
    pub bootstrap_stderr: Option<f64>,
    pub mode: String,
}

impl From<&AccumulationRow> for AccumulationCsvRow {
    fn from(r: &AccumulationRow) -> Self {
        Self {
            k: r.k,
            shots: r.shots.to_string(),
            n_runs: r.n_runs,
            n_discarded: r.n_discarded,
            median_error: r.median_error,
            bootstrap_stderr: r.bootstrap_stderr,
            mode: r.mode.to_string(),
        }
    }
}

#[derive(Debug)]
pub struct AccumulationTable<'a> {
    pub config: ConfigEcho<'a, AccumulateArgs>,
    pub rows: Vec<AccumulationRow>,
}

pub fn cmd_accumulate(args: &AccumulateArgs) -> Result<AccumulationTable<'_>> {
    let file = load_hamiltonian(&args.hamiltonian)?;
    let (ansatz, electrons) = build_ansatz(&args.solve, &file)?;
    let reference = reference_spectrum(&file, electrons)?;
    let sampler = args
        .overlap
        .sampler()
        .context("the experiment samples overlaps with `inverse` or `swap`")?;
    ensure!(!args.shots.is_empty(), "at least one shot level is required");
    let cfg = AccumulationConfig {
        k_max: k_max_for(&args.solve, &reference)?,
        shot_levels: args.shots.clone(),
        runs: args.runs,
        baseline_runs: args.baseline_runs,
        overlap: sampler,
        solve: solve_config(&args.solve, ObjectiveConfig::default())?,
        bootstrap_resamples: args.bootstrap_resamples,
        seed: args.solve.seed,
    };
    let report = error_accumulation_experiment(&file.hamiltonian, ansatz.as_ref(), &reference, &cfg)?;
    Ok(AccumulationTable {
        config: echo("accumulate", args),
        rows: report.rows,
    })
}

#[derive(Debug, Serialize)]
pub struct BoundsReport<'a> {
    pub config: ConfigEcho<'a, BoundsArgs>,
    pub bounds: AccumulationBounds,
    /// First-order shift of the deflated minimum per unit `ε₀` under the
    /// worst-case perturbation.
    pub taylor_first_order_coefficient: f64,
    /// Slope of the lower bound itself as `ε₀ → 0`.
    pub lower_bound_first_order_coefficient: f64,
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<BoundsReport<'_>> {
    let bounds = accumulation_bounds(args.e0, args.e1, args.beta0, args.eps0)?;
    Ok(BoundsReport {
        config: echo("bounds", args),
        bounds,
        taylor_first_order_coefficient: taylor_first_order_coefficient(args.e0, args.e1, args.beta0),
        lower_bound_first_order_coefficient: lower_bound_first_order_coefficient(args.e0, args.e1, args.beta0),
    })
}
