//! Exact diagonalization, error-accumulation bounds, degeneracy grouping,
//! bootstrap statistics and the sampled error-accumulation experiment.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::deflation::{
    vqd_solve, vqd_solve_with_priors, DeflationRecord, EnergyMode, ObjectiveConfig, OverlapMode, SolveConfig,
    SpectrumEstimate,
};
use crate::fermion::SymmetryOperator;
use crate::pauli::PauliHamiltonian;
use crate::rng;
use crate::shots::Shots;
use crate::sim::Statevector;
use crate::{Error, Result};

/// Largest register [`dense_matrix`] will build.
pub const DENSE_MATRIX_LIMIT: usize = 14;
/// Largest register [`exact_spectrum`] will diagonalize.
pub const EIGENSOLVE_LIMIT: usize = 12;

fn check_size(n_qubits: usize, limit: usize) -> Result<()> {
    if n_qubits > limit {
        return Err(Error::TooManyQubits { n_qubits, limit });
    }
    Ok(())
}

/// `Σ_j c_j P_j` as a dense `2^n × 2^n` matrix in the simulator's basis
/// ordering (qubit 0 is the most significant bit).
pub fn dense_matrix(h: &PauliHamiltonian) -> Result<DMatrix<Complex64>> {
    check_size(h.n_qubits(), DENSE_MATRIX_LIMIT)?;
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for t in h.terms() {
        let flip = t.string.flip_mask() as usize;
        let sign = t.string.sign_mask() as usize;
        let phase = t.string.y_phase() * t.coefficient;
        for x in 0..dim {
            let s = if (x & sign).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(x ^ flip, x)] += phase * s;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`, as full-register states.
    pub eigenvectors: Vec<Statevector>,
}

impl ExactSpectrum {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest `‖H v − E v‖` over all pairs.
    pub fn max_residual(&self, h: &PauliHamiltonian) -> Result<f64> {
        let m = dense_matrix(h)?;
        let mut worst: f64 = 0.0;
        for (e, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let v = nalgebra::DVector::from_column_slice(v.amplitudes());
            worst = worst.max((&m * &v - &v * Complex64::new(*e, 0.0)).norm());
        }
        Ok(worst)
    }
}

fn eigen_of(m: DMatrix<Complex64>, n_qubits: usize, embed: &[usize]) -> Result<ExactSpectrum> {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = 1usize << n_qubits;
    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut eigenvectors = Vec::with_capacity(order.len());
    for i in order {
        eigenvalues.push(eig.eigenvalues[i]);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (row, &x) in embed.iter().enumerate() {
            amps[x] = eig.eigenvectors[(row, i)];
        }
        eigenvectors.push(Statevector::from_amplitudes(n_qubits, amps)?);
    }
    Ok(ExactSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Full Hermitian eigendecomposition.
pub fn exact_spectrum(h: &PauliHamiltonian) -> Result<ExactSpectrum> {
    check_size(h.n_qubits(), EIGENSOLVE_LIMIT)?;
    let all: Vec<usize> = (0..1usize << h.n_qubits()).collect();
    eigen_of(dense_matrix(h)?, h.n_qubits(), &all)
}

/// Eigendecomposition restricted to computational basis states holding
/// exactly `count` electrons of kind `kind`. Valid as a spectrum of `h` when
/// `h` conserves that number.
pub fn sector_spectrum(h: &PauliHamiltonian, kind: SymmetryOperator, count: usize) -> Result<ExactSpectrum> {
    check_size(h.n_qubits(), EIGENSOLVE_LIMIT)?;
    let n = h.n_qubits();
    let mask = kind.mask(n);
    let sector: Vec<usize> = (0..1usize << n)
        .filter(|&x| (x as u64 & mask).count_ones() as usize == count)
        .collect();
    if sector.is_empty() {
        return Err(Error::InvalidArgument(format!("no basis states with {count} electrons")));
    }
    let full = dense_matrix(h)?;
    let sub = DMatrix::from_fn(sector.len(), sector.len(), |r, c| full[(sector[r], sector[c])]);
    eigen_of(sub, n, &sector)
}

/// Bracket on the minimum of `H̃₁ = H + β₀|ψ̃₀⟩⟨ψ̃₀|` when the recorded ground
/// state has overlap deficit `ε₀ = 1 − |⟨ψ̃₀|ψ₀⟩|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccumulationBounds {
    pub e0: f64,
    pub e1: f64,
    pub beta0: f64,
    pub eps0: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `upper = E₁ + β₀ε₀`, `lower = E₁ − ε₀β₀² / (β₀(1 − ε₀) − (E₁ − E₀))`.
/// Requires `β₀ > (E₁ − E₀)/(1 − ε₀)`.
pub fn accumulation_bounds(e0: f64, e1: f64, beta0: f64, eps0: f64) -> Result<AccumulationBounds> {
    if !(0.0..1.0).contains(&eps0) {
        return Err(Error::InvalidArgument(format!("eps0 must lie in [0, 1), got {eps0}")));
    }
    let gap = e1 - e0;
    let threshold = gap / (1.0 - eps0);
    if beta0.partial_cmp(&threshold) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::BetaBelowThreshold { beta0, threshold });
    }
    Ok(AccumulationBounds {
        e0,
        e1,
        beta0,
        eps0,
        lower: e1 - eps0 * beta0 * beta0 / (beta0 * (1.0 - eps0) - gap),
        upper: e1 + beta0 * eps0,
    })
}

/// `β₀Δ/(β₀ − Δ)` with `Δ = E₁ − E₀`: the first-order coefficient of the
/// downward shift of `min H̃₁` for the worst-case perturbation (the recorded
/// state leaning toward `ψ₁`).
pub fn taylor_first_order_coefficient(e0: f64, e1: f64, beta0: f64) -> f64 {
    let gap = e1 - e0;
    beta0 * gap / (beta0 - gap)
}

/// `lim_{ε₀→0} (E₁ − lower)/ε₀ = β₀²/(β₀ − Δ)`.
pub fn lower_bound_first_order_coefficient(e0: f64, e1: f64, beta0: f64) -> f64 {
    beta0 * beta0 / (beta0 - (e1 - e0))
}

/// Sorts `energies` and joins neighbours closer than `tol` (single linkage).
pub fn degeneracy_grouping(energies: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for e in sorted {
        match groups.last_mut() {
            Some(g) if e - g.last().copied().unwrap_or(e) <= tol => g.push(e),
            _ => groups.push(vec![e]),
        }
    }
    Ok(groups)
}

pub fn group_sizes(groups: &[Vec<f64>]) -> Vec<usize> {
    groups.iter().map(Vec::len).collect()
}

/// Median of a nonempty sample (mean of the middle pair for even sizes).
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

fn resample_median<R: Rng + ?Sized>(samples: &[f64], rng: &mut R, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend((0..samples.len()).map(|_| samples[rng.random_range(0..samples.len())]));
    median(scratch).expect("nonempty")
}

fn check_bootstrap(samples: &[f64], resamples: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("bootstrap needs at least one sample".into()));
    }
    if resamples < 100 {
        return Err(Error::InvalidArgument(format!("at least 100 resamples required, got {resamples}")));
    }
    Ok(())
}

/// Standard deviation of the median over with-replacement resamples.
pub fn bootstrap_median_stderr(samples: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    check_bootstrap(samples, resamples)?;
    let mut r = rng::stream(seed, &[]);
    let mut scratch = Vec::with_capacity(samples.len());
    let medians: Vec<f64> = (0..resamples)
        .map(|_| resample_median(samples, &mut r, &mut scratch))
        .collect();
    let mean = medians.iter().sum::<f64>() / resamples as f64;
    let var = medians.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(var.sqrt())
}

/// Fraction of paired bootstrap resamples in which `median(a*) ≤ median(b*)`.
pub fn bootstrap_median_le_fraction(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    check_bootstrap(a, resamples)?;
    check_bootstrap(b, resamples)?;
    let mut r = rng::stream(seed, &[]);
    let (mut sa, mut sb) = (Vec::new(), Vec::new());
    let wins = (0..resamples)
        .filter(|_| resample_median(a, &mut r, &mut sa) <= resample_median(b, &mut r, &mut sb))
        .count();
    Ok(wins as f64 / resamples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShotLevel {
    Exact,
    Shots(u64),
}

impl std::fmt::Display for ShotLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShotLevel::Exact => f.write_str("exact"),
            ShotLevel::Shots(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccumulationMode {
    /// Plain VQD: every earlier level is a sampled estimate.
    Standard,
    /// Earlier levels are exact eigenvectors; only level `k` is estimated.
    ExactPrior,
}

impl std::fmt::Display for AccumulationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AccumulationMode::Standard => "standard",
            AccumulationMode::ExactPrior => "exact_prior",
        })
    }
}

/// Which sampled overlap estimator the experiment uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapSampler {
    #[default]
    InverseCircuit,
    DestructiveSwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationConfig {
    pub k_max: usize,
    /// `M` shots per Hamiltonian term and per overlap term.
    pub shot_levels: Vec<ShotLevel>,
    pub runs: usize,
    /// Runs of the exact-prior baseline per level and `k`.
    pub baseline_runs: usize,
    pub overlap: OverlapSampler,
    /// Optimizer, restarts and β; its objective and seed are overwritten.
    pub solve: SolveConfig,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for AccumulationConfig {
    fn default() -> Self {
        Self {
            k_max: 6,
            shot_levels: vec![ShotLevel::Shots(10_000), ShotLevel::Shots(100_000)],
            runs: 30,
            baseline_runs: 30,
            overlap: OverlapSampler::InverseCircuit,
            solve: SolveConfig::default(),
            bootstrap_resamples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationRow {
    pub k: usize,
    pub shots: ShotLevel,
    pub n_runs: usize,
    pub n_discarded: usize,
    /// `None` when every run was discarded at this level.
    pub median_error: Option<f64>,
    pub bootstrap_stderr: Option<f64>,
    pub mode: AccumulationMode,
}

/// Per-run absolute errors behind one table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub k: usize,
    pub shots: ShotLevel,
    pub mode: AccumulationMode,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationReport {
    pub rows: Vec<AccumulationRow>,
    pub samples: Vec<ErrorSample>,
}

impl AccumulationReport {
    pub fn row(&self, mode: AccumulationMode, shots: ShotLevel, k: usize) -> Option<&AccumulationRow> {
        self.rows.iter().find(|r| r.mode == mode && r.shots == shots && r.k == k)
    }

    pub fn errors(&self, mode: AccumulationMode, shots: ShotLevel, k: usize) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|s| s.mode == mode && s.shots == shots && s.k == k)
            .map(|s| s.errors.as_slice())
    }
}

fn objective_for(level: ShotLevel, sampler: OverlapSampler) -> ObjectiveConfig {
    match level {
        ShotLevel::Exact => ObjectiveConfig::default(),
        ShotLevel::Shots(m) => ObjectiveConfig {
            energy: EnergyMode::Sampled(Shots::Uniform(m)),
            overlap: match sampler {
                OverlapSampler::InverseCircuit => OverlapMode::InverseCircuit(Shots::Uniform(m)),
                OverlapSampler::DestructiveSwap => OverlapMode::DestructiveSwap(Shots::Uniform(m)),
            },
            ..ObjectiveConfig::default()
        },
    }
}

/// Usable runs: every stage succeeded and none was flagged out of order.
fn usable(est: &SpectrumEstimate) -> bool {
    est.all_succeeded() && !est.any_out_of_order()
}

/// Runs sampled VQD repeatedly at each shot level and tabulates the median
/// absolute error per level `k` against `reference` (ascending exact
/// eigenvalues with eigenvectors). The exact-prior baseline solves only
/// stage `k`, with the exact eigenvectors `0..k` as records.
pub fn error_accumulation_experiment(
    h: &PauliHamiltonian,
    ansatz: &dyn Ansatz,
    reference: &ExactSpectrum,
    cfg: &AccumulationConfig,
) -> Result<AccumulationReport> {
    if cfg.k_max > reference.dimension() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {} exceeds the {} reference levels",
            cfg.k_max,
            reference.dimension()
        )));
    }
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for (li, &level) in cfg.shot_levels.iter().enumerate() {
        let objective = objective_for(level, cfg.overlap);
        let solve_cfg = |seed: u64| SolveConfig {
            objective: objective.clone(),
            seed,
            ..cfg.solve.clone()
        };

        // Standard VQD.
        let runs: Vec<Result<SpectrumEstimate>> = (0..cfg.runs as u64)
            .into_par_iter()
            .map(|run| {
                let seed = rng::derive_seed(cfg.seed, &[0, li as u64, run]);
                vqd_solve(h, ansatz, cfg.k_max, &solve_cfg(seed))
            })
            .collect();
        let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
        let kept: Vec<&SpectrumEstimate> = runs.iter().filter(|e| usable(e)).collect();
        for k in 0..cfg.k_max {
            let errors: Vec<f64> = kept
                .iter()
                .filter_map(|e| e.stages[k].energy)
                .map(|e| (e - reference.eigenvalues[k]).abs())
                .collect();
            push_level(&mut rows, &mut samples, cfg, AccumulationMode::Standard, level, k, cfg.runs, errors, li)?;
        }

        // Exact-prior baseline.
        for k in 0..cfg.k_max {
            let runs: Vec<Result<SpectrumEstimate>> = (0..cfg.baseline_runs as u64)
                .into_par_iter()
                .map(|run| {
                    let seed = rng::derive_seed(cfg.seed, &[1, li as u64, k as u64, run]);
                    let scfg = solve_cfg(seed);
                    let priors = (0..k)
                        .map(|i| {
                            let e = reference.eigenvalues[i];
                            DeflationRecord::from_state(i, reference.eigenvectors[i].clone(), e, scfg.beta.beta(h, e))
                        })
                        .collect();
                    vqd_solve_with_priors(h, ansatz, k + 1, &scfg, priors)
                })
                .collect();
            let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
            let errors: Vec<f64> = runs
                .iter()
                .filter(|e| usable(e))
                .filter_map(|e| e.stages[0].energy)
                .map(|e| (e - reference.eigenvalues[k]).abs())
                .collect();
            push_level(&mut rows, &mut samples, cfg, AccumulationMode::ExactPrior, level, k, cfg.baseline_runs, errors, li)?;
        }
    }
    Ok(AccumulationReport { rows, samples })
}

#[allow(clippy::too_many_arguments)]
fn push_level(
    rows: &mut Vec<AccumulationRow>,
    samples: &mut Vec<ErrorSample>,
    cfg: &AccumulationConfig,
    mode: AccumulationMode,
    shots: ShotLevel,
    k: usize,
    n_runs: usize,
    errors: Vec<f64>,
    level_index: usize,
) -> Result<()> {
    let stderr = if errors.is_empty() {
        None
    } else {
        let seed = rng::derive_seed(cfg.seed, &[2, mode as u64, level_index as u64, k as u64]);
        Some(bootstrap_median_stderr(&errors, cfg.bootstrap_resamples, seed)?)
    };
    rows.push(AccumulationRow {
        k,
        shots,
        n_runs,
        n_discarded: n_runs - errors.len(),
        median_error: median(&errors),
        bootstrap_stderr: stderr,
        mode,
    });
    samples.push(ErrorSample { k, shots, mode, errors });
    Ok(())
}
