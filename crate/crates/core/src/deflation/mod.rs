//! Variational quantum deflation.
//!
//! Stage `k` minimizes
//!
//! ```text
//! F(λ) = ⟨ψ(λ)|H|ψ(λ)⟩ + Σ_{i<k} β_i |⟨ψ(λ)|ψ_i⟩|²
//! ```
//!
//! which, for exact records, is the ground-state problem of
//! `H_k = H + Σ_{i<k} β_i |ψ_i⟩⟨ψ_i|` (Hotelling deflation). Its minimum is
//! `E_k` as long as every `β_i > E_k − E_i`. Projection deflation instead
//! minimizes `⟨A_k ψ|(H − E′)|A_k ψ⟩` with `A_k = Π_{i<k}(1 − |ψ_i⟩⟨ψ_i|)`,
//! whose minimizer never overlaps the records no matter how accurate they are.
//!
//! Every term of the objective can be evaluated exactly or by sampling; the
//! choice lives in [`ObjectiveConfig`]. [`vqd_solve`] runs the stages in
//! order, [`gamma_doubling_search`] handles the case where no sufficient `β`
//! is known in advance.

mod nelder_mead;

pub use nelder_mead::{nelder_mead, InitialSimplex, NelderMeadOptions, NelderMeadResult};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::degeneracy_grouping;
use crate::ansatz::Ansatz;
use crate::fermion::{electrons_in_bitstring, SymmetryOperator};
use crate::overlap::{destructive_swap_with, exact_overlap, hf_return_counts_with, hit_fraction_with};
use crate::pauli::PauliHamiltonian;
use crate::rng::{self, StreamRng};
use crate::shots::Shots;
use crate::sim::{
    apply_circuit, expectation_hamiltonian, inner_product, sample_bitstrings_with,
    sampled_expectation_hamiltonian_with, Statevector,
};
use crate::{Error, Result};

/// A previously found eigenpair estimate.
#[derive(Debug, Clone)]
pub struct DeflationRecord {
    pub index: usize,
    /// Parameters that re-prepare `state`; `None` for states supplied
    /// directly (for example exact eigenvectors).
    pub params: Option<Vec<f64>>,
    pub state: Statevector,
    pub energy: f64,
    pub beta: f64,
}

impl DeflationRecord {
    pub fn from_params(index: usize, ansatz: &dyn Ansatz, params: Vec<f64>, energy: f64, beta: f64) -> Result<Self> {
        let state = ansatz.prepare(&params)?;
        Ok(Self {
            index,
            params: Some(params),
            state,
            energy,
            beta,
        })
    }

    pub fn from_state(index: usize, state: Statevector, energy: f64, beta: f64) -> Self {
        Self {
            index,
            params: None,
            state,
            energy,
            beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaStrategy {
    Fixed(f64),
    /// `β = 2 Σ|c_j|`, which exceeds any spectral gap.
    SpectralBound,
    /// `β_i = E′ − E_i`.
    HotellingShift(f64),
}

impl Default for BetaStrategy {
    fn default() -> Self {
        BetaStrategy::Fixed(3.0)
    }
}

impl BetaStrategy {
    pub fn beta(&self, h: &PauliHamiltonian, energy: f64) -> f64 {
        match *self {
            BetaStrategy::Fixed(b) => b,
            BetaStrategy::SpectralBound => h.spectral_range_bound(),
            BetaStrategy::HotellingShift(shift) => shift - energy,
        }
    }
}

/// The smallest `β_i` that still leaves `E_k` as the minimum; callers must
/// exceed it strictly.
pub fn min_beta_required(e_k: f64, e_i: f64) -> f64 {
    e_k - e_i
}

/// Quadratic penalty `μ (⟨C⟩ − c)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryConstraint {
    pub operator: SymmetryOperator,
    pub target: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnergyMode {
    Exact,
    /// Per-term shots, indexed like the Hamiltonian's terms.
    Sampled(Shots),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OverlapMode {
    Exact,
    /// Shots indexed by record.
    InverseCircuit(Shots),
    DestructiveSwap(Shots),
    SymmetryFiltered { shots: Shots, flip_probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstraintMode {
    Exact,
    /// Mean electron count over this many computational-basis shots.
    Sampled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeflationMethod {
    Hotelling,
    /// `⟨A ψ|(H − shift)|A ψ⟩`. With `approximate`, `A` is replaced by its
    /// first-order form `1 − Σ|ψ_i⟩⟨ψ_i|`.
    Projection { shift: f64, approximate: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub energy: EnergyMode,
    pub overlap: OverlapMode,
    pub constraints: Vec<SymmetryConstraint>,
    pub constraint_mode: ConstraintMode,
    pub method: DeflationMethod,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            energy: EnergyMode::Exact,
            overlap: OverlapMode::Exact,
            constraints: Vec::new(),
            constraint_mode: ConstraintMode::Exact,
            method: DeflationMethod::Hotelling,
        }
    }
}

impl ObjectiveConfig {
    pub fn is_exact(&self) -> bool {
        self.energy == EnergyMode::Exact
            && self.overlap == OverlapMode::Exact
            && (self.constraints.is_empty() || self.constraint_mode == ConstraintMode::Exact)
    }

    /// The same objective with every estimator replaced by its exact value.
    pub fn exact_version(&self) -> Self {
        Self {
            energy: EnergyMode::Exact,
            overlap: OverlapMode::Exact,
            constraints: self.constraints.clone(),
            constraint_mode: ConstraintMode::Exact,
            method: self.method,
        }
    }

    fn validate(&self, h: &PauliHamiltonian, n_records: usize) -> Result<()> {
        if let EnergyMode::Sampled(shots) = &self.energy {
            shots.validate(h.terms().len())?;
        }
        match &self.overlap {
            OverlapMode::Exact => {}
            OverlapMode::InverseCircuit(s) | OverlapMode::DestructiveSwap(s) => s.validate(n_records)?,
            OverlapMode::SymmetryFiltered { shots, .. } => shots.validate(n_records)?,
        }
        if let ConstraintMode::Sampled(0) = self.constraint_mode {
            return Err(Error::InvalidArgument("constraint shots must be at least 1".into()));
        }
        if let Some(c) = self.constraints.iter().find(|c| !(c.weight >= 0.0 && c.weight.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "symmetry weight must be finite and nonnegative, got {}",
                c.weight
            )));
        }
        if matches!(self.method, DeflationMethod::Projection { .. }) && self.energy != EnergyMode::Exact {
            return Err(Error::InvalidArgument(
                "projection deflation is evaluated exactly; use exact energy mode".into(),
            ));
        }
        Ok(())
    }
}

/// The parts of one objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `⟨H⟩`, or the projected energy under projection deflation.
    pub energy: f64,
    /// `Σ β_i · overlap_i` (zero under projection deflation).
    pub deflation: f64,
    /// `Σ μ_i (⟨C_i⟩ − c_i)²`.
    pub symmetry: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.energy + self.deflation + self.symmetry
    }
}

pub fn energy_term<R: Rng + ?Sized>(
    state: &Statevector,
    h: &PauliHamiltonian,
    mode: &EnergyMode,
    rng: &mut R,
) -> Result<f64> {
    match mode {
        EnergyMode::Exact => expectation_hamiltonian(state, h),
        EnergyMode::Sampled(shots) => sampled_expectation_hamiltonian_with(state, h, |j| shots.for_term(j), rng),
    }
}

/// Overlap of the trial state with `record` under `mode`. `slot` selects the
/// per-record shot count.
pub fn record_overlap<R: Rng + ?Sized>(
    record: &DeflationRecord,
    slot: usize,
    trial: &Statevector,
    ansatz: &dyn Ansatz,
    mode: &OverlapMode,
    rng: &mut R,
) -> Result<f64> {
    match mode {
        OverlapMode::Exact => exact_overlap(&record.state, trial),
        // Only the all-zero probability of R_i† ψ matters, and it equals
        // |⟨ψ_i|ψ⟩|² whether or not the record came from a circuit.
        OverlapMode::InverseCircuit(shots) => {
            let p = inner_product(&record.state, trial)?.norm_sqr();
            Ok(hit_fraction_with(p, shots.for_term(slot), rng))
        }
        OverlapMode::DestructiveSwap(shots) => destructive_swap_with(&record.state, trial, shots.for_term(slot), rng),
        OverlapMode::SymmetryFiltered {
            shots,
            flip_probability,
        } => {
            let reference = ansatz.reference().ok_or_else(|| Error::EstimatorUnavailable {
                estimator: "symmetry-filtered",
                reason: format!("{} has no Hartree–Fock reference", ansatz.describe()),
            })?;
            let params = record.params.as_ref().ok_or_else(|| Error::EstimatorUnavailable {
                estimator: "symmetry-filtered",
                reason: format!("record {} has no circuit parameters", record.index),
            })?;
            let rotated = apply_circuit(&ansatz.variational_circuit(params)?.inverse(), trial)?;
            hf_return_counts_with(
                &rotated,
                &reference.state,
                reference.n_electrons,
                shots.for_term(slot),
                *flip_probability,
                rng,
            )?
            .filtered()
        }
    }
}

pub fn symmetry_penalty<R: Rng + ?Sized>(
    state: &Statevector,
    constraints: &[SymmetryConstraint],
    mode: ConstraintMode,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    for c in constraints {
        if c.weight == 0.0 {
            continue;
        }
        let value = match mode {
            ConstraintMode::Exact => c.operator.expectation(state),
            ConstraintMode::Sampled(shots) => {
                let n = state.n_qubits();
                let counts = sample_bitstrings_with(state, shots, rng);
                counts
                    .iter()
                    .map(|(x, k)| electrons_in_bitstring(x, n, c.operator) as f64 * k as f64)
                    .sum::<f64>()
                    / shots as f64
            }
        };
        total += c.weight * (value - c.target).powi(2);
    }
    Ok(total)
}

/// `A ψ` with `A = Π_{i<k}(1 − |ψ_i⟩⟨ψ_i|)` (product applied right to left)
/// or its first-order approximation.
pub fn project_out(state: &Statevector, records: &[DeflationRecord], approximate: bool) -> Result<Vec<Complex64>> {
    let mut v: Vec<Complex64> = state.amplitudes().to_vec();
    let overlap = |r: &DeflationRecord, v: &[Complex64]| -> Complex64 {
        r.state.amplitudes().iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    if approximate {
        let coeffs: Vec<_> = records.iter().map(|r| overlap(r, state.amplitudes())).collect();
        for (r, c) in records.iter().zip(coeffs) {
            for (x, a) in v.iter_mut().zip(r.state.amplitudes()) {
                *x -= c * a;
            }
        }
    } else {
        for r in records.iter().rev() {
            let c = overlap(r, &v);
            for (x, a) in v.iter_mut().zip(r.state.amplitudes()) {
                *x -= c * a;
            }
        }
    }
    Ok(v)
}

/// `⟨A ψ|(H − shift)|A ψ⟩`, exact at the statevector level.
pub fn projection_objective(
    state: &Statevector,
    records: &[DeflationRecord],
    h: &PauliHamiltonian,
    shift: f64,
    approximate: bool,
) -> Result<f64> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: state.n_qubits(),
        });
    }
    for r in records {
        if r.state.n_qubits() != state.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: state.n_qubits(),
                found: r.state.n_qubits(),
            });
        }
    }
    let projected = project_out(state, records, approximate)?;
    let norm_sqr: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if norm_sqr == 0.0 {
        return Ok(0.0);
    }
    // ⟨v|H|v⟩ through a normalized copy, rescaled by ‖v‖².
    let unit = Statevector::from_amplitudes(state.n_qubits(), projected)?;
    Ok(norm_sqr * (expectation_hamiltonian(&unit, h)? - shift))
}

/// All objective terms for an already-prepared trial state.
pub fn objective_terms<R: Rng + ?Sized>(
    state: &Statevector,
    records: &[DeflationRecord],
    h: &PauliHamiltonian,
    ansatz: &dyn Ansatz,
    cfg: &ObjectiveConfig,
    rng: &mut R,
) -> Result<ObjectiveTerms> {
    let (energy, deflation) = match cfg.method {
        DeflationMethod::Hotelling => {
            let energy = energy_term(state, h, &cfg.energy, rng)?;
            let mut deflation = 0.0;
            for (slot, r) in records.iter().enumerate() {
                deflation += r.beta * record_overlap(r, slot, state, ansatz, &cfg.overlap, rng)?;
            }
            (energy, deflation)
        }
        DeflationMethod::Projection { shift, approximate } => {
            (projection_objective(state, records, h, shift, approximate)?, 0.0)
        }
    };
    let symmetry = symmetry_penalty(state, &cfg.constraints, cfg.constraint_mode, rng)?;
    Ok(ObjectiveTerms {
        energy,
        deflation,
        symmetry,
    })
}

/// `⟨H⟩ + Σ β_i · overlap_i` at `params`, ignoring symmetry constraints.
pub fn objective_f<R: Rng + ?Sized>(
    params: &[f64],
    ansatz: &dyn Ansatz,
    records: &[DeflationRecord],
    h: &PauliHamiltonian,
    cfg: &ObjectiveConfig,
    rng: &mut R,
) -> Result<f64> {
    let unconstrained = ObjectiveConfig {
        constraints: Vec::new(),
        ..cfg.clone()
    };
    symmetry_penalized_objective(params, ansatz, records, h, &unconstrained, rng)
}

/// [`objective_f`] plus the configured symmetry penalties.
pub fn symmetry_penalized_objective<R: Rng + ?Sized>(
    params: &[f64],
    ansatz: &dyn Ansatz,
    records: &[DeflationRecord],
    h: &PauliHamiltonian,
    cfg: &ObjectiveConfig,
    rng: &mut R,
) -> Result<f64> {
    if ansatz.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: ansatz.n_qubits(),
        });
    }
    cfg.validate(h, records.len())?;
    let state = ansatz.prepare(params)?;
    Ok(objective_terms(&state, records, h, ansatz, cfg, rng)?.total())
}

/// Everything `vqd_solve` needs besides the Hamiltonian and ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub objective: ObjectiveConfig,
    pub beta: BetaStrategy,
    pub optimizer: NelderMeadOptions,
    /// Independent random starts per stage; the best final objective wins.
    pub restarts: usize,
    /// Starting parameters are drawn from `U[−init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
}

/// Edge length of the initial simplex used by [`SolveConfig::default`].
pub const DEFAULT_SIMPLEX_STEP: f64 = 0.2;

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveConfig::default(),
            beta: BetaStrategy::default(),
            optimizer: NelderMeadOptions::default()
                .with_initial_simplex(InitialSimplex::Absolute(DEFAULT_SIMPLEX_STEP)),
            restarts: 2,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Outcome of one stage's minimization before a record is formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMinimum {
    pub params: Vec<f64>,
    /// The optimizer's best objective value (as estimated, possibly noisy).
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: Vec<RestartSummary>,
}

/// Stream-path tags keeping the RNG uses of a solve apart.
const TAG_INIT: u64 = 0;
const TAG_OBJECTIVE: u64 = 1;
const TAG_REPORT: u64 = 2;

/// Runs `cfg.restarts` independent minimizations of the stage objective and
/// keeps the best. `stream` namespaces the RNG so distinct callers never share
/// random numbers.
pub fn solve_stage(
    h: &PauliHamiltonian,
    ansatz: &dyn Ansatz,
    records: &[DeflationRecord],
    cfg: &SolveConfig,
    stream: &[u64],
) -> Result<StageMinimum> {
    if ansatz.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: ansatz.n_qubits(),
        });
    }
    cfg.objective.validate(h, records.len())?;
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let runs: Vec<Result<NelderMeadResult>> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let path = |tag: u64| -> Vec<u64> { stream.iter().copied().chain([r, tag]).collect() };
            let mut init = rng::stream(cfg.seed, &path(TAG_INIT));
            let x0: Vec<f64> = (0..ansatz.n_params())
                .map(|_| init.random_range(-cfg.init_scale..=cfg.init_scale))
                .collect();
            let mut noise: StreamRng = rng::stream(cfg.seed, &path(TAG_OBJECTIVE));
            let loss = |p: &[f64]| -> Result<f64> {
                let state = ansatz.prepare(p)?;
                Ok(objective_terms(&state, records, h, ansatz, &cfg.objective, &mut noise)?.total())
            };
            nelder_mead(loss, &x0, &cfg.optimizer)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let restarts = runs
        .iter()
        .map(|r| RestartSummary {
            objective: r.fun,
            iterations: r.iterations,
            evaluations: r.evaluations,
            converged: r.converged,
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.fun < a.fun { b } else { a })
        .expect("at least one restart");
    Ok(StageMinimum {
        params: best.x,
        objective: best.fun,
        converged: best.converged,
        iterations: best.iterations,
        evaluations: best.evaluations,
        restarts,
    })
}

/// Per-stage output of [`vqd_solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub k: usize,
    /// Reported energy: exact `⟨H⟩` in exact mode, a fresh sampled `⟨H⟩`
    /// at the optimum otherwise.
    pub energy: Option<f64>,
    /// Exact `⟨H⟩` at the optimum, for diagnostics.
    pub exact_energy: Option<f64>,
    /// Objective value at which the optimizer stopped.
    pub objective: Option<f64>,
    /// The same objective re-evaluated with exact estimators.
    pub exact_objective: Option<f64>,
    pub beta: Option<f64>,
    pub params: Option<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: Vec<RestartSummary>,
    /// Energy fell more than `2·fatol` below the previous stage's.
    pub out_of_order: bool,
    pub error: Option<String>,
}

impl StageResult {
    fn failed(k: usize, error: &Error) -> Self {
        Self {
            k,
            energy: None,
            exact_energy: None,
            objective: None,
            exact_objective: None,
            beta: None,
            params: None,
            converged: false,
            iterations: 0,
            evaluations: 0,
            restarts: Vec::new(),
            out_of_order: false,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub ansatz: String,
    pub stages: Vec<StageResult>,
    #[serde(skip)]
    pub records: Vec<DeflationRecord>,
}

impl SpectrumEstimate {
    /// Energies in discovery order; failed stages are `None`.
    pub fn energies(&self) -> Vec<Option<f64>> {
        self.stages.iter().map(|s| s.energy).collect()
    }

    /// Energies of the successful stages, ascending.
    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.stages.iter().filter_map(|s| s.energy).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Single-linkage groups of [`Self::sorted_energies`].
    pub fn degeneracy_groups(&self, tol: f64) -> Result<Vec<Vec<f64>>> {
        degeneracy_grouping(&self.sorted_energies(), tol)
    }

    pub fn any_out_of_order(&self) -> bool {
        self.stages.iter().any(|s| s.out_of_order)
    }

    pub fn all_succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.error.is_none())
    }
}

/// Finds `k_max` levels in order, each stage deflating all earlier ones.
pub fn vqd_solve(h: &PauliHamiltonian, ansatz: &dyn Ansatz, k_max: usize, cfg: &SolveConfig) -> Result<SpectrumEstimate> {
    vqd_solve_with_priors(h, ansatz, k_max, cfg, Vec::new())
}

/// [`vqd_solve`] starting from caller-supplied records for the first levels;
/// stages begin at `priors.len()`.
pub fn vqd_solve_with_priors(
    h: &PauliHamiltonian,
    ansatz: &dyn Ansatz,
    k_max: usize,
    cfg: &SolveConfig,
    priors: Vec<DeflationRecord>,
) -> Result<SpectrumEstimate> {
    if ansatz.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            found: ansatz.n_qubits(),
        });
    }
    let dim = 1usize << h.n_qubits();
    if k_max > dim {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} exceeds the Hilbert-space dimension {dim}"
        )));
    }
    let mut records = priors;
    let mut stages = Vec::new();
    let mut previous_energy: Option<f64> = records.last().map(|r| r.energy);
    let exact_cfg = cfg.objective.exact_version();
    for k in records.len()..k_max {
        let stage = (|| -> Result<(StageResult, DeflationRecord)> {
            let min = solve_stage(h, ansatz, &records, cfg, &[k as u64])?;
            let state = ansatz.prepare(&min.params)?;
            let exact_energy = expectation_hamiltonian(&state, h)?;
            let mut report = rng::stream(cfg.seed, &[k as u64, u64::MAX, TAG_REPORT]);
            let energy = energy_term(&state, h, &cfg.objective.energy, &mut report)?;
            let exact_objective =
                objective_terms(&state, &records, h, ansatz, &exact_cfg, &mut report)?.total();
            let beta = cfg.beta.beta(h, energy);
            let out_of_order = previous_energy.is_some_and(|p| energy < p - 2.0 * cfg.optimizer.fatol);
            let record = DeflationRecord {
                index: k,
                params: Some(min.params.clone()),
                state,
                energy,
                beta,
            };
            Ok((
                StageResult {
                    k,
                    energy: Some(energy),
                    exact_energy: Some(exact_energy),
                    objective: Some(min.objective),
                    exact_objective: Some(exact_objective),
                    beta: Some(beta),
                    params: Some(min.params),
                    converged: min.converged,
                    iterations: min.iterations,
                    evaluations: min.evaluations,
                    restarts: min.restarts,
                    out_of_order,
                    error: None,
                },
                record,
            ))
        })();
        match stage {
            Ok((result, record)) => {
                previous_energy = Some(record.energy);
                records.push(record);
                stages.push(result);
            }
            Err(e) => stages.push(StageResult::failed(k, &e)),
        }
    }
    Ok(SpectrumEstimate {
        ansatz: ansatz.describe(),
        stages,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaAttempt {
    pub gamma: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearch {
    pub energy: f64,
    pub params: Vec<f64>,
    pub gamma_final: f64,
    /// Number of times `γ` was doubled.
    pub doublings: usize,
    pub attempts: Vec<GammaAttempt>,
}

/// Default cap on the number of doublings.
pub const GAMMA_REPEAT_CAP: usize = 20;

/// Finds level `k = records.len()` without a known sufficient `β`: sets
/// `β_i = γ − E_i`, and while the stage minimum sits on the plateau
/// `F* ≥ γ − 10·fatol` (the value every already-found state attains), doubles
/// `γ`. Requires `γ₀ > 0` so that doubling increases it.
pub fn gamma_doubling_search(
    h: &PauliHamiltonian,
    ansatz: &dyn Ansatz,
    records: &[DeflationRecord],
    gamma0: f64,
    cfg: &SolveConfig,
    repeat_cap: usize,
) -> Result<GammaSearch> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma0 must be positive for doubling to increase it, got {gamma0}"
        )));
    }
    let tol_detect = 10.0 * cfg.optimizer.fatol;
    let k = records.len() as u64;
    let mut gamma = gamma0;
    let mut attempts = Vec::new();
    for doublings in 0..=repeat_cap {
        let shifted: Vec<DeflationRecord> = records
            .iter()
            .map(|r| DeflationRecord {
                beta: gamma - r.energy,
                ..r.clone()
            })
            .collect();
        let min = solve_stage(h, ansatz, &shifted, cfg, &[k, doublings as u64])?;
        attempts.push(GammaAttempt {
            gamma,
            objective: min.objective,
        });
        if min.objective < gamma - tol_detect {
            let state = ansatz.prepare(&min.params)?;
            let mut report = rng::stream(cfg.seed, &[k, doublings as u64, u64::MAX, TAG_REPORT]);
            let energy = energy_term(&state, h, &cfg.objective.energy, &mut report)?;
            return Ok(GammaSearch {
                energy,
                params: min.params,
                gamma_final: gamma,
                doublings,
                attempts,
            });
        }
        gamma *= 2.0;
    }
    Err(Error::RepeatCapExceeded { cap: repeat_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::UniversalAnsatz;
    use crate::fermion::hartree_fock_state;
    use crate::pauli::parse_hamiltonian;
    use crate::sim::bits_from_str;

    fn z() -> PauliHamiltonian {
        parse_hamiltonian("qubits 1\n1.0 Z\n").unwrap()
    }

    fn basis(bits: &str) -> Statevector {
        Statevector::basis_state(bits.len(), bits_from_str(bits).unwrap())
    }

    /// Universal 1-qubit parameters preparing |1⟩.
    const ONE: [f64; 2] = [std::f64::consts::PI, 0.0];

    fn rng0() -> StreamRng {
        rng::stream(0, &[])
    }

    #[test]
    fn empty_records_give_the_energy() {
        let a = UniversalAnsatz::new(1);
        let p = [0.7, 0.2];
        let f = objective_f(&p, &a, &[], &z(), &ObjectiveConfig::default(), &mut rng0()).unwrap();
        let e = expectation_hamiltonian(&a.prepare(&p).unwrap(), &z()).unwrap();
        assert!((f - e).abs() < 1e-14);
    }

    #[test]
    fn hand_computed_objective() {
        let a = UniversalAnsatz::new(1);
        let rec = [DeflationRecord::from_state(0, basis("1"), -1.0, 3.0)];
        let cfg = ObjectiveConfig::default();
        let f = objective_f(&ONE, &a, &rec, &z(), &cfg, &mut rng0()).unwrap();
        assert!((f - 2.0).abs() < 1e-12);
        let f = objective_f(&[0.0, 0.0], &a, &rec, &z(), &cfg, &mut rng0()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_penalty_examples() {
        let constraint = |w| SymmetryConstraint {
            operator: SymmetryOperator::ElectronNumber,
            target: 2.0,
            weight: w,
        };
        let hf = hartree_fock_state(4, 2).unwrap();
        assert_eq!(symmetry_penalty(&hf, &[constraint(10.0)], ConstraintMode::Exact, &mut rng0()).unwrap(), 0.0);
        let one = basis("1000");
        assert!((symmetry_penalty(&one, &[constraint(10.0)], ConstraintMode::Exact, &mut rng0()).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(symmetry_penalty(&one, &[constraint(0.0)], ConstraintMode::Exact, &mut rng0()).unwrap(), 0.0);
        // Basis states have a definite electron count, so sampling is exact.
        assert!((symmetry_penalty(&one, &[constraint(10.0)], ConstraintMode::Sampled(10), &mut rng0()).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_constraints_leave_the_objective_unchanged() {
        let a = UniversalAnsatz::new(2);
        let h = parse_hamiltonian("qubits 2\n0.5 ZZ\n-0.3 XI\n").unwrap();
        let p = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let mut cfg = ObjectiveConfig::default();
        let f = objective_f(&p, &a, &[], &h, &cfg, &mut rng0()).unwrap();
        cfg.constraints.push(SymmetryConstraint {
            operator: SymmetryOperator::ElectronNumber,
            target: 1.0,
            weight: 0.0,
        });
        assert_eq!(symmetry_penalized_objective(&p, &a, &[], &h, &cfg, &mut rng0()).unwrap(), f);
    }

    #[test]
    fn projection_without_records_is_shifted_energy() {
        let s = Statevector::random(1, &mut rng0());
        let e = expectation_hamiltonian(&s, &z()).unwrap();
        let v = projection_objective(&s, &[], &z(), 1.0, false).unwrap();
        assert!((v - (e - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn projection_annihilates_the_record() {
        let rec = [DeflationRecord::from_state(0, basis("1"), -1.0, 0.0)];
        assert_eq!(projection_objective(&basis("1"), &rec, &z(), 1.0, false).unwrap(), 0.0);
        assert_eq!(projection_objective(&basis("0"), &rec, &z(), 1.0, false).unwrap(), 0.0);
        assert!((projection_objective(&basis("0"), &rec, &z(), 2.0, false).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_beta_examples() {
        assert_eq!(min_beta_required(1.0, -1.0), 2.0);
        assert_eq!(min_beta_required(0.0, 0.0), 0.0);
    }

    #[test]
    fn beta_strategies() {
        let h = parse_hamiltonian("qubits 1\n1.0 Z\n-0.5 X\n").unwrap();
        assert_eq!(BetaStrategy::default().beta(&h, 0.0), 3.0);
        assert_eq!(BetaStrategy::SpectralBound.beta(&h, -7.0), 3.0);
        assert_eq!(BetaStrategy::HotellingShift(2.0).beta(&h, -1.0), 3.0);
    }

    fn tight() -> SolveConfig {
        SolveConfig {
            optimizer: NelderMeadOptions::with_tolerances(1e-6, 1e-10)
                .with_initial_simplex(InitialSimplex::Absolute(0.3)),
            ..SolveConfig::default()
        }
    }

    #[test]
    fn one_qubit_z_spectrum() {
        let est = vqd_solve(&z(), &UniversalAnsatz::new(1), 2, &tight()).unwrap();
        let e = est.sorted_energies();
        assert!((e[0] + 1.0).abs() < 1e-3 && (e[1] - 1.0).abs() < 1e-3, "{e:?}");
        assert!(!est.any_out_of_order());
    }

    #[test]
    fn zero_hamiltonian_gives_zero_energies() {
        let h = PauliHamiltonian::zero(2);
        let est = vqd_solve(&h, &UniversalAnsatz::new(2), 3, &SolveConfig::default()).unwrap();
        assert_eq!(est.energies(), vec![Some(0.0); 3]);
    }

    #[test]
    fn too_many_levels_is_rejected() {
        assert!(vqd_solve(&z(), &UniversalAnsatz::new(1), 3, &SolveConfig::default()).is_err());
    }

    #[test]
    fn sampled_solves_are_reproducible() {
        let cfg = SolveConfig {
            objective: ObjectiveConfig {
                energy: EnergyMode::Sampled(Shots::Uniform(500)),
                overlap: OverlapMode::DestructiveSwap(Shots::Uniform(500)),
                ..ObjectiveConfig::default()
            },
            seed: 42,
            ..SolveConfig::default()
        };
        let h = parse_hamiltonian("qubits 2\n0.5 ZI\n0.3 XX\n").unwrap();
        let a = UniversalAnsatz::new(2);
        let one = serde_json::to_string(&vqd_solve(&h, &a, 2, &cfg).unwrap()).unwrap();
        let two = serde_json::to_string(&vqd_solve(&h, &a, 2, &cfg).unwrap()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn failing_estimator_is_recorded_and_later_stages_run() {
        // The universal ansatz has no Hartree–Fock reference.
        let cfg = SolveConfig {
            objective: ObjectiveConfig {
                overlap: OverlapMode::SymmetryFiltered {
                    shots: Shots::Uniform(100),
                    flip_probability: 0.0,
                },
                ..ObjectiveConfig::default()
            },
            ..tight()
        };
        let est = vqd_solve(&z(), &UniversalAnsatz::new(1), 2, &cfg).unwrap();
        assert!(est.stages[0].error.is_none());
        assert!(est.stages[1].error.as_deref().unwrap().contains("symmetry-filtered"));
    }

    #[test]
    fn gamma_doubling_on_z() {
        let a = UniversalAnsatz::new(1);
        let rec = [DeflationRecord::from_params(0, &a, ONE.to_vec(), -1.0, 0.0).unwrap()];
        let g = gamma_doubling_search(&z(), &a, &rec, 0.5, &tight(), GAMMA_REPEAT_CAP).unwrap();
        assert_eq!(g.doublings, 2);
        assert_eq!(g.gamma_final, 2.0);
        assert!((g.energy - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gamma_doubling_sufficient_start_runs_once() {
        let a = UniversalAnsatz::new(1);
        let rec = [DeflationRecord::from_params(0, &a, ONE.to_vec(), -1.0, 0.0).unwrap()];
        let g = gamma_doubling_search(&z(), &a, &rec, 4.0, &tight(), GAMMA_REPEAT_CAP).unwrap();
        assert_eq!(g.doublings, 0);
        assert_eq!(g.attempts.len(), 1);
    }

    #[test]
    fn gamma_doubling_rejects_nonpositive_start_and_caps() {
        let a = UniversalAnsatz::new(1);
        assert!(gamma_doubling_search(&z(), &a, &[], 0.0, &tight(), 3).is_err());
        let rec = [DeflationRecord::from_params(0, &a, ONE.to_vec(), -1.0, 0.0).unwrap()];
        assert_eq!(
            gamma_doubling_search(&z(), &a, &rec, 0.5, &tight(), 1).unwrap_err(),
            Error::RepeatCapExceeded { cap: 1 }
        );
    }
}
