//! Estimators for the squared overlap `|⟨ψ_i|ψ_k⟩|²` between two prepared
//! states.
//!
//! * [`exact_overlap`]: statevector oracle.
//! * [`inverse_circuit_overlap`]: run `R_i† R_k` on `|0…0⟩` and count the
//!   all-zero outcomes.
//! * [`destructive_swap_overlap`]: prepare both states on a doubled register,
//!   measure each pair of qubits in the Bell basis and average
//!   `(−1)^{Σ_m b_m ∧ b̃_m}`.
//! * [`symmetry_filtered_overlap`]: run `V_i† V_k` on the Hartree–Fock state,
//!   discard outcomes with the wrong electron count and report the fraction of
//!   the survivors that land on Hartree–Fock.
//!
//! Sampled estimates are returned unclamped: the SWAP estimator can be
//! negative and callers that need a probability should clamp for display only.
//!
//! Each estimator has a `*_with` variant that works on already-prepared
//! states and a caller-owned RNG; the objective functions use those.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::deflation::{nelder_mead, NelderMeadOptions};
use crate::fermion::{electrons_in_bitstring, SymmetryOperator};
use crate::rng;
use crate::sim::{
    apply_circuit, inner_product, sample_bitstrings_with, sample_counts, Circuit, Gate, Statevector,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    Exact,
    InverseCircuit,
    DestructiveSwap,
    SymmetryFiltered,
    /// The Hartree–Fock return fraction over all shots, without post-selection.
    Unfiltered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    pub value: f64,
    /// Shots taken; zero for the exact estimator.
    pub shots: u64,
    pub kind: EstimatorKind,
    pub seed: Option<u64>,
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(())
}

fn check_same_width(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::QubitMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

pub fn exact_overlap(a: &Statevector, b: &Statevector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Fraction of successes in `shots` Bernoulli trials with probability `p`.
pub fn hit_fraction_with<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> f64 {
    let hits = Binomial::new(shots, p.clamp(0.0, 1.0)).expect("probability in [0, 1]").sample(rng);
    hits as f64 / shots as f64
}

/// Fraction of all-zero outcomes in `shots` measurements of `rotated`. Only
/// the all-zero marginal matters, so one binomial draw suffices.
pub fn all_zero_fraction_with<R: Rng + ?Sized>(rotated: &Statevector, shots: u64, rng: &mut R) -> f64 {
    hit_fraction_with(rotated.amplitudes()[0].norm_sqr(), shots, rng)
}

pub fn inverse_circuit_overlap(r_i: &Circuit, r_k: &Circuit, shots: u64, seed: u64) -> Result<OverlapEstimate> {
    check_same_width(r_i.n_qubits(), r_k.n_qubits())?;
    check_shots(shots)?;
    let mut rotated = r_k.prepare()?;
    crate::sim::apply_circuit_in_place(&r_i.inverse(), &mut rotated)?;
    let value = all_zero_fraction_with(&rotated, shots, &mut rng::stream(seed, &[]));
    Ok(OverlapEstimate {
        value,
        shots,
        kind: EstimatorKind::InverseCircuit,
        seed: Some(seed),
    })
}

/// Destructive SWAP test on `a ⊗ b`: CNOT from each qubit of `a` onto its
/// partner in `b`, Hadamard on the `a` qubit, then sample all `2N` qubits.
pub fn destructive_swap_with<R: Rng + ?Sized>(
    a: &Statevector,
    b: &Statevector,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    check_same_width(a.n_qubits(), b.n_qubits())?;
    check_shots(shots)?;
    let n = a.n_qubits();
    let mut bell = Circuit::new(2 * n);
    for m in 0..n {
        bell.push(Gate::Cnot {
            control: m,
            target: m + n,
        })
        .push(Gate::H(m));
    }
    let joint = apply_circuit(&bell, &a.tensor(b))?;
    let counts = sample_bitstrings_with(&joint, shots, rng);
    let low_mask = (1u64 << n) - 1;
    let signed: i64 = counts
        .iter()
        .map(|(x, c)| {
            let (first, second) = (x >> n, x & low_mask);
            if (first & second).count_ones() % 2 == 0 {
                c as i64
            } else {
                -(c as i64)
            }
        })
        .sum();
    Ok(signed as f64 / shots as f64)
}

pub fn destructive_swap_overlap(r_i: &Circuit, r_k: &Circuit, shots: u64, seed: u64) -> Result<OverlapEstimate> {
    check_same_width(r_i.n_qubits(), r_k.n_qubits())?;
    let value = destructive_swap_with(&r_i.prepare()?, &r_k.prepare()?, shots, &mut rng::stream(seed, &[]))?;
    Ok(OverlapEstimate {
        value,
        shots,
        kind: EstimatorKind::DestructiveSwap,
        seed: Some(seed),
    })
}

/// Raw tallies behind the filtered and unfiltered Hartree–Fock return
/// estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HfReturnCounts {
    /// Outcomes equal to the Hartree–Fock bitstring.
    pub hf: u64,
    /// Outcomes with the right electron count.
    pub accepted: u64,
    pub shots: u64,
}

impl HfReturnCounts {
    /// `hf / accepted`; an error when post-selection removed every shot.
    pub fn filtered(&self) -> Result<f64> {
        if self.accepted == 0 {
            return Err(Error::AllShotsDiscarded { shots: self.shots });
        }
        Ok(self.hf as f64 / self.accepted as f64)
    }

    /// `hf / shots`.
    pub fn unfiltered(&self) -> f64 {
        self.hf as f64 / self.shots as f64
    }
}

/// Applies independent classical bit flips, each qubit with probability
/// `p`, to every shot in `counts` (indexed by outcome).
fn inject_readout_flips<R: Rng + ?Sized>(counts: &mut Vec<u64>, n_qubits: usize, p: f64, rng: &mut R) {
    if p == 0.0 {
        return;
    }
    for q in 0..n_qubits {
        let bit = 1usize << (n_qubits - 1 - q);
        let mut next = vec![0u64; counts.len()];
        for (x, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let flipped = Binomial::new(c, p).expect("probability in [0, 1]").sample(rng);
            next[x] += c - flipped;
            next[x ^ bit] += flipped;
        }
        *counts = next;
    }
}

/// Samples `rotated` (which should be `V_i† V_k |HF⟩`), applies readout flips
/// and tallies Hartree–Fock returns and electron-number survivors.
pub fn hf_return_counts_with<R: Rng + ?Sized>(
    rotated: &Statevector,
    hf: &Statevector,
    n_electrons: usize,
    shots: u64,
    flip_probability: f64,
    rng: &mut R,
) -> Result<HfReturnCounts> {
    check_same_width(hf.n_qubits(), rotated.n_qubits())?;
    check_shots(shots)?;
    if !(0.0..=0.5).contains(&flip_probability) {
        return Err(Error::InvalidArgument(format!(
            "flip probability must lie in [0, 0.5], got {flip_probability}"
        )));
    }
    let n = rotated.n_qubits();
    let hf_index = hf
        .amplitudes()
        .iter()
        .position(|a| (a.norm_sqr() - 1.0).abs() < 1e-12)
        .ok_or_else(|| Error::InvalidArgument("reference is not a computational basis state".into()))?;
    let mut counts = sample_counts(&rotated.probabilities(), shots, rng);
    inject_readout_flips(&mut counts, n, flip_probability, rng);
    let accepted = counts
        .iter()
        .enumerate()
        .filter(|&(x, _)| electrons_in_bitstring(x as u64, n, SymmetryOperator::ElectronNumber) as usize == n_electrons)
        .map(|(_, &c)| c)
        .sum();
    Ok(HfReturnCounts {
        hf: counts[hf_index],
        accepted,
        shots,
    })
}

/// Runs `V_i† V_k` on `hf` and returns the raw tallies.
#[allow(clippy::too_many_arguments)]
pub fn sample_hf_return(
    v_i: &Circuit,
    v_k: &Circuit,
    hf: &Statevector,
    n_electrons: usize,
    shots: u64,
    seed: u64,
    flip_probability: f64,
) -> Result<HfReturnCounts> {
    check_same_width(v_i.n_qubits(), v_k.n_qubits())?;
    let mut rotated = apply_circuit(v_k, hf)?;
    crate::sim::apply_circuit_in_place(&v_i.inverse(), &mut rotated)?;
    hf_return_counts_with(&rotated, hf, n_electrons, shots, flip_probability, &mut rng::stream(seed, &[]))
}

/// Post-selected estimate: Hartree–Fock returns over accepted shots.
#[allow(clippy::too_many_arguments)]
pub fn symmetry_filtered_overlap(
    v_i: &Circuit,
    v_k: &Circuit,
    hf: &Statevector,
    n_electrons: usize,
    shots: u64,
    seed: u64,
    flip_probability: f64,
) -> Result<OverlapEstimate> {
    let counts = sample_hf_return(v_i, v_k, hf, n_electrons, shots, seed, flip_probability)?;
    Ok(OverlapEstimate {
        value: counts.filtered()?,
        shots,
        kind: EstimatorKind::SymmetryFiltered,
        seed: Some(seed),
    })
}

/// The same experiment as [`symmetry_filtered_overlap`] without discarding
/// anything.
#[allow(clippy::too_many_arguments)]
pub fn unfiltered_overlap(
    v_i: &Circuit,
    v_k: &Circuit,
    hf: &Statevector,
    n_electrons: usize,
    shots: u64,
    seed: u64,
    flip_probability: f64,
) -> Result<OverlapEstimate> {
    let counts = sample_hf_return(v_i, v_k, hf, n_electrons, shots, seed, flip_probability)?;
    Ok(OverlapEstimate {
        value: counts.unfiltered(),
        shots,
        kind: EstimatorKind::Unfiltered,
        seed: Some(seed),
    })
}

/// How the self-overlap is measured during [`refine_inverse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RefineEstimator {
    Exact,
    /// Inverse-circuit sampling with a fresh stream per evaluation.
    InverseCircuit { shots: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    pub params: Vec<f64>,
    /// Exact `|⟨0|R(λ)† R(λ*)|0⟩|²` at the returned parameters.
    pub overlap: f64,
    pub success: bool,
    pub evaluations: usize,
}

/// Overlap a refinement must reach to count as successful.
pub const REFINE_SUCCESS: f64 = 0.999;

/// Searches for `λ` maximizing `|⟨0|R(λ)† R(λ*)|0⟩|²` starting from `start`.
/// Failure to exceed [`REFINE_SUCCESS`] is reported through `success`, not
/// as an error.
pub fn refine_inverse(
    target_params: &[f64],
    start: &[f64],
    ansatz: &dyn Ansatz,
    options: &NelderMeadOptions,
    estimator: RefineEstimator,
    seed: u64,
) -> Result<RefineResult> {
    ansatz.check_params(start)?;
    let target = ansatz.prepare(target_params)?;
    let exact_at = |p: &[f64]| -> Result<f64> { exact_overlap(&ansatz.prepare(p)?, &target) };

    let initial = exact_at(start)?;
    if initial >= 1.0 - 1e-12 {
        return Ok(RefineResult {
            params: start.to_vec(),
            overlap: initial,
            success: true,
            evaluations: 1,
        });
    }

    let mut calls = 0u64;
    let loss = |p: &[f64]| -> Result<f64> {
        calls += 1;
        let value = match estimator {
            RefineEstimator::Exact => exact_at(p)?,
            RefineEstimator::InverseCircuit { shots } => {
                check_shots(shots)?;
                let mut rotated = ansatz.prepare(p)?;
                crate::sim::apply_circuit_in_place(&ansatz.circuit(target_params)?.inverse(), &mut rotated)?;
                all_zero_fraction_with(&rotated, shots, &mut rng::stream(seed, &[calls]))
            }
        };
        Ok(-value)
    };
    let result = nelder_mead(loss, start, options)?;
    let overlap = exact_at(&result.x)?;
    Ok(RefineResult {
        params: result.x,
        overlap,
        success: overlap >= REFINE_SUCCESS,
        evaluations: result.evaluations + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{UccgsdAnsatz, UniversalAnsatz};
    use crate::fermion::hartree_fock_state;
    use crate::sim::bits_from_str;

    fn basis(bits: &str) -> Statevector {
        Statevector::basis_state(bits.len(), bits_from_str(bits).unwrap())
    }

    fn x_circuit(n: usize, qubits: &[usize]) -> Circuit {
        let mut c = Circuit::new(n);
        for &q in qubits {
            c.push(Gate::X(q));
        }
        c
    }

    #[test]
    fn exact_examples() {
        let s = Statevector::random(3, &mut rng::stream(1, &[]));
        assert!((exact_overlap(&s, &s).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(exact_overlap(&basis("01"), &basis("10")).unwrap(), 0.0);
        assert!(exact_overlap(&basis("0"), &basis("00")).is_err());
    }

    #[test]
    fn inverse_circuit_examples() {
        let a = UccgsdAnsatz::new(4, 2).circuit(&[0.1; 9]).unwrap();
        assert_eq!(inverse_circuit_overlap(&a, &a, 1000, 3).unwrap().value, 1.0);
        let zero = Circuit::new(1);
        let one = x_circuit(1, &[0]);
        assert_eq!(inverse_circuit_overlap(&zero, &one, 1000, 3).unwrap().value, 0.0);
        assert!(inverse_circuit_overlap(&zero, &one, 0, 3).is_err());
    }

    #[test]
    fn swap_examples() {
        let zero = Circuit::new(2);
        let est = destructive_swap_overlap(&zero, &zero, 500, 9).unwrap();
        assert_eq!(est.value, 1.0);
        let a = x_circuit(2, &[1]);
        let b = x_circuit(2, &[0]);
        let m = 1_000_000;
        let est = destructive_swap_overlap(&a, &b, m, 9).unwrap();
        assert!(est.value.abs() < 3.0 / (m as f64).sqrt(), "{}", est.value);
    }

    #[test]
    fn swap_is_exact_for_identical_basis_states() {
        let a = x_circuit(3, &[0, 2]);
        assert_eq!(destructive_swap_overlap(&a, &a, 100, 1).unwrap().value, 1.0);
    }

    #[test]
    fn filtered_is_one_without_noise_at_equal_parameters() {
        let ansatz = UccgsdAnsatz::new(4, 2);
        let v = ansatz.variational_circuit(&[0.2; 9]).unwrap();
        let hf = hartree_fock_state(4, 2).unwrap();
        let est = symmetry_filtered_overlap(&v, &v, &hf, 2, 1000, 5, 0.0).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn filtering_discards_nothing_without_noise() {
        let ansatz = UccgsdAnsatz::new(4, 2);
        let v_i = ansatz.variational_circuit(&[0.3, -0.2, 0.1, 0.0, 0.4, -0.5, 0.2, 0.1, -0.3]).unwrap();
        let v_k = ansatz.variational_circuit(&[-0.1; 9]).unwrap();
        let hf = hartree_fock_state(4, 2).unwrap();
        let c = sample_hf_return(&v_i, &v_k, &hf, 2, 10_000, 8, 0.0).unwrap();
        assert_eq!(c.accepted, c.shots);
    }

    #[test]
    fn readout_flips_are_binomial_per_qubit() {
        let hf = hartree_fock_state(4, 2).unwrap();
        let v = Circuit::new(4);
        let shots = 200_000;
        let p = 0.05;
        let c = sample_hf_return(&v, &v, &hf, 2, shots, 4, p).unwrap();
        let expect = (1.0 - p).powi(4);
        let sigma = (expect * (1.0 - expect) / shots as f64).sqrt();
        assert!((c.unfiltered() - expect).abs() < 4.0 * sigma);
        // Two-flip outcomes that keep the electron count survive filtering.
        let accept = expect + 4.0 * p * p * (1.0 - p).powi(2);
        let sigma = (accept * (1.0 - accept) / shots as f64).sqrt();
        assert!((c.accepted as f64 / shots as f64 - accept).abs() < 4.0 * sigma);
    }

    #[test]
    fn all_discarded_is_reported() {
        let c = HfReturnCounts { hf: 0, accepted: 0, shots: 10 };
        assert_eq!(c.filtered(), Err(Error::AllShotsDiscarded { shots: 10 }));
    }

    #[test]
    fn flip_probability_is_validated() {
        let hf = hartree_fock_state(2, 1).unwrap();
        let v = Circuit::new(2);
        assert!(sample_hf_return(&v, &v, &hf, 1, 10, 0, 0.6).is_err());
    }

    #[test]
    fn refine_from_target_is_immediate() {
        let a = UniversalAnsatz::new(2);
        let target = [0.3, -0.4, 0.5, 0.1, 0.2, -0.1];
        let r = refine_inverse(&target, &target, &a, &NelderMeadOptions::default(), RefineEstimator::Exact, 0).unwrap();
        assert!(r.success);
        assert_eq!(r.evaluations, 1);
        assert!((r.overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refine_from_perturbed_start_converges() {
        let a = UccgsdAnsatz::new(4, 2);
        let target = [0.1, -0.2, 0.15, 0.05, -0.1, 0.2, 0.3, -0.25, 0.1];
        let start: Vec<f64> = target.iter().enumerate().map(|(i, t)| t + 0.05 * (-1f64).powi(i as i32)).collect();
        let opts = NelderMeadOptions::with_tolerances(1e-4, 1e-8);
        let r = refine_inverse(&target, &start, &a, &opts, RefineEstimator::Exact, 0).unwrap();
        assert!(r.success);
        assert!(r.overlap >= 0.9999, "{}", r.overlap);
    }

    #[test]
    fn refine_far_start_reports_instead_of_failing() {
        let a = UniversalAnsatz::new(2);
        let target = [2.5, -1.4, 0.5, 1.1, 0.2, -2.1];
        let opts = NelderMeadOptions {
            max_iter: Some(3),
            ..NelderMeadOptions::default()
        };
        let r = refine_inverse(&target, &[0.0; 6], &a, &opts, RefineEstimator::Exact, 0).unwrap();
        assert!(!r.success);
        assert!(r.overlap < REFINE_SUCCESS);
    }
}
