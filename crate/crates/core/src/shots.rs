//! Variance models and optimal shot allocation.
//!
//! Measuring `⟨P_j⟩` with `M_j` shots contributes `c_j² σ_j² / M_j` to the
//! variance of the energy; estimating an overlap `p_i` with `M̃_i` shots
//! contributes `β_i² σ̃_i² / M̃_i` with `σ̃_i² = p_i (1 − p_i)`. Minimizing the
//! total shot count at a fixed target variance `ε²` gives
//!
//! ```text
//! M_j  = |c_j| σ_j S / ε²,   M̃_i = β_i σ̃_i S / ε²,   S = Σ|c_l|σ_l + Σ β_l σ̃_l
//! ```
//!
//! for a total of `S² / ε²`. With no overlap terms this is the plain VQE
//! allocation.

use serde::{Deserialize, Serialize};

use crate::pauli::PauliHamiltonian;
use crate::sim::{expectation_pauli, Statevector};
use crate::{Error, Result};

/// Shot counts for a list of measured quantities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    Uniform(u64),
    PerTerm(Vec<u64>),
}

impl Shots {
    /// Shots for entry `j`. Per-term lists shorter than needed are a
    /// configuration bug.
    pub fn for_term(&self, j: usize) -> u64 {
        match self {
            Shots::Uniform(m) => *m,
            Shots::PerTerm(v) => v[j],
        }
    }

    /// Checks that every entry below `len` has at least one shot.
    pub fn validate(&self, len: usize) -> Result<()> {
        match self {
            Shots::Uniform(0) => Err(Error::InvalidArgument("shots must be at least 1".into())),
            Shots::Uniform(_) => Ok(()),
            Shots::PerTerm(v) if v.len() < len => Err(Error::InvalidArgument(format!(
                "{} per-term shot counts for {len} terms",
                v.len()
            ))),
            Shots::PerTerm(v) if v[..len].contains(&0) => {
                Err(Error::InvalidArgument("shots must be at least 1".into()))
            }
            Shots::PerTerm(_) => Ok(()),
        }
    }
}

/// Per-term standard deviations of single-shot outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceModel {
    /// `σ_j ∈ [0, 1]` for each Hamiltonian term.
    pub term_sigmas: Vec<f64>,
    /// `σ̃_i ∈ [0, 1/2]` for each overlap term.
    pub overlap_sigmas: Vec<f64>,
}

impl VarianceModel {
    /// `σ_j = 1`, `σ̃_i = 1/2`: the largest values the outcomes allow.
    pub fn worst_case(n_terms: usize, n_overlaps: usize) -> Self {
        Self {
            term_sigmas: vec![1.0; n_terms],
            overlap_sigmas: vec![0.5; n_overlaps],
        }
    }

    /// Model built from (exact or estimated) term expectations and overlaps:
    /// `σ_j² = 1 − ⟨P_j⟩²`, `σ̃_i² = p_i (1 − p_i)`. Feeding it sampled
    /// values gives the adaptive re-estimation used between iterations.
    pub fn from_expectations(expectations: &[f64], overlaps: &[f64]) -> Self {
        Self {
            term_sigmas: expectations
                .iter()
                .map(|e| (1.0 - e.clamp(-1.0, 1.0).powi(2)).sqrt())
                .collect(),
            overlap_sigmas: overlaps
                .iter()
                .map(|p| {
                    let p = p.clamp(0.0, 1.0);
                    (p * (1.0 - p)).sqrt()
                })
                .collect(),
        }
    }

    /// Exact model for the objective evaluated at `state`.
    pub fn from_state(h: &PauliHamiltonian, state: &Statevector, overlaps: &[f64]) -> Result<Self> {
        let exps = h
            .terms()
            .iter()
            .map(|t| expectation_pauli(state, &t.string))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_expectations(&exps, overlaps))
    }

    fn check(&self, n_terms: usize, n_overlaps: usize) -> Result<()> {
        if self.term_sigmas.len() != n_terms || self.overlap_sigmas.len() < n_overlaps {
            return Err(Error::InvalidArgument(format!(
                "variance model has {} term / {} overlap sigmas, need {n_terms} / {n_overlaps}",
                self.term_sigmas.len(),
                self.overlap_sigmas.len()
            )));
        }
        Ok(())
    }
}

/// How real-valued allocations become integer shot counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    /// Round up, with a floor of one shot per term.
    #[default]
    CeilAtLeastOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub epsilon: f64,
    /// Exact Lagrange-optimal `M_j` before rounding.
    pub term_allocations: Vec<f64>,
    /// Exact Lagrange-optimal `M̃_i` before rounding.
    pub overlap_allocations: Vec<f64>,
    pub term_shots: Vec<u64>,
    pub overlap_shots: Vec<u64>,
    pub rounding: Rounding,
}

impl ShotBudget {
    /// `S² / ε²`, the total of the unrounded allocations.
    pub fn total_allocation(&self) -> f64 {
        self.term_allocations.iter().sum::<f64>() + self.overlap_allocations.iter().sum::<f64>()
    }

    pub fn total_shots(&self) -> u64 {
        self.term_shots.iter().sum::<u64>() + self.overlap_shots.iter().sum::<u64>()
    }

    pub fn term_plan(&self) -> Shots {
        Shots::PerTerm(self.term_shots.clone())
    }

    pub fn overlap_plan(&self) -> Shots {
        Shots::PerTerm(self.overlap_shots.clone())
    }
}

/// Ceiling that forgives floating-point noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    (c.max(1.0)) as u64
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("precision must be positive, got {epsilon}")));
    }
    Ok(())
}

/// `Σ_j c_j² σ_j² / M_j`.
pub fn vqe_variance(coeffs: &[f64], model: &VarianceModel, allocation: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(&model.term_sigmas)
        .zip(allocation)
        .map(|((c, s), m)| c * c * s * s / m)
        .sum()
}

/// `Σ_j c_j² σ_j² / M_j + Σ_i β_i² σ̃_i² / M̃_i`.
pub fn vqd_variance(
    coeffs: &[f64],
    betas: &[f64],
    model: &VarianceModel,
    term_allocation: &[f64],
    overlap_allocation: &[f64],
) -> f64 {
    let overlaps: f64 = betas
        .iter()
        .zip(&model.overlap_sigmas)
        .zip(overlap_allocation)
        .map(|((b, s), m)| b * b * s * s / m)
        .sum();
    vqe_variance(coeffs, model, term_allocation) + overlaps
}

pub fn optimal_vqe_allocation(coeffs: &[f64], model: &VarianceModel, epsilon: f64) -> Result<ShotBudget> {
    optimal_vqd_allocation(coeffs, &[], model, epsilon)
}

pub fn optimal_vqd_allocation(
    coeffs: &[f64],
    betas: &[f64],
    model: &VarianceModel,
    epsilon: f64,
) -> Result<ShotBudget> {
    check_epsilon(epsilon)?;
    model.check(coeffs.len(), betas.len())?;
    if let Some(b) = betas.iter().find(|b| b.is_nan() || **b < 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {b}")));
    }
    let term_weights: Vec<f64> = coeffs
        .iter()
        .zip(&model.term_sigmas)
        .map(|(c, s)| c.abs() * s)
        .collect();
    let overlap_weights: Vec<f64> = betas
        .iter()
        .zip(&model.overlap_sigmas)
        .map(|(b, s)| b * s)
        .collect();
    let s: f64 = term_weights.iter().sum::<f64>() + overlap_weights.iter().sum::<f64>();
    let scale = s / (epsilon * epsilon);
    let term_allocations: Vec<f64> = term_weights.iter().map(|w| w * scale).collect();
    let overlap_allocations: Vec<f64> = overlap_weights.iter().map(|w| w * scale).collect();
    Ok(ShotBudget {
        epsilon,
        term_shots: term_allocations.iter().map(|&m| ceil_count(m)).collect(),
        overlap_shots: overlap_allocations.iter().map(|&m| ceil_count(m)).collect(),
        term_allocations,
        overlap_allocations,
        rounding: Rounding::CeilAtLeastOne,
    })
}

/// Worst-case total `⌈(Σ|c_j| + ½ Σ β_i)² / ε²⌉`.
pub fn total_samples_bound(coeffs: &[f64], betas: &[f64], epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    let s = coeffs.iter().map(|c| c.abs()).sum::<f64>() + 0.5 * betas.iter().sum::<f64>();
    Ok(if s == 0.0 { 0 } else { ceil_count(s * s / (epsilon * epsilon)) })
}

/// `(1 + k)²`: the VQD-to-VQE cost ratio when every `β_i = 2 Σ|c_j|`.
pub fn worst_case_ratio(k: usize) -> f64 {
    let r = 1.0 + k as f64;
    r * r
}
