//! Dense statevector simulation.
//!
//! Amplitude index `x` encodes qubit `q` in bit `n - 1 - q`, so the binary
//! expansion of `x` read left to right lists qubits 0, 1, ... in order.
//! Sampling draws shot counts from the exact outcome distribution with
//! sequential binomials, which is distribution-identical to drawing the
//! shots one at a time.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliHamiltonian, PauliString};
use crate::{rng, Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "{n_qubits} qubits exceeds the dense limit");
        let dim = 1usize << n_qubits;
        assert!((index as usize) < dim, "basis index {index} out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index as usize] = ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// Wraps raw amplitudes, normalizing them. Fails on a wrong length or a
    /// zero vector.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                limit: MAX_QUBITS,
            });
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("amplitudes have zero or non-finite norm".into()));
        }
        Ok(Self {
            n_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// A Haar-distributed random state.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let normal = rand_distr::StandardNormal;
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
            .collect();
        Self::from_amplitudes(n_qubits, amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = self.bit(q);
        for x in 0..self.amplitudes.len() {
            if x & bit == 0 {
                let a0 = self.amplitudes[x];
                let a1 = self.amplitudes[x | bit];
                self.amplitudes[x] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[x | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `P|s⟩` for a Pauli string of matching length.
    pub fn pauli_image(&self, p: &PauliString) -> Statevector {
        let flip = p.flip_mask() as usize;
        let sign = p.sign_mask() as usize;
        let y_phase = p.y_phase();
        let mut out = vec![ZERO; self.amplitudes.len()];
        for (x, &a) in self.amplitudes.iter().enumerate() {
            let ph = if (x & sign).count_ones() % 2 == 1 {
                -y_phase
            } else {
                y_phase
            };
            out[x ^ flip] = ph * a;
        }
        Statevector {
            n_qubits: self.n_qubits,
            amplitudes: out,
        }
    }

    /// `exp(-i θ/2 P) |s⟩ = cos(θ/2)|s⟩ - i sin(θ/2) P|s⟩`.
    fn apply_pauli_exp(&mut self, theta: f64, p: &PauliString) {
        if p.is_identity() {
            let ph = Complex64::from_polar(1.0, -theta / 2.0);
            self.amplitudes.iter_mut().for_each(|a| *a *= ph);
            return;
        }
        let flip = p.flip_mask() as usize;
        let sign = p.sign_mask() as usize;
        let y_phase = p.y_phase();
        let (s, c) = (theta / 2.0).sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        let phase = |x: usize| {
            if (x & sign).count_ones() % 2 == 1 {
                -y_phase
            } else {
                y_phase
            }
        };
        if flip == 0 {
            for (x, a) in self.amplitudes.iter_mut().enumerate() {
                *a *= c + minus_i_sin * phase(x);
            }
            return;
        }
        for x in 0..self.amplitudes.len() {
            let y = x ^ flip;
            if x < y {
                let ax = self.amplitudes[x];
                let ay = self.amplitudes[y];
                // P|x⟩ = phase(x)|y⟩, P|y⟩ = phase(y)|x⟩
                self.amplitudes[x] = c * ax + minus_i_sin * phase(y) * ay;
                self.amplitudes[y] = c * ay + minus_i_sin * phase(x) * ax;
            }
        }
    }

    /// `exp(-i Σ_j c_j P_j) |s⟩` by a truncated Taylor series over substeps of
    /// norm at most 1/4.
    fn apply_pauli_sum_exp(&mut self, terms: &[(f64, PauliString)]) {
        let scale: f64 = terms.iter().map(|(c, _)| c.abs()).sum();
        if scale == 0.0 {
            return;
        }
        let steps = (scale / 0.25).ceil().max(1.0) as usize;
        let h = 1.0 / steps as f64;
        for _ in 0..steps {
            let mut term = self.amplitudes.clone();
            let mut acc = self.amplitudes.clone();
            for order in 1..40 {
                let v = Statevector {
                    n_qubits: self.n_qubits,
                    amplitudes: term,
                };
                let mut next = vec![ZERO; acc.len()];
                for (c, p) in terms {
                    let pv = v.pauli_image(p);
                    let w = Complex64::new(0.0, -c * h / order as f64);
                    next.iter_mut()
                        .zip(pv.amplitudes)
                        .for_each(|(n, a)| *n += w * a);
                }
                acc.iter_mut().zip(&next).for_each(|(a, n)| *a += n);
                let size: f64 = next.iter().map(|a| a.norm_sqr()).sum::<f64>();
                term = next;
                if size < 1e-34 {
                    break;
                }
            }
            self.amplitudes = acc;
        }
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        if let Some(len) = gate.pauli_len() {
            if len != self.n_qubits {
                return Err(Error::QubitMismatch {
                    expected: self.n_qubits,
                    found: len,
                });
            }
        }
        let i = Complex64::i();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match gate {
            Gate::H(q) => self.apply_single(*q, [[h, h], [h, -h]]),
            Gate::X(q) => self.apply_single(*q, [[ZERO, ONE], [ONE, ZERO]]),
            Gate::Y(q) => self.apply_single(*q, [[ZERO, -i], [i, ZERO]]),
            Gate::Z(q) => self.apply_single(*q, [[ONE, ZERO], [ZERO, -ONE]]),
            Gate::S(q) => self.apply_single(*q, [[ONE, ZERO], [ZERO, i]]),
            Gate::Sdg(q) => self.apply_single(*q, [[ONE, ZERO], [ZERO, -i]]),
            Gate::Cnot { control, target } => {
                if control == target {
                    return Err(Error::InvalidArgument("CNOT control equals target".into()));
                }
                let cb = self.bit(*control);
                let tb = self.bit(*target);
                for x in 0..self.amplitudes.len() {
                    if x & cb != 0 && x & tb == 0 {
                        self.amplitudes.swap(x, x | tb);
                    }
                }
            }
            Gate::Rx(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let (c, ms) = (Complex64::new(c, 0.0), Complex64::new(0.0, -s));
                self.apply_single(*q, [[c, ms], [ms, c]]);
            }
            Gate::Ry(q, t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                self.apply_single(*q, [[c, -s], [s, c]]);
            }
            Gate::Rz(q, t) => {
                let m = Complex64::from_polar(1.0, -t / 2.0);
                let p = Complex64::from_polar(1.0, t / 2.0);
                self.apply_single(*q, [[m, ZERO], [ZERO, p]]);
            }
            Gate::PauliExp { theta, pauli } => self.apply_pauli_exp(*theta, pauli),
            Gate::PauliSumExp { terms } => self.apply_pauli_sum_exp(terms),
        }
        Ok(())
    }

    /// Tensor product `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Statevector) -> Statevector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Statevector {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    /// `exp(-i θ/2 · P)`.
    PauliExp { theta: f64, pauli: PauliString },
    /// `exp(-i Σ_j c_j P_j)`, applied exactly. Used for untrotterized
    /// generators.
    PauliSumExp { terms: Vec<(f64, PauliString)> },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::S(q) | Gate::Sdg(q) => vec![q],
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::PauliExp { .. } | Gate::PauliSumExp { .. } => vec![],
        }
    }

    fn pauli_len(&self) -> Option<usize> {
        match self {
            Gate::PauliExp { pauli, .. } => Some(pauli.len()),
            Gate::PauliSumExp { terms } => terms.first().map(|(_, p)| p.len()),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(*q),
            Gate::Sdg(q) => Gate::S(*q),
            Gate::Rx(q, t) => Gate::Rx(*q, -t),
            Gate::Ry(q, t) => Gate::Ry(*q, -t),
            Gate::Rz(q, t) => Gate::Rz(*q, -t),
            Gate::PauliExp { theta, pauli } => Gate::PauliExp {
                theta: -theta,
                pauli: pauli.clone(),
            },
            Gate::PauliSumExp { terms } => Gate::PauliSumExp {
                terms: terms.iter().map(|(c, p)| (-c, p.clone())).collect(),
            },
            g => g.clone(),
        }
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend(&mut self, other: &Circuit) -> &mut Self {
        self.gates.extend(other.gates.iter().cloned());
        self
    }

    /// Reversed gate order with every gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// `U_c |0…0⟩`.
    pub fn prepare(&self) -> Result<Statevector> {
        apply_circuit(self, &Statevector::zero_state(self.n_qubits))
    }
}

pub fn apply_circuit(c: &Circuit, s: &Statevector) -> Result<Statevector> {
    let mut out = s.clone();
    apply_circuit_in_place(c, &mut out)?;
    Ok(out)
}

pub fn apply_circuit_in_place(c: &Circuit, s: &mut Statevector) -> Result<()> {
    if c.n_qubits != s.n_qubits {
        return Err(Error::QubitMismatch {
            expected: s.n_qubits,
            found: c.n_qubits,
        });
    }
    for g in &c.gates {
        s.apply_gate(g)?;
    }
    Ok(())
}

pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch {
            expected: a.n_qubits,
            found: b.n_qubits,
        });
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

pub fn expectation_pauli(s: &Statevector, p: &PauliString) -> Result<f64> {
    if p.len() != s.n_qubits {
        return Err(Error::QubitMismatch {
            expected: s.n_qubits,
            found: p.len(),
        });
    }
    if p.is_identity() {
        return Ok(1.0);
    }
    let flip = p.flip_mask() as usize;
    let sign = p.sign_mask() as usize;
    let y_phase = p.y_phase();
    let mut acc = ZERO;
    for (x, &a) in s.amplitudes.iter().enumerate() {
        let ph = if (x & sign).count_ones() % 2 == 1 {
            -y_phase
        } else {
            y_phase
        };
        acc += s.amplitudes[x ^ flip].conj() * ph * a;
    }
    Ok(acc.re)
}

pub fn expectation_hamiltonian(s: &Statevector, h: &PauliHamiltonian) -> Result<f64> {
    if h.n_qubits() != s.n_qubits {
        return Err(Error::QubitMismatch {
            expected: s.n_qubits,
            found: h.n_qubits(),
        });
    }
    h.terms()
        .iter()
        .map(|t| expectation_pauli(s, &t.string).map(|e| t.coefficient * e))
        .sum()
}

/// Shot counts over computational-basis outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitstringCounts {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl BitstringCounts {
    pub fn new(n_qubits: usize, counts: BTreeMap<u64, u64>) -> Self {
        let shots = counts.values().sum();
        Self {
            n_qubits,
            shots,
            counts,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    /// Nonzero `(outcome, count)` pairs in ascending outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Counts keyed by bitstring, qubit 0 leftmost.
    pub fn to_strings(&self) -> BTreeMap<String, u64> {
        self.iter()
            .map(|(k, v)| (bits_to_string(k, self.n_qubits), v))
            .collect()
    }
}

pub fn bits_to_string(outcome: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| {
            if outcome >> (n_qubits - 1 - q) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Parses a bitstring with qubit 0 leftmost.
pub fn bits_from_str(bits: &str) -> Option<u64> {
    bits.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some(acc << 1 | 1),
        _ => None,
    })
}

/// Multinomial draw of `shots` over `probs` (which need not be exactly
/// normalized) by sequential conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = vec![0u64; probs.len()];
    let last_nonzero = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last_nonzero {
            out[i] = remaining;
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if q == 0.0 {
            0
        } else if q == 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        out[i] = k;
        remaining -= k;
        mass -= p;
    }
    out
}

pub fn sample_bitstrings_with<R: Rng + ?Sized>(s: &Statevector, shots: u64, rng: &mut R) -> BitstringCounts {
    let counts = sample_counts(&s.probabilities(), shots, rng)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(x, c)| (x as u64, c))
        .collect();
    BitstringCounts::new(s.n_qubits, counts)
}

pub fn sample_bitstrings(s: &Statevector, shots: u64, seed: u64) -> Result<BitstringCounts> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(sample_bitstrings_with(s, shots, &mut rng::stream(seed, &[])))
}

/// Circuit rotating the eigenbasis of `p` onto the computational basis.
pub fn measurement_basis_change(p: &PauliString) -> Circuit {
    let mut c = Circuit::new(p.len());
    for (q, &op) in p.ops().iter().enumerate() {
        match op {
            Pauli::X => {
                c.push(Gate::H(q));
            }
            Pauli::Y => {
                c.push(Gate::Sdg(q)).push(Gate::H(q));
            }
            Pauli::I | Pauli::Z => {}
        }
    }
    c
}

pub fn sampled_expectation_pauli_with<R: Rng + ?Sized>(
    s: &Statevector,
    p: &PauliString,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if p.len() != s.n_qubits {
        return Err(Error::QubitMismatch {
            expected: s.n_qubits,
            found: p.len(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if p.is_identity() {
        return Ok(1.0);
    }
    let rotated = apply_circuit(&measurement_basis_change(p), s)?;
    let support = p.support_mask();
    let counts = sample_bitstrings_with(&rotated, shots, rng);
    let signed: i64 = counts
        .iter()
        .map(|(x, c)| {
            if (x & support).count_ones().is_multiple_of(2) {
                c as i64
            } else {
                -(c as i64)
            }
        })
        .sum();
    Ok(signed as f64 / shots as f64)
}

pub fn sampled_expectation_pauli(s: &Statevector, p: &PauliString, shots: u64, seed: u64) -> Result<f64> {
    sampled_expectation_pauli_with(s, p, shots, &mut rng::stream(seed, &[]))
}

/// `Σ_j c_j · ⟨P_j⟩_sampled`, each term with its own shot count.
pub fn sampled_expectation_hamiltonian_with<R: Rng + ?Sized>(
    s: &Statevector,
    h: &PauliHamiltonian,
    shots_per_term: impl Fn(usize) -> u64,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    for (j, t) in h.terms().iter().enumerate() {
        total += t.coefficient * sampled_expectation_pauli_with(s, &t.string, shots_per_term(j), rng)?;
    }
    Ok(total)
}
