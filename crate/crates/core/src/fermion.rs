//! Jordan–Wigner mapping, Hartree–Fock reference and the UCCGSD generator.
//!
//! Spin orbitals are interleaved: spatial orbital `o` with spin `σ ∈ {0 = up,
//! 1 = down}` sits on qubit `2o + σ`. The Hartree–Fock reference fills the
//! first `n_electrons` qubits ("occupied-first"), so two electrons in four
//! spin orbitals give `|1100⟩`.
//!
//! The Jordan–Wigner image of a ladder operator is
//! `a_p† = Z_0 ⋯ Z_{p-1} (X_p − iY_p)/2` and `a_p = Z_0 ⋯ Z_{p-1} (X_p + iY_p)/2`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliHamiltonian, PauliString};
use crate::sim::{Circuit, Gate, Statevector};
use crate::{Error, Result};

/// Coefficients below this magnitude are dropped when canonicalizing.
const PRUNE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    fn index(self) -> usize {
        match self {
            Ladder::Create(p) | Ladder::Annihilate(p) => p,
        }
    }

    fn dagger(self) -> Ladder {
        match self {
            Ladder::Create(p) => Ladder::Annihilate(p),
            Ladder::Annihilate(p) => Ladder::Create(p),
        }
    }
}

/// One raw product of ladder operators, leftmost operator acting last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coefficient: Complex64,
    pub ops: Vec<Ladder>,
}

impl FermionTerm {
    pub fn dagger(&self) -> FermionTerm {
        FermionTerm {
            coefficient: self.coefficient.conj(),
            ops: self.ops.iter().rev().map(|l| l.dagger()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FermionOperatorSum {
    pub terms: Vec<FermionTerm>,
}

impl FermionOperatorSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coefficient: impl Into<Complex64>, ops: Vec<Ladder>) -> &mut Self {
        self.terms.push(FermionTerm {
            coefficient: coefficient.into(),
            ops,
        });
        self
    }
}

/// A Pauli sum with complex coefficients. Only used for intermediate
/// fermionic images; observables live in [`PauliHamiltonian`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits));
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic word order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, Complex64)> {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, c: Complex64, p: PauliString) {
        let entry = self.terms.entry(p).or_default();
        *entry += c;
    }

    pub fn add(&mut self, other: &ComplexPauliSum) {
        for (p, c) in other.terms() {
            self.add_term(c, p.clone());
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        self.terms.values_mut().for_each(|c| *c *= s);
    }

    pub fn mul(&self, other: &ComplexPauliSum) -> ComplexPauliSum {
        let mut out = ComplexPauliSum::zero(self.n_qubits);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                let (ph, p) = a.mul(b);
                out.add_term(ca * cb * ph, p);
            }
        }
        out.prune();
        out
    }

    /// Drops terms whose coefficient has magnitude below 1e-14.
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE);
    }

    /// Converts a Hermitian sum to a real Hamiltonian. Fails if any
    /// imaginary part exceeds `tol`.
    pub fn to_hamiltonian(&self, tol: f64) -> Result<PauliHamiltonian> {
        if let Some((p, c)) = self.terms().find(|(_, c)| c.im.abs() > tol) {
            return Err(Error::InvalidArgument(format!(
                "term {p} has imaginary coefficient {}; operator is not Hermitian",
                c.im
            )));
        }
        PauliHamiltonian::new(self.n_qubits, self.terms().map(|(p, c)| (c.re, p.clone())))
    }

    /// True when every coefficient is purely imaginary (within `tol`).
    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms().all(|(_, c)| c.re.abs() <= tol)
    }
}

fn jw_ladder(l: Ladder, n_qubits: usize) -> ComplexPauliSum {
    let p = l.index();
    let mut ops = vec![Pauli::I; n_qubits];
    ops[..p].iter_mut().for_each(|o| *o = Pauli::Z);
    let mut x = ops.clone();
    x[p] = Pauli::X;
    let mut y = ops;
    y[p] = Pauli::Y;
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut s = ComplexPauliSum::zero(n_qubits);
    s.add_term(half, PauliString::new(x));
    match l {
        Ladder::Create(_) => s.add_term(-half_i, PauliString::new(y)),
        Ladder::Annihilate(_) => s.add_term(half_i, PauliString::new(y)),
    }
    s
}

pub fn jordan_wigner(ops: &FermionOperatorSum, n_qubits: usize) -> Result<ComplexPauliSum> {
    let mut out = ComplexPauliSum::zero(n_qubits);
    for term in &ops.terms {
        if let Some(bad) = term.ops.iter().find(|l| l.index() >= n_qubits) {
            return Err(Error::QubitOutOfRange {
                index: bad.index(),
                n_qubits,
            });
        }
        let mut product = ComplexPauliSum::identity(n_qubits);
        for &l in &term.ops {
            product = product.mul(&jw_ladder(l, n_qubits));
        }
        product.scale(term.coefficient);
        out.add(&product);
    }
    out.prune();
    Ok(out)
}

/// Generalized single excitation `a_q† a_p` with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleExcitation {
    pub from: usize,
    pub to: usize,
}

/// Generalized double excitation `a_r† a_s† a_p a_q` with all four indices
/// distinct; `from = [p, q]`, `to = [r, s]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleExcitation {
    pub from: [usize; 2],
    pub to: [usize; 2],
}

pub fn single_excitations(n_spin_orbitals: usize) -> Vec<SingleExcitation> {
    let mut out = Vec::new();
    for p in 0..n_spin_orbitals {
        for q in p + 1..n_spin_orbitals {
            out.push(SingleExcitation { from: p, to: q });
        }
    }
    out
}

/// The independent generalized doubles: for every four distinct orbitals
/// `a < b < c < d`, the pairings `ab→cd`, `ac→bd`, `ad→bc`.
pub fn double_excitations(n_spin_orbitals: usize) -> Vec<DoubleExcitation> {
    let n = n_spin_orbitals;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    out.push(DoubleExcitation { from: [a, b], to: [c, d] });
                    out.push(DoubleExcitation { from: [a, c], to: [b, d] });
                    out.push(DoubleExcitation { from: [a, d], to: [b, c] });
                }
            }
        }
    }
    out
}

/// UCCGSD amplitudes: one real number per independent single and double.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAmplitudes {
    n_spin_orbitals: usize,
    singles: Vec<(SingleExcitation, f64)>,
    doubles: Vec<(DoubleExcitation, f64)>,
}

impl ClusterAmplitudes {
    pub fn zeros(n_spin_orbitals: usize) -> Self {
        Self {
            n_spin_orbitals,
            singles: single_excitations(n_spin_orbitals)
                .into_iter()
                .map(|e| (e, 0.0))
                .collect(),
            doubles: double_excitations(n_spin_orbitals)
                .into_iter()
                .map(|e| (e, 0.0))
                .collect(),
        }
    }

    pub fn n_params_for(n_spin_orbitals: usize) -> usize {
        let n = n_spin_orbitals;
        let singles = n * n.saturating_sub(1) / 2;
        let quads = if n >= 4 {
            n * (n - 1) * (n - 2) * (n - 3) / 24
        } else {
            0
        };
        singles + 3 * quads
    }

    /// Singles first (lexicographic `(p, q)`), then doubles.
    pub fn from_params(n_spin_orbitals: usize, params: &[f64]) -> Result<Self> {
        let mut t = Self::zeros(n_spin_orbitals);
        if params.len() != t.n_params() {
            return Err(Error::ParameterMismatch {
                expected: t.n_params(),
                found: params.len(),
            });
        }
        let (s, d) = params.split_at(t.singles.len());
        t.singles.iter_mut().zip(s).for_each(|(e, &v)| e.1 = v);
        t.doubles.iter_mut().zip(d).for_each(|(e, &v)| e.1 = v);
        Ok(t)
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n_spin_orbitals
    }

    pub fn n_params(&self) -> usize {
        self.singles.len() + self.doubles.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.singles
            .iter()
            .map(|e| e.1)
            .chain(self.doubles.iter().map(|e| e.1))
            .collect()
    }

    pub fn singles(&self) -> &[(SingleExcitation, f64)] {
        &self.singles
    }

    pub fn doubles(&self) -> &[(DoubleExcitation, f64)] {
        &self.doubles
    }
}

fn anti_hermitian_part(t: f64, ops: Vec<Ladder>) -> FermionOperatorSum {
    let term = FermionTerm {
        coefficient: Complex64::new(t, 0.0),
        ops,
    };
    let mut dag = term.dagger();
    dag.coefficient = -dag.coefficient;
    FermionOperatorSum {
        terms: vec![term, dag],
    }
}

fn single_generator(e: SingleExcitation, t: f64, n: usize) -> ComplexPauliSum {
    let ops = vec![Ladder::Create(e.to), Ladder::Annihilate(e.from)];
    jordan_wigner(&anti_hermitian_part(t, ops), n).expect("indices validated at construction")
}

fn double_generator(e: DoubleExcitation, t: f64, n: usize) -> ComplexPauliSum {
    let ops = vec![
        Ladder::Create(e.to[0]),
        Ladder::Create(e.to[1]),
        Ladder::Annihilate(e.from[0]),
        Ladder::Annihilate(e.from[1]),
    ];
    jordan_wigner(&anti_hermitian_part(t, ops), n).expect("indices validated at construction")
}

/// Jordan–Wigner image of `t (E − E†)` for every excitation, doubles first
/// and then singles. Zero amplitudes contribute empty sums.
pub fn excitation_generators(t: &ClusterAmplitudes) -> Vec<ComplexPauliSum> {
    let n = t.n_spin_orbitals;
    let doubles = t.doubles.iter().map(|&(e, v)| double_generator(e, v, n));
    let singles = t.singles.iter().map(|&(e, v)| single_generator(e, v, n));
    doubles.chain(singles).filter(|g| !g.is_empty()).collect()
}

/// JW image of `T − T†`; every coefficient is purely imaginary.
pub fn uccgsd_generator(t: &ClusterAmplitudes) -> ComplexPauliSum {
    let mut out = ComplexPauliSum::zero(t.n_spin_orbitals);
    for g in excitation_generators(t) {
        out.add(&g);
    }
    out.prune();
    out
}

/// How `exp(T − T†)` is realized in a circuit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponentiation {
    /// One first-order Trotter step: one exponential per excitation (doubles
    /// then singles), each realized exactly by `PauliExp` gates over its
    /// mutually commuting Pauli terms in lexicographic order.
    #[default]
    Trotter,
    /// A single exact exponential of the whole generator.
    Exact,
}

pub fn hartree_fock_circuit(n_qubits: usize, n_electrons: usize) -> Result<Circuit> {
    if n_electrons > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "{n_electrons} electrons do not fit in {n_qubits} spin orbitals"
        )));
    }
    let mut c = Circuit::new(n_qubits);
    for q in 0..n_electrons {
        c.push(Gate::X(q));
    }
    Ok(c)
}

pub fn hartree_fock_state(n_qubits: usize, n_electrons: usize) -> Result<Statevector> {
    if n_qubits == 0 || n_electrons > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "invalid Hartree-Fock request: {n_electrons} electrons, {n_qubits} qubits"
        )));
    }
    let index = ((1u64 << n_electrons) - 1) << (n_qubits - n_electrons);
    Ok(Statevector::basis_state(n_qubits, index))
}

/// `exp(G)` for an anti-Hermitian `G = Σ i g_j P_j`.
fn exponential_gates(g: &ComplexPauliSum, mode: Exponentiation) -> Vec<Gate> {
    match mode {
        Exponentiation::Trotter => g
            .terms()
            .map(|(p, c)| Gate::PauliExp {
                theta: -2.0 * c.im,
                pauli: p.clone(),
            })
            .collect(),
        Exponentiation::Exact => vec![Gate::PauliSumExp {
            terms: g.terms().map(|(p, c)| (-c.im, p.clone())).collect(),
        }],
    }
}

/// `V(t)`: the variational part of the ansatz, without the reference.
pub fn uccgsd_circuit(t: &ClusterAmplitudes, mode: Exponentiation) -> Circuit {
    let mut c = Circuit::new(t.n_spin_orbitals);
    match mode {
        Exponentiation::Trotter => {
            for g in excitation_generators(t) {
                for gate in exponential_gates(&g, mode) {
                    c.push(gate);
                }
            }
        }
        Exponentiation::Exact => {
            let g = uccgsd_generator(t);
            if !g.is_empty() {
                for gate in exponential_gates(&g, mode) {
                    c.push(gate);
                }
            }
        }
    }
    c
}

/// Hartree–Fock preparation followed by `V(t)`.
pub fn build_ansatz_circuit(t: &ClusterAmplitudes, n_electrons: usize, mode: Exponentiation) -> Result<Circuit> {
    let mut c = hartree_fock_circuit(t.n_spin_orbitals, n_electrons)?;
    c.extend(&uccgsd_circuit(t, mode));
    Ok(c)
}

/// Diagonal particle-number operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryOperator {
    ElectronNumber,
    SpinUp,
    SpinDown,
}

impl SymmetryOperator {
    /// Qubits counted by the operator: all, even (spin up) or odd (spin down).
    pub fn qubits(self, n_qubits: usize) -> impl Iterator<Item = usize> {
        (0..n_qubits).filter(move |q| match self {
            SymmetryOperator::ElectronNumber => true,
            SymmetryOperator::SpinUp => q % 2 == 0,
            SymmetryOperator::SpinDown => q % 2 == 1,
        })
    }

    pub fn mask(self, n_qubits: usize) -> u64 {
        self.qubits(n_qubits)
            .fold(0, |m, q| m | 1u64 << (n_qubits - 1 - q))
    }

    /// The operator as a Pauli sum, via JW of `Σ a_p† a_p`.
    pub fn operator(self, n_qubits: usize) -> PauliHamiltonian {
        let mut ops = FermionOperatorSum::new();
        for q in self.qubits(n_qubits) {
            ops.push(1.0, vec![Ladder::Create(q), Ladder::Annihilate(q)]);
        }
        jordan_wigner(&ops, n_qubits)
            .and_then(|s| s.to_hamiltonian(1e-12))
            .expect("number operators are Hermitian")
    }

    /// Exact `⟨s|C|s⟩`, using that `C` is diagonal.
    pub fn expectation(self, s: &Statevector) -> f64 {
        let mask = self.mask(s.n_qubits());
        s.amplitudes()
            .iter()
            .enumerate()
            .map(|(x, a)| a.norm_sqr() * (x as u64 & mask).count_ones() as f64)
            .sum()
    }
}

pub fn electrons_in_bitstring(outcome: u64, n_qubits: usize, kind: SymmetryOperator) -> u32 {
    (outcome & kind.mask(n_qubits)).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{bits_from_str, expectation_hamiltonian};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn number_operator_image() {
        let mut ops = FermionOperatorSum::new();
        ops.push(1.0, vec![Ladder::Create(0), Ladder::Annihilate(0)]);
        let jw = jordan_wigner(&ops, 1).unwrap();
        assert_eq!(jw.len(), 2);
        assert!((jw.coefficient(&ps("I")) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((jw.coefficient(&ps("Z")) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hopping_image() {
        let mut ops = FermionOperatorSum::new();
        ops.push(1.0, vec![Ladder::Create(1), Ladder::Annihilate(0)]);
        ops.push(1.0, vec![Ladder::Create(0), Ladder::Annihilate(1)]);
        let h = jordan_wigner(&ops, 2).unwrap().to_hamiltonian(1e-14).unwrap();
        let expected = PauliHamiltonian::new(2, [(0.5, ps("XX")), (0.5, ps("YY"))]).unwrap();
        assert_eq!(h.terms().len(), 2);
        for (a, b) in h.terms().iter().zip(expected.terms()) {
            assert_eq!(a.string, b.string);
            assert!((a.coefficient - b.coefficient).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_sum_maps_to_empty() {
        assert!(jordan_wigner(&FermionOperatorSum::new(), 3).unwrap().is_empty());
    }

    #[test]
    fn index_out_of_range() {
        let mut ops = FermionOperatorSum::new();
        ops.push(1.0, vec![Ladder::Create(4)]);
        assert!(matches!(jordan_wigner(&ops, 4), Err(Error::QubitOutOfRange { index: 4, .. })));
    }

    #[test]
    fn h2_parameter_count() {
        let t = ClusterAmplitudes::zeros(4);
        assert_eq!(t.singles().len(), 6);
        assert_eq!(t.doubles().len(), 3);
        assert_eq!(ClusterAmplitudes::n_params_for(4), 9);
        let pairs: Vec<_> = t.doubles().iter().map(|(e, _)| (e.from, e.to)).collect();
        assert_eq!(pairs, vec![([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])]);
        assert!(ClusterAmplitudes::from_params(4, &[0.0; 8]).is_err());
    }

    #[test]
    fn zero_amplitudes_give_empty_generator() {
        assert!(uccgsd_generator(&ClusterAmplitudes::zeros(4)).is_empty());
    }

    #[test]
    fn generator_is_anti_hermitian() {
        let params: Vec<f64> = (0..9).map(|i| 0.1 * i as f64 - 0.3).collect();
        let t = ClusterAmplitudes::from_params(4, &params).unwrap();
        let g = uccgsd_generator(&t);
        assert!(!g.is_empty());
        assert!(g.is_anti_hermitian(1e-15));
    }

    #[test]
    fn every_parameter_changes_the_generator() {
        let base = uccgsd_generator(&ClusterAmplitudes::zeros(4));
        for i in 0..9 {
            let mut p = vec![0.0; 9];
            p[i] = 0.3;
            let g = uccgsd_generator(&ClusterAmplitudes::from_params(4, &p).unwrap());
            assert_ne!(g, base, "parameter {i} has no effect");
        }
    }

    #[test]
    fn hartree_fock_examples() {
        assert_eq!(hartree_fock_state(4, 2).unwrap(), Statevector::basis_state(4, 0b1100));
        assert_eq!(hartree_fock_state(4, 0).unwrap(), Statevector::basis_state(4, 0));
        assert_eq!(hartree_fock_state(2, 2).unwrap(), Statevector::basis_state(2, 0b11));
        assert!(hartree_fock_state(2, 3).is_err());
        let c = build_ansatz_circuit(&ClusterAmplitudes::zeros(4), 2, Exponentiation::Trotter).unwrap();
        assert_eq!(c.prepare().unwrap(), hartree_fock_state(4, 2).unwrap());
    }

    #[test]
    fn electron_counts() {
        let b = |s| bits_from_str(s).unwrap();
        assert_eq!(electrons_in_bitstring(b("1100"), 4, SymmetryOperator::ElectronNumber), 2);
        assert_eq!(electrons_in_bitstring(b("0000"), 4, SymmetryOperator::ElectronNumber), 0);
        assert_eq!(electrons_in_bitstring(b("1111"), 4, SymmetryOperator::SpinUp), 2);
        assert_eq!(electrons_in_bitstring(b("1000"), 4, SymmetryOperator::SpinUp), 1);
        assert_eq!(electrons_in_bitstring(b("1000"), 4, SymmetryOperator::SpinDown), 0);
    }

    #[test]
    fn ansatz_conserves_electron_number() {
        let n_op = SymmetryOperator::ElectronNumber.operator(4);
        for mode in [Exponentiation::Trotter, Exponentiation::Exact] {
            for seed in 0..5 {
                let params: Vec<f64> = (0..9).map(|i| ((seed * 9 + i) as f64 * 0.77).sin()).collect();
                let t = ClusterAmplitudes::from_params(4, &params).unwrap();
                let s = build_ansatz_circuit(&t, 2, mode).unwrap().prepare().unwrap();
                assert!((expectation_hamiltonian(&s, &n_op).unwrap() - 2.0).abs() < 1e-10);
                assert!((SymmetryOperator::ElectronNumber.expectation(&s) - 2.0).abs() < 1e-10);
            }
        }
    }
}
