//! Parameterized state families `R(λ)|0⟩`.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::fermion::{self, ClusterAmplitudes, Exponentiation};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{Circuit, Gate, Statevector};
use crate::{Error, Result};

/// The fixed reference part of an ansatz that factors as `V(λ) R_ref`.
#[derive(Debug, Clone)]
pub struct Reference {
    pub circuit: Circuit,
    pub state: Statevector,
    pub n_electrons: usize,
}

pub trait Ansatz: Debug + Send + Sync {
    fn n_qubits(&self) -> usize;

    fn n_params(&self) -> usize;

    /// The full preparation circuit `R(λ)` acting on `|0…0⟩`.
    fn circuit(&self, params: &[f64]) -> Result<Circuit>;

    fn prepare(&self, params: &[f64]) -> Result<Statevector> {
        self.circuit(params)?.prepare()
    }

    /// Reference state for ansätze of the form `V(λ) R_ref`, if any.
    fn reference(&self) -> Option<Reference> {
        None
    }

    /// `V(λ)` alone. Only meaningful when [`Ansatz::reference`] is `Some`.
    fn variational_circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.circuit(params)
    }

    fn describe(&self) -> String;

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::ParameterMismatch {
                expected: self.n_params(),
                found: params.len(),
            });
        }
        Ok(())
    }
}

/// Generalized unitary coupled cluster (singles and doubles) on top of the
/// Hartree–Fock reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UccgsdAnsatz {
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub exponentiation: Exponentiation,
}

impl UccgsdAnsatz {
    pub fn new(n_qubits: usize, n_electrons: usize) -> Self {
        Self {
            n_qubits,
            n_electrons,
            exponentiation: Exponentiation::Trotter,
        }
    }

    pub fn with_exponentiation(mut self, mode: Exponentiation) -> Self {
        self.exponentiation = mode;
        self
    }
}

impl Ansatz for UccgsdAnsatz {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        ClusterAmplitudes::n_params_for(self.n_qubits)
    }

    fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        let t = ClusterAmplitudes::from_params(self.n_qubits, params)?;
        fermion::build_ansatz_circuit(&t, self.n_electrons, self.exponentiation)
    }

    fn reference(&self) -> Option<Reference> {
        Some(Reference {
            circuit: fermion::hartree_fock_circuit(self.n_qubits, self.n_electrons).ok()?,
            state: fermion::hartree_fock_state(self.n_qubits, self.n_electrons).ok()?,
            n_electrons: self.n_electrons,
        })
    }

    fn variational_circuit(&self, params: &[f64]) -> Result<Circuit> {
        let t = ClusterAmplitudes::from_params(self.n_qubits, params)?;
        Ok(fermion::uccgsd_circuit(&t, self.exponentiation))
    }

    fn describe(&self) -> String {
        format!(
            "uccgsd(n_qubits={}, n_electrons={}, exponentiation={:?}, order=doubles-then-singles)",
            self.n_qubits, self.n_electrons, self.exponentiation
        )
    }
}

/// A family that reaches every `n`-qubit state up to global phase with
/// `2(2^n − 1)` parameters.
///
/// The first `2^n − 1` parameters drive uniformly controlled `Ry` rotations
/// (qubit `t` rotated by an angle that depends on qubits `< t`), written as
/// commuting `exp(-iθ/2 · Y_t Z_S)` factors over subsets `S` of the earlier
/// qubits; they set real amplitudes. The remaining `2^n − 1` parameters are
/// `exp(-iφ/2 · Z_S)` over nonempty subsets `S` and set relative phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalAnsatz {
    pub n_qubits: usize,
}

impl UniversalAnsatz {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits }
    }

    fn z_string(&self, subset: u64) -> Vec<Pauli> {
        (0..self.n_qubits)
            .map(|q| if subset >> q & 1 == 1 { Pauli::Z } else { Pauli::I })
            .collect()
    }
}

impl Ansatz for UniversalAnsatz {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        2 * ((1usize << self.n_qubits) - 1)
    }

    fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.check_params(params)?;
        let mut c = Circuit::new(self.n_qubits);
        let mut next = params.iter();
        for target in 0..self.n_qubits {
            for subset in 0..1u64 << target {
                let mut ops = self.z_string(subset);
                ops[target] = Pauli::Y;
                c.push(Gate::PauliExp {
                    theta: *next.next().expect("length checked"),
                    pauli: PauliString::new(ops),
                });
            }
        }
        for subset in 1..1u64 << self.n_qubits {
            c.push(Gate::PauliExp {
                theta: *next.next().expect("length checked"),
                pauli: PauliString::new(self.z_string(subset)),
            });
        }
        Ok(c)
    }

    fn describe(&self) -> String {
        format!("universal(n_qubits={})", self.n_qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sim::inner_product;
    use rand::Rng;

    #[test]
    fn parameter_counts() {
        assert_eq!(UccgsdAnsatz::new(4, 2).n_params(), 9);
        assert_eq!(UniversalAnsatz::new(1).n_params(), 2);
        assert_eq!(UniversalAnsatz::new(3).n_params(), 14);
        assert!(UniversalAnsatz::new(2).circuit(&[0.0; 5]).is_err());
    }

    #[test]
    fn universal_ansatz_reaches_basis_states() {
        // Ry(π) on qubit 0 takes |0⟩ to |1⟩.
        let a = UniversalAnsatz::new(1);
        let s = a.prepare(&[std::f64::consts::PI, 0.0]).unwrap();
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn universal_ansatz_parameters_are_all_active() {
        let a = UniversalAnsatz::new(3);
        let mut r = rng::stream(3, &[]);
        let p: Vec<f64> = (0..a.n_params()).map(|_| r.random_range(-1.0..1.0)).collect();
        let s0 = a.prepare(&p).unwrap();
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i] += 0.3;
            let s1 = a.prepare(&q).unwrap();
            let f = inner_product(&s0, &s1).unwrap().norm_sqr();
            assert!(f < 1.0 - 1e-6, "parameter {i} has no effect");
        }
    }

    #[test]
    fn uccgsd_reference_split() {
        let a = UccgsdAnsatz::new(4, 2);
        let p: Vec<f64> = (0..9).map(|i| 0.05 * i as f64).collect();
        let r = a.reference().unwrap();
        let mut full = r.circuit.clone();
        full.extend(&a.variational_circuit(&p).unwrap());
        assert_eq!(full, a.circuit(&p).unwrap());
    }
}
