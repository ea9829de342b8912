//! Variational quantum deflation over a dense statevector simulator.
//!
//! The crate finds ground and excited eigenvalues of qubit Hamiltonians by
//! minimizing, stage by stage, the energy of a parameterized trial state plus
//! weighted overlap penalties against every state found so far.
//!
//! Module map:
//!
//! - [`pauli`]: Pauli strings, real Pauli-sum Hamiltonians, the text file format.
//! - [`sim`]: statevectors, gates, circuits, exact and sampled expectations.
//! - [`fermion`]: Jordan–Wigner mapping, Hartree–Fock reference, UCCGSD.
//! - [`ansatz`]: the parameterized state families the solver optimizes over.
//! - [`overlap`]: exact, inverse-circuit, destructive-SWAP and symmetry-filtered
//!   overlap estimators.
//! - [`deflation`]: objectives, β strategies, γ-doubling, Nelder–Mead and the
//!   stage-by-stage solver.
//! - [`shots`]: variance models and optimal shot allocation.
//! - [`analysis`]: exact diagonalization, error-accumulation bounds, bootstrap
//!   statistics and the error-accumulation experiment.
//!
//! Qubit 0 is the leftmost character of a Pauli word and the most significant
//! bit of a basis-state index, so `|1100⟩` is index 12.

pub mod analysis;
pub mod ansatz;
pub mod deflation;
mod error;
pub mod fermion;
pub mod overlap;
pub mod pauli;
pub mod rng;
pub mod shots;
pub mod sim;

pub use error::{Error, Result};
