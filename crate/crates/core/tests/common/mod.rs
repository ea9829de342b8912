//! Independent dense-matrix oracles and random instance generators shared by
//! the integration tests. Nothing here calls into the simulator's kernels.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use vqd_core::pauli::{Pauli, PauliHamiltonian, PauliString};
use vqd_core::rng::{self, StreamRng};
use vqd_core::sim::{Circuit, Gate, Statevector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat2(a: [[Complex64; 2]; 2]) -> CMat {
    DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn pauli_matrix(p: Pauli) -> CMat {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => mat2([[l, o], [o, l]]),
        Pauli::X => mat2([[o, l], [l, o]]),
        Pauli::Y => mat2([[o, -i], [i, o]]),
        Pauli::Z => mat2([[l, o], [o, -l]]),
    }
}

/// Kronecker product with the first factor on the most significant qubit.
pub fn kron_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

pub fn string_matrix(p: &PauliString) -> CMat {
    let factors: Vec<CMat> = p.ops().iter().map(|&op| pauli_matrix(op)).collect();
    kron_all(&factors)
}

pub fn hamiltonian_matrix(h: &PauliHamiltonian) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for t in h.terms() {
        m += string_matrix(&t.string) * c(t.coefficient, 0.0);
    }
    m
}

fn embed_single(n: usize, q: usize, u: &CMat) -> CMat {
    let factors: Vec<CMat> = (0..n)
        .map(|k| if k == q { u.clone() } else { pauli_matrix(Pauli::I) })
        .collect();
    kron_all(&factors)
}

/// `exp(-i θ/2 P)` via `cos(θ/2) I − i sin(θ/2) P`.
pub fn pauli_rotation(theta: f64, p: &PauliString) -> CMat {
    let dim = 1usize << p.len();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    id * c((theta / 2.0).cos(), 0.0) - string_matrix(p) * c(0.0, (theta / 2.0).sin())
}

pub fn gate_matrix(g: &Gate, n: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let single = |q: usize, p: Pauli| PauliString::single(n, q, p);
    match g {
        Gate::H(q) => embed_single(n, *q, &mat2([[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])),
        Gate::X(q) => embed_single(n, *q, &pauli_matrix(Pauli::X)),
        Gate::Y(q) => embed_single(n, *q, &pauli_matrix(Pauli::Y)),
        Gate::Z(q) => embed_single(n, *q, &pauli_matrix(Pauli::Z)),
        Gate::S(q) => embed_single(n, *q, &mat2([[l, o], [o, i]])),
        Gate::Sdg(q) => embed_single(n, *q, &mat2([[l, o], [o, -i]])),
        Gate::Rx(q, t) => pauli_rotation(*t, &single(*q, Pauli::X)),
        Gate::Ry(q, t) => pauli_rotation(*t, &single(*q, Pauli::Y)),
        Gate::Rz(q, t) => pauli_rotation(*t, &single(*q, Pauli::Z)),
        Gate::Cnot { control, target } => {
            let p0 = mat2([[l, o], [o, o]]);
            let p1 = mat2([[o, o], [o, l]]);
            let a: Vec<CMat> = (0..n)
                .map(|k| if k == *control { p0.clone() } else { pauli_matrix(Pauli::I) })
                .collect();
            let b: Vec<CMat> = (0..n)
                .map(|k| {
                    if k == *control {
                        p1.clone()
                    } else if k == *target {
                        pauli_matrix(Pauli::X)
                    } else {
                        pauli_matrix(Pauli::I)
                    }
                })
                .collect();
            kron_all(&a) + kron_all(&b)
        }
        Gate::PauliExp { theta, pauli } => pauli_rotation(*theta, pauli),
        Gate::PauliSumExp { terms } => {
            let dim = 1usize << n;
            let mut gen = DMatrix::from_element(dim, dim, o);
            for (coef, p) in terms {
                gen += string_matrix(p) * c(0.0, -coef);
            }
            gen.exp()
        }
    }
}

pub fn circuit_matrix(circ: &Circuit) -> CMat {
    let n = circ.n_qubits();
    let dim = 1usize << n;
    circ.gates()
        .iter()
        .fold(DMatrix::identity(dim, dim), |acc, g| gate_matrix(g, n) * acc)
}

pub fn to_vector(s: &Statevector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn from_vector(n: usize, v: &DVector<Complex64>) -> Statevector {
    Statevector::from_amplitudes(n, v.iter().copied().collect()).unwrap()
}

pub fn distance(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    (a - b).norm()
}

/// Smallest eigenvalue and its eigenvector of a Hermitian matrix.
pub fn min_eigenpair(m: &CMat) -> (f64, DVector<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

pub fn sorted_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn projector(v: &DVector<Complex64>) -> CMat {
    v * v.adjoint()
}

pub fn random_pauli_string(n: usize, r: &mut StreamRng) -> PauliString {
    PauliString::new(
        (0..n)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][r.random_range(0..4)])
            .collect(),
    )
}

/// Up to `max_terms` random strings with coefficients in `U[−1, 1]`.
pub fn random_hamiltonian(n: usize, max_terms: usize, r: &mut StreamRng) -> PauliHamiltonian {
    let count = r.random_range(1..=max_terms);
    let terms: Vec<(f64, PauliString)> = (0..count)
        .map(|_| (r.random_range(-1.0..1.0), random_pauli_string(n, r)))
        .collect();
    PauliHamiltonian::new(n, terms).unwrap()
}

pub fn random_circuit(n: usize, depth: usize, r: &mut StreamRng) -> Circuit {
    let mut circ = Circuit::new(n);
    for _ in 0..depth {
        let q = r.random_range(0..n);
        let t = r.random_range(-3.0..3.0);
        let g = match r.random_range(0..12) {
            0 => Gate::H(q),
            1 => Gate::X(q),
            2 => Gate::Y(q),
            3 => Gate::Z(q),
            4 => Gate::S(q),
            5 => Gate::Sdg(q),
            6 if n > 1 => {
                let target = (q + r.random_range(1..n)) % n;
                Gate::Cnot { control: q, target }
            }
            7 => Gate::Rx(q, t),
            8 => Gate::Ry(q, t),
            9 => Gate::Rz(q, t),
            10 => Gate::PauliExp {
                theta: t,
                pauli: random_pauli_string(n, r),
            },
            _ => Gate::PauliSumExp {
                terms: (0..3).map(|_| (r.random_range(-0.5..0.5), random_pauli_string(n, r))).collect(),
            },
        };
        circ.push(g);
    }
    circ
}

pub fn random_state(n: usize, seed: u64) -> Statevector {
    Statevector::random(n, &mut rng::stream(seed, &[]))
}

pub fn fixture(bond: &str) -> PauliHamiltonian {
    let path = format!("{}/../../fixtures/h2_sto3g/h2_{bond}.ham", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    vqd_core::pauli::parse_hamiltonian_file(&text).unwrap().hamiltonian
}

pub const BOND_LENGTHS: [&str; 6] = ["0.3", "0.5", "0.7414", "1.0", "1.5", "2.0"];

/// Eigenvalues of the dense fixture matrix restricted to two-electron basis
/// states, computed without the library's analysis module.
pub fn two_electron_reference(h: &PauliHamiltonian) -> Vec<f64> {
    let m = hamiltonian_matrix(h);
    let idx: Vec<usize> = (0..m.nrows()).filter(|x| x.count_ones() == 2).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
    sorted_eigenvalues(&sub)
}
