//! Pauli strings and real-weighted Pauli-sum Hamiltonians.
//!
//! A [`PauliHamiltonian`] is always kept in canonical form: terms sorted
//! lexicographically by word, duplicate words merged, exact zeros dropped. The
//! text format is
//!
//! ```text
//! # comment
//! qubits 2
//! 0.5 ZZ
//! -0.25 XX
//! ```
//!
//! with qubit 0 the leftmost character of each word. Comments of the form
//! `# key: value` are kept as file metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-qubit product `self · other = phase · result`.
    pub fn product(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }
}

/// A tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            ops: vec![Pauli::I; n_qubits],
        }
    }

    /// A string that is `op` on `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.ops[qubit] = op;
        s
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    fn bit(&self, qubit: usize) -> u64 {
        1u64 << (self.ops.len() - 1 - qubit)
    }

    fn mask_where(&self, pred: impl Fn(Pauli) -> bool) -> u64 {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0, |m, (q, _)| m | self.bit(q))
    }

    /// Basis-index bits flipped by the string (X and Y positions).
    pub fn flip_mask(&self) -> u64 {
        self.mask_where(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Basis-index bits that pick up a sign (Z and Y positions).
    pub fn sign_mask(&self) -> u64 {
        self.mask_where(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    /// Every non-identity position.
    pub fn support_mask(&self) -> u64 {
        self.mask_where(|p| p != Pauli::I)
    }

    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// `i^(number of Y)`, the phase common to every basis state.
    pub fn y_phase(&self) -> Complex64 {
        Complex64::i().powu(self.y_count() as u32 % 4)
    }

    /// Product `self · other = phase · result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        assert_eq!(self.len(), other.len(), "Pauli product of unequal lengths");
        let mut phase = Complex64::new(1.0, 0.0);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (ph, p) = a.product(b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliString { ops })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.ops
            .iter()
            .zip(&other.ops)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count()
            % 2
            == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("invalid Pauli letter {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString::new)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// `H = Σ_j c_j P_j` with real coefficients, in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Builds a canonical Hamiltonian: duplicate words are summed, exact
    /// zeros dropped, terms sorted by word.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a Hamiltonian needs at least one qubit".into()));
        }
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (line, (c, s)) in terms.into_iter().enumerate() {
            if s.len() != n_qubits {
                return Err(Error::WordLength {
                    line: line + 1,
                    expected: n_qubits,
                    found: s.len(),
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFiniteCoefficient { line: line + 1 });
            }
            *merged.entry(s).or_insert(0.0) += c;
        }
        Ok(Self::from_merged(n_qubits, merged))
    }

    fn from_merged(n_qubits: usize, merged: BTreeMap<PauliString, f64>) -> Self {
        let terms = merged
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|(string, coefficient)| PauliTerm {
                coefficient,
                string,
            })
            .collect();
        Self { n_qubits, terms }
    }

    /// The zero operator on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// `Σ_j |c_j|`.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// `2 Σ_j |c_j|`, an upper bound on `E_max − E_min`.
    pub fn spectral_range_bound(&self) -> f64 {
        2.0 * self.coefficient_norm()
    }

    /// `-H`, used to find the top of the spectrum with a ground-state solver.
    pub fn negated(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coefficient: -t.coefficient,
                    string: t.string.clone(),
                })
                .collect(),
        }
    }

    /// Canonical text serialization; `parse_hamiltonian` inverts it exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for t in &self.terms {
            out.push_str(&format!("{:.16e} {}\n", t.coefficient, t.string));
        }
        out
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A parsed Hamiltonian file together with its `# key: value` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFile {
    pub hamiltonian: PauliHamiltonian,
    pub metadata: BTreeMap<String, String>,
}

impl HamiltonianFile {
    pub fn metadata_f64(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(|v| v.parse().ok())
    }
}

pub fn parse_hamiltonian(text: &str) -> Result<PauliHamiltonian> {
    parse_hamiltonian_file(text).map(|f| f.hamiltonian)
}

pub fn parse_hamiltonian_file(text: &str) -> Result<HamiltonianFile> {
    let mut metadata = BTreeMap::new();
    let mut n_qubits: Option<usize> = None;
    let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (content, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some((key, value)) = comment.and_then(|c| c.split_once(':')) {
            let key = key.trim();
            if !key.is_empty() && !key.contains(' ') {
                metadata.insert(key.to_string(), value.trim().to_string());
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(n) = n_qubits else {
            match fields.as_slice() {
                ["qubits", n] => {
                    let n: usize = n.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid qubit count {n:?}"),
                    })?;
                    if n == 0 {
                        return Err(Error::Parse {
                            line,
                            message: "qubit count must be positive".into(),
                        });
                    }
                    n_qubits = Some(n);
                    continue;
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: "expected `qubits N` header".into(),
                    })
                }
            }
        };
        let [coeff, word] = fields.as_slice() else {
            return Err(Error::Parse {
                line,
                message: "expected `<coefficient> <word>`".into(),
            });
        };
        let c: f64 = coeff.parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid coefficient {coeff:?}"),
        })?;
        if !c.is_finite() {
            return Err(Error::NonFiniteCoefficient { line });
        }
        let string: PauliString = word.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        })?;
        if string.len() != n {
            return Err(Error::WordLength {
                line,
                expected: n,
                found: string.len(),
            });
        }
        *merged.entry(string).or_insert(0.0) += c;
    }

    let n_qubits = n_qubits.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing `qubits N` header".into(),
    })?;
    Ok(HamiltonianFile {
        hamiltonian: PauliHamiltonian::from_merged(n_qubits, merged),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_single_term() {
        let h = parse_hamiltonian("qubits 1\n0.5 Z").unwrap();
        assert_eq!(h.n_qubits(), 1);
        assert_eq!(h.terms(), &[PauliTerm { coefficient: 0.5, string: ps("Z") }]);
    }

    #[test]
    fn parse_merges_duplicates() {
        let h = parse_hamiltonian("qubits 2\n0.25 XX\n0.25 XX").unwrap();
        assert_eq!(h.terms(), &[PauliTerm { coefficient: 0.5, string: ps("XX") }]);
    }

    #[test]
    fn parse_drops_cancelled_terms() {
        let h = parse_hamiltonian("qubits 2\n0.25 XX\n-0.25 XX\n1 ZI").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].string, ps("ZI"));
    }

    #[test]
    fn parse_rejects_word_length_mismatch() {
        let err = parse_hamiltonian("qubits 2\n1.0 XYZ").unwrap_err();
        assert_eq!(err, Error::WordLength { line: 2, expected: 2, found: 3 });
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_hamiltonian("# header\nqubits 2\n1.0 XX\nbogus").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = parse_hamiltonian("qubits 2\n1.0 XQ").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_hamiltonian("qubits 1\ninf Z").unwrap_err();
        assert_eq!(err, Error::NonFiniteCoefficient { line: 2 });
        let err = parse_hamiltonian("qubits 1\nNaN Z").unwrap_err();
        assert_eq!(err, Error::NonFiniteCoefficient { line: 2 });
        assert!(parse_hamiltonian("# nothing").is_err());
        assert!(parse_hamiltonian("0.5 Z").is_err());
    }

    #[test]
    fn comments_and_metadata() {
        let f = parse_hamiltonian_file(
            "# bond_length_angstrom: 0.7414\n# free text, not metadata\nqubits 1 # trailing\n0.5 Z # note\n",
        )
        .unwrap();
        assert_eq!(f.metadata_f64("bond_length_angstrom"), Some(0.7414));
        assert_eq!(f.metadata.len(), 1);
        assert_eq!(f.hamiltonian.terms().len(), 1);
    }

    #[test]
    fn coefficient_norm_examples() {
        let h = PauliHamiltonian::new(1, [(0.5, ps("Z"))]).unwrap();
        assert_eq!(h.coefficient_norm(), 0.5);
        assert_eq!(h.spectral_range_bound(), 1.0);
        let h = PauliHamiltonian::new(2, [(0.5, ps("ZZ")), (-0.25, ps("XX"))]).unwrap();
        assert_eq!(h.coefficient_norm(), 0.75);
        let h = PauliHamiltonian::zero(3);
        assert_eq!(h.coefficient_norm(), 0.0);
        assert_eq!(h.spectral_range_bound(), 0.0);
        let h = PauliHamiltonian::new(1, [(1.0, ps("Z")), (1.0, ps("X"))]).unwrap();
        assert_eq!(h.spectral_range_bound(), 4.0);
    }

    #[test]
    fn identity_word_is_allowed() {
        let h = parse_hamiltonian("qubits 3\n-1.5 III").unwrap();
        assert!(h.terms()[0].string.is_identity());
    }

    #[test]
    fn masks_follow_qubit_zero_leftmost() {
        let p = ps("XIZY");
        assert_eq!(p.flip_mask(), 0b1001);
        assert_eq!(p.sign_mask(), 0b0011);
        assert_eq!(p.support_mask(), 0b1011);
        assert_eq!(p.y_count(), 1);
    }

    #[test]
    fn products_and_commutation() {
        let (ph, p) = ps("XY").mul(&ps("YY"));
        assert_eq!(p, ps("ZI"));
        assert_eq!(ph, Complex64::i());
        assert!(ps("XX").commutes_with(&ps("YY")));
        assert!(!ps("XI").commutes_with(&ps("ZI")));
        assert!(ps("XZ").commutes_with(&ps("IZ")));
    }

    fn arb_hamiltonian() -> impl Strategy<Value = PauliHamiltonian> {
        (1usize..5).prop_flat_map(|n| {
            let word = proptest::collection::vec(0u8..4, n);
            proptest::collection::vec((-2.0f64..2.0, word), 0..12).prop_map(move |raw| {
                let terms = raw.into_iter().map(|(c, w)| {
                    let ops = w
                        .into_iter()
                        .map(|b| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][b as usize])
                        .collect();
                    (c, PauliString::new(ops))
                });
                PauliHamiltonian::new(n, terms).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(h in arb_hamiltonian()) {
            let text = h.to_text();
            let back = parse_hamiltonian(&text).unwrap();
            prop_assert_eq!(&back, &h);
            prop_assert_eq!(back.to_text(), text);
        }

        #[test]
        fn norm_invariant_under_reordering(h in arb_hamiltonian()) {
            let mut terms: Vec<_> = h.terms().iter().map(|t| (t.coefficient, t.string.clone())).collect();
            terms.reverse();
            let r = PauliHamiltonian::new(h.n_qubits(), terms).unwrap();
            prop_assert_eq!(&r, &h);
            prop_assert!((r.coefficient_norm() - h.coefficient_norm()).abs() < 1e-12);
        }
    }
}
