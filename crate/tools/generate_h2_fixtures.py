"""Regenerate the H2 STO-3G qubit Hamiltonian fixtures.

Electronic integrals come from PySCF (RHF, STO-3G); the fermionic Hamiltonian
is mapped to qubits with OpenFermion's Jordan-Wigner transform. Spin orbitals
are interleaved (spatial orbital o, spin s -> qubit 2*o + s) and qubit 0 is
the leftmost character of each Pauli word.

Usage: python3 tools/generate_h2_fixtures.py fixtures/h2_sto3g
"""

import sys
from pathlib import Path

import numpy as np
import openfermion
import pyscf
from openfermion.chem.molecular_data import spinorb_from_spatial
from pyscf import ao2mo, gto, scf

BOND_LENGTHS = [0.3, 0.5, 0.7414, 1.0, 1.5, 2.0]


def qubit_hamiltonian(bond_length):
    mol = gto.M(
        atom=f"H 0 0 0; H 0 0 {bond_length}",
        basis="sto-3g",
        unit="Angstrom",
        verbose=0,
    )
    mf = scf.RHF(mol).run()
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    n = c.shape[1]
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), n)
    # chemist (pq|rs) -> physicist <pr|qs> ordering used by OpenFermion
    h2 = np.asarray(eri.transpose(0, 2, 3, 1), order="C")
    one_body, two_body = spinorb_from_spatial(h1, h2)
    op = openfermion.InteractionOperator(mol.energy_nuc(), one_body, 0.5 * two_body)
    qop = openfermion.jordan_wigner(op)
    n_qubits = 2 * n
    terms = {}
    for term, coeff in qop.terms.items():
        assert abs(coeff.imag) < 1e-12
        word = ["I"] * n_qubits
        for q, p in term:
            word[q] = p
        terms["".join(word)] = terms.get("".join(word), 0.0) + coeff.real
    return mf.e_tot, n_qubits, terms


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for r in BOND_LENGTHS:
        e_hf, n_qubits, terms = qubit_hamiltonian(r)
        lines = [
            "# H2 / STO-3G, Jordan-Wigner, interleaved spin orbitals (qubit 2*o + s)",
            f"# bond_length_angstrom: {r}",
            "# n_electrons: 2",
            f"# hartree_fock_energy: {e_hf:.12f}",
            f"# provenance: PySCF {pyscf.__version__} RHF integrals, "
            f"OpenFermion {openfermion.__version__} jordan_wigner",
            f"qubits {n_qubits}",
        ]
        for word in sorted(terms):
            c = terms[word]
            if abs(c) < 1e-14:
                continue
            lines.append(f"{c:.17g} {word}")
        (out / f"h2_{r}.ham").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
