"""Pauli-string decomposition of small Hermitian matrices.

Needed to turn a truncated Hamiltonian into separately measurable terms;
coefficients are Tr(P H) / 2^n.  Real symmetric matrices only produce
strings with an even number of Y factors, so all coefficients are real.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product

import numpy as np


class BadDimension(ValueError):
    """Matrix dimension is not a power of two."""


_PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Kronecker product for a label like 'XIZ' (leftmost = highest qubit)."""
    return reduce(np.kron, (_PAULIS[ch] for ch in label))


@dataclass(frozen=True)
class PauliDecomposition:
    n_qubits: int
    terms: tuple[tuple[float, str], ...]

    @property
    def identity_coefficient(self) -> float:
        for coeff, label in self.terms:
            if set(label) == {"I"}:
                return coeff
        return 0.0

    def reconstruct(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, label in self.terms:
            out += coeff * pauli_matrix(label)
        return out


def pauli_decompose(matrix: np.ndarray, tol: float = 1e-12) -> PauliDecomposition:
    """Expand a Hermitian matrix over Pauli strings, dropping tiny terms."""
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise BadDimension("expected a square matrix")
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise BadDimension(f"dimension {dim} is not a power of two")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    terms = []
    for labels in product("IXYZ", repeat=n):
        label = "".join(labels)
        coeff = np.trace(pauli_matrix(label) @ matrix) / dim
        if abs(coeff.imag) > 1e-10:
            raise ValueError(f"non-real coefficient for {label}: {coeff}")
        if abs(coeff.real) > tol:
            terms.append((float(coeff.real), label))
    return PauliDecomposition(n_qubits=n, terms=tuple(terms))
