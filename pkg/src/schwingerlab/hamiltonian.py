"""Hamiltonian matrices in a sector basis.

The Hamiltonian splits into three coupling-independent components,

    H(e, m) = e^2 * A_em + m * A_mass + A_kin,

where A_em collects the zero-mode kinetic energy (n^2/(4L)) together with
the csc^2-weighted charge-mode interactions, A_mass is the staggered mass
operator (the half-period charge mode), and A_kin is the fermion hopping
term, which is diagonal in the configurations and moves the zero-mode
number by +-1.  Components are assembled once per basis; sweeps over
couplings then reduce to forming the linear combination and diagonalizing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .basis import (
    EmptyBasis,
    Expansion,
    SectorBasis,
    SectorState,
    build_sector_basis,
    expansion_apply_charge_mode,
    expansion_inner,
    kinetic_hop_coefficient,
)
from .fock import charge_mode_terms, config_string, popcount
from .params import LatticeParams


class BasisMismatch(ValueError):
    """States passed to a matrix-element routine do not share a basis."""


class DimTooLarge(ValueError):
    """Requested truncation dimension exceeds the basis size."""


# ---------------------------------------------------------------------------
# config-space operator columns
# ---------------------------------------------------------------------------

def _apply_mode(col: dict[int, complex], l: int, n_modes: int) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for bits, a in col.items():
        for new_bits, sign in charge_mode_terms(bits, l % n_modes, n_modes):
            out[new_bits] = out.get(new_bits, 0.0) + a * sign
    return out


def _em_column(bits: int, L: int) -> dict[int, complex]:
    """Charge-mode part of the electric energy applied to one configuration."""
    n_modes = 2 * L
    out: dict[int, complex] = {}
    start = {bits: 1.0}
    for l in range(1, L):
        w = 1.0 / (8 * L * math.sin(math.pi * l / n_modes) ** 2)
        step = _apply_mode(_apply_mode(start, l, n_modes), n_modes - l, n_modes)
        for c, a in step.items():
            out[c] = out.get(c, 0.0) + w * a
    jl = _apply_mode(start, L, n_modes)
    jll = _apply_mode(jl, L, n_modes)
    w = 1.0 / (16 * L)
    for c, a in jll.items():
        out[c] = out.get(c, 0.0) + w * a
    for c, a in jl.items():
        out[c] = out.get(c, 0.0) + 2 * L * w * a
    out[bits] = out.get(bits, 0.0) + L * L * w
    return out


def _mass_column(bits: int, L: int) -> dict[int, complex]:
    return _apply_mode({bits: 1.0}, L, 2 * L)


# ---------------------------------------------------------------------------
# sector components
# ---------------------------------------------------------------------------

def _product_operator(index, columns) -> sp.csc_matrix:
    rows, cols, vals = [], [], []
    for key, j in index.items():
        n, c = key
        for (dn, c_new), val in columns(n, c):
            row = index.get((n + dn, c_new))
            if row is None:
                continue
            rows.append(row)
            cols.append(j)
            vals.append(val)
    dim = len(index)
    return sp.csc_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)


def sector_operator_matrices(basis: SectorBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project the three Hamiltonian components onto a sector basis."""
    params = basis.params
    L = params.L
    index = basis.product_index()
    s_mat = basis.expansion_matrix(index)
    configs = sorted({c for (_, c) in index})
    em_cols = {c: _em_column(c, L) for c in configs}
    mass_cols = {c: _mass_column(c, L) for c in configs}
    hop_coeff = {c: kinetic_hop_coefficient(c, L) for c in configs}

    def em(n, c):
        yield (0, c), n * n / (4 * L)
        for c_new, val in em_cols[c].items():
            yield (0, c_new), val

    def mass(n, c):
        for c_new, val in mass_cols[c].items():
            yield (0, c_new), val

    def kin(n, c):
        cm = hop_coeff[c]
        yield (-1, c), cm
        yield (+1, c), np.conj(cm)

    out = []
    for columns in (em, mass, kin):
        m = _product_operator(index, columns)
        a = (s_mat.conj().T @ m @ s_mat).toarray()
        out.append(a)
    return tuple(out)


def _tidy(a: np.ndarray, hermitian_tol: float = 1e-11) -> np.ndarray:
    """Symmetrize tiny numerical noise; drop an identically-zero imaginary part."""
    defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if defect > hermitian_tol:
        raise AssertionError(f"component not hermitian (defect {defect:.2e})")
    a = 0.5 * (a + a.conj().T)
    imag_max = float(np.max(np.abs(a.imag))) if a.size else 0.0
    if imag_max <= 1e-12:
        return np.ascontiguousarray(a.real)
    return a


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Hamiltonian of one sector at the basis parameters, with its split parts."""

    basis: SectorBasis
    a_em: np.ndarray
    a_mass: np.ndarray
    a_kin: np.ndarray

    @property
    def params(self) -> LatticeParams:
        return self.basis.params

    def matrix(self, e: float | None = None, m: float | None = None) -> np.ndarray:
        e = self.params.e if e is None else e
        m = self.params.m if m is None else m
        return e * e * self.a_em + m * self.a_mass + self.a_kin

    @property
    def entries(self) -> np.ndarray:
        return self.matrix()

    @property
    def h0(self) -> np.ndarray:
        """Strong-coupling (zero-mode-diagonal) part at the basis couplings."""
        return self.params.e ** 2 * self.a_em + self.params.m * self.a_mass

    @property
    def h1(self) -> np.ndarray:
        """Hopping part coupling neighboring zero-mode numbers."""
        return self.a_kin

    @property
    def dim(self) -> int:
        return len(self.basis.states)

    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries)

    def symmetry_defect(self) -> float:
        h = self.entries
        return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def build_hamiltonian(basis: SectorBasis) -> HamiltonianMatrix:
    """Assemble the sector Hamiltonian generically from the operator algebra."""
    if not basis.states:
        raise EmptyBasis("cannot build a Hamiltonian on an empty basis")
    a_em, a_mass, a_kin = (
        _tidy(a) for a in sector_operator_matrices(basis)
    )
    return HamiltonianMatrix(basis=basis, a_em=a_em, a_mass=a_mass, a_kin=a_kin)


# cached component assembly for parameter sweeps ----------------------------

@lru_cache(maxsize=128)
def _cached_components(L: int, k: int, n_max: int, parity: str,
                       reps: tuple[int, ...] | None, fold: bool) -> HamiltonianMatrix:
    params = LatticeParams(L=L, e=1.0, m=0.0, theta=k * math.pi / L, n_max=n_max)
    basis = build_sector_basis(params, parity=parity,
                               rep_configs=reps, fold=fold)
    return build_hamiltonian(basis)


def hamiltonian_for(params: LatticeParams, parity: str = "none",
                    rep_configs: Sequence[int] | None = None,
                    fold: bool = True) -> HamiltonianMatrix:
    """Sector Hamiltonian with cached basis/components; cheap across (e, m) sweeps."""
    reps = tuple(sorted(rep_configs)) if rep_configs is not None else None
    cached = _cached_components(params.L, params.k, params.n_max, parity, reps, fold)
    return HamiltonianMatrix(
        basis=SectorBasis(
            params=params,
            parity=cached.basis.parity,
            states=cached.basis.states,
            families=cached.basis.families,
            folded=cached.basis.folded,
            translation_eigenvalue=cached.basis.translation_eigenvalue,
        ),
        a_em=cached.a_em,
        a_mass=cached.a_mass,
        a_kin=cached.a_kin,
    )


# ---------------------------------------------------------------------------
# single matrix elements
# ---------------------------------------------------------------------------

def _check_states(state_i: SectorState, state_j: SectorState, params: LatticeParams) -> None:
    for st in (state_i, state_j):
        for n, c in st.expansion:
            if abs(n) > params.n_max or popcount(c) != params.L:
                raise BasisMismatch(
                    "state does not belong to a basis for the given parameters"
                )


def matrix_element_h0(state_i: SectorState, state_j: SectorState,
                      params: LatticeParams) -> complex:
    """Strong-coupling part: zero-mode energy, charge modes, and mass term."""
    _check_states(state_i, state_j, params)
    L = params.L
    ket: Expansion = dict(state_j.expansion)
    out: Expansion = {}
    for (n, c), a in ket.items():
        key = (n, c)
        out[key] = out.get(key, 0.0) + a * (n * params.e) ** 2 / (4 * L)
    for l in range(1, L):
        w = params.e ** 2 / (8 * L * math.sin(math.pi * l / (2 * L)) ** 2)
        jj = expansion_apply_charge_mode(
            expansion_apply_charge_mode(ket, l, L), 2 * L - l, L)
        for key, a in jj.items():
            out[key] = out.get(key, 0.0) + w * a
    w = params.e ** 2 / (16 * L)
    jl = expansion_apply_charge_mode(ket, L, L)
    jll = expansion_apply_charge_mode(jl, L, L)
    for key, a in jll.items():
        out[key] = out.get(key, 0.0) + w * a
    for key, a in jl.items():
        out[key] = out.get(key, 0.0) + (2 * L * w + params.m) * a
    for key, a in ket.items():
        out[key] = out.get(key, 0.0) + L * L * w * a
    val = expansion_inner(dict(state_i.expansion), out)
    return val.real if abs(val.imag) < 1e-12 else val


def matrix_element_h1(state_i: SectorState, state_j: SectorState,
                      params: LatticeParams) -> complex:
    """Hopping part: configuration-diagonal, zero-mode number changes by one."""
    _check_states(state_i, state_j, params)
    L = params.L
    out: Expansion = {}
    for (n, c), a in state_j.expansion.items():
        cm = kinetic_hop_coefficient(c, L)
        if abs(n - 1) <= params.n_max:
            key = (n - 1, c)
            out[key] = out.get(key, 0.0) + a * cm
        if abs(n + 1) <= params.n_max:
            key = (n + 1, c)
            out[key] = out.get(key, 0.0) + a * np.conj(cm)
    val = expansion_inner(dict(state_i.expansion), out)
    return val.real if abs(val.imag) < 1e-12 else val


# ---------------------------------------------------------------------------
# truncation for the quantum stage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Restriction of a sector Hamiltonian to its most significant states."""

    parent: HamiltonianMatrix
    dim: int
    selected_states: tuple[int, ...]  # parent indices, in descending contribution
    permutation: tuple[int, ...]
    a_em: np.ndarray
    a_mass: np.ndarray
    a_kin: np.ndarray
    reference: tuple[float, float]

    def matrix(self, e: float | None = None, m: float | None = None) -> np.ndarray:
        e = self.parent.params.e if e is None else e
        m = self.parent.params.m if m is None else m
        return e * e * self.a_em + m * self.a_mass + self.a_kin

    @property
    def entries(self) -> np.ndarray:
        return self.matrix(*self.reference)


def truncate(h: HamiltonianMatrix, dim: int, reference: tuple[float, float],
             extra_swap: tuple[int, int] | None = None) -> TruncatedHamiltonian:
    """Keep the ``dim`` basis states contributing most at the reference point.

    Contribution is the summed magnitude of a state's amplitude in the two
    lowest eigenvectors of the sector Hamiltonian at reference (e, m); the
    kept states are ordered by descending contribution, then ``extra_swap``
    (a pair of positions) is applied if given.
    """
    if dim > h.dim:
        raise DimTooLarge(f"dim={dim} exceeds basis size {h.dim}")
    e_ref, m_ref = reference
    mat = h.matrix(e_ref, m_ref)
    _, vecs = np.linalg.eigh(mat)
    contrib = np.abs(vecs[:, 0])
    if mat.shape[0] > 1:
        contrib = contrib + np.abs(vecs[:, 1])
    order = sorted(range(h.dim), key=lambda i: (-contrib[i], i))
    selected = list(order[:dim])
    if extra_swap is not None:
        i, j = extra_swap
        selected[i], selected[j] = selected[j], selected[i]
    sel = np.asarray(selected)
    return TruncatedHamiltonian(
        parent=h,
        dim=dim,
        selected_states=tuple(selected),
        permutation=tuple(selected),
        a_em=h.a_em[np.ix_(sel, sel)],
        a_mass=h.a_mass[np.ix_(sel, sel)],
        a_kin=h.a_kin[np.ix_(sel, sel)],
        reference=(e_ref, m_ref),
    )


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def matrix_to_text(h: HamiltonianMatrix) -> str:
    """Readable dump: one line per state label, then the dense matrix."""
    n_modes = 2 * h.params.L
    lines = [f"# state {i}: {st.label(n_modes)}"
             for i, st in enumerate(h.basis.states)]
    mat = h.entries
    complex_entries = bool(np.iscomplexobj(mat))
    for row in mat:
        if complex_entries:
            lines.append(" ".join(f"{v.real:+.12e}{v.imag:+.12e}j" for v in row))
        else:
            lines.append(" ".join(f"{v:+.12e}" for v in row))
    return "\n".join(lines) + "\n"


def write_matrix_csv(h: HamiltonianMatrix, path) -> None:
    """CSV dump of nonzero entries with state labels, for cross-checking."""
    import csv

    n_modes = 2 * h.params.L
    mat = h.entries
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "value", "label_i", "label_j"])
        for i, st_i in enumerate(h.basis.states):
            for j, st_j in enumerate(h.basis.states):
                v = mat[i, j]
                if abs(v) < 1e-15:
                    continue
                writer.writerow([i, j, repr(complex(v).real if not np.iscomplexobj(mat) else v),
                                 st_i.label(n_modes), st_j.label(n_modes)])
