"""Analytic small-lattice Hamiltonians, independent of the generic builder.

For two, three, and four spatial sites the matrix elements of the sector
Hamiltonian reduce to short trigonometric sums over the shift orbit of each
configuration family,

    <n, F'| O |n, F> = sqrt(d' d)/(2L) * sum_d exp(i*d*chi) * c_d(F', O, F),

with chi = theta - n*pi/L and integer orbit-correlation coefficients c_d.
The tables below were derived once by brute-force operator algebra on the
full Fock space (creation/annihilation matrices, explicit shift unitary) and
are frozen here; the test suite re-derives them from scratch.  The hopping
term is diagonal in the configurations, so its only matrix elements are
same-family couplings between neighboring zero-mode numbers, equal to the
representative's hopping coefficient.

This module shares only basis *labels* with the generic path; every entry is
computed from the frozen data, which makes it an independent oracle for the
assembled matrices.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .basis import SectorBasis, build_sector_basis, kinetic_hop_coefficient
from .fock import config_string
from .hamiltonian import HamiltonianMatrix
from .params import LatticeParams


class UnsupportedL(ValueError):
    """Closed forms exist for L in {2, 3, 4} only."""


# orbit-correlation tables, keyed by (operator, bra family, ket family);
# families are named by their canonical representative's occupation string.
# "one" is the plain orbit overlap (identity operator).

_TABLES: dict[int, dict[tuple[str, str, str], tuple[int, ...]]] = {
    2: {
        ("one", "0011", "0011"): (1, 0, 0, 0),
        ("j1dag_j1", "0011", "0011"): (1, 0, -1, 0),
        ("jL", "0011", "0011"): (0, -1, 0, -1),
        ("jL2", "0011", "0011"): (2, 0, 2, 0),
    },
    3: {
        ("one", "000111", "000111"): (1, 0, 0, 0, 0, 0),
        ("one", "010101", "010101"): (1, 0, 1, 0, 1, 0),
        ("one", "000111", "010101"): (0,) * 6,
        ("one", "010101", "000111"): (0,) * 6,
        ("j1dag_j1", "000111", "000111"): (1, 0, 0, 0, 0, 0),
        ("j1dag_j1", "000111", "010101"): (0, -1, 0, -1, 0, -1),
        ("j1dag_j1", "010101", "000111"): (0, -1, 0, -1, 0, -1),
        ("j1dag_j1", "010101", "010101"): (3, 0, 3, 0, 3, 0),
        ("j2dag_j2", "000111", "000111"): (2, 0, -1, 0, -1, 0),
        ("j2dag_j2", "000111", "010101"): (0,) * 6,
        ("j2dag_j2", "010101", "000111"): (0,) * 6,
        ("j2dag_j2", "010101", "010101"): (0,) * 6,
        ("jL", "000111", "000111"): (0, -1, 0, 0, 0, -1),
        ("jL", "000111", "010101"): (-1, 0, -1, 0, -1, 0),
        ("jL", "010101", "000111"): (-1, 0, -1, 0, -1, 0),
        ("jL", "010101", "010101"): (0,) * 6,
        ("jL2", "000111", "000111"): (3, 0, 2, 0, 2, 0),
        ("jL2", "000111", "010101"): (0, 2, 0, 2, 0, 2),
        ("jL2", "010101", "000111"): (0, 2, 0, 2, 0, 2),
        ("jL2", "010101", "010101"): (3, 0, 3, 0, 3, 0),
    },
    4: {
        ("one", "00001111", "00001111"): (1, 0, 0, 0, 0, 0, 0, 0),
        ("one", "01100110", "01100110"): (1, 0, 0, 0, 1, 0, 0, 0),
        ("one", "10010110", "10010110"): (1, 0, 0, 0, 0, 0, 0, 0),
        ("one", "00001111", "01100110"): (0,) * 8,
        ("one", "00001111", "10010110"): (0,) * 8,
        ("one", "01100110", "10010110"): (0,) * 8,
        ("j1dag_j1", "00001111", "00001111"): (1, 0, 0, 0, 0, 0, 0, 0),
        ("j1dag_j1", "00001111", "01100110"): (0,) * 8,
        ("j1dag_j1", "00001111", "10010110"): (-1, 0, 0, 0, 0, 0, 0, 0),
        ("j1dag_j1", "01100110", "01100110"): (2, 0, 0, 0, 2, 0, 0, 0),
        ("j1dag_j1", "01100110", "10010110"): (1, 0, -1, 0, 1, 0, -1, 0),
        ("j1dag_j1", "10010110", "10010110"): (3, 0, -1, 0, 0, 0, -1, 0),
        ("j2dag_j2", "00001111", "00001111"): (2, 0, 0, 0, 0, 0, 0, 0),
        ("j2dag_j2", "00001111", "01100110"): (-1, 0, 1, 0, -1, 0, 1, 0),
        ("j2dag_j2", "00001111", "10010110"): (0, 0, -1, 0, 0, 0, -1, 0),
        ("j2dag_j2", "01100110", "01100110"): (4, 0, 0, 0, 4, 0, 0, 0),
        ("j2dag_j2", "01100110", "10010110"): (-1, 0, 1, 0, -1, 0, 1, 0),
        ("j2dag_j2", "10010110", "10010110"): (2, 0, 0, 0, 0, 0, 0, 0),
        ("j3dag_j3", "00001111", "00001111"): (3, 0, -1, 0, 0, 0, -1, 0),
        ("j3dag_j3", "00001111", "01100110"): (1, 0, -1, 0, 1, 0, -1, 0),
        ("j3dag_j3", "00001111", "10010110"): (0, 0, 0, 0, -1, 0, 0, 0),
        ("j3dag_j3", "01100110", "01100110"): (2, 0, 0, 0, 2, 0, 0, 0),
        ("j3dag_j3", "01100110", "10010110"): (0,) * 8,
        ("j3dag_j3", "10010110", "10010110"): (1, 0, 0, 0, 0, 0, 0, 0),
        ("jL", "00001111", "00001111"): (0, -1, 0, 0, 0, 0, 0, -1),
        ("jL", "00001111", "01100110"): (0,) * 8,
        ("jL", "00001111", "10010110"): (0, -1, 0, 0, 0, 0, 0, -1),
        ("jL", "01100110", "01100110"): (0,) * 8,
        ("jL", "01100110", "10010110"): (0,) * 8,
        ("jL", "10010110", "10010110"): (0, 0, 0, -1, 0, -1, 0, 0),
        ("jL2", "00001111", "00001111"): (4, 0, 2, 0, 0, 0, 2, 0),
        ("jL2", "00001111", "01100110"): (0,) * 8,
        ("jL2", "00001111", "10010110"): (2, 0, 2, 0, 2, 0, 2, 0),
        ("jL2", "01100110", "01100110"): (0,) * 8,
        ("jL2", "01100110", "10010110"): (0,) * 8,
        ("jL2", "10010110", "10010110"): (4, 0, 2, 0, 0, 0, 2, 0),
    },
}

_PERIODS = {
    "0011": 4,
    "000111": 6, "010101": 2,
    "00001111": 8, "01100110": 4, "10010110": 8,
}


def _table(L: int, op: str, f1: str, f2: str) -> tuple[int, ...]:
    tab = _TABLES[L]
    if (op, f1, f2) in tab:
        return tab[(op, f1, f2)]
    # the operators involved are symmetric between these real conventions
    return tab[(op, f2, f1)]


def _orbit_sum(L: int, op: str, f1: str, f2: str, chi: float) -> complex:
    norm = math.sqrt(_PERIODS[f1] * _PERIODS[f2]) / (2 * L)
    coeffs = _table(L, op, f1, f2)
    return norm * sum(c * cmath.exp(1j * d * chi) for d, c in enumerate(coeffs) if c)


def strong_coupling_element(L: int, f1: str, f2: str, n: int,
                            e: float, m: float, theta: float) -> float:
    """Zero-mode-diagonal matrix element between families f1, f2 at fixed n."""
    chi = theta - n * math.pi / L
    val = 0.0 + 0.0j
    for l in range(1, L):
        w = e * e / (8 * L * math.sin(math.pi * l / (2 * L)) ** 2)
        val += w * _orbit_sum(L, f"j{l}dag_j{l}", f1, f2, chi)
    w = e * e / (16 * L)
    val += w * (_orbit_sum(L, "jL2", f1, f2, chi)
                + 2 * L * _orbit_sum(L, "jL", f1, f2, chi)
                + L * L * _orbit_sum(L, "one", f1, f2, chi))
    val += m * _orbit_sum(L, "jL", f1, f2, chi)
    if f1 == f2:
        val += n * n * e * e / (4 * L)
    if abs(val.imag) > 1e-10:
        raise AssertionError(f"closed-form element unexpectedly complex: {val}")
    return val.real


def hopping_coupling(L: int, family: str) -> float:
    """Same-family coupling between neighboring zero-mode numbers."""
    c = kinetic_hop_coefficient(sum(1 << l for l, ch in enumerate(family) if ch == "1"), L)
    if abs(c.imag) > 1e-12:
        raise AssertionError(f"hopping coupling not real for {family}: {c}")
    return c.real


# explicit spectra for two and three sites, used as independent checks -------

def l2_strong_coupling_energy(n: int, theta: float, e: float, m: float) -> float:
    """Two-site strong-coupling level at zero-mode number n."""
    half = theta / 2 - n * math.pi / 4
    return (n * n * e * e / 8
            + (e * e / 2) * math.sin(half) ** 2 * (1 + math.cos(half) ** 2)
            - 2 * m * math.cos(theta - n * math.pi / 2))


def l3_strong_coupling_energies(n: int, theta: float, e: float, m: float) -> tuple[float, ...]:
    """Three-site strong-coupling levels at zero-mode number n.

    Returns one level when only the uniform family survives, or the two
    levels of the mixed 2x2 block when n matches the sector (mod 3).
    """
    c = math.cos(theta - n * math.pi / 3)
    if (round(theta * 3 / math.pi) - n) % 3 != 0:
        return ((n * n + 4) / 12 * e * e
                + e * e / 48 * (3 - 2 * c) ** 2
                - 2 * m * c,)
    e_lo = (n * n / 12 * e * e
            + 3 * e * e / 4 * math.sin(theta / 2 - n * math.pi / 6) ** 4
            - 3 * m * c)
    e_hi = ((n * n + 8) / 12 * e * e
            + e * e / 48 * (3 + c) ** 2
            + m * c)
    return (e_lo, e_hi)


# ---------------------------------------------------------------------------
# assembled oracle matrix
# ---------------------------------------------------------------------------

def closed_form_oracle(params: LatticeParams, basis: SectorBasis | None = None) -> HamiltonianMatrix:
    """Sector Hamiltonian assembled purely from the frozen analytic forms.

    The basis object supplies state labels and ordering only (unfolded,
    no parity split, default families); every matrix entry comes from the
    closed forms above.  Supports L in {2, 3, 4}.
    """
    L = params.L
    if L not in (2, 3, 4):
        raise UnsupportedL(f"closed forms are available for L in {{2,3,4}}, not L={L}")
    if basis is None:
        basis = build_sector_basis(params, parity="none", fold=False)
    if basis.folded or basis.parity != "none":
        raise ValueError("the closed-form oracle uses the unfolded, unsplit basis")

    n_modes = 2 * L
    states = basis.states
    dim = len(states)
    fam_of = [config_string(st.families[0], n_modes) for st in states]

    a_em = np.zeros((dim, dim))
    a_mass = np.zeros((dim, dim))
    a_kin = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            ni, nj = states[i].n, states[j].n
            if ni == nj:
                # split the strong-coupling element into its e^2 and m parts
                a_em[i, j] = strong_coupling_element(L, fam_of[i], fam_of[j],
                                                     nj, 1.0, 0.0, params.theta)
                a_mass[i, j] = strong_coupling_element(L, fam_of[i], fam_of[j],
                                                       nj, 1.0, 1.0, params.theta) - a_em[i, j]
            elif abs(ni - nj) == 1 and fam_of[i] == fam_of[j]:
                a_kin[i, j] = hopping_coupling(L, fam_of[j])
    return HamiltonianMatrix(basis=basis, a_em=a_em, a_mass=a_mass, a_kin=a_kin)
