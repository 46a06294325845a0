"""Gauge-invariant momentum-space basis states for one theta sector.

A basis state is an orbit sum over large gauge transformations,

    |n, x; theta>  ~  sum_d  exp(i*d*(theta - n*pi/L)) * sign_d  |n> (x) |x_d>

where x_d is the configuration shifted d times and sign_d the accumulated
fermionic sign.  The gauge zero mode only contributes the phase
exp(-i*n*pi/L) per shift, so the plane-wave label n is the same for every
term of the orbit.

States are grouped by the shift orbit of their configuration ("family").
A family of period d survives at quantum number n iff the accumulated phase
around the closed orbit is unity; the check is done in exact integer
arithmetic.

Within a fixed n the commuting charge-mode operators are diagonalized once
("strong-coupling folding"), which is the basis the low-dimensional circuit
ansaetze are written in.  For theta in {0, pi} the sector further splits into
even and odd reflection (parity) sectors; the ground and first-excited states
of the model are the respective sector ground states.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
import scipy.sparse as sp

from .fock import (
    FermionConfig,
    config_string,
    dirac_sea_bits,
    half_filled_configs,
    charge_mode_terms,
    lgt_step,
    occupied_modes,
    parity_image_bits,
    apply_parity,
    popcount,
    translation_sector_key,
)
from .params import InvalidSector, LatticeParams

Parity = Literal["even", "odd", "none"]

#: Orbit sums with accumulated norm below this are treated as vanishing.
VANISHING_TOL = 1e-10


class EmptyBasis(ValueError):
    """No surviving basis states for the requested sector."""


# ---------------------------------------------------------------------------
# orbit families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitFamily:
    """The shift orbit of one configuration, with accumulated signs."""

    rep: int
    L: int
    orbit: tuple[tuple[int, int], ...]  # (config, sign) for shift counts 0..2L-1
    period: int
    closure_sign: int  # sign of the 'period'-fold shift acting on rep
    translation_key: int

    @property
    def configs(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.orbit[: self.period])

    def survives(self, k: int, n: int) -> bool:
        """Whether the orbit sum is nonzero at zero-mode number n in sector k."""
        x = (self.period * (k - n)) % (2 * self.L)
        return x == 0 if self.closure_sign == 1 else x == self.L


def kinetic_hop_coefficient(bits: int, L: int) -> complex:
    """Coefficient of the zero-mode lowering part of the hopping term.

    For a single configuration the kinetic term acts as
    c_minus * |n-1> + conj(c_minus) * |n+1> with
    c_minus = (1/2i) * sum_{l occupied} exp(i*(2l+1)*pi/(2L)).
    """
    total = sum(cmath.exp(1j * (2 * l + 1) * math.pi / (2 * L))
                for l in occupied_modes(bits, 2 * L))
    return total / 2j


def _orbit_from(start: int, L: int) -> list[tuple[int, int]]:
    out = [(start, 1)]
    bits, sign = start, 1
    for _ in range(2 * L - 1):
        bits, s = lgt_step(bits, L)
        sign *= s
        out.append((bits, sign))
    return out


def _canonical_rep(orbit_configs: Sequence[int], L: int) -> int:
    """Pick the orbit element fixing the phase convention of the family.

    Reflection-symmetric configurations are preferred (they make the
    Hamiltonian matrix real), then the most negative hopping coefficient,
    then lexicographic order of the occupation string.
    """
    n_modes = 2 * L
    symmetric = [c for c in orbit_configs if parity_image_bits(c, L) == c]
    pool = symmetric if symmetric else list(orbit_configs)
    return min(
        pool,
        key=lambda c: (
            round(kinetic_hop_coefficient(c, L).real, 12),
            config_string(c, n_modes),
        ),
    )


def make_family(rep: int, L: int) -> OrbitFamily:
    orbit = _orbit_from(rep, L)
    period = next(d for d in range(1, 2 * L + 1) if orbit[d % (2 * L)][0] == rep)
    if period == 2 * L:
        closure = 1  # the 2L-fold shift is the identity operator
    else:
        closure = orbit[period][1]
    return OrbitFamily(
        rep=rep,
        L=L,
        orbit=tuple(orbit),
        period=period,
        closure_sign=closure,
        translation_key=translation_sector_key(rep, L),
    )


def enumerate_families(L: int, configs: Iterable[int]) -> list[OrbitFamily]:
    """Group configurations into shift orbits with canonical representatives.

    Reflection-conjugate families get reps that are reflections of each
    other, so their basis phases pair up cleanly.
    """
    remaining = set(configs)
    chosen: dict[frozenset[int], int] = {}
    order: list[frozenset[int]] = []
    while remaining:
        seed = min(remaining, key=lambda c: config_string(c, 2 * L))
        orbit_configs = [c for c, _ in _orbit_from(seed, L)]
        key = frozenset(orbit_configs)
        remaining -= key
        if key in chosen:
            continue
        rep = _canonical_rep(orbit_configs, L)
        chosen[key] = rep
        order.append(key)
        mirror = frozenset(parity_image_bits(c, L) for c in orbit_configs)
        if mirror != key and mirror not in chosen:
            chosen[mirror] = parity_image_bits(rep, L)
            order.append(mirror)
            remaining -= mirror
    families = [make_family(chosen[key], L) for key in order]
    families.sort(key=lambda f: config_string(f.rep, 2 * L))
    return families


def default_rep_configs(L: int) -> list[int]:
    """Representatives of every family in the translation sector of the Dirac sea.

    The ground and first-excited states live in this (translation eigenvalue
    +1) sector, so it is the default arena for gap computations.
    """
    sea_key = translation_sector_key(dirac_sea_bits(L), L)
    configs = [c for c in half_filled_configs(L)
               if translation_sector_key(c, L) == sea_key]
    return [f.rep for f in enumerate_families(L, configs)]


# ---------------------------------------------------------------------------
# gauge-invariant orbit states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeInvariantState:
    """Normalized orbit sum at fixed zero-mode number n.

    ``terms`` holds (amplitude, config) pairs; the zero-mode label is common
    to all of them because the shift leaves the plane wave invariant up to a
    phase.  ``norm`` is the length of the raw orbit sum before normalization.
    """

    n: int
    rep: FermionConfig
    theta: float
    terms: tuple[tuple[complex, int], ...]
    norm: float


def orbit_state(params: LatticeParams, family: OrbitFamily, n: int) -> GaugeInvariantState | None:
    """Build the orbit state |n, family; theta>, or None if it vanishes."""
    L = params.L
    k = params.k
    amps: dict[int, complex] = {}
    for d, (bits, sign) in enumerate(family.orbit):
        phase = cmath.exp(1j * math.pi * d * (k - n) / L) * sign
        amps[bits] = amps.get(bits, 0.0) + phase
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    survives = family.survives(k, n)
    if norm < VANISHING_TOL * 2 * L:
        assert not survives, "orbit phase bookkeeping disagrees with integer rule"
        return None
    assert survives, "orbit phase bookkeeping disagrees with integer rule"
    terms = tuple(sorted(
        ((a / norm, c) for c, a in amps.items() if abs(a) > VANISHING_TOL),
        key=lambda t: t[1],
    ))
    return GaugeInvariantState(
        n=n,
        rep=FermionConfig(family.rep, 2 * L),
        theta=params.theta,
        terms=terms,
        norm=norm,
    )


# expansion helpers: a state is a dict {(n, config): amplitude} ------------

Expansion = dict[tuple[int, int], complex]


def state_expansion(state: GaugeInvariantState) -> Expansion:
    return {(state.n, c): a for a, c in state.terms}


def expansion_inner(bra: Expansion, ket: Expansion) -> complex:
    if len(bra) <= len(ket):
        return complex(sum(np.conj(a) * ket.get(key, 0.0) for key, a in bra.items()))
    return complex(np.conj(sum(np.conj(a) * bra.get(key, 0.0) for key, a in ket.items())))


def expansion_apply_lgt(exp: Expansion, L: int) -> Expansion:
    """One unit of winding applied to an expanded state (includes zero-mode phase)."""
    out: Expansion = {}
    for (n, bits), a in exp.items():
        shifted, sign = lgt_step(bits, L)
        phase = cmath.exp(-1j * math.pi * n / L) * sign
        key = (n, shifted)
        out[key] = out.get(key, 0.0) + a * phase
    return out


def expansion_apply_parity(exp: Expansion, L: int) -> Expansion:
    """Reflection applied to an expanded state: n -> -n, configs reflected."""
    out: Expansion = {}
    for (n, bits), a in exp.items():
        cfg, sign = apply_parity(FermionConfig(bits, 2 * L))
        key = (-n, cfg.bits)
        out[key] = out.get(key, 0.0) + a * sign
    return out


def expansion_apply_charge_mode(exp: Expansion, l: int, L: int) -> Expansion:
    """Apply the charge Fourier mode j_l to an expanded state."""
    out: Expansion = {}
    for (n, bits), a in exp.items():
        for new_bits, sign in charge_mode_terms(bits, l % (2 * L), 2 * L):
            key = (n, new_bits)
            out[key] = out.get(key, 0.0) + a * sign
    return out


# ---------------------------------------------------------------------------
# sector basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorState:
    """One orthonormal basis vector of a sector, with its quantum labels.

    For parity = none the state is a single orbit state (or a folded
    combination at fixed signed n).  For parity = even/odd it is the
    normalized sum/difference of a folded state at +n and its reflection at
    -n (a single self-conjugate state when n = 0).
    """

    n: int
    kappa: int
    parity: Parity
    families: tuple[int, ...]
    expansion: Expansion = field(repr=False, hash=False, compare=False)

    def label(self, n_modes: int) -> str:
        fam = "+".join(config_string(f, n_modes) for f in self.families)
        return f"n={self.n};kappa={self.kappa};parity={self.parity};fam={fam}"


@dataclass(frozen=True)
class SectorBasis:
    params: LatticeParams
    parity: Parity
    states: tuple[SectorState, ...]
    families: tuple[OrbitFamily, ...]
    folded: bool
    translation_eigenvalue: complex | None

    def __len__(self) -> int:
        return len(self.states)

    @property
    def size(self) -> int:
        return len(self.states)

    def product_index(self) -> dict[tuple[int, int], int]:
        """Deterministic index over every (n, config) appearing in the basis."""
        keys = sorted({key for st in self.states for key in st.expansion})
        return {key: i for i, key in enumerate(keys)}

    def expansion_matrix(self, index: dict[tuple[int, int], int] | None = None) -> sp.csc_matrix:
        index = self.product_index() if index is None else index
        rows, cols, vals = [], [], []
        for j, st in enumerate(self.states):
            for key, a in st.expansion.items():
                rows.append(index[key])
                cols.append(j)
                vals.append(a)
        return sp.csc_matrix(
            (vals, (rows, cols)),
            shape=(len(index), len(self.states)),
            dtype=complex,
        )

    def gram_defect(self) -> float:
        s = self.expansion_matrix()
        g = (s.conj().T @ s).toarray()
        return float(np.max(np.abs(g - np.eye(len(self.states)))))


def _canonical_vector_sign(vec: np.ndarray) -> np.ndarray:
    """Rotate an eigenvector so its largest-magnitude entry is real positive."""
    i = int(np.argmax(np.abs(vec)))
    pivot = vec[i]
    if abs(pivot) == 0:
        return vec
    return vec * (abs(pivot) / pivot)


def _block_operator(states: list[Expansion], apply_fn) -> np.ndarray:
    images = [apply_fn(s) for s in states]
    dim = len(states)
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out[i, j] = expansion_inner(states[i], images[j])
    return out


def _mass_block(states: list[Expansion], L: int) -> np.ndarray:
    return _block_operator(states, lambda s: expansion_apply_charge_mode(s, L, L))


def _em_block(states: list[Expansion], L: int) -> np.ndarray:
    def apply_em(s: Expansion) -> Expansion:
        out: Expansion = {}
        for l in range(1, L):
            w = 1.0 / (8 * L * math.sin(math.pi * l / (2 * L)) ** 2)
            jl = expansion_apply_charge_mode(s, l, L)
            jldag = expansion_apply_charge_mode(jl, 2 * L - l, L)
            for key, a in jldag.items():
                out[key] = out.get(key, 0.0) + w * a
        # (j_L + L)^2 / (16 L)
        jL = expansion_apply_charge_mode(s, L, L)
        jLL = expansion_apply_charge_mode(jL, L, L)
        for key, a in jLL.items():
            out[key] = out.get(key, 0.0) + a / (16 * L)
        for key, a in jL.items():
            out[key] = out.get(key, 0.0) + a * 2 * L / (16 * L)
        for key, a in s.items():
            out[key] = out.get(key, 0.0) + a * L * L / (16 * L)
        return out

    return _block_operator(states, apply_em)


def _real_block(block: np.ndarray, what: str) -> np.ndarray:
    imag = float(np.max(np.abs(block.imag))) if block.size else 0.0
    if imag > 1e-10:
        raise AssertionError(f"{what} block unexpectedly complex (imag {imag:.2e})")
    return np.ascontiguousarray(block.real)


def _split_by_eigenvalue(basis_mat: np.ndarray, op: np.ndarray,
                         tol: float = 1e-9) -> list[tuple[np.ndarray, float]]:
    """Refine a subspace (columns of basis_mat) into eigen-subspaces of op."""
    sub_op = basis_mat.T @ op @ basis_mat
    vals, vecs = np.linalg.eigh(0.5 * (sub_op + sub_op.T))
    out = []
    i = 0
    while i < len(vals):
        j = i
        while j < len(vals) and abs(vals[j] - vals[i]) < tol:
            j += 1
        out.append((basis_mat @ vecs[:, i:j], float(np.mean(vals[i:j]))))
        i = j
    return out


def _align_with_axes(sub: np.ndarray) -> np.ndarray:
    """Deterministic real orthonormal basis of a subspace.

    Degenerate strong-coupling eigenspaces are basis-ambiguous; aligning them
    with the family axes (Gram-Schmidt on projected unit vectors, in family
    order) fixes a reproducible convention.
    """
    dim, g = sub.shape
    if g == 1:
        return _canonical_vector_sign(sub)
    proj = sub @ sub.T
    picked: list[np.ndarray] = []
    for axis in range(dim):
        v = proj[:, axis].copy()
        for u in picked:
            v -= u * (u @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            picked.append(v / norm)
        if len(picked) == g:
            break
    if len(picked) != g:
        raise AssertionError("failed to align degenerate fold subspace")
    return np.column_stack([_canonical_vector_sign(v) for v in picked])


@dataclass(frozen=True)
class FoldGroup:
    """One joint eigenspace of the commuting strong-coupling operators."""

    vectors: np.ndarray  # (n_families, g) real coefficients in the raw basis
    mass_value: float
    em_value: float


def _joint_fold(raw: list[Expansion], L: int) -> list[FoldGroup]:
    """Diagonalize the commuting mass and charge-mode blocks at fixed n.

    The operators commute exactly, so the fold is independent of the
    couplings; residual joint degeneracies are canonicalized against the
    family axes.  Groups are ordered by (mass, charge-mode) eigenvalue.
    """
    m_block = _real_block(_mass_block(raw, L), "mass")
    em_block = _real_block(_em_block(raw, L), "charge-mode")
    dim = len(raw)
    groups: list[FoldGroup] = []
    for sub_m, mval in _split_by_eigenvalue(np.eye(dim), m_block):
        for sub_e, eval_ in _split_by_eigenvalue(sub_m, em_block):
            groups.append(FoldGroup(_align_with_axes(sub_e), mval, eval_))
    groups.sort(key=lambda g: (round(g.mass_value, 9), round(g.em_value, 9)))
    return groups


def _combine(vec: np.ndarray, raw: list[Expansion]) -> Expansion:
    exp: Expansion = {}
    for coeff, raw_exp in zip(vec, raw):
        if abs(coeff) < 1e-14:
            continue
        for key, a in raw_exp.items():
            exp[key] = exp.get(key, 0.0) + coeff * a
    return {key: a for key, a in exp.items() if abs(a) > 1e-14}


def _scale(exp: Expansion, c: complex) -> Expansion:
    return {key: a * c for key, a in exp.items()}


def _add(a: Expansion, b: Expansion) -> Expansion:
    out = dict(a)
    for key, val in b.items():
        out[key] = out.get(key, 0.0) + val
    return {key: v for key, v in out.items() if abs(v) > 1e-14}


def build_sector_basis(
    params: LatticeParams,
    parity: Parity = "none",
    rep_configs: Sequence[FermionConfig | int] | None = None,
    fold: bool = True,
) -> SectorBasis:
    """Enumerate, symmetrize, and orthonormalize the sector basis.

    rep_configs seeds the orbit families (defaults to every family in the
    Dirac-sea translation sector).  With parity even/odd (theta in {0, pi}
    only) states at +-n are combined into reflection eigenstates; vanishing
    orbit sums are discarded.
    """
    L = params.L
    k = params.k
    if parity not in ("even", "odd", "none"):
        raise ValueError(f"parity must be even/odd/none, got {parity!r}")
    if parity != "none" and k not in (0, L):
        raise InvalidSector(
            f"parity sectors exist only for theta in {{0, pi}}; got theta={params.theta}"
        )

    if rep_configs is None:
        reps = default_rep_configs(L)
    else:
        reps = []
        for rc in rep_configs:
            bits = rc.bits if isinstance(rc, FermionConfig) else int(rc)
            if popcount(bits) != L:
                raise ValueError("representative configurations must be half-filled")
            reps.append(bits)
    families = enumerate_families(L, _orbit_closure(reps, L))

    keys = {f.translation_key for f in families}
    t_eig = None
    if len(keys) == 1:
        key = keys.pop()
        t_eig = cmath.exp(1j * math.pi * key / L)
        if abs(t_eig.imag) < 1e-14:
            t_eig = complex(round(t_eig.real), 0.0)

    n_range = range(0, params.n_max + 1) if parity != "none" else \
        range(-params.n_max, params.n_max + 1)

    states: list[SectorState] = []
    for n in n_range:
        raw: list[Expansion] = []
        fams: list[int] = []
        for fam in families:
            st = orbit_state(params, fam, n)
            if st is None:
                continue
            raw.append(state_expansion(st))
            fams.append(fam.rep)
        if not raw:
            continue
        if fold:
            groups = _joint_fold(raw, L)
            subspaces = [g.vectors for g in groups]
        else:
            subspaces = [np.eye(len(raw))[:, i:i + 1] for i in range(len(raw))]

        block: list[tuple[Expansion, tuple[int, ...]]] = []
        for sub in subspaces:
            for t in range(sub.shape[1]):
                vec = sub[:, t]
                used = tuple(f for c, f in zip(vec, fams) if abs(c) > 1e-12)
                block.append((_combine(vec, raw), used))

        if parity == "none":
            for kappa, (exp, f) in enumerate(block):
                states.append(SectorState(n=n, kappa=kappa, parity="none",
                                          families=f, expansion=exp))
            continue

        if n == 0:
            states.extend(_split_zero_block(raw, fams, subspaces, parity, L))
        else:
            want = 1.0 if parity == "even" else -1.0
            for kappa, (exp, f) in enumerate(block):
                mirror = expansion_apply_parity(exp, L)
                combo = _add(_scale(exp, 1 / math.sqrt(2)),
                             _scale(mirror, want / math.sqrt(2)))
                if not combo:
                    continue
                states.append(SectorState(n=n, kappa=kappa, parity=parity,
                                          families=f, expansion=combo))

    if not states:
        raise EmptyBasis(
            f"no surviving states for L={L}, theta={params.theta}, parity={parity}"
        )
    states.sort(key=_state_sort_key)
    basis = SectorBasis(
        params=params,
        parity=parity,
        states=tuple(states),
        families=tuple(families),
        folded=fold,
        translation_eigenvalue=t_eig,
    )
    defect = basis.gram_defect()
    if defect > 1e-10:
        raise AssertionError(f"sector basis is not orthonormal (defect {defect:.2e})")
    return basis


def _orbit_closure(reps: Sequence[int], L: int) -> list[int]:
    out: set[int] = set()
    for rep in reps:
        out.update(c for c, _ in _orbit_from(rep, L))
    return sorted(out)


def _split_zero_block(raw: list[Expansion], fams: list[int],
                      subspaces: list[np.ndarray], parity: Parity,
                      L: int) -> list[SectorState]:
    """Assign n = 0 states to parity sectors.

    The reflection maps the n = 0 block to itself and commutes with the
    folded operators, so it is diagonalized inside each fold subspace; its
    eigenstates are self-conjugate and keep norm 1.
    """
    mirrors = [expansion_apply_parity(exp, L) for exp in raw]
    dim = len(raw)
    pmat = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            pmat[i, j] = expansion_inner(raw[i], mirrors[j])
    pmat = _real_block(pmat, "reflection")
    want = 1.0 if parity == "even" else -1.0
    out: list[SectorState] = []
    kappa = 0
    for sub in subspaces:
        for refl_sub, val in _split_by_eigenvalue(sub, pmat):
            if abs(val - want) > 1e-8:
                continue
            aligned = _align_with_axes(refl_sub)
            for t in range(aligned.shape[1]):
                vec = aligned[:, t]
                exp = _combine(vec, raw)
                if not exp:
                    continue
                used = tuple(f for c, f in zip(vec, fams) if abs(c) > 1e-12)
                out.append(SectorState(n=0, kappa=kappa, parity=parity,
                                       families=used, expansion=exp))
                kappa += 1
    return out


def _state_sort_key(st: SectorState):
    fam = st.families[0] if st.families else 0
    return (abs(st.n), 0 if st.n >= 0 else 1, st.kappa, fam)
