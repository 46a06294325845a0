"""Variational minimization of truncated sector Hamiltonians.

The quantum stage works in a small unsymmetrized basis built from the most
significant states of the theta = pi sector.  States with zero-mode numbers
+-n enter as interleaved pairs carried by qubit 0; a reflection eigenstate
has exactly equal amplitudes on the two members of every pair, which is the
structure the three-qubit circuits produce.  n = 0 states (present only in
the even sector) fill the remaining slots: they provide the coupling that
splits the parity sectors, i.e. the mass gap itself.

For the first-excited (odd-sector) target the sign of every "-n" member is
flipped, which moves the odd combinations onto the equal-amplitude side of
the pair structure; the Hamiltonian is transformed accordingly, never the
circuits.  Two small basis rotations (within degenerate spans of the kept
subspace, so the truncation itself is unchanged) align the reference target
state with the circuit manifold:

* the two n = 0 states are rotated so the reference ground state has equal
  amplitude on them (the ground circuit constrains that slot pair equal);
* for the four-site excited problem the last two pairs are rotated so the
  2x2 matrix of pair amplitudes is singular (that circuit produces
  rank-one pair-amplitude patterns).

Measurement is exact (statevector) or sampled per Pauli term; the optimizer
is a restarted Nelder-Mead simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Mapping, Sequence

import numpy as np
import scipy.optimize as sopt

from .circuits import Circuit, ansatz_for, apply_circuit
from .criticality import PseudoCriticalPoint, pseudo_critical
from .hamiltonian import HamiltonianMatrix, hamiltonian_for
from .params import LatticeParams
from .pauli import PauliDecomposition, pauli_decompose


@dataclass(frozen=True)
class EnergyEstimate:
    mean: float
    stderr: float
    shots: int | None
    mode: str  # "exact" or "sampled"

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.mode == "exact") != (self.stderr == 0.0):
            raise ValueError("stderr must be zero exactly for exact estimates")


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
_HSdg = np.array([[1.0, -1.0j], [1.0, 1.0j]], dtype=complex) / math.sqrt(2)
_I2 = np.eye(2)


@lru_cache(maxsize=512)
def _term_structure(label: str) -> tuple[np.ndarray, np.ndarray]:
    """(basis rotation, outcome signs) for one Pauli string.

    The rotation maps the string's eigenbasis to the computational basis;
    the signs give the +-1 eigenvalue of each outcome index.
    """
    mats = [{"I": _I2, "Z": _I2, "X": _H, "Y": _HSdg}[ch] for ch in label]
    rot = reduce(np.kron, mats)
    n = len(label)
    dim = 1 << n
    signs = np.ones(dim)
    for pos, ch in enumerate(label):  # leftmost char = highest qubit
        if ch == "I":
            continue
        qubit = n - 1 - pos
        idx = np.arange(dim)
        signs *= 1.0 - 2.0 * ((idx >> qubit) & 1)
    return rot, signs


def term_probabilities(state: np.ndarray, label: str) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities in the measurement basis of one Pauli string."""
    rot, signs = _term_structure(label)
    amp = rot @ state
    return np.abs(amp) ** 2, signs


def measure_energy(state: np.ndarray, decomp: PauliDecomposition,
                   shots: int | None = None,
                   rng: np.random.Generator | None = None) -> EnergyEstimate:
    """Expectation of the decomposed operator on a statevector.

    With ``shots`` set, every non-identity term is sampled independently
    from its measurement distribution; term standard errors add in
    quadrature.  Identity terms contribute exactly.
    """
    if shots is None:
        total = 0.0
        for coeff, label in decomp.terms:
            probs, signs = term_probabilities(state, label)
            total += coeff * float(probs @ signs)
        return EnergyEstimate(mean=total, stderr=0.0, shots=None, mode="exact")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    mean = 0.0
    var = 0.0
    for coeff, label in decomp.terms:
        if set(label) == {"I"}:
            mean += coeff
            continue
        probs, signs = term_probabilities(state, label)
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        counts = rng.multinomial(shots, probs)
        p_mean = float(counts @ signs) / shots
        mean += coeff * p_mean
        var += coeff ** 2 * max(1.0 - p_mean ** 2, 0.0) / shots
    return EnergyEstimate(mean=mean, stderr=math.sqrt(var), shots=shots, mode="sampled")


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VqeResult:
    angles: tuple[float, ...]
    energy: EnergyEstimate
    evaluations: int
    converged: bool


def vqe_minimize(circuit: Circuit, decomp: PauliDecomposition,
                 initial_angles: Sequence[float] | None = None,
                 budget: int = 300, shots: int | None = None,
                 rng: np.random.Generator | None = None) -> VqeResult:
    """Derivative-free (simplex) minimization of the measured energy.

    Restarts the simplex around the best point while budget remains;
    exhausting the budget returns the best-seen angles, flagged as not
    converged.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    names = circuit.parameter_names
    if initial_angles is None:
        initial_angles = [0.1] * len(names)
    x0 = np.asarray(initial_angles, dtype=float)
    if rng is None:
        rng = np.random.default_rng()

    evals = 0

    def objective(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        state = apply_circuit(circuit, dict(zip(names, x)))
        return measure_energy(state, decomp, shots=shots, rng=rng).mean

    best_x = x0
    best_f = objective(x0)
    converged = False
    while evals < budget:
        res = sopt.minimize(
            objective, best_x, method="Nelder-Mead",
            options={
                "maxfev": max(budget - evals, 1),
                "xatol": 1e-7 if shots is None else 1e-3,
                "fatol": 1e-11 if shots is None else 1e-6,
                "initial_simplex": _simplex_around(best_x, 0.35 if not converged else 0.08),
            },
        )
        improved = best_f - float(res.fun)
        if res.fun <= best_f:
            best_x, best_f = np.asarray(res.x), float(res.fun)
        if res.status == 0:
            converged = True
            if improved < (1e-10 if shots is None else 1e-4):
                break
    final = measure_energy(
        apply_circuit(circuit, dict(zip(names, best_x))), decomp,
        shots=shots, rng=rng)
    return VqeResult(angles=tuple(float(v) for v in best_x),
                     energy=final, evaluations=evals, converged=converged)


def _simplex_around(x: np.ndarray, step: float) -> np.ndarray:
    simplex = np.tile(x, (len(x) + 1, 1))
    for i in range(len(x)):
        simplex[i + 1, i] += step
    return simplex


# ---------------------------------------------------------------------------
# paired truncations
# ---------------------------------------------------------------------------

Label = tuple[int, int]  # (n, kappa) of a folded sector state, n >= 0


@dataclass(frozen=True)
class PairedTruncation:
    """Low-dimensional Hamiltonian in the interleaved pair basis.

    ``pair_labels`` are (n, kappa) with n > 0, one slot pair each (member
    order: +n then -n); ``single_labels`` are n = 0 states of the target
    parity occupying the trailing slots.  Component matrices follow the
    H(e, m) = e^2 A_em + m A_mass + A_kin split of the parent sector
    Hamiltonians.  ``block_*`` restrict to the target-parity subspace.
    """

    L: int
    which: str
    pair_labels: tuple[Label, ...]
    single_labels: tuple[Label, ...]
    a_em: np.ndarray
    a_mass: np.ndarray
    a_kin: np.ndarray
    block_a_em: np.ndarray
    block_a_mass: np.ndarray
    block_a_kin: np.ndarray
    reference: tuple[float, float]

    @property
    def dim(self) -> int:
        return self.a_em.shape[0]

    def matrix(self, e: float, m: float) -> np.ndarray:
        return e * e * self.a_em + m * self.a_mass + self.a_kin

    def block_matrix(self, e: float, m: float) -> np.ndarray:
        return e * e * self.block_a_em + m * self.block_a_mass + self.block_a_kin

    def exact_minimum(self, e: float, m: float) -> float:
        """Ground energy of the target-parity block of the truncation."""
        return float(np.linalg.eigvalsh(self.block_matrix(e, m))[0])


def _canonical_ground(mat: np.ndarray) -> np.ndarray:
    _, vecs = np.linalg.eigh(mat)
    v = vecs[:, 0]
    pivot = np.argmax(np.abs(v))
    return v * np.sign(v[pivot]) if v[pivot] != 0 else v


def _label_index(h: HamiltonianMatrix) -> dict[Label, int]:
    return {(st.n, st.kappa): i for i, st in enumerate(h.basis.states)}


def _rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def paired_truncation(L: int, which: str, e: float, m_ref: float,
                      n_max: int | None = None) -> PairedTruncation:
    """Select and assemble the 6- or 8-dimensional quantum-stage Hamiltonian.

    Pair slots are filled by descending summed ground/first-excited
    contribution; the even-sector problems reserve the trailing slots for
    the two leading n = 0 states (without them the even and odd truncations
    would be identical and the truncated gap would vanish).
    """
    if L not in (3, 4):
        raise ValueError("quantum stage supports L in {3, 4}")
    if which not in ("ground", "excited"):
        raise ValueError("which must be 'ground' or 'excited'")
    n_max = 2 * L if n_max is None else n_max
    params = LatticeParams(L=L, e=e, m=m_ref, theta=math.pi, n_max=n_max)
    h_even = hamiltonian_for(params, parity="even", fold=True)
    h_odd = hamiltonian_for(params, parity="odd", fold=True)
    idx_e, idx_o = _label_index(h_even), _label_index(h_odd)
    v_even = _canonical_ground(h_even.entries)
    v_odd = _canonical_ground(h_odd.entries)

    common = sorted(
        (lab for lab in idx_e if lab in idx_o and lab[0] > 0),
        key=lambda lab: -(abs(v_even[idx_e[lab]]) + abs(v_odd[idx_o[lab]])),
    )
    target_idx = idx_e if which == "ground" else idx_o
    v_target = v_even if which == "ground" else v_odd
    zeros = sorted(
        (lab for lab in target_idx if lab[0] == 0),
        key=lambda lab: -abs(v_target[target_idx[lab]]),
    )

    n_slots = 6 if L == 3 else 8
    if which == "ground" and len(zeros) >= 2:
        singles = tuple(zeros[:2])
        pairs = tuple(common[: (n_slots - 2) // 2])
    else:
        singles = ()
        pairs = tuple(common[: n_slots // 2])
    if 2 * len(pairs) + len(singles) != n_slots:
        raise ValueError(
            f"cannot fill {n_slots} slots for L={L} {which}: "
            f"{len(pairs)} pairs, {len(singles)} singles available"
        )

    rows_e = [idx_e[lab] for lab in pairs]
    rows_o = [idx_o[lab] for lab in pairs]
    sub_e = [h_even.a_em, h_even.a_mass, h_even.a_kin]
    sub_o = [h_odd.a_em, h_odd.a_mass, h_odd.a_kin]
    pair_e = [a[np.ix_(rows_e, rows_e)].copy() for a in sub_e]
    pair_o = [a[np.ix_(rows_o, rows_o)].copy() for a in sub_o]

    single_rows = [target_idx[lab] for lab in singles]
    target_sub = sub_e if which == "ground" else sub_o
    target_rows = rows_e if which == "ground" else rows_o
    sing = [a[np.ix_(single_rows, single_rows)].copy() for a in target_sub]
    cross = [a[np.ix_(target_rows, single_rows)].copy() for a in target_sub]

    # reference ground vector of the (unrotated) target block; the basis
    # rotations below must align *this* vector with the circuit manifold
    t_pairs = pair_e if which == "ground" else pair_o
    n_p = len(pairs)
    e2, mm = e * e, m_ref
    blk0 = np.zeros((n_p + len(singles), n_p + len(singles)))
    for comp_pair, comp_sing, comp_cross, w in zip(
            t_pairs, sing, cross, (e2, mm, 1.0)):
        blk0[:n_p, :n_p] += w * comp_pair
        if singles:
            blk0[:n_p, n_p:] += w * comp_cross
            blk0[n_p:, :n_p] += w * comp_cross.T
            blk0[n_p:, n_p:] += w * comp_sing
    beta = _canonical_ground(blk0)

    if which == "excited" and L == 4:
        # rotate the last two pairs so the 2x2 pair-amplitude matrix of the
        # reference block ground is singular (the excited circuit produces
        # rank-one pair-amplitude patterns)
        b = beta[:4]
        phi = math.atan2(b[0] * b[3] - b[1] * b[2], b[0] * b[2] + b[1] * b[3])
        rot = np.eye(n_p)
        rot[np.ix_([2, 3], [2, 3])] = _rotation(phi)
        pair_e = [rot.T @ a @ rot for a in pair_e]
        pair_o = [rot.T @ a @ rot for a in pair_o]
    if singles:
        # rotate the n = 0 duo so the reference block ground has equal
        # amplitudes on it (that slot pair is amplitude-locked in the
        # four-site ground circuit; harmless for the three-site free slots)
        amps = beta[n_p:]
        phi = math.atan2(amps[1], amps[0]) - math.pi / 4
        rot = _rotation(phi)
        sing = [rot.T @ a @ rot for a in sing]
        cross = [a @ rot for a in cross]

    n_p = len(pairs)
    dim = n_slots
    comps = []
    blocks = []
    for t_pair, o_pair, s_blk, c_blk in zip(
            pair_e if which == "ground" else pair_o,
            pair_o if which == "ground" else pair_e,
            sing, cross):
        mat = np.zeros((dim, dim))
        for j in range(n_p):
            for k in range(n_p):
                same = 0.5 * (t_pair[j, k] + o_pair[j, k])
                diff = 0.5 * (t_pair[j, k] - o_pair[j, k])
                mat[2 * j, 2 * k] = same
                mat[2 * j + 1, 2 * k + 1] = same
                mat[2 * j, 2 * k + 1] = diff
                mat[2 * j + 1, 2 * k] = diff
        for j in range(n_p):
            for s in range(len(singles)):
                val = c_blk[j, s] / math.sqrt(2)
                mat[2 * j, 2 * n_p + s] = val
                mat[2 * n_p + s, 2 * j] = val
                mat[2 * j + 1, 2 * n_p + s] = val
                mat[2 * n_p + s, 2 * j + 1] = val
        for s in range(len(singles)):
            for t in range(len(singles)):
                mat[2 * n_p + s, 2 * n_p + t] = s_blk[s, t]
        comps.append(mat)
        # target block: one equal-pair combination per pair, plus singles
        blk = np.zeros((n_p + len(singles), n_p + len(singles)))
        blk[:n_p, :n_p] = t_pair
        blk[:n_p, n_p:] = c_blk
        blk[n_p:, :n_p] = c_blk.T
        blk[n_p:, n_p:] = s_blk
        blocks.append(blk)

    return PairedTruncation(
        L=L, which=which, pair_labels=pairs, single_labels=singles,
        a_em=comps[0], a_mass=comps[1], a_kin=comps[2],
        block_a_em=blocks[0], block_a_mass=blocks[1], block_a_kin=blocks[2],
        reference=(e, m_ref),
    )


@dataclass(frozen=True)
class SectorProblem:
    """Circuit plus truncated Hamiltonian for one (L, ground/excited) target."""

    L: int
    which: str
    circuit: Circuit
    truncation: PairedTruncation
    padded_dim: int = 8

    def matrix(self, e: float, m: float) -> np.ndarray:
        mat = self.truncation.matrix(e, m)
        if mat.shape[0] == self.padded_dim:
            return mat
        out = np.zeros((self.padded_dim, self.padded_dim))
        d = mat.shape[0]
        out[:d, :d] = mat
        return out

    def decomposition(self, e: float, m: float) -> PauliDecomposition:
        return pauli_decompose(self.matrix(e, m))

    def exact_minimum(self, e: float, m: float) -> float:
        return self.truncation.exact_minimum(e, m)


def sector_problem(L: int, which: str, e: float, m_ref: float,
                   n_max: int | None = None) -> SectorProblem:
    return SectorProblem(
        L=L, which=which, circuit=ansatz_for(L, which),
        truncation=paired_truncation(L, which, e, m_ref, n_max),
    )


# ---------------------------------------------------------------------------
# quantum pseudo-critical search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumGapPoint:
    e: float
    m: float
    energies: dict[tuple[int, str], float]
    ratio: float


def quantum_pseudo_critical(e: float, m_values: Sequence[float],
                            shots: int | None = None,
                            seed: int | None = None,
                            budget: int | None = None,
                            n_max: int | None = None,
                            return_points: bool = False):
    """Locate the pseudo-critical mass for the L=4/L=3 gap ratio from VQE.

    Sweeps the mass grid, reconstructs R_4 from the four variational
    energies at each point, and returns the grid point whose ratio is
    closest to one.  Exact-statevector mode when shots is None; sampled
    mode re-optimizes with shot noise starting from the exact optimum.
    """
    if len(m_values) == 0:
        raise ValueError("empty mass grid")
    if budget is None:
        budget = 300 if shots is None else 60
    seed_seq = np.random.SeedSequence(seed)
    warm: dict[tuple[int, str], tuple[float, ...]] = {}
    points: list[QuantumGapPoint] = []
    for m in m_values:
        energies: dict[tuple[int, str], float] = {}
        for L in (3, 4):
            for which in ("ground", "excited"):
                prob = sector_problem(L, which, e, float(m), n_max=n_max)
                decomp = prob.decomposition(e, float(m))
                exact_res = vqe_minimize(prob.circuit, decomp,
                                         initial_angles=warm.get((L, which)),
                                         budget=300)
                warm[(L, which)] = exact_res.angles
                if shots is None:
                    energies[(L, which)] = exact_res.energy.mean
                else:
                    rng = np.random.default_rng(seed_seq.spawn(1)[0])
                    noisy = vqe_minimize(prob.circuit, decomp,
                                         initial_angles=exact_res.angles,
                                         budget=budget, shots=shots, rng=rng)
                    energies[(L, which)] = noisy.energy.mean
        gap4 = energies[(4, "excited")] - energies[(4, "ground")]
        gap3 = energies[(3, "excited")] - energies[(3, "ground")]
        ratio = 4.0 * gap4 / (3.0 * gap3)
        points.append(QuantumGapPoint(e=e, m=float(m), energies=energies, ratio=ratio))
    best = min(points, key=lambda p: abs(p.ratio - 1.0))
    result = PseudoCriticalPoint(L=4, e=e, m_star=best.m, sigma=0.0)
    if return_points:
        return result, points
    return result


def default_mass_grid(e: float, half_width: float = 0.05,
                      step: float = 0.01, n_max: int = 20) -> list[float]:
    """Mass grid centered on the classical pseudo-critical point."""
    center = pseudo_critical(4, e, n_max=n_max).m_star
    center = round(center / step) * step
    k = round(half_width / step)
    return [round(center + step * i, 10) for i in range(-k, k + 1)]
