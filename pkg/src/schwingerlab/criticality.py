"""Mass gaps, scaled gap ratios, and the continuum critical point.

For theta in {0, pi} the ground and first-excited states are the ground
states of the even- and odd-parity sector Hamiltonians.  The scaled ratio

    R_L(m/e) = L * gap_L / ((L-1) * gap_{L-1})

crosses 1 at a pseudo-critical mass for each lattice size and coupling;
extrapolating the pseudo-critical m/e to e = 0 by weighted linear regression
gives the continuum critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .hamiltonian import HamiltonianMatrix, hamiltonian_for
from .params import LatticeParams


class NonSymmetric(ValueError):
    """Eigenvalue routine fed a non-symmetric matrix."""


class ZeroDenominator(ZeroDivisionError):
    """Gap ratio undefined: the smaller lattice's gap vanishes."""


class NoBracket(ValueError):
    """Root finder could not bracket a crossing of the gap ratio."""


class DegenerateFit(ValueError):
    """Regression impossible: all abscissae coincide or too few points."""


@dataclass(frozen=True)
class GapResult:
    params: LatticeParams
    e0: float
    e1: float

    @property
    def gap(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class PseudoCriticalPoint:
    L: int
    e: float
    m_star: float
    sigma: float  # weight input: deviation from the (L-1) pseudo-critical point


@dataclass(frozen=True)
class CriticalPointEstimate:
    intercept: float
    slope: float
    covariance: np.ndarray

    @property
    def intercept_err(self) -> float:
        return float(math.sqrt(max(self.covariance[0, 0], 0.0)))


# ---------------------------------------------------------------------------
# spectra and gaps
# ---------------------------------------------------------------------------

def eigenvalues(h: HamiltonianMatrix | np.ndarray, k: int = 1) -> list[float]:
    """k smallest eigenvalues of a real symmetric matrix, ascending."""
    mat = h.entries if isinstance(h, HamiltonianMatrix) else np.asarray(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NonSymmetric("expected a square matrix")
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise NonSymmetric("matrix is not symmetric within 1e-10")
    if not 1 <= k <= mat.shape[0]:
        raise ValueError(f"k={k} out of range for dim {mat.shape[0]}")
    w = sla.eigvalsh(mat)
    return [float(x) for x in w[:k]]


def mass_gap(params: LatticeParams) -> GapResult:
    """Gap between the odd- and even-parity sector ground states."""
    h_even = hamiltonian_for(params, parity="even")
    h_odd = hamiltonian_for(params, parity="odd")
    e0 = eigenvalues(h_even, 1)[0]
    e1 = eigenvalues(h_odd, 1)[0]
    return GapResult(params=params, e0=e0, e1=e1)


def sector_gap(params: LatticeParams) -> GapResult:
    """Gap from the two lowest levels of the full sector (any theta)."""
    h = hamiltonian_for(params, parity="none")
    w = eigenvalues(h, 2)
    return GapResult(params=params, e0=w[0], e1=w[1])


def gap_for(L: int, e: float, m: float, n_max: int, theta: float = math.pi) -> float:
    k = round(theta * L / math.pi)
    params = LatticeParams(L=L, e=e, m=m, theta=k * math.pi / L, n_max=n_max)
    if k * 2 % (2 * L) == 0 or k == L:
        return mass_gap(params).gap
    return sector_gap(params).gap


def gap_ratio(L: int, e: float, m: float, n_max: int = 20) -> float:
    """Scaled gap ratio between lattices L and L-1 in the theta = pi sector."""
    if L < 2:
        raise ValueError("gap ratio needs L >= 2")
    num = gap_for(L, e, m, n_max)
    den = gap_for(L - 1, e, m, n_max)
    if abs(den) < 1e-12:
        raise ZeroDenominator(f"gap at L={L-1} vanishes at (e={e}, m={m})")
    return L * num / ((L - 1) * den)


# ---------------------------------------------------------------------------
# pseudo-critical points
# ---------------------------------------------------------------------------

def _find_crossing(fn, m_lo: float, m_hi: float, tol: float = 1e-6,
                   max_iter: int = 200) -> float:
    """Root of fn on [m_lo, m_hi]: bisection to bracket, secant to polish."""
    f_lo, f_hi = fn(m_lo), fn(m_hi)
    if f_lo == 0.0:
        return m_lo
    if f_hi == 0.0:
        return m_hi
    if f_lo * f_hi > 0:
        raise NoBracket(f"no sign change on [{m_lo}, {m_hi}]")
    a, b, fa, fb = m_lo, m_hi, f_lo, f_hi
    for _ in range(max_iter):
        if b - a < 64 * tol:
            break
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(max_iter):
        if abs(f1 - f0) < 1e-300:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x2 = min(max(x2, a), b)
        if abs(x2 - x1) < tol:
            return x2
        x0, f0 = x1, f1
        x1, f1 = x2, fn(x2)
    return 0.5 * (a + b)


def solve_ratio_crossing(L: int, e: float, n_max: int,
                         bracket: tuple[float, float] | None = None,
                         tol: float = 1e-6) -> float:
    """Mass at which the scaled gap ratio R_L crosses 1."""
    if bracket is None:
        # crossings drift to large m/e as the coupling gets weak
        bracket = (0.02 * e, 4.0 * e)
    fn = lambda m: gap_ratio(L, e, m, n_max) - 1.0
    m_lo, m_hi = bracket
    # scan for a sign change before bisecting; R is smooth near the crossing
    grid = np.linspace(m_lo, m_hi, 25)
    vals = [fn(m) for m in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0:
            return _find_crossing(fn, float(grid[i]), float(grid[i + 1]), tol)
    raise NoBracket(
        f"R_{L} - 1 does not change sign for m in [{m_lo:.4g}, {m_hi:.4g}] at e={e}"
    )


def pseudo_critical(L: int, e: float, n_max: int = 20,
                    bracket: tuple[float, float] | None = None,
                    tol: float = 1e-6) -> PseudoCriticalPoint:
    """Pseudo-critical point for lattice size L at coupling e.

    The weight input sigma is the deviation from the (L-1)-lattice
    pseudo-critical point at the same coupling, in units of e.
    """
    m_star = solve_ratio_crossing(L, e, n_max, bracket, tol)
    sigma = 0.0
    if L >= 3:
        m_prev = solve_ratio_crossing(L - 1, e, n_max, bracket, tol)
        sigma = abs(m_star - m_prev) / e
    return PseudoCriticalPoint(L=L, e=e, m_star=m_star, sigma=sigma)


def weighted_linear_fit(x: Sequence[float], y: Sequence[float],
                        sigma: Sequence[float] | None = None
                        ) -> tuple[float, float, np.ndarray]:
    """Weighted least squares y = a + b x; returns (a, b, covariance).

    Zero or missing sigmas fall back to unit weights for all points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise DegenerateFit("need at least two points")
    if np.ptp(x) < 1e-12:
        raise DegenerateFit("all abscissae coincide")
    if sigma is None or np.any(np.asarray(sigma) <= 0):
        w = np.ones_like(x)
    else:
        w = 1.0 / np.asarray(sigma, dtype=float) ** 2
    design = np.column_stack([np.ones_like(x), x])
    wd = design * w[:, None]
    normal = design.T @ wd
    cov = np.linalg.inv(normal)
    coef = cov @ (wd.T @ y)
    return float(coef[0]), float(coef[1]), cov


def extrapolate_critical(points: Sequence[PseudoCriticalPoint]) -> CriticalPointEstimate:
    """Extrapolate pseudo-critical m/e values to e = 0."""
    if len(points) < 2:
        raise DegenerateFit("need at least two pseudo-critical points")
    x = [p.e for p in points]
    y = [p.m_star / p.e for p in points]
    sigmas = [p.sigma for p in points]
    use_weights = all(s > 0 for s in sigmas)
    a, b, cov = weighted_linear_fit(x, y, sigmas if use_weights else None)
    return CriticalPointEstimate(intercept=a, slope=b, covariance=cov)


def critical_point_scan(L: int, e_values: Iterable[float], n_max: int = 20,
                        bracket: tuple[float, float] | None = None
                        ) -> tuple[list[PseudoCriticalPoint], CriticalPointEstimate]:
    points = [pseudo_critical(L, e, n_max, bracket) for e in e_values]
    return points, extrapolate_critical(points)


# ---------------------------------------------------------------------------
# scans used for the survey tables
# ---------------------------------------------------------------------------

def theta_scan(L: int, e: float, theta: float, m_values: Iterable[float],
               n_max: int = 20) -> list[GapResult]:
    """Gap curve at fixed coupling for any allowed sector angle."""
    out = []
    for m in m_values:
        params = LatticeParams(L=L, e=e, m=m, theta=theta, n_max=n_max)
        if params.k in (0, L):
            out.append(mass_gap(params))
        else:
            out.append(sector_gap(params))
    return out


def truncation_study(L: int, e: float, m_values: Sequence[float],
                     cutoffs: Sequence[int], reference_cutoff: int = 20,
                     theta: float = math.pi) -> dict[int, list[GapResult]]:
    """Gap curves per zero-mode cutoff, keyed by cutoff.

    The reference cutoff's curve is included under its own key; relative
    errors are left to the caller (they are plain column arithmetic).
    """
    if list(cutoffs) != sorted(cutoffs):
        raise ValueError("cutoffs must be ascending")
    out: dict[int, list[GapResult]] = {}
    for n_max in list(cutoffs) + [reference_cutoff]:
        if n_max in out:
            continue
        out[n_max] = theta_scan(L, e, theta, m_values, n_max)
    return out
