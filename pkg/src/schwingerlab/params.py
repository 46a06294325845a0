"""Physical and truncation parameters of the lattice model.

Units: lattice spacing a = 1, so the coupling ``e`` and bare mass ``m`` are
dimensionless.  A lattice with ``L`` spatial sites carries ``2L`` fermionic
momentum modes plus a single bosonic gauge zero mode whose momentum is
quantized as ``p = n*e`` and truncated to ``|n| <= n_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


class InvalidSector(ValueError):
    """theta is not one of the 2L allowed sector values k*pi/L."""


#: Tolerance used when snapping a float theta onto its integer sector index.
_THETA_TOL = 1e-9


def sector_values(L: int) -> list[float]:
    """All 2L allowed theta values k*pi/L with k in -(L-1)..L."""
    return [k * math.pi / L for k in range(-(L - 1), L + 1)]


def sector_index(L: int, theta: float) -> int:
    """Integer k with theta = k*pi/L, canonicalized to -(L-1)..L.

    Raises InvalidSector if theta is not (numerically) an allowed value.
    """
    k = theta * L / math.pi
    k_int = round(k)
    if abs(k - k_int) > _THETA_TOL * L:
        raise InvalidSector(
            f"theta={theta} is not an allowed sector value for L={L}; "
            f"expected k*pi/{L} with integer k"
        )
    # canonicalize into (-pi, pi]
    k_int = (k_int + L - 1) % (2 * L) - (L - 1)
    return k_int


@dataclass(frozen=True)
class LatticeParams:
    """Parameters of one diagonalization: lattice size, couplings, sector, cutoff.

    theta labels the superselection sector picked out by large gauge
    transformations; only multiples of pi/L are allowed.  L = 1 is permitted
    (it enters the scaled gap-ratio chain through the L-1 denominators).
    """

    L: int
    e: float
    m: float
    theta: float = math.pi
    n_max: int = 20

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L}")
        if self.e <= 0:
            raise ValueError(f"coupling e must be positive, got {self.e}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        # validates theta; result is cached on demand
        sector_index(self.L, self.theta)

    @property
    def k(self) -> int:
        """Integer sector index: theta = k*pi/L."""
        return sector_index(self.L, self.theta)

    @property
    def n_modes(self) -> int:
        return 2 * self.L

    def with_couplings(self, e: float | None = None, m: float | None = None) -> "LatticeParams":
        kwargs = {}
        if e is not None:
            kwargs["e"] = e
        if m is not None:
            kwargs["m"] = m
        return replace(self, **kwargs)

    def basis_key(self) -> tuple[int, int, int]:
        """Hashable key of everything the basis depends on (not e, m)."""
        return (self.L, self.k, self.n_max)
