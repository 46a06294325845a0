"""Fermionic occupation configurations and lattice symmetry actions.

Configurations over the 2L momentum modes are stored as bit masks: bit ``l``
of the integer is the occupation of mode ``l``.  Creation operators are
ordered by increasing mode index, and every operator action below reports the
fermionic sign relative to that canonical ordering.

Sign conventions, fixed once here and used everywhere else:

* the shift of all modes by one unit (winding-1 large gauge transformation)
  multiplies the empty state by (-1)**L;
* spatial reflection sends mode l to L-1-l (mod 2L) with a minus sign per
  mode, and multiplies the empty state by (-1)**(L(L+1)/2), which makes the
  half-filled "Dirac sea" combination reflection-even.
"""

from __future__ import annotations

from dataclasses import dataclass


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def occupied_modes(bits: int, n_modes: int) -> tuple[int, ...]:
    return tuple(l for l in range(n_modes) if (bits >> l) & 1)


def config_string(bits: int, n_modes: int) -> str:
    """Occupations x_0 x_1 ... x_{2L-1} left to right."""
    return "".join(str((bits >> l) & 1) for l in range(n_modes))


def config_from_string(s: str) -> int:
    if set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return sum(1 << l for l, ch in enumerate(s) if ch == "1")


@dataclass(frozen=True)
class FermionConfig:
    """Half-filled occupation vector over the 2L momentum modes."""

    bits: int
    n_modes: int

    def __post_init__(self) -> None:
        if self.n_modes % 2 or self.n_modes <= 0:
            raise ValueError("n_modes must be a positive even integer")
        if self.bits < 0 or self.bits >= (1 << self.n_modes):
            raise ValueError("occupation bits out of range")
        if popcount(self.bits) != self.n_modes // 2:
            raise ValueError(
                f"config {config_string(self.bits, self.n_modes)} is not half-filled"
            )

    @classmethod
    def from_string(cls, s: str) -> "FermionConfig":
        return cls(config_from_string(s), len(s))

    @property
    def L(self) -> int:
        return self.n_modes // 2

    @property
    def occupations(self) -> tuple[int, ...]:
        return tuple((self.bits >> l) & 1 for l in range(self.n_modes))

    def __str__(self) -> str:
        return config_string(self.bits, self.n_modes)


# ---------------------------------------------------------------------------
# elementary mode operators on raw bit masks
# ---------------------------------------------------------------------------

def create(bits: int, l: int) -> tuple[int, int] | None:
    """Apply the creation operator for mode l; None if already occupied.

    The sign is (-1)**(number of occupied modes below l).
    """
    if (bits >> l) & 1:
        return None
    sign = -1 if popcount(bits & ((1 << l) - 1)) & 1 else 1
    return bits | (1 << l), sign


def annihilate(bits: int, l: int) -> tuple[int, int] | None:
    """Apply the annihilation operator for mode l; None if empty."""
    if not (bits >> l) & 1:
        return None
    sign = -1 if popcount(bits & ((1 << l) - 1)) & 1 else 1
    return bits & ~(1 << l), sign


def hop(bits: int, src: int, dst: int) -> tuple[int, int] | None:
    """Apply b_dst^dagger b_src; None if the move is blocked."""
    res = annihilate(bits, src)
    if res is None:
        return None
    mid, s1 = res
    res = create(mid, dst)
    if res is None:
        return None
    out, s2 = res
    return out, s1 * s2


def charge_mode_terms(bits: int, l: int, n_modes: int) -> list[tuple[int, int]]:
    """Expand j_l |bits> = sum_s b_{s+l}^dagger b_s |bits> (indices mod 2L).

    Returns (config, sign) terms; for l = 0 this is the number operator.
    """
    if l % n_modes == 0:
        return [(bits, popcount(bits))]
    out = []
    for s in range(n_modes):
        res = hop(bits, s, (s + l) % n_modes)
        if res is not None:
            out.append(res)
    return out


# ---------------------------------------------------------------------------
# lattice symmetries
# ---------------------------------------------------------------------------

def lgt_step(bits: int, L: int) -> tuple[int, int]:
    """One unit of winding: every mode index moves up by one (mod 2L).

    Reordering the shifted creation string back to canonical order costs
    (-1)**(N-1) when the top mode wraps around to mode 0 (N = particle
    number); the empty state itself contributes (-1)**L.
    """
    n_modes = 2 * L
    wrap = (bits >> (n_modes - 1)) & 1
    shifted = ((bits << 1) | wrap) & ((1 << n_modes) - 1)
    if wrap:
        sign = -1 if (popcount(bits) - 1) & 1 else 1
    else:
        sign = 1
    if L & 1:
        sign = -sign
    return shifted, sign


def apply_lgt(config: FermionConfig, winding: int) -> tuple[FermionConfig, int]:
    """Apply the large gauge transformation with the given winding number.

    Negative windings use periodicity (the 2L-fold shift is the identity).
    """
    L = config.L
    bits, sign = config.bits, 1
    for _ in range(winding % (2 * L)):
        bits, s = lgt_step(bits, L)
        sign *= s
    return FermionConfig(bits, config.n_modes), sign


def momentum_exponent(bits: int, L: int) -> int:
    """Total momentum phase exponent t = sum_{l occupied} (2l+1), in units pi/(2L)."""
    return sum(2 * l + 1 for l in occupied_modes(bits, 2 * L))


def translation_sector_key(bits: int, L: int) -> int:
    """Integer key in [0, 2L) such that the translation eigenvalue is exp(i*pi*key/L).

    Key 0 means eigenvalue +1; key L means -1.  Includes the (-1)**L factor
    that normalizes the empty state.
    """
    return (momentum_exponent(bits, L) + L * L) % (2 * L)


def translation_eigenvalue(config: FermionConfig) -> complex:
    """Eigenvalue of the lattice translation operator on an occupation state."""
    from cmath import exp, pi

    key = translation_sector_key(config.bits, config.L)
    val = exp(1j * pi * key / config.L)
    # snap to exact +-1 / +-i where applicable
    if abs(val.imag) < 1e-14:
        val = complex(round(val.real), 0.0)
    elif abs(val.real) < 1e-14:
        val = complex(0.0, round(val.imag))
    return val


def reflect_mode(l: int, L: int) -> int:
    return (L - 1 - l) % (2 * L)


def parity_image_bits(bits: int, L: int) -> int:
    out = 0
    for l in occupied_modes(bits, 2 * L):
        out |= 1 << reflect_mode(l, L)
    return out


def _permutation_sign(seq: list[int]) -> int:
    """Sign of the permutation that sorts seq (distinct ints), by counting inversions."""
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


def apply_parity(config: FermionConfig) -> tuple[FermionConfig, int]:
    """Spatial reflection of an occupation state, with its total fermionic sign.

    The sign combines one minus per occupied mode, the reordering of the
    reflected creation string, and the (-1)**(L(L+1)/2) empty-state phase.
    """
    L = config.L
    occ = occupied_modes(config.bits, config.n_modes)
    images = [reflect_mode(l, L) for l in occ]
    sign = _permutation_sign(images)
    if len(occ) & 1:
        sign = -sign
    if (L * (L + 1) // 2) & 1:
        sign = -sign
    return FermionConfig(parity_image_bits(config.bits, L), config.n_modes), sign


def dirac_sea_bits(L: int) -> int:
    """The half-filled configuration occupying modes L..2L-1.

    These are the modes with negative kinetic energy at zero gauge field, so
    this is the strong-coupling ground-state configuration; it always has
    translation eigenvalue +1.
    """
    return ((1 << L) - 1) << L


def half_filled_configs(L: int) -> list[int]:
    """All C(2L, L) half-filled bit masks, ascending."""
    from itertools import combinations

    return sorted(
        sum(1 << l for l in occ) for occ in combinations(range(2 * L), L)
    )
