"""Minimal gate-level circuits and an exact statevector simulator.

Qubit ordering is little-endian throughout: qubit 0 is the least significant
bit of the computational-basis index.  Only the gates the three-qubit
ansaetze need are implemented (RY, X, CNOT), so every reachable state has
real amplitudes.

Circuits serialize to a plain-text gate list, one gate per line::

    RY q0 1.5707963267948966
    RY q1 theta0
    X q1
    CX q2 q1
    RY q1 -theta2

Named angles carry an optional minus sign; literals round-trip bit-exactly
through ``repr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np


class UnboundParameter(KeyError):
    """A named rotation angle was not supplied."""


@dataclass(frozen=True)
class Angle:
    """Literal angle, or a named parameter with a sign."""

    name: str | None = None
    sign: int = 1
    value: float = 0.0

    def resolve(self, bindings: Mapping[str, float]) -> float:
        if self.name is None:
            return self.value
        if self.name not in bindings:
            raise UnboundParameter(self.name)
        return self.sign * bindings[self.name]

    def __str__(self) -> str:
        if self.name is None:
            return repr(self.value)
        return f"-{self.name}" if self.sign < 0 else self.name


@dataclass(frozen=True)
class RYGate:
    target: int
    angle: Angle


@dataclass(frozen=True)
class XGate:
    target: int


@dataclass(frozen=True)
class CNOTGate:
    control: int
    target: int


Gate = Union[RYGate, XGate, CNOTGate]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self) -> None:
        for g in self.gates:
            qubits = (g.control, g.target) if isinstance(g, CNOTGate) else (g.target,)
            if any(q < 0 or q >= self.n_qubits for q in qubits):
                raise ValueError(f"gate {g} addresses a qubit outside 0..{self.n_qubits-1}")

    @property
    def parameter_names(self) -> tuple[str, ...]:
        names = []
        for g in self.gates:
            if isinstance(g, RYGate) and g.angle.name and g.angle.name not in names:
                names.append(g.angle.name)
        return tuple(names)

    @property
    def cnot_count(self) -> int:
        return sum(isinstance(g, CNOTGate) for g in self.gates)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def _apply_single(state: np.ndarray, n: int, target: int, mat: np.ndarray) -> np.ndarray:
    psi = state.reshape([2] * n)
    axis = n - 1 - target  # little-endian: qubit 0 is the last axis
    psi = np.moveaxis(psi, axis, 0)
    psi = np.tensordot(mat, psi, axes=(1, 0))
    psi = np.moveaxis(psi, 0, axis)
    return psi.reshape(-1)


def _apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    idx = np.arange(state.size)
    flipped = np.where((idx >> control) & 1 == 1, idx ^ (1 << target), idx)
    return state[flipped]


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def apply_circuit(circuit: Circuit, angles: Mapping[str, float] | None = None,
                  state: np.ndarray | None = None) -> np.ndarray:
    """Exact statevector after the circuit, starting from |0...0>."""
    angles = {} if angles is None else angles
    n = circuit.n_qubits
    if state is None:
        psi = np.zeros(1 << n)
        psi[0] = 1.0
    else:
        psi = np.array(state, dtype=float if not np.iscomplexobj(state) else complex)
    for g in circuit.gates:
        if isinstance(g, RYGate):
            psi = _apply_single(psi, n, g.target, ry_matrix(g.angle.resolve(angles)))
        elif isinstance(g, XGate):
            psi = _apply_single(psi, n, g.target, _X)
        else:
            psi = _apply_cnot(psi, g.control, g.target)
    return psi


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def circuit_to_text(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    for g in circuit.gates:
        if isinstance(g, RYGate):
            lines.append(f"RY q{g.target} {g.angle}")
        elif isinstance(g, XGate):
            lines.append(f"X q{g.target}")
        else:
            lines.append(f"CX q{g.control} q{g.target}")
    return "\n".join(lines) + "\n"


def _parse_angle(token: str) -> Angle:
    sign = 1
    if token.startswith("-") and not _is_float(token):
        sign, token = -1, token[1:]
    if _is_float(token):
        return Angle(value=float(token) * (1 if sign > 0 else -1))
    return Angle(name=token, sign=sign)


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def circuit_from_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("qubits "):
        raise ValueError("circuit text must start with a 'qubits <n>' line")
    n = int(lines[0].split()[1])
    gates: list[Gate] = []
    for ln in lines[1:]:
        parts = ln.split()
        op = parts[0]
        if op == "RY":
            gates.append(RYGate(target=_q(parts[1]), angle=_parse_angle(parts[2])))
        elif op == "X":
            gates.append(XGate(target=_q(parts[1])))
        elif op == "CX":
            gates.append(CNOTGate(control=_q(parts[1]), target=_q(parts[2])))
        else:
            raise ValueError(f"unknown gate line: {ln!r}")
    return Circuit(n_qubits=n, gates=tuple(gates))


def _q(token: str) -> int:
    if not token.startswith("q"):
        raise ValueError(f"expected qubit token like 'q0', got {token!r}")
    return int(token[1:])


# ---------------------------------------------------------------------------
# the three-qubit ansatz circuits
# ---------------------------------------------------------------------------

def _named(name: str, sign: int = 1) -> Angle:
    return Angle(name=name, sign=sign)


def l4_ground_ansatz() -> Circuit:
    """Three-qubit trial circuit for the four-site even-sector ground state.

    Prepares (a0|00> + a1|01> + a2|10> + a3|11>) on qubits (2,1) times
    (|0>+|1>)/sqrt(2) on qubit 0, with the a_i spanning all real unit
    vectors as theta0..theta2 vary.
    """
    return Circuit(3, (
        RYGate(0, Angle(value=math.pi / 2)),
        RYGate(1, _named("theta0")),
        RYGate(2, _named("theta1")),
        RYGate(1, _named("theta2")),
        CNOTGate(control=2, target=1),
        RYGate(1, _named("theta2", sign=-1)),
    ))


def l4_excited_ansatz() -> Circuit:
    """Trial circuit for the four-site odd-sector (first excited) state."""
    return Circuit(3, (
        RYGate(0, Angle(value=math.pi / 2)),
        RYGate(1, _named("theta0")),
        RYGate(2, _named("theta1")),
        RYGate(0, _named("theta2")),
        CNOTGate(control=1, target=0),
        RYGate(0, _named("theta2", sign=-1)),
    ))


def l3_ansatz() -> Circuit:
    """Trial circuit used for both three-site sector ground states.

    Spans (a0|00> + a1|01>)(|0>+|1>)/sqrt(2) + |10>(a2|0> + a3|1>), a
    six-dimensional subspace of the three-qubit space: basis states 6 and 7
    are never populated, whatever the angles.
    """
    return Circuit(3, (
        RYGate(0, Angle(value=math.pi / 2)),
        RYGate(1, _named("theta0")),
        RYGate(2, _named("theta1")),
        RYGate(0, _named("theta2")),
        XGate(1),
        CNOTGate(control=1, target=2),
        XGate(1),
        RYGate(2, _named("theta1", sign=-1)),
        CNOTGate(control=2, target=0),
        RYGate(0, _named("theta2", sign=-1)),
    ))


def ansatz_for(L: int, which: str) -> Circuit:
    """The paper-style ansatz for (L, 'ground'|'excited')."""
    if L == 3:
        return l3_ansatz()
    if L == 4:
        return l4_ground_ansatz() if which == "ground" else l4_excited_ansatz()
    raise ValueError(f"no ansatz defined for L={L}")
