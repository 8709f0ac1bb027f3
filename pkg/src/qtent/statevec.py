"""Dense statevector of an n_q-qubit register and the elementary gates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

GATE_KINDS = ("B1", "B2", "CN", "A", "R")

# rotation axis of the half-turn gate A = (sigma_x + sigma_z)/sqrt(2)
HALF_TURN_AXIS = (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0))
FLIP_AXIS = (1.0, 0.0, 0.0)


class GateError(ValueError):
    """Raised for malformed gates or gate/state mismatches."""


@dataclass
class StateVector:
    n_q: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_q < 1:
            raise GateError(f"need at least one qubit, got n_q={self.n_q}")
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.n_q,):
            raise GateError(f"amplitude array of shape {self.amps.shape} does not hold {self.n_q} qubits")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @classmethod
    def basis(cls, n_q: int, p: int = 0) -> "StateVector":
        amps = np.zeros(1 << n_q, dtype=np.complex128)
        amps[p] = 1.0
        return cls(n_q, amps)

    @classmethod
    def random(cls, n_q: int, rng: np.random.Generator) -> "StateVector":
        amps = rng.normal(size=1 << n_q) + 1j * rng.normal(size=1 << n_q)
        return cls(n_q, amps / np.linalg.norm(amps))

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n_q, self.amps.copy())


@dataclass(frozen=True)
class ElementaryGate:
    """One gate of the stream.

    ``j``/``k`` meaning per kind: B1 acts on ``j``; B2 couples ``j`` and ``k``;
    CN flips target ``j`` when control ``k`` is set; A acts on ``j``; R reverses
    the lowest ``j`` qubits. ``axis`` is only set on a noise-perturbed CN or A and
    replaces the ideal rotation axis of its sigma-vector block.
    """

    kind: str
    j: int
    k: int = -1
    angle: float = 0.0
    axis: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise GateError(f"unknown gate kind {self.kind!r}")
        if self.kind in ("B2", "CN") and self.j == self.k:
            raise GateError(f"{self.kind} needs two distinct qubits, got {self.j} twice")

    @property
    def elementary(self) -> bool:
        return self.kind != "R"

    def qubits(self) -> tuple[int, ...]:
        if self.kind in ("B2", "CN"):
            return (self.j, self.k)
        if self.kind == "R":
            return tuple(range(self.j))
        return (self.j,)

    def inverse(self) -> "ElementaryGate":
        if self.kind in ("B1", "B2"):
            return ElementaryGate(self.kind, self.j, self.k, -self.angle)
        if self.axis is not None:
            raise GateError("inverse of a perturbed gate is not part of the model")
        return self

    def to_line(self) -> str:
        if self.kind == "B1":
            return f"B1 {self.j} {float(self.angle)!r}"
        if self.kind == "B2":
            return f"B2 {self.j} {self.k} {float(self.angle)!r}"
        if self.kind == "CN":
            return f"CN {self.j} {self.k}"
        return f"{self.kind} {self.j}"

    @classmethod
    def from_line(cls, line: str) -> "ElementaryGate":
        parts = line.split()
        kind = parts[0]
        if kind == "B1":
            return cls("B1", int(parts[1]), angle=float(parts[2]))
        if kind == "B2":
            return cls("B2", int(parts[1]), int(parts[2]), float(parts[3]))
        if kind == "CN":
            return cls("CN", int(parts[1]), int(parts[2]))
        if kind in ("A", "R"):
            return cls(kind, int(parts[1]))
        raise GateError(f"cannot parse gate line {line!r}")


def axis_matrix(axis) -> np.ndarray:
    """The 2x2 matrix n.sigma for a unit vector n."""
    nx, ny, nz = axis
    return np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=np.complex128)


def _check_qubit(state: StateVector, j: int) -> None:
    if not 0 <= j < state.n_q:
        raise GateError(f"qubit index {j} out of range for n_q={state.n_q}")


def apply_phase_shift(state: StateVector, j: int, phi: float) -> StateVector:
    _check_qubit(state, j)
    K.phase(state.amps, j, np.exp(1j * phi))
    return state


def apply_controlled_phase(state: StateVector, j: int, k: int, phi: float) -> StateVector:
    _check_qubit(state, j)
    _check_qubit(state, k)
    if j == k:
        raise GateError("controlled phase needs j != k")
    K.cphase(state.amps, j, k, np.exp(1j * phi))
    return state


def apply_cnot(state: StateVector, k: int, l: int) -> StateVector:
    """Flip target qubit ``k`` where control qubit ``l`` is 1."""
    _check_qubit(state, k)
    _check_qubit(state, l)
    if k == l:
        raise GateError("controlled-not needs target != control")
    K.cnot(state.amps, k, l)
    return state


def apply_half_turn_a(state: StateVector, j: int) -> StateVector:
    _check_qubit(state, j)
    K.half_turn(state.amps, j)
    return state


def apply_bit_reversal(state: StateVector, width: int | None = None) -> StateVector:
    width = state.n_q if width is None else width
    if not 0 <= width <= state.n_q:
        raise GateError(f"reversal width {width} out of range for n_q={state.n_q}")
    K.permute(state.amps, K.reversal_permutation(state.n_q, width), np.empty_like(state.amps))
    return state


def apply_gate(state: StateVector, gate: ElementaryGate) -> StateVector:
    for q in gate.qubits():
        _check_qubit(state, q)
    if gate.kind == "B1":
        K.phase(state.amps, gate.j, np.exp(1j * gate.angle))
    elif gate.kind == "B2":
        K.cphase(state.amps, gate.j, gate.k, np.exp(1j * gate.angle))
    elif gate.kind == "CN":
        if gate.axis is None:
            K.cnot(state.amps, gate.j, gate.k)
        else:
            K.controlled_unitary1(state.amps, gate.j, gate.k, axis_matrix(gate.axis))
    elif gate.kind == "A":
        if gate.axis is None:
            K.half_turn(state.amps, gate.j)
        else:
            K.unitary1(state.amps, gate.j, axis_matrix(gate.axis))
    else:
        apply_bit_reversal(state, gate.j)
    return state


def qft_gates(m: int, direction: int = 1) -> list[ElementaryGate]:
    """Gates of the QFT on qubits 0..m-1 in application order.

    The operator is R * prod_j {A_j prod_{k>j} B_jk(+-pi 2^(j-k))} with factors
    ordered left to right by increasing j, so the rightmost factor (j = m-1)
    acts first and R acts last.
    """
    if direction not in (1, -1):
        raise GateError("direction must be +1 or -1")
    gates = []
    for j in reversed(range(m)):
        for k in reversed(range(j + 1, m)):
            gates.append(ElementaryGate("B2", j, k, direction * math.pi * 2.0 ** (j - k)))
        gates.append(ElementaryGate("A", j))
    gates.append(ElementaryGate("R", m))
    return gates


def apply_qft(state: StateVector, direction: int = 1, qubit_range: str = "all") -> StateVector:
    """U_QFT |p> = N^-1/2 sum e^{2 pi i p q / N} |q> (direction=+1) or its inverse.

    ``qubit_range="first-half"`` transforms only qubits 0..n_q/2-1.
    """
    if qubit_range == "all":
        m = state.n_q
    elif qubit_range == "first-half":
        if state.n_q % 2:
            raise GateError("first-half QFT needs an even number of qubits")
        m = state.n_q // 2
    else:
        raise GateError(f"unknown qubit range {qubit_range!r}")
    for gate in qft_gates(m, direction):
        apply_gate(state, gate)
    return state


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.n_q != b.n_q:
        raise GateError(f"dimension mismatch: {a.n_q} vs {b.n_q} qubits")
    return complex(np.vdot(a.amps, b.amps))
