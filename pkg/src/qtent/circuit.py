"""Gate sequence of one quantum tent-map iteration U = exp(-iTp^2/2) exp(-iV(theta))."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import _kernels as K
from .statevec import (
    ElementaryGate,
    GateError,
    StateVector,
    axis_matrix,
    qft_gates,
)

DEFAULT_K = 1.7

_KIND_CODE = {"B1": K.PHASE, "B2": K.CPHASE, "CN": K.CNOT, "A": K.HALF_TURN, "R": K.REVERSE}


def gate_count(n_q: int) -> int:
    """Elementary gates per map iteration, (9/2)n^2 - (11/2)n + 4 (R excluded)."""
    return (9 * n_q * n_q - 11 * n_q + 8) // 2


@dataclass(frozen=True)
class TentMapParams:
    """Map parameters; ``T = 2 pi L / N`` and the kick strength is ``k = K / T``."""

    n_q: int
    K: float = DEFAULT_K
    L: int = 1

    def __post_init__(self):
        if self.n_q < 2:
            raise GateError("the tent-map circuit needs n_q >= 2")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def T(self) -> float:
        return 2.0 * math.pi * self.L / self.N

    @property
    def k(self) -> float:
        return self.K / self.T


@dataclass(frozen=True)
class GeneralMapParams:
    """Explicit (k, T) pair, for limits such as k=0 or T=0 that the K/L form cannot express."""

    n_q: int
    k: float
    T: float

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def K(self) -> float:
        return self.k * self.T


@dataclass(frozen=True)
class GateSequence:
    n_q: int
    gates: tuple[ElementaryGate, ...]
    label: str = field(default="", compare=False)

    @property
    def n_g(self) -> int:
        return sum(1 for g in self.gates if g.elementary)

    @property
    def n_reversals(self) -> int:
        return sum(1 for g in self.gates if not g.elementary)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "GateSequence") -> "GateSequence":
        if self.n_q != other.n_q:
            raise GateError("cannot concatenate sequences over different registers")
        return GateSequence(self.n_q, self.gates + other.gates)

    def inverse(self) -> "GateSequence":
        return GateSequence(self.n_q, tuple(g.inverse() for g in reversed(self.gates)), self.label + "^-1")

    @cached_property
    def compiled(self) -> tuple[np.ndarray, ...]:
        """(kinds, js, ks, angles, mats) arrays consumed by the stream kernel."""
        n = len(self.gates)
        kinds = np.empty(n, dtype=np.int64)
        js = np.empty(n, dtype=np.int64)
        ks = np.empty(n, dtype=np.int64)
        angles = np.zeros(n)
        mats = np.zeros((n, 2, 2), dtype=np.complex128)
        for i, g in enumerate(self.gates):
            kinds[i] = _KIND_CODE[g.kind]
            js[i], ks[i], angles[i] = g.j, g.k, g.angle
            if g.axis is not None:
                kinds[i] = K.CU if g.kind == "CN" else K.U1
                mats[i] = axis_matrix(g.axis)
        return kinds, js, ks, angles, mats

    def to_text(self) -> str:
        return "".join(g.to_line() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, n_q: int, text: str) -> "GateSequence":
        lines = (ln.strip() for ln in text.splitlines())
        return cls(n_q, tuple(ElementaryGate.from_line(ln) for ln in lines if ln and not ln.startswith("#")))


def build_kinetic_sequence(params) -> GateSequence:
    n, T = params.n_q, params.T
    gates = [
        ElementaryGate("B2", j, k, -T * 2.0 ** (j + k))
        for j in range(n)
        for k in range(j + 1, n)
    ]
    gates += [ElementaryGate("B1", j, angle=-T * 2.0 ** (2 * j - 1)) for j in range(n)]
    return GateSequence(n, tuple(gates), "kinetic")


def _ccphase(j: int, k: int, l: int, phi: float) -> list[ElementaryGate]:
    """Controlled-controlled phase from two CNOTs and three controlled phases, application order."""
    return [
        ElementaryGate("CN", k, l),
        ElementaryGate("B2", j, k, -phi / 2),
        ElementaryGate("CN", k, l),
        ElementaryGate("B2", j, k, phi / 2),
        ElementaryGate("B2", j, l, phi / 2),
    ]


def potential_ladder(params) -> list[ElementaryGate]:
    """Diagonal gates of exp(-iV(2 pi p/N)) in the momentum basis."""
    n, kk = params.n_q, params.k
    top = n - 1
    c = kk * math.pi**2
    gates: list[ElementaryGate] = []
    for j in range(n - 1):
        for k in range(j + 1, n - 1):
            gates += _ccphase(j, k, top, -c * 2.0 ** (j + k - 2 * n + 3))
            gates.append(ElementaryGate("B2", j, k, c * 2.0 ** (j + k - 2 * n + 2)))
    for j in range(n - 1):
        x = 2.0 ** (j - n + 1) - 1.0
        gates.append(ElementaryGate("B2", j, top, -c * 2.0 ** (j - n + 1) * x))
        gates.append(ElementaryGate("B1", j, angle=c * 2.0 ** (j - n) * x))
    return gates


def build_potential_sequence(params) -> GateSequence:
    """QFT, the diagonal ladder, then the inverse QFT (application order)."""
    n = params.n_q
    gates = qft_gates(n, +1) + potential_ladder(params) + qft_gates(n, -1)
    return GateSequence(n, tuple(gates), "potential")


def build_map_sequence(params, direction: str = "forward") -> GateSequence:
    seq = build_potential_sequence(params) + build_kinetic_sequence(params)
    if direction == "forward":
        return GateSequence(seq.n_q, seq.gates, "map")
    if direction == "inverse":
        return seq.inverse()
    raise GateError(f"unknown direction {direction!r}")


def apply_sequence(
    state: StateVector,
    seq: GateSequence,
    hook: Callable[[StateVector, int, ElementaryGate], None] | None = None,
) -> StateVector:
    """Apply the gates in order; ``hook(state, index, gate)`` runs before every elementary gate."""
    if state.n_q != seq.n_q:
        raise GateError(f"sequence over {seq.n_q} qubits applied to a {state.n_q}-qubit state")
    if hook is None:
        run_compiled(state, seq)
        return state
    # single-gate slices of the compiled stream keep the arithmetic identical to the no-hook path
    compiled = seq.compiled
    for i, gate in enumerate(seq.gates):
        if gate.elementary:
            hook(state, i, gate)
        run_compiled(state, seq, compiled=tuple(a[i : i + 1] for a in compiled))
    return state


_NO_KICK = (np.ones(1, dtype=np.complex128), np.zeros(0), np.zeros(0))


def run_compiled(state: StateVector, seq: GateSequence, kick=None, compiled=None) -> int:
    """Stream kernel entry; returns the number of static kicks applied.

    ``kick`` is the (diag_half, cos, sin) triple of a static disorder.
    """
    kinds, js, ks, angles, mats = seq.compiled if compiled is None else compiled
    counter = np.zeros(1, dtype=np.int64)
    diag, cos_, sin_ = _NO_KICK if kick is None else kick
    K.run_stream(state.amps, kinds, js, ks, angles, mats, state.n_q, kick is not None, diag, cos_, sin_, counter)
    return int(counter[0])


def kick_potential(params, theta: np.ndarray) -> np.ndarray:
    """Tent kick potential V(theta) on [0, 2 pi)."""
    theta = np.mod(theta, 2 * np.pi)
    k = params.k
    return np.where(
        theta < np.pi,
        -0.5 * k * theta * (theta - np.pi),
        0.5 * k * (theta - np.pi) * (theta - 2 * np.pi),
    )


class MapOracle:
    """One map iteration without the gate decomposition.

    The kick is diagonal on theta = 2 pi q/N in the basis U_QFT^-1 |q>; the
    transform to that basis is a direct DFT (numpy FFT), the kinetic phase is
    diagonal in p.
    """

    def __init__(self, params):
        self.params = params
        N = params.N
        p = np.arange(N, dtype=np.float64)
        self.kick = np.exp(-1j * kick_potential(params, 2 * np.pi * p / N))
        self.kinetic = np.exp(-0.5j * params.T * p * p)

    def step(self, amps: np.ndarray, inverse: bool = False) -> np.ndarray:
        N = amps.size
        if inverse:
            amps = amps * np.conj(self.kinetic)
            amps = np.fft.fft(np.fft.ifft(amps, norm="ortho") * np.conj(self.kick), norm="ortho")
            return amps
        # U_QFT amplitudes: c_q = N^-1/2 sum_p e^{2 pi i p q/N} a_p = ifft(ortho)
        theta_amps = np.fft.ifft(amps, norm="ortho") * self.kick
        amps = np.fft.fft(theta_amps, norm="ortho")
        return amps * self.kinetic


def direct_map_oracle(state: StateVector, params) -> StateVector:
    return StateVector(state.n_q, MapOracle(params).step(state.amps))


def sequence_matrix(seq: GateSequence) -> np.ndarray:
    """Dense matrix of a sequence, column p = image of |p>."""
    N = 1 << seq.n_q
    out = np.empty((N, N), dtype=np.complex128)
    for p in range(N):
        s = StateVector.basis(seq.n_q, p)
        apply_sequence(s, seq)
        out[:, p] = s.amps
    return out


def iterate(state: StateVector, seq: GateSequence, steps: int) -> StateVector:
    compiled = seq.compiled
    for _ in range(steps):
        run_compiled(state, seq, compiled=compiled)
    return state
