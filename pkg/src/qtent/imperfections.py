"""Static imperfections exp(i dH) between gates, and per-application random gate noise.

dH = sum_j delta_j sigma_z^(j) + 2 sum_j J_j sigma_x^(j) sigma_x^(j+1)
on a linear qubit chain, with delta_j, J_j uniform in [-sqrt(3) eps, sqrt(3) eps].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .circuit import GateSequence, run_compiled
from .statevec import FLIP_AXIS, HALF_TURN_AXIS, ElementaryGate, GateError, StateVector, axis_matrix
from . import _kernels as K

RNG_NAME = "numpy.PCG64"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class StaticDisorder:
    eps: float
    delta: np.ndarray
    J: np.ndarray
    seed: int | None = None

    @property
    def n_q(self) -> int:
        return len(self.delta)

    @cached_property
    def kick_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(exp(iA/2) over the register, cos 2J_j, sin 2J_j)."""
        n = self.n_q
        p = np.arange(1 << n)
        a = np.zeros(1 << n)
        for j, d in enumerate(self.delta):
            a += d * (1 - 2 * ((p >> j) & 1))
        return np.exp(0.5j * a), np.cos(2 * self.J), np.sin(2 * self.J)

    def to_text(self) -> str:
        d = " ".join(repr(float(x)) for x in self.delta)
        j = " ".join(repr(float(x)) for x in self.J)
        return f"{d}; {j}; {float(self.eps)!r}; {self.seed}\n"

    @classmethod
    def from_text(cls, text: str) -> "StaticDisorder":
        d, j, eps, seed = (part.strip() for part in text.strip().split(";"))
        return cls(
            float(eps),
            np.array([float(x) for x in d.split()]),
            np.array([float(x) for x in j.split()]),
            None if seed == "None" else int(seed),
        )


def sample_static_disorder(eps: float, n_q: int, seed=None) -> StaticDisorder:
    if eps < 0:
        raise ValueError("imperfection strength must be >= 0")
    rng = make_rng(seed)
    bound = math.sqrt(3.0) * eps
    delta = rng.uniform(-bound, bound, n_q)
    J = rng.uniform(-bound, bound, n_q - 1)
    return StaticDisorder(eps, delta, J, seed)


def apply_static_kick(state: StateVector, d: StaticDisorder) -> StateVector:
    if d.n_q != state.n_q:
        raise GateError(f"disorder for {d.n_q} qubits applied to a {state.n_q}-qubit state")
    K.static_kick(state.amps, *d.kick_arrays)
    return state


@dataclass(frozen=True)
class NoiseConfig:
    eps: float
    seed: int | None = None


def _frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(axis, u)


def sample_cap(rng: np.random.Generator, axis, eps: float, size: int) -> np.ndarray:
    """Unit vectors uniform on the spherical cap {n : |n - axis| <= eps}."""
    axis = np.asarray(axis, dtype=float)
    # chord c and polar angle a satisfy cos a = 1 - c^2/2; area is uniform in cos a
    lo = max(1.0 - 0.5 * eps * eps, -1.0)
    cos_a = rng.uniform(lo, 1.0, size)
    sin_a = np.sqrt(np.clip(1.0 - cos_a * cos_a, 0.0, None))
    az = rng.uniform(0.0, 2 * math.pi, size)
    u, v = _frame(axis)
    return (
        cos_a[:, None] * axis
        + (sin_a * np.cos(az))[:, None] * u
        + (sin_a * np.sin(az))[:, None] * v
    )


def perturb_gate(gate: ElementaryGate, cfg: NoiseConfig, rng: np.random.Generator) -> ElementaryGate:
    """Fresh random-noise version of one gate application.

    Phase gates get phi + dphi with dphi uniform in [-eps, eps]. CN has its flip
    block sigma_x replaced by n.sigma and A = m.sigma (m = (e_x + e_z)/sqrt 2) gets
    m -> m', each drawn uniformly within distance eps of the ideal axis.
    """
    if cfg.eps == 0 or gate.kind == "R":
        return gate
    if gate.kind in ("B1", "B2"):
        return replace(gate, angle=gate.angle + rng.uniform(-cfg.eps, cfg.eps))
    ideal = FLIP_AXIS if gate.kind == "CN" else HALF_TURN_AXIS
    n = sample_cap(rng, ideal, cfg.eps, 1)[0]
    return replace(gate, axis=tuple(float(x) for x in n))


class NoisyStream:
    """Vectorised per-iteration noise draws for a fixed gate sequence.

    Each call to :meth:`draw` returns compiled arrays in which every phase gate
    carries a fresh angle offset and every CN / A gate a fresh axis, exactly as
    :func:`perturb_gate` would produce gate by gate.
    """

    def __init__(self, seq: GateSequence, cfg: NoiseConfig):
        self.seq = seq
        self.cfg = cfg
        kinds, js, ks, angles, mats = seq.compiled
        self.kinds, self.js, self.ks, self.angles = kinds.copy(), js, ks, angles
        self.mats = mats.copy()
        self.phase_idx = np.flatnonzero((kinds == K.PHASE) | (kinds == K.CPHASE))
        self.flip_idx = np.flatnonzero(kinds == K.CNOT)
        self.turn_idx = np.flatnonzero(kinds == K.HALF_TURN)
        if cfg.eps > 0:
            self.kinds[self.flip_idx] = K.CU
            self.kinds[self.turn_idx] = K.U1

    def draw(self, rng: np.random.Generator):
        eps = self.cfg.eps
        if eps == 0:
            return self.seq.compiled
        angles = self.angles.copy()
        angles[self.phase_idx] += rng.uniform(-eps, eps, self.phase_idx.size)
        for idx, ideal in ((self.flip_idx, FLIP_AXIS), (self.turn_idx, HALF_TURN_AXIS)):
            if idx.size:
                n = sample_cap(rng, ideal, eps, idx.size)
                m = self.mats
                m[idx, 0, 0] = n[:, 2]
                m[idx, 0, 1] = n[:, 0] - 1j * n[:, 1]
                m[idx, 1, 0] = n[:, 0] + 1j * n[:, 1]
                m[idx, 1, 1] = -n[:, 2]
        return self.kinds, self.js, self.ks, angles, self.mats


def run_perturbed_map(
    state: StateVector,
    seq: GateSequence,
    channel=None,
    rng: np.random.Generator | None = None,
) -> StateVector:
    """Apply ``seq`` once under a channel: None, a StaticDisorder or a NoiseConfig."""
    if state.n_q != seq.n_q:
        raise GateError(f"sequence over {seq.n_q} qubits applied to a {state.n_q}-qubit state")
    if channel is None:
        run_compiled(state, seq)
    elif isinstance(channel, StaticDisorder):
        if channel.n_q != state.n_q:
            raise GateError("disorder and state sizes differ")
        run_compiled(state, seq, kick=channel.kick_arrays)
    elif isinstance(channel, NoiseConfig):
        rng = make_rng(channel.seed) if rng is None else rng
        run_compiled(state, seq, compiled=NoisyStream(seq, channel).draw(rng))
    else:
        raise TypeError(f"unknown channel {channel!r}")
    return state


def count_kicks(state: StateVector, seq: GateSequence, disorder: StaticDisorder) -> int:
    """Run ``seq`` under static disorder and report how many kicks were inserted."""
    return run_compiled(state, seq, kick=disorder.kick_arrays)


def perturbed_gate_matrix(gate: ElementaryGate) -> np.ndarray:
    """2x2 block of a CN / A gate (ideal or perturbed); phase gates give diag(1, e^{i phi})."""
    if gate.kind in ("B1", "B2"):
        return np.diag([1.0, np.exp(1j * gate.angle)])
    if gate.kind == "CN":
        return axis_matrix(gate.axis or FLIP_AXIS)
    if gate.kind == "A":
        return axis_matrix(gate.axis or HALF_TURN_AXIS)
    raise GateError("R has no 2x2 block")
