"""Coherent states and Husimi phase-space densities on a sqrt(N) x sqrt(N) grid.

Grids are indexed ``values[i, l]`` with p0 = i sqrt(N) and theta0 = 2 pi l / sqrt(N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .statevec import GateError, StateVector, apply_qft

VARIANTS = ("gaussian", "modified_p", "modified_theta")
WINDOW = 4  # half-width of the gaussian window in units of sqrt(N)


@dataclass(frozen=True)
class CoherentSpec:
    p0: float
    theta0: float
    a: float | None = None  # defaults to sqrt(N/12)

    def width(self, N: int) -> float:
        return math.sqrt(N / 12.0) if self.a is None else self.a


@dataclass
class HusimiGrid:
    variant: str
    values: np.ndarray

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def p0(self) -> np.ndarray:
        return np.arange(self.side) * self.side

    @property
    def theta0(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.side) / self.side

    def argmax(self) -> tuple[int, int]:
        i, l = np.unravel_index(np.argmax(self.values), self.values.shape)
        return int(i), int(l)


def _ring_gaussian(d: np.ndarray, N: int, a: float) -> np.ndarray:
    """Gaussian weight at offset d, summed over the images d + mN, |m| <= 1."""
    return sum(np.exp(-((d + m * N) ** 2) / (4 * a * a)) for m in (-1, 0, 1))


def coherent_amplitudes(N: int, spec: CoherentSpec) -> np.ndarray:
    p = np.arange(N, dtype=float)
    amps = _ring_gaussian(p - spec.p0, N, spec.width(N)) * np.exp(-1j * spec.theta0 * p)
    return amps / np.linalg.norm(amps)


def coherent_state(n_q: int, spec: CoherentSpec) -> StateVector:
    if n_q < 2:
        raise GateError("coherent states need n_q >= 2")
    return StateVector(n_q, coherent_amplitudes(1 << n_q, spec))


def circle_centers(N: int, n_points: int, diameter_rel: float = 0.7) -> tuple[np.ndarray, np.ndarray]:
    """(theta0, p0) on a circle centred at (pi, N/2), diameter relative to the cell."""
    phi = 2 * math.pi * np.arange(n_points) / n_points
    r = diameter_rel / 2
    return math.pi + 2 * math.pi * r * np.cos(phi), N / 2 + N * r * np.sin(phi)


def circle_state(n_q: int, diameter_rel: float = 0.7, n_points: int | None = None) -> StateVector:
    """Normalised superposition of coherent states placed on a phase-space circle.

    The default point count, 8 sqrt(N), spaces neighbours below one packet width.
    """
    N = 1 << n_q
    if n_points is None:
        n_points = 8 * math.isqrt(N)
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    amps = np.zeros(N, dtype=np.complex128)
    for th, p0 in zip(*circle_centers(N, n_points, diameter_rel)):
        amps += coherent_amplitudes(N, CoherentSpec(p0, th))
    return StateVector(n_q, amps / np.linalg.norm(amps))


def _side(state: StateVector) -> int:
    if state.n_q % 2:
        raise GateError("Husimi grids need an even number of qubits")
    return 1 << (state.n_q // 2)


def husimi_gaussian(state: StateVector, a: float | None = None) -> HusimiGrid:
    """|<phi(p0, theta0)|psi>|^2 by a windowed length-sqrt(N) FFT per p0 row."""
    M = _side(state)
    N = state.N
    a = math.sqrt(N / 12.0) if a is None else a
    norm = 1.0 / np.linalg.norm(_ring_gaussian(np.arange(N) - N // 2, N, a))
    if 2 * WINDOW * M + 1 <= N:
        # |d| <= 4M, padded to a whole number of M-blocks
        d = np.arange(-WINDOW * M, (WINDOW + 1) * M)
        w = np.where(d <= WINDOW * M, _ring_gaussian(d, N, a), 0.0)
    else:
        d = np.arange(-(N // 2), N // 2)
        w = _ring_gaussian(d, N, a)
    rows = np.arange(M)[:, None] * M
    vals = w * state.amps[(rows + d) % N]
    # e^{i theta0 p} only depends on p mod M; d starts on a multiple of M
    folded = vals.reshape(M, -1, M).sum(axis=1)
    amp = norm * M * np.fft.ifft(folded, axis=1)
    return HusimiGrid("gaussian", np.abs(amp) ** 2)


def husimi_modified_p(state: StateVector) -> HusimiGrid:
    """Box-in-p coherent states: read |<p0 + l| U~_QFT |psi>|^2."""
    M = _side(state)
    work = apply_qft(state.copy(), +1, "first-half")
    return HusimiGrid("modified_p", (np.abs(work.amps) ** 2).reshape(M, M))


def husimi_modified_theta(state: StateVector) -> HusimiGrid:
    """Box-in-theta coherent states: |<p|U~_QFT^-1 U_QFT|psi>|^2 at p = l sqrt(N) + p0/sqrt(N)."""
    M = _side(state)
    work = apply_qft(state.copy(), +1, "all")
    apply_qft(work, -1, "first-half")
    return HusimiGrid("modified_theta", (np.abs(work.amps) ** 2).reshape(M, M).T.copy())


def husimi(state: StateVector, variant: str) -> HusimiGrid:
    if variant == "gaussian":
        return husimi_gaussian(state)
    if variant == "modified_p":
        return husimi_modified_p(state)
    if variant == "modified_theta":
        return husimi_modified_theta(state)
    raise ValueError(f"unknown Husimi variant {variant!r}")


def colormap(x: np.ndarray) -> np.ndarray:
    """Blue (0) through magenta to red (1), as uint8 RGB."""
    x = np.clip(x, 0.0, 1.0)
    rgb = np.stack([x, 0.15 * np.sin(math.pi * x), 1.0 - x], axis=-1)
    return np.round(255 * rgb).astype(np.uint8)


def ppm_bytes(grid: HusimiGrid) -> bytes:
    """Binary P6 image: columns theta0 ascending, rows p0 descending."""
    v = grid.values
    peak = v.max()
    scaled = v / peak if peak > 0 else np.zeros_like(v)
    pixels = colormap(scaled[::-1])
    h, w = v.shape
    return f"P6\n{w} {h}\n255\n".encode() + pixels.tobytes()


def write_ppm(grid: HusimiGrid, path) -> None:
    Path(path).write_bytes(ppm_bytes(grid))


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary P6 pixmap")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def grid_csv_rows(grid: HusimiGrid) -> list[str]:
    rows = []
    for i, p0 in enumerate(grid.p0):
        for l, th in enumerate(grid.theta0):
            rows.append(f"{float(th)!r},{int(p0)},{float(grid.values[i, l])!r}")
    return rows
