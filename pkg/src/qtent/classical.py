"""Classical tent map p' = p - V'(theta) + xi, theta' = theta + p' T (mod 2 pi)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2 * math.pi
SECTION_PRESETS = (0.53, 4.0 / 3.0, 1.7)


@dataclass(frozen=True)
class ClassicalMap:
    k: float
    T: float = 1.0

    @property
    def K(self) -> float:
        return self.k * self.T

    @classmethod
    def from_K(cls, K: float, T: float = 1.0) -> "ClassicalMap":
        return cls(K / T, T)


@dataclass(frozen=True)
class PhasePoint:
    theta: float
    p: float


def force(theta, k: float):
    """V'(theta): k(pi/2 - theta) on [0, pi), k(theta - 3 pi/2) on [pi, 2 pi)."""
    theta = np.mod(theta, TWO_PI)
    return np.where(theta < math.pi, k * (math.pi / 2 - theta), k * (theta - 1.5 * math.pi))


def step_arrays(theta, p, cmap: ClassicalMap, noise_amp: float = 0.0, rng=None):
    p_new = p - force(theta, cmap.k)
    if noise_amp > 0:
        p_new = p_new + rng.uniform(-noise_amp, noise_amp, np.shape(p))
    theta_new = np.mod(theta + p_new * cmap.T, TWO_PI)
    return theta_new, p_new


def inverse_step_arrays(theta, p, cmap: ClassicalMap, noise_amp: float = 0.0, rng=None):
    """Exact inverse of :func:`step_arrays` for noise_amp=0; noisy runs add fresh momentum noise."""
    theta_old = np.mod(theta - p * cmap.T, TWO_PI)
    p_old = p + force(theta_old, cmap.k)
    if noise_amp > 0:
        p_old = p_old + rng.uniform(-noise_amp, noise_amp, np.shape(p))
    return theta_old, p_old


def classical_step(pt: PhasePoint, cmap: ClassicalMap, noise_amp: float = 0.0, rng=None) -> PhasePoint:
    theta, p = step_arrays(pt.theta, pt.p, cmap, noise_amp, rng)
    return PhasePoint(float(theta), float(p))


def poincare_section(cmap: ClassicalMap, n_traj: int, n_steps: int, seed=None) -> np.ndarray:
    """(theta, p mod 2 pi/T) rows for every visited point, initial points included."""
    rng = np.random.default_rng(seed)
    cell = TWO_PI / cmap.T
    theta = rng.uniform(0, TWO_PI, n_traj)
    p = rng.uniform(0, cell, n_traj)
    rows = [np.column_stack([theta, np.mod(p, cell)])]
    for _ in range(n_steps):
        theta, p = step_arrays(theta, p, cmap)
        rows.append(np.column_stack([theta, np.mod(p, cell)]))
    return np.concatenate(rows) if n_traj else np.empty((0, 2))


def trajectory(pt: PhasePoint, cmap: ClassicalMap, n_steps: int) -> np.ndarray:
    theta, p = np.array([pt.theta]), np.array([pt.p])
    out = np.empty((n_steps + 1, 2))
    out[0] = theta[0], p[0]
    for i in range(n_steps):
        theta, p = step_arrays(theta, p, cmap)
        out[i + 1] = theta[0], p[0]
    return out


@dataclass(frozen=True)
class DiffusionResult:
    D: float
    D_theory: float
    valid: bool


def diffusion_theory(k: float) -> float:
    """Random-phase diffusion rate D = <V'^2> = pi^2 k^2 / 12."""
    return math.pi**2 * k * k / 12


def diffusion_estimate(k: float, T: float, n_traj: int, t: int, seed=None) -> DiffusionResult:
    cmap = ClassicalMap(k, T)
    valid = cmap.K >= 4
    if not valid:
        warnings.warn(f"K={cmap.K:.3g} < 4: random-phase diffusion estimate does not apply", stacklevel=2)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, TWO_PI, n_traj)
    p0 = rng.uniform(0, TWO_PI / T if T else 1.0, n_traj)
    p = p0.copy()
    for _ in range(t):
        theta, p = step_arrays(theta, p, cmap)
    D = float(np.mean((p - p0) ** 2) / t) if t else 0.0
    return DiffusionResult(D, diffusion_theory(k), valid)


def jacobian(theta: float, p: float, cmap: ClassicalMap, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of one step, theta not reduced."""

    def f(x):
        th, pp = x
        pn = pp - float(force(th, cmap.k))
        return np.array([th + pn * cmap.T, pn])

    x = np.array([theta, p])
    J = np.empty((2, 2))
    for i in range(2):
        dx = np.zeros(2)
        dx[i] = h
        J[:, i] = (f(x + dx) - f(x - dx)) / (2 * h)
    return J


def angle_distance(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def chaotic_mask(theta, p, cmap: ClassicalMap, steps: int = 40, delta: float = 1e-9, threshold: float = 1e-3):
    """Points whose noiseless neighbours separate beyond ``threshold`` within ``steps`` iterations."""
    th1, p1 = np.array(theta, dtype=float), np.array(p, dtype=float)
    th2, p2 = np.mod(th1 + delta, TWO_PI), p1.copy()
    for _ in range(steps):
        th1, p1 = step_arrays(th1, p1, cmap)
        th2, p2 = step_arrays(th2, p2, cmap)
    return angle_distance(th1, th2) > threshold


def return_distance(theta, p, cmap: ClassicalMap, n_steps: int, noise_amp: float, seed=None) -> np.ndarray:
    """Theta distance after n_steps noisy forward steps followed by n_steps noisy inverse steps."""
    rng = np.random.default_rng(seed)
    th, pp = np.array(theta, dtype=float), np.array(p, dtype=float)
    for _ in range(n_steps):
        th, pp = step_arrays(th, pp, cmap, noise_amp, rng)
    for _ in range(n_steps):
        th, pp = inverse_step_arrays(th, pp, cmap, noise_amp, rng)
    return angle_distance(th, theta)


def circle_points(n_points: int, diameter_rel: float = 0.7, cell: float = TWO_PI) -> tuple[np.ndarray, np.ndarray]:
    """Points on the phase-space circle centred at (pi, cell/2)."""
    phi = TWO_PI * np.arange(n_points) / max(n_points, 1)
    r = diameter_rel / 2
    return math.pi + r * TWO_PI * np.cos(phi), cell / 2 + r * cell * np.sin(phi)
