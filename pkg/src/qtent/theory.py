"""Random-matrix fidelity theory: form factors, scaling functions, time scales."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import gate_count

SIGMA = 0.65
LN_10_9 = math.log(10.0 / 9.0)
NOISE_RATE = 0.095


def _check_beta(beta: int) -> None:
    if beta not in (1, 2):
        raise ValueError(f"symmetry class beta must be 1 or 2, got {beta!r}")


@dataclass(frozen=True)
class TheoryParams:
    t_c: float
    t_H: float
    sigma: float = SIGMA
    beta: int = 1

    def __post_init__(self):
        _check_beta(self.beta)
        if not 0 < self.sigma <= 1:
            raise ValueError("sigma must lie in (0, 1]")
        if self.t_c <= 0 or self.t_H <= 0:
            raise ValueError("time scales must be positive")

    @classmethod
    def for_register(cls, eps: float, n_q: int, sigma: float = SIGMA, beta: int = 1) -> "TheoryParams":
        return cls(coupling_time(eps, n_q), float(2**n_q), sigma, beta)


def b2_form_factor(tau, beta: int = 1):
    """Two-level form factor of the circular ensembles (large N)."""
    _check_beta(beta)
    t = np.abs(np.asarray(tau, dtype=float))
    if beta == 2:
        out = np.where(t <= 1, 1 - t, 0.0)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = 1 - 2 * t + t * np.log(2 * t + 1)
            outer = -1 + t * np.log((2 * t + 1) / np.where(t > 0.5, 2 * t - 1, 1.0))
        out = np.where(t <= 1, inner, outer)
    return out if out.ndim else float(out)


def delta_chi(s, beta: int = 1):
    """delta chi(s) = -2 int_0^s (s - u) b2(u) du in closed form.

    For s > 1 the branch carries the linear term fixed by continuity of the
    first derivative at s = 1 (beta=2: -s + 1/3).
    """
    _check_beta(beta)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be >= 0")
    if beta == 2:
        out = np.where(s <= 1, -s * s + s**3 / 3, -s + 1.0 / 3.0)
    else:
        lo = (-3 * s - 24 * s * s + 17 * s**3) / 18 + (1 + 3 * s - 4 * s**3) * np.log(2 * s + 1) / 12
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = (
                -5.0 / 9.0
                + (2 - 3 * s + s * s) / 3
                + (1 - 3 * s + 4 * s**3) * np.log(np.where(s > 1, 2 * s - 1, 1.0)) / 12
                + (1 + 3 * s - 4 * s**3) * np.log(2 * s + 1) / 12
            )
        out = np.where(s <= 1, lo, hi)
    return out if out.ndim else float(out)


def chi(s, beta: int = 1):
    s_arr = np.asarray(s, dtype=float)
    out = s_arr + (2.0 / beta) * s_arr**2 + delta_chi(s_arr, beta)
    return out if np.ndim(out) else float(out)


def ln_fidelity_theory(t, params: TheoryParams, mode: str = "full"):
    """Predicted -<ln f(t)> with N = sigma t_H chaotic states."""
    t = np.asarray(t, dtype=float)
    n_eff = params.sigma * params.t_H
    if mode == "full":
        out = n_eff / params.t_c * chi(t / n_eff, params.beta)
    elif mode == "quadratic":
        out = t / params.t_c + (2.0 / params.sigma) * t * t / (params.t_c * params.t_H)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out if np.ndim(out) else float(out)


def delta_chi_diffusive(s, g: float, d: int, beta: int = 1):
    """Altshuler-Shklovskii correction to chi in the continuum limit."""
    _check_beta(beta)
    if d not in (1, 2, 3):
        raise ValueError(f"spatial dimension must be 1, 2 or 3, got {d!r}")
    s = np.asarray(s, dtype=float)
    h = d / 2.0
    out = (4.0 / beta) * s ** (3 - h) / ((2 - h) * (3 - h) * (4 * math.pi * g) ** h)
    return out if out.ndim else float(out)


def coupling_time(eps: float, n_q: int) -> float:
    """t_c = 1 / (eps^2 n_q n_g^2)."""
    return 1.0 / (eps * eps * n_q * gate_count(n_q) ** 2)


def noise_time(eps: float, n_q: int) -> float:
    """t_r = 1 / (0.095 eps^2 n_q^2), the random-noise decay time."""
    return 1.0 / (NOISE_RATE * eps * eps * n_q * n_q)


def chaos_border(n_q: int) -> float:
    return 2.0 ** (-n_q / 2) / (gate_count(n_q) * math.sqrt(n_q))


def tf_theory(t_c: float, t_H: float, sigma: float = SIGMA, threshold: float = 0.9) -> float:
    """Root of t/t_c + (2/sigma) t^2/(t_c t_H) = -ln(threshold)."""
    y = -math.log(threshold)
    return 2 * t_c * y / (1 + math.sqrt(1 + 8 / sigma * t_c / t_H * y))


def timescales(eps: float, n_q: int, sigma: float = SIGMA) -> dict[str, float]:
    if eps <= 0 or n_q < 2:
        raise ValueError("need eps > 0 and n_q >= 2")
    t_c = coupling_time(eps, n_q)
    t_H = float(2**n_q)
    return {
        "t_c": t_c,
        "t_r": noise_time(eps, n_q),
        "t_H": t_H,
        "eps_ch": chaos_border(n_q),
        "t_f_theory": tf_theory(t_c, t_H, sigma),
        "t_f_simple": t_c * LN_10_9,
    }
