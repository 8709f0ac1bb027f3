"""Fidelity f(t) = |<psi_eps(t)|psi(t)>|^2 of ideal versus imperfect map iterations.

Realizations share one ideal trajectory and run in lockstep. Every iteration
is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import GateSequence, TentMapParams, build_map_sequence, run_compiled
from .husimi import CoherentSpec, coherent_state
from .imperfections import RNG_NAME, NoiseConfig, NoisyStream, StaticDisorder, make_rng
from .statevec import StateVector
from .theory import SIGMA, coupling_time, ln_fidelity_theory, TheoryParams

CHAOTIC_START = CoherentSpec(p0=0.0, theta0=math.pi / 2)
INTEGRABLE_START = CoherentSpec(p0=0.0, theta0=5.35)
STOP_FIDELITY = 0.5
MIN_FIT_POINTS = 5
Y_FLOOR = 1e-12


def default_cap(n_q: int, sigma: float = SIGMA) -> int:
    return int(20 * sigma * 2**n_q)


def channel_info(channel) -> dict:
    if channel is None:
        return {"channel": "none", "eps": 0.0, "seed": None}
    if isinstance(channel, StaticDisorder):
        return {"channel": "static", "eps": channel.eps, "seed": channel.seed}
    if isinstance(channel, NoiseConfig):
        return {"channel": "noise", "eps": channel.eps, "seed": channel.seed}
    raise TypeError(f"unknown channel {channel!r}")


@dataclass
class FidelityTrace:
    params: dict
    times: np.ndarray
    f: np.ndarray

    @property
    def y(self) -> np.ndarray:
        """-ln f."""
        return -np.log(self.f)

    @property
    def t_max(self) -> int:
        return int(self.times[-1])

    def to_csv(self) -> str:
        head = "".join(f"# {k}={v}\n" for k, v in self.params.items())
        body = "".join(f"{int(t)},{float(v)!r}\n" for t, v in zip(self.times, self.f))
        return head + "t,f\n" + body

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "FidelityTrace":
        params, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                params[k] = v
            elif line and line[0].isdigit():
                t, v = line.split(",")
                rows.append((int(t), float(v)))
        arr = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(params, arr[:, 0].astype(np.int64), arr[:, 1])


def _trace_params(params, info: dict, initial: CoherentSpec, cap: int) -> dict:
    return {
        "n_q": params.n_q,
        "K": params.K,
        "T": params.T,
        **info,
        "rng": RNG_NAME,
        "theta0": initial.theta0,
        "p0": initial.p0,
        "t_max_cap": cap,
    }


def run_ensemble(
    params,
    channels: list,
    t_max_cap: int | None = None,
    initial: CoherentSpec = CHAOTIC_START,
    stop: str = "each",
    seq: GateSequence | None = None,
) -> list[FidelityTrace]:
    """Co-evolve one ideal state with one perturbed copy per channel.

    ``stop="each"`` ends each trace at its first f < 0.5; ``stop="mean"``
    records all of them until the realization mean drops below 0.5;
    ``stop="cap"`` ignores f and runs every trace to the cap.
    """
    if stop not in ("each", "mean", "cap"):
        raise ValueError(f"unknown stop rule {stop!r}")
    cap = default_cap(params.n_q) if t_max_cap is None else int(t_max_cap)
    seq = build_map_sequence(params) if seq is None else seq
    ideal = coherent_state(params.n_q, initial)
    states = [ideal.copy() for _ in channels]
    runners = [_runner(seq, ch) for ch in channels]
    records = [[1.0] for _ in channels]
    active = [True] * len(channels)
    t = 0
    while t < cap and any(active):
        t += 1
        run_compiled(ideal, seq)
        for r, (state, run) in enumerate(zip(states, runners)):
            if not active[r]:
                continue
            run(state)
            records[r].append(abs(np.vdot(ideal.amps, state.amps)) ** 2)
        if stop == "each":
            for r in range(len(channels)):
                active[r] = active[r] and records[r][-1] >= STOP_FIDELITY
        elif stop == "mean" and np.mean([rec[-1] for rec in records]) < STOP_FIDELITY:
            break
    out = []
    for ch, rec in zip(channels, records):
        f = np.array(rec)
        out.append(
            FidelityTrace(_trace_params(params, channel_info(ch), initial, cap), np.arange(f.size, dtype=np.int64), f)
        )
    return out


def _runner(seq: GateSequence, channel):
    if channel is None or channel.eps == 0:
        return lambda s: run_compiled(s, seq)
    if isinstance(channel, StaticDisorder):
        kick = channel.kick_arrays
        return lambda s: run_compiled(s, seq, kick=kick)
    if isinstance(channel, NoiseConfig):
        stream = NoisyStream(seq, channel)
        rng = make_rng(channel.seed)
        return lambda s: run_compiled(s, seq, compiled=stream.draw(rng))
    raise TypeError(f"unknown channel {channel!r}")


def run_fidelity(params, channel=None, t_max_cap: int | None = None, initial: CoherentSpec = CHAOTIC_START):
    return run_ensemble(params, [channel], t_max_cap, initial)[0]


def common_times(traces: list[FidelityTrace]) -> np.ndarray:
    n = min(tr.times.size for tr in traces)
    return traces[0].times[:n]


def mean_fidelity(traces: list[FidelityTrace]) -> FidelityTrace:
    """<f>(t) over realizations, truncated to the shortest trace."""
    t = common_times(traces)
    f = np.mean([tr.f[: t.size] for tr in traces], axis=0)
    return FidelityTrace({**traces[0].params, "realizations": len(traces)}, t, f)


def mean_log_fidelity(traces: list[FidelityTrace]) -> tuple[np.ndarray, np.ndarray]:
    """(t, -<ln f>) over realizations, truncated to the shortest trace."""
    t = common_times(traces)
    return t, np.mean([tr.y[: t.size] for tr in traces], axis=0)


@dataclass(frozen=True)
class FitResult:
    t_c: float
    t_H: float
    a0: float
    a1: float
    residual: float
    n_points: int
    ok: bool
    reason: str = ""


def fit_curve(t, y) -> FitResult:
    """Weighted least squares y = a0 t + a1 t^2 with w = 1/(t y^2)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (t > 0) & (y >= Y_FLOOR) & np.isfinite(y)
    t, y = t[keep], y[keep]
    nan = float("nan")
    if t.size < MIN_FIT_POINTS:
        return FitResult(nan, nan, nan, nan, nan, int(t.size), False, f"only {t.size} usable points")
    w = 1.0 / (t * y * y)
    s2, s3, s4 = (np.sum(w * t**k) for k in (2, 3, 4))
    b0, b1 = np.sum(w * t * y), np.sum(w * t * t * y)
    det = s2 * s4 - s3 * s3
    a0 = (b0 * s4 - b1 * s3) / det
    a1 = (s2 * b1 - s3 * b0) / det
    resid = float(np.sum(w * (y - a0 * t - a1 * t * t) ** 2))
    reason = ""
    if a0 <= 0:
        reason = "a0 <= 0"
    elif a1 <= 1e-9 * a0 / t[-1]:
        reason = "a1 <= 0: quadratic term unresolved"
    t_c = 1.0 / a0 if a0 > 0 else nan
    t_H = a0 / a1 if a0 > 0 and a1 > 0 else nan
    return FitResult(t_c, t_H, float(a0), float(a1), resid, int(t.size), not reason, reason)


def fit_timescales(trace: FidelityTrace) -> FitResult:
    return fit_curve(trace.times, trace.y)


def scaling_collapse(traces: list[FidelityTrace], mode: str = "theoretical", fits=None) -> np.ndarray:
    """Rows (x, y, n_q, eps) with x = t/t_H, y = -ln f t_c/t_H.

    ``theoretical`` uses t_c and t_H = 2^n_q; ``fitted`` uses each trace's fit
    so the points fall on y = x + x^2.
    """
    if not traces:
        raise ValueError("no traces to collapse")
    rows = []
    for i, tr in enumerate(traces):
        n_q, eps = int(tr.params["n_q"]), float(tr.params["eps"])
        if eps == 0 or not np.any(tr.y[1:] >= Y_FLOOR):
            raise ValueError("trace without fidelity decay cannot be collapsed")
        if mode == "theoretical":
            t_c, t_H = coupling_time(eps, n_q), float(2**n_q)
        elif mode == "fitted":
            fit = fits[i] if fits is not None else fit_timescales(tr)
            if not fit.ok:
                raise ValueError(f"fit failed: {fit.reason}")
            t_c, t_H = fit.t_c, fit.t_H
        else:
            raise ValueError(f"unknown collapse mode {mode!r}")
        sel = tr.times > 0
        x = tr.times[sel] / t_H
        y = tr.y[sel] * t_c / t_H
        rows.append(np.column_stack([x, y, np.full(x.size, n_q), np.full(x.size, eps)]))
    return np.concatenate(rows)


def collapse_theory(s, beta: int = 1, sigma: float = SIGMA):
    """Theory curve in collapse coordinates: y = sigma chi(s), x = sigma s (t_c drops out)."""
    from .theory import chi

    s = np.asarray(s, dtype=float)
    return sigma * s, sigma * chi(s, beta)


def theory_ratio(t, y, eps: float, n_q: int, sigma: float = SIGMA) -> np.ndarray:
    """Measured -ln f over the full random-matrix prediction."""
    pred = ln_fidelity_theory(np.asarray(t, dtype=float), TheoryParams.for_register(eps, n_q, sigma))
    return np.asarray(y) / pred


def measure_tf(trace: FidelityTrace, threshold: float = 0.9) -> float | None:
    """First time f drops to ``threshold``, interpolated linearly in (t, ln f)."""
    below = np.flatnonzero(trace.f <= threshold)
    if below.size == 0:
        return None
    i = below[0]
    if i == 0:
        return float(trace.times[0])
    t0, t1 = trace.times[i - 1], trace.times[i]
    l0, l1 = math.log(trace.f[i - 1]), math.log(trace.f[i])
    lt = math.log(threshold)
    return float(t0 + (t1 - t0) * (lt - l0) / (l1 - l0))


def loglog_slope(t, y, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of ln y against ln t over t_lo <= t <= t_hi."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= t_lo) & (t <= t_hi) & (t > 0) & (y > Y_FLOOR)
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(t[sel]), np.log(y[sel]), 1)[0])


@dataclass(frozen=True)
class EnsembleResult:
    t_c: float
    t_H: float
    inv_tc_mean: float
    inv_tc_stderr: float
    n: int
    n_failed: int = 0
    fits: tuple = field(default=(), repr=False)

    @property
    def rel_stderr(self) -> float:
        return self.inv_tc_stderr / self.inv_tc_mean


def ensemble_average(fits: list[FitResult]) -> EnsembleResult:
    """<t_c^-1>^-1 and <t_c^-1> <(t_c t_H)^-1>^-1 over successful fits."""
    good = [f for f in fits if f.ok]
    if not good:
        raise ValueError("no successful fits to average")
    inv_tc = np.array([1.0 / f.t_c for f in good])
    inv_tctH = np.array([1.0 / (f.t_c * f.t_H) for f in good])
    m = inv_tc.mean()
    se = inv_tc.std(ddof=1) / math.sqrt(inv_tc.size) if inv_tc.size > 1 else 0.0
    return EnsembleResult(1.0 / m, m / inv_tctH.mean(), float(m), float(se), len(good), len(fits) - len(good), tuple(fits))


def static_channels(eps: float, n_q: int, n_realizations: int, seed: int = 0) -> list[StaticDisorder]:
    from .imperfections import sample_static_disorder

    return [sample_static_disorder(eps, n_q, seed + r) for r in range(n_realizations)]


def noise_channels(eps: float, n_realizations: int, seed: int = 0) -> list[NoiseConfig]:
    return [NoiseConfig(eps, seed + r) for r in range(n_realizations)]


def run_timescale_ensemble(
    n_q: int,
    eps: float,
    n_realizations: int,
    seed: int = 0,
    K: float = 1.7,
    t_max_cap: int | None = None,
    initial: CoherentSpec = CHAOTIC_START,
) -> tuple[EnsembleResult, list[FidelityTrace]]:
    """Static-disorder realizations, each fitted, then aggregated."""
    params = TentMapParams(n_q, K)
    traces = run_ensemble(params, static_channels(eps, n_q, n_realizations, seed), t_max_cap, initial)
    fits = [fit_timescales(tr) for tr in traces]
    return ensemble_average(fits), traces


def initial_state(n_q: int, spec: CoherentSpec = CHAOTIC_START) -> StateVector:
    return coherent_state(n_q, spec)
