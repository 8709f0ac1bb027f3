"""Experiment drivers: ``qtent {poincare,fidelity,timescales,husimi,theory}``.

Outputs are CSV files with ``# key=value`` headers and binary PPM heatmaps.
A ``--config FILE`` of ``key=value`` lines supplies defaults; flags override it.
"""

from __future__ import annotations

import argparse
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from . import classical, fidelity as fl, husimi as hu, theory as th
from .circuit import TentMapParams, build_map_sequence
from .imperfections import RNG_NAME, NoiseConfig, make_rng, run_perturbed_map, sample_static_disorder

CHANNELS = ("none", "noise", "static")


def config_tokens(text: str) -> list[str]:
    """``key=value`` lines to ``--key value...`` tokens; '#' starts a comment."""
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line without '=': {line!r}")
        tokens.append("--" + key.strip().replace("_", "-"))
        tokens += shlex.split(value)
    return tokens


def _common(p: argparse.ArgumentParser, nq, eps, channel, realizations=1):
    p.add_argument("--nq", type=int, nargs="+", default=nq, help="register sizes")
    p.add_argument("--eps", type=float, nargs="*", default=eps, help="imperfection strengths")
    p.add_argument("--channel", choices=CHANNELS, default=channel)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--realizations", type=int, default=realizations)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--tmax-cap", type=int, default=None, help="iteration cap (default 20 sigma t_H)")
    p.add_argument("--K", type=float, default=1.7, help="chaos parameter K = kT")
    p.add_argument("--config", type=Path, default=None, help="key=value file of defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtent", description="Quantum tent-map experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poincare", help="classical Poincare sections")
    _common(p, [10], [], "none")
    p.add_argument("--Ks", type=float, nargs="+", default=list(classical.SECTION_PRESETS))
    p.add_argument("--trajectories", type=int, default=100)
    p.add_argument("--steps", type=int, default=500)

    p = sub.add_parser("fidelity", help="fidelity traces and scaling collapses")
    _common(p, [10], [3e-5], "static")
    p.add_argument("--start", choices=("chaotic", "integrable"), default="chaotic")

    p = sub.add_parser("timescales", help="fitted versus theoretical time scales")
    _common(p, [8], [1e-5, 3e-5], "static", realizations=3)

    p = sub.add_parser("husimi", help="Husimi heatmaps of evolved states")
    _common(p, [10], [0.0], "none")
    p.add_argument("--state", choices=("circle", "coherent"), default="circle")
    p.add_argument("--theta0", type=float, default=math.pi / 2)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--tfwd", type=int, default=100)
    p.add_argument("--tbwd", type=int, default=100)
    p.add_argument("--variants", nargs="+", choices=hu.VARIANTS, default=list(hu.VARIANTS))

    p = sub.add_parser("theory", help="scaling functions and time-scale tables")
    _common(p, list(range(6, 19, 2)), [5e-7], "static")
    p.add_argument("--smax", type=float, default=3.0)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            extra = config_tokens(args.config.read_text())
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        # file values first so later command-line flags win
        args = parser.parse_args([argv[0], *extra, *argv[1:]])
    if args.command in ("fidelity", "timescales") and not args.eps:
        parser.error("--eps needs at least one value")
    if args.realizations < 1:
        parser.error("--realizations must be >= 1")
    return args


def header(args: argparse.Namespace, **extra) -> str:
    items = {k: v for k, v in vars(args).items() if k != "config"}
    items["rng"] = RNG_NAME
    items.update(extra)
    return "".join(f"# {k}={_fmt(v)}\n" for k, v in items.items())


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def write_csv(path: Path, head: str, columns: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(head)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")
    return path


def _cell(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _channels(args, n_q: int, eps: float) -> list:
    n = args.realizations
    if args.channel == "static":
        return fl.static_channels(eps, n_q, n, args.seed)
    if args.channel == "noise":
        return fl.noise_channels(eps, n, args.seed)
    return [None] * n


def cmd_poincare(args) -> list[Path]:
    out = []
    for i, K in enumerate(args.Ks):
        cmap = classical.ClassicalMap.from_K(K)
        pts = classical.poincare_section(cmap, args.trajectories, args.steps, args.seed + i)
        head = header(args, K=K, T=cmap.T, section_seed=args.seed + i)
        out.append(write_csv(args.out / f"poincare_K{K:.4g}.csv", head, ["theta", "p"], pts))
    return out


def cmd_fidelity(args) -> list[Path]:
    out = []
    start = fl.CHAOTIC_START if args.start == "chaotic" else fl.INTEGRABLE_START
    all_traces, realization = [], []
    for n_q in args.nq:
        params = TentMapParams(n_q, args.K)
        seq = build_map_sequence(params)
        for eps in args.eps:
            chans = _channels(args, n_q, eps)
            stop = "mean" if args.channel == "noise" else "each"
            traces = fl.run_ensemble(params, chans, args.tmax_cap, start, stop, seq)
            for r, tr in enumerate(traces):
                head = header(args, **{f"trace_{k}": v for k, v in tr.params.items()}, realization=r)
                rows = zip(tr.times, tr.f)
                out.append(write_csv(args.out / f"trace_{args.channel}_nq{n_q}_eps{eps:g}_r{r}.csv", head, ["t", "f"], rows))
            if eps > 0 and args.channel != "none":
                all_traces += traces
                realization += list(range(len(traces)))
    if not all_traces:
        return out
    coll = fl.scaling_collapse(all_traces, "theoretical")
    out.append(write_csv(args.out / "collapse_theoretical.csv", header(args), ["x", "y", "n_q", "epsilon"], coll))
    fits = [fl.fit_timescales(tr) for tr in all_traces]
    if args.channel == "static":
        good = [(tr, f) for tr, f in zip(all_traces, fits) if f.ok]
        if good:
            coll = fl.scaling_collapse([g[0] for g in good], "fitted", [g[1] for g in good])
            out.append(write_csv(args.out / "collapse_fitted.csv", header(args), ["x", "y", "n_q", "epsilon"], coll))
        cols = ["n_q", "epsilon", "realization", "t_c_fit", "t_H_fit", "a0", "a1", "residual", "ok", "reason"]
        rows = [
            (tr.params["n_q"], tr.params["eps"], r, f.t_c, f.t_H, f.a0, f.a1, f.residual, f.ok, f.reason)
            for r, tr, f in zip(realization, all_traces, fits)
        ]
    else:
        # pure exponential decay: the quadratic term carries no t_H information
        cols = ["n_q", "epsilon", "realization", "t_c_fit", "a0", "residual"]
        rows = [(tr.params["n_q"], tr.params["eps"], r, f.t_c, f.a0, f.residual) for r, tr, f in zip(realization, all_traces, fits)]
    out.append(write_csv(args.out / "fits.csv", header(args), cols, rows))
    s = np.linspace(0.0, 3.0, 301)
    x, y_chi = fl.collapse_theory(s, 1)
    _, y_chi2 = fl.collapse_theory(s, 2)
    rows = zip(x, y_chi, y_chi2, x + 2 / th.SIGMA * x * x)
    out.append(write_csv(args.out / "collapse_theory.csv", header(args), ["x", "y_chi_beta1", "y_chi_beta2", "y_quadratic"], rows))
    xf = np.linspace(0.0, 3.0, 301)
    out.append(write_csv(args.out / "collapse_fitted_theory.csv", header(args), ["x", "y"], zip(xf, xf + xf * xf)))
    return out


def cmd_timescales(args) -> list[Path]:
    rows = []
    for n_q in args.nq:
        params = TentMapParams(n_q, args.K)
        seq = build_map_sequence(params)
        for eps in args.eps:
            if eps <= 0:
                continue
            traces = fl.run_ensemble(params, _channels(args, n_q, eps), args.tmax_cap, fl.CHAOTIC_START, "each", seq)
            fits = [fl.fit_timescales(tr) for tr in traces]
            ts = th.timescales(eps, n_q)
            try:
                ens = fl.ensemble_average(fits)
                t_c_fit, t_H_fit, rel = ens.t_c, ens.t_H, ens.rel_stderr
            except ValueError:
                t_c_fit = t_H_fit = rel = float("nan")
            if args.channel == "noise":
                t_H_fit = float("nan")
            tfs = [fl.measure_tf(tr) for tr in traces]
            tfs = [x for x in tfs if x is not None]
            t_f = float(np.mean(tfs)) if tfs else float("nan")
            rows.append(
                (n_q, eps, len(traces), ts["t_c"], t_c_fit, rel, (th.SIGMA / 2) * ts["t_H"], t_H_fit,
                 t_f, ts["t_f_theory"], ts["t_f_simple"], ts["eps_ch"])
            )
    cols = ["n_q", "epsilon", "realizations", "t_c", "t_c_fit", "inv_t_c_rel_stderr", "t_H_theory", "t_H_fit",
            "t_f", "t_f_theory", "t_f_simple", "eps_ch"]
    return [write_csv(args.out / "timescales.csv", header(args), cols, rows)]


def cmd_husimi(args) -> list[Path]:
    out = []
    eps = args.eps[0] if args.eps else 0.0
    for n_q in args.nq:
        if args.state == "circle":
            state = hu.circle_state(n_q)
        else:
            state = hu.coherent_state(n_q, hu.CoherentSpec(args.p0, args.theta0))
        params = TentMapParams(n_q, args.K)
        fwd = build_map_sequence(params)
        bwd = build_map_sequence(params, "inverse")
        channel, rng = None, None
        if args.channel == "static" and eps > 0:
            channel = sample_static_disorder(eps, n_q, args.seed)
        elif args.channel == "noise" and eps > 0:
            channel = NoiseConfig(eps, args.seed)
            rng = make_rng(args.seed)
        stages = [("initial", state.copy())]
        for _ in range(args.tfwd):
            run_perturbed_map(state, fwd, channel, rng)
        if args.tfwd:
            stages.append(("forward", state.copy()))
        for _ in range(args.tbwd):
            run_perturbed_map(state, bwd, channel, rng)
        if args.tbwd:
            stages.append(("final", state.copy()))
        for name, st in stages:
            for variant in args.variants:
                grid = hu.husimi(st, variant)
                stem = args.out / f"husimi_nq{n_q}_{name}_{variant}"
                head = header(args, stage=name, variant=variant, n_q_grid=n_q)
                write_csv(stem.with_suffix(".csv"), head, ["theta0", "p0", "value"],
                          (r.split(",") for r in hu.grid_csv_rows(grid)))
                hu.write_ppm(grid, stem.with_suffix(".ppm"))
                out += [stem.with_suffix(".csv"), stem.with_suffix(".ppm")]
    return out


def cmd_theory(args) -> list[Path]:
    s = np.linspace(0.0, args.smax, int(round(args.smax * 100)) + 1)
    rows = zip(s, th.chi(s, 1), th.chi(s, 2), th.delta_chi(s, 1), th.delta_chi(s, 2))
    out = [write_csv(args.out / "chi.csv", header(args), ["s", "chi_beta1", "chi_beta2", "delta_chi_beta1", "delta_chi_beta2"], rows)]
    tau = np.linspace(0.0, args.smax, int(round(args.smax * 100)) + 1)
    rows = zip(tau, th.b2_form_factor(tau, 1), th.b2_form_factor(tau, 2))
    out.append(write_csv(args.out / "b2.csv", header(args), ["tau", "b2_beta1", "b2_beta2"], rows))
    trows = []
    for n_q in args.nq:
        for eps in args.eps:
            if eps <= 0:
                continue
            ts = th.timescales(eps, n_q)
            trows.append((n_q, eps, ts["t_c"], ts["t_r"], ts["t_H"], ts["eps_ch"], ts["t_f_theory"], ts["t_f_simple"]))
    cols = ["n_q", "epsilon", "t_c", "t_r", "t_H", "eps_ch", "t_f_theory", "t_f_simple"]
    out.append(write_csv(args.out / "timescales_theory.csv", header(args), cols, trows))
    return out


COMMANDS = {
    "poincare": cmd_poincare,
    "fidelity": cmd_fidelity,
    "timescales": cmd_timescales,
    "husimi": cmd_husimi,
    "theory": cmd_theory,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    for path in COMMANDS[args.command](args):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
