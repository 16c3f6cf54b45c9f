"""Command-line front end.

Exit codes: 0 on success, 1 when a computation fails, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .bayes import GammaParam, posterior_update, r0_posterior
from .core import DEFAULT_I0, DEFAULT_N, EpidemicState, ModelParams, simulate
from .epiestim import ar_estimate, parse_profile, RPrior, instantaneous_r
from .estimators.fits import METHODS, fit, rolling_fit
from .estimators.stats import build_stats
from .exceptions import SIRError
from .mechanistic import MechanisticState, attack_rate, final_size, trajectory
from .montecarlo import TABLES, McDesign, comparison_series, histogram, replicate, summarize, table
from .reproduction import RzeroConfig, rzero_path
from .rng import DEFAULT_SEED, RngStream, stream_id


@dataclass
class RunConfig:
    """Parsed command plus the resolved seed and thread count."""

    command: str
    seed: int = DEFAULT_SEED
    threads: int = 1
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        opts = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "threads", "func")}
        return cls(args.command, args.seed, args.threads or _env_threads(), opts)


def _env_threads() -> int:
    raw = os.environ.get("REPRO_THREADS", "1")
    try:
        v = int(raw)
    except ValueError:
        v = 0
    if v < 1:
        raise ValueError(f"REPRO_THREADS must be a positive integer, got {raw!r}")
    return v


def _out(path):
    """A file path, or stdout when no path (or ``-``) is given."""
    return sys.stdout if path in (None, "-") else path


def _params(a, c, n) -> ModelParams:
    return ModelParams(a, c, n)


def _incidence(path) -> np.ndarray:
    # the seed cluster on day 0, then daily new infections
    return np.concatenate([[path.N2[0]], path.N12]).astype(float)


# --- commands --------------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> int:
    o = cfg.options
    params = _params(o["a"], o["c"], o["n"])
    init = EpidemicState.initial(o["n"], o["i0"])
    path = simulate(params, init, o["t"], RngStream(cfg.seed, stream_id("simulate")))
    io.write_countpath(path, _out(o["out"]))
    return 0


def cmd_estimate(cfg: RunConfig) -> int:
    o = cfg.options
    path = io.read_countpath(o["input"])
    methods = METHODS if o["method"] == "all" else (o["method"],)
    if o["rolling"] == "none":
        fits = [fit(build_stats(path), m) for m in methods]
    else:
        window = o["window"] if o["rolling"] == "window" else None
        fits = [f for m in methods for f in rolling_fit(path, m, window=window)]
    io.write_fits(fits, _out(o["out"]))
    return 0


def cmd_rzero(cfg: RunConfig) -> int:
    o = cfg.options
    path = io.read_countpath(o["input"])
    params = _params(o["a"], o["c"], path.n)
    rc = RzeroConfig(o["horizon"], o["forward"], RngStream(cfg.seed, stream_id("rzero")))
    days = None if o["every"] == 1 else np.arange(0, path.T + 1, o["every"])
    io.write_rzero(rzero_path(path, params, rc, days), _out(o["out"]))
    return 0


def cmd_epiestim(cfg: RunConfig) -> int:
    o = cfg.options
    path = io.read_countpath(o["input"])
    prof = parse_profile(o["profile"], o["profile_length"])
    series = instantaneous_r(_incidence(path), prof, o["window"], RPrior(o["prior_shape"], o["prior_rate"]))
    io.write_series(series, _out(o["out"]))
    return 0


def cmd_ar(cfg: RunConfig) -> int:
    o = cfg.options
    path = io.read_countpath(o["input"])
    inc = _incidence(path)
    io.write_ar([ar_estimate(inc, H) for H in o["order"]], _out(o["out"]))
    return 0


def cmd_posterior(cfg: RunConfig) -> int:
    o = cfg.options
    path = io.read_countpath(o["input"])
    prior = (GammaParam(o["nu_a"], o["lambda_a"]), GammaParam(o["nu_c"], o["lambda_c"]))
    io.write_posterior(r0_posterior(posterior_update(prior, build_stats(path))), _out(o["out"]))
    return 0


def cmd_final_size(cfg: RunConfig) -> int:
    o = cfg.options
    params = ModelParams(o["a"], o["c"], 1)
    y0 = o["y0"] if o["y0"] is not None else DEFAULT_I0 / DEFAULT_N
    x0 = o["x0"] if o["x0"] is not None else 1.0 - y0
    if o["trajectory"]:
        traj = trajectory(params, MechanisticState(x0, y0, 1.0 - x0 - y0), o["t"])
        io.write_trajectory(traj, o["trajectory"])
    if o["susceptible"]:
        print(io.fmt(final_size(params, x0, y0)))
    else:
        print(io.fmt(attack_rate(params, x0, y0)))
    return 0


def _mc_design(o, cfg) -> McDesign:
    return McDesign(o["n2"], o["t"], o["a"], o["c"], o["n1"], o["reps"], cfg.seed, (o["method"],))


def cmd_mc(cfg: RunConfig) -> int:
    o = cfg.options
    if o["table"] is not None:
        estimand, rows = table(o["table"], o["reps"], cfg.seed, o["method"], cfg.threads)
        io.write_table(estimand, [s for s, _ in rows], _out(o["out"]))
        return 0
    design = _mc_design(o, cfg)
    reps = replicate(design, cfg.threads)
    io.write_table(o["estimand"], [summarize(reps, o["method"])], _out(o["out"]))
    if o["histogram"]:
        io.write_histogram(histogram(reps, o["method"], o["estimand"], o["bins"]), o["histogram"])
    return 0


def cmd_repro(cfg: RunConfig) -> int:
    """Regenerate every table and figure input into ``--outdir``."""
    outdir = Path(cfg.options["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    files = run_repro(outdir, cfg.options["reps"], cfg.seed, cfg.threads, cfg.options["comparison_reps"])
    manifest = {name: io.file_digest(outdir / name) for name in sorted(files)}
    with open(outdir / "manifest.json", "w", encoding="ascii") as fh:
        json.dump({"seed": cfg.seed, "reps": cfg.options["reps"], "files": manifest}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def run_repro(outdir: Path, reps: int, seed: int, threads: int, comparison_reps: int = 100) -> list[str]:
    """Write the reproduction suite; returns the file names written."""
    files = []

    def emit(name, writer, *args):
        writer(*args, outdir / name)
        files.append(name)

    # summary tables
    for number in sorted(TABLES):
        estimand, rows = table(number, reps, seed, "poisson-aml", threads)
        emit(f"table{number}.csv", io.write_table, estimand, [s for s, _ in rows])

    # estimator distributions at R0 = 2
    for n2 in (100, 1000):
        r = replicate(McDesign(n2, 20, 0.14, reps=reps, seed=seed), threads)
        for est in ("a", "c", "r0"):
            emit(f"hist_n2_{n2}_{est}.csv", io.write_histogram, histogram(r, "poisson-aml", est))

    # one epidemic and its reproduction ratios at two horizons
    params = ModelParams(0.1, 0.07, DEFAULT_N)
    path = simulate(params, EpidemicState.initial(DEFAULT_N, DEFAULT_I0), 700, RngStream(seed, stream_id("simulate")))
    emit("epidemic.csv", io.write_countpath, path)
    days = np.arange(0, path.T + 1, 10)
    for H in (30, 100):
        rc = RzeroConfig(H, 100, RngStream(seed, stream_id("rzero", H)))
        emit(f"rzero_H{H}.csv", io.write_rzero, rzero_path(path, params, rc, days))
    traj = trajectory(params, MechanisticState(1 - DEFAULT_I0 / DEFAULT_N, DEFAULT_I0 / DEFAULT_N, 0.0), 700)
    emit("trajectory.csv", io.write_trajectory, traj)

    # estimator comparison along simulated epidemics with R0 = 2
    comp = McDesign(10, 200, 0.14, 0.07, N1_0=10**9 - 10, reps=comparison_reps, seed=seed)
    series = comparison_series(comp, threads=threads)
    emit("comparison.csv", io.write_comparison, series)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN days before an estimator is defined
        mean = {k: np.nanmean(v, axis=0, keepdims=True) for k, v in series.items()}
    emit("comparison_mean.csv", io.write_comparison, mean)

    # Bayesian posterior on the simulated epidemic's first 40 days
    post = r0_posterior(posterior_update((GammaParam(1, 1e-3), GammaParam(1, 1e-3)), build_stats(path.head(40))))
    emit("posterior.csv", io.write_posterior, post)
    return files


# --- parser ------------------------------------------------------------------------------


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sirratio", description="Stochastic SIR simulation and reproduction-ratio estimation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default $REPRO_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, allow_abbrev=False)
        sp.set_defaults(func=func)
        return sp

    s = add("simulate", cmd_simulate, "simulate one epidemic path")
    s.add_argument("--a", type=float, default=0.1)
    s.add_argument("--c", type=float, default=0.07)
    s.add_argument("--n", type=_positive_int, default=DEFAULT_N)
    s.add_argument("--i0", type=int, default=DEFAULT_I0)
    s.add_argument("--t", type=_positive_int, default=700)
    s.add_argument("--out")

    s = add("estimate", cmd_estimate, "fit estimators to a count path")
    s.add_argument("--input", required=True)
    s.add_argument("--method", choices=(*METHODS, "all"), default="poisson-aml")
    s.add_argument("--rolling", choices=("none", "expanding", "window"), default="none")
    s.add_argument("--window", type=_positive_int, default=20)
    s.add_argument("--out")

    s = add("rzero", cmd_rzero, "effective and basic reproduction ratios along a path")
    s.add_argument("--input", required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--horizon", type=_positive_int, default=100, help="truncation horizon H")
    s.add_argument("--forward", type=_positive_int, default=100, help="forward simulations S")
    s.add_argument("--every", type=_positive_int, default=1, help="evaluate every k-th day")
    s.add_argument("--out")

    s = add("epiestim", cmd_epiestim, "instantaneous reproduction number")
    s.add_argument("--input", required=True)
    s.add_argument("--profile", default="lognormal:4.5:2.5")
    s.add_argument("--profile-length", type=_positive_int, default=100)
    s.add_argument("--window", type=_positive_int, default=7)
    s.add_argument("--prior-shape", type=float, default=1.0)
    s.add_argument("--prior-rate", type=float, default=0.2)
    s.add_argument("--out")

    s = add("ar", cmd_ar, "autoregressive reproduction estimate")
    s.add_argument("--input", required=True)
    s.add_argument("--order", type=_positive_int, nargs="+", default=[7, 14, 21])
    s.add_argument("--out")

    s = add("mc", cmd_mc, "Monte-Carlo study of an estimator")
    s.add_argument("--table", type=int, choices=sorted(TABLES))
    s.add_argument("--n2", type=_positive_int, default=100)
    s.add_argument("--n1", type=_positive_int, default=DEFAULT_N)
    s.add_argument("--t", type=_positive_int, default=20)
    s.add_argument("--a", type=float, default=0.14)
    s.add_argument("--c", type=float, default=0.07)
    s.add_argument("--reps", type=_positive_int, default=10_000)
    s.add_argument("--method", choices=METHODS, default="poisson-aml")
    s.add_argument("--estimand", choices=("a", "c", "r0"), default="a")
    s.add_argument("--histogram")
    s.add_argument("--bins", type=_positive_int, default=50)
    s.add_argument("--out")

    s = add("posterior", cmd_posterior, "conjugate gamma posterior of (a, c) and R0")
    s.add_argument("--input", required=True)
    s.add_argument("--nu-a", type=float, default=1.0)
    s.add_argument("--lambda-a", type=float, default=1e-3)
    s.add_argument("--nu-c", type=float, default=1.0)
    s.add_argument("--lambda-c", type=float, default=1e-3)
    s.add_argument("--out")

    s = add("final-size", cmd_final_size, "deterministic attack rate")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--x0", type=float)
    s.add_argument("--y0", type=float)
    s.add_argument("--susceptible", action="store_true", help="print x(inf) rather than the attack rate")
    s.add_argument("--trajectory", help="also write the deterministic trajectory here")
    s.add_argument("--t", type=_positive_int, default=700)

    s = add("repro", cmd_repro, "regenerate all table and figure inputs")
    s.add_argument("--outdir", required=True)
    s.add_argument("--reps", type=_positive_int, default=10_000)
    s.add_argument("--comparison-reps", type=_positive_int, default=100)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return args.func(cfg)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except (SIRError, ValueError, OSError) as exc:
        print(f"sirratio {cfg.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
