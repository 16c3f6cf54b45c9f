"""CSV readers and writers for every artifact the package produces.

Floats are written with ``repr`` (shortest round-trip decimal), so reading a
file back gives bit-identical values. Infinite and missing values are written
as ``inf`` and ``nan``. Flag lists are joined with ``;``.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import math
from pathlib import Path

import numpy as np

from .core import CountPath
from .estimators.fits import FitResult
from .exceptions import InconsistentCountsError

COUNTPATH_HEADER = ["t", "N1", "N2", "N3", "N12", "N23"]
RZERO_HEADER = ["t", "R_effective", "R_basic", "H", "S"]
FIT_HEADER = ["method", "T", "a_hat", "c_hat", "r0_hat", "var_a", "var_c", "flags"]
TRAJECTORY_HEADER = ["t", "x", "y", "z"]
SERIES_HEADER = ["t", "raw_ratio", "posterior_mean", "posterior_shape", "posterior_rate", "flags"]
POSTERIOR_HEADER = ["nu_a", "lambda_a", "nu_c", "lambda_c", "r0_mean", "r0_q05", "r0_q50", "r0_q95", "flags"]
TABLE_HEADER = ["N2_0", "T", "a", "c", "R0", "mean", "var", "median", "rho", "flagged"]
HISTOGRAM_HEADER = ["bin_left", "bin_right", "density"]


def fmt(x) -> str:
    """Shortest round-trip text for ints and floats."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _flags(flags) -> str:
    return ";".join(str(f) for f in flags)


def _split_flags(s: str) -> tuple:
    return tuple(f for f in s.split(";") if f)


def _write(dest, header, rows) -> None:
    """Write to a path or an open text handle with ``\n`` line endings."""
    if hasattr(dest, "write"):
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(dest, "w", newline="", encoding="ascii") as fh:
        _write(fh, header, rows)


def _open(src):
    return src if hasattr(src, "read") else open(src, newline="", encoding="ascii")


def _read(src, header) -> list[dict]:
    fh = _open(src)
    try:
        r = csv.DictReader(fh)
        if r.fieldnames is None or list(r.fieldnames) != header:
            raise ValueError(f"{src}: expected header {','.join(header)}, got {r.fieldnames}")
        return list(r)
    finally:
        if fh is not src:
            fh.close()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- count paths ----------------------------------------------------------------


def _path_rows(path: CountPath, prefix=()):
    for t in range(path.T + 1):
        trans = ("", "") if t == 0 else (int(path.N12[t - 1]), int(path.N23[t - 1]))
        yield [*prefix, t, int(path.N1[t]), int(path.N2[t]), int(path.N3[t]), *trans]


def write_countpath(path: CountPath, dest) -> None:
    _write(dest, COUNTPATH_HEADER, _path_rows(path))


def _path_from_rows(rows, src) -> CountPath:
    t = [int(r["t"]) for r in rows]
    if t != list(range(len(rows))):
        raise InconsistentCountsError(f"{src}: days must run 0..T without gaps")
    cols = {k: np.array([int(r[k]) for r in rows], dtype=np.int64) for k in ("N1", "N2", "N3")}
    trans = {k: np.array([int(r[k]) for r in rows[1:]], dtype=np.int64) for k in ("N12", "N23")}
    return CountPath(cols["N1"], cols["N2"], cols["N3"], trans["N12"], trans["N23"])


def read_countpath(src) -> CountPath:
    return _path_from_rows(_read(src, COUNTPATH_HEADER), src)


def write_group_paths(paths, dest) -> None:
    rows = [row for g, p in enumerate(paths, start=1) for row in _path_rows(p, (g,))]
    _write(dest, ["group", *COUNTPATH_HEADER], rows)


def read_group_paths(src) -> tuple[CountPath, ...]:
    rows = _read(src, ["group", *COUNTPATH_HEADER])
    groups = sorted({int(r["group"]) for r in rows})
    return tuple(_path_from_rows([r for r in rows if int(r["group"]) == g], src) for g in groups)


# --- reproduction ratios ------------------------------------------------------------


def write_rzero(series, dest) -> None:
    H, S = series.config.H, series.config.S
    rows = ([int(t), fmt(e), fmt(b), H, S] for t, e, b in zip(series.t, series.effective, series.basic))
    _write(dest, RZERO_HEADER, rows)


def read_rzero(src) -> dict:
    rows = _read(src, RZERO_HEADER)
    return {
        "t": np.array([int(r["t"]) for r in rows]),
        "effective": np.array([float(r["R_effective"]) for r in rows]),
        "basic": np.array([float(r["R_basic"]) for r in rows]),
        "H": int(rows[0]["H"]) if rows else None,
        "S": int(rows[0]["S"]) if rows else None,
    }


# --- fits ---------------------------------------------------------------------------


def write_fits(fits, dest) -> None:
    rows = (
        [f.method, f.T, fmt(f.a_hat), fmt(f.c_hat), fmt(f.r0_hat), fmt(f.var_a), fmt(f.var_c), _flags(f.flags)]
        for f in fits
    )
    _write(dest, FIT_HEADER, rows)


def read_fits(src) -> list[FitResult]:
    return [
        FitResult(
            r["method"], int(r["T"]), float(r["a_hat"]), float(r["c_hat"]), float(r["r0_hat"]),
            float(r["var_a"]), float(r["var_c"]), 0, _split_flags(r["flags"]),
        )
        for r in _read(src, FIT_HEADER)
    ]


# --- deterministic model ------------------------------------------------------------


def write_trajectory(traj, dest) -> None:
    _write(dest, TRAJECTORY_HEADER, ([t, *map(fmt, row)] for t, row in enumerate(np.asarray(traj))))


def read_trajectory(src) -> np.ndarray:
    rows = _read(src, TRAJECTORY_HEADER)
    return np.array([[float(r[k]) for k in "xyz"] for r in rows]).reshape(-1, 3)


# --- renewal estimators ---------------------------------------------------------------


def write_series(series, dest) -> None:
    per_day: dict[int, list] = {}
    for t, reason in series.flags:
        per_day.setdefault(int(t), []).append(reason)
    rows = (
        [int(t), fmt(r), fmt(m), fmt(s), fmt(q), _flags(per_day.get(int(t), ()))]
        for t, r, m, s, q in zip(
            series.t, series.raw_ratio, series.posterior_mean, series.posterior_shape, series.posterior_rate
        )
    )
    _write(dest, SERIES_HEADER, rows)


def read_series(src) -> dict:
    rows = _read(src, SERIES_HEADER)
    out = {k: np.array([float(r[k]) for r in rows]) for k in SERIES_HEADER[1:-1]}
    out["t"] = np.array([int(r["t"]) for r in rows])
    out["flags"] = [(int(r["t"]), f) for r in rows for f in _split_flags(r["flags"])]
    return out


def write_ar(results, dest) -> None:
    results = list(results)
    width = max((r.H for r in results), default=0)
    header = ["H", "R_ar", *(f"gamma_{h}" for h in range(1, width + 1))]
    rows = ([r.H, fmt(r.r_ar), *map(fmt, r.gamma), *[""] * (width - r.H)] for r in results)
    _write(dest, header, rows)


def read_ar(src) -> list[dict]:
    fh = _open(src)
    try:
        rows = list(csv.DictReader(fh))
    finally:
        if fh is not src:
            fh.close()
    out = []
    for r in rows:
        H = int(r["H"])
        out.append({"H": H, "R_ar": float(r["R_ar"]), "gamma": np.array([float(r[f"gamma_{h}"]) for h in range(1, H + 1)])})
    return out


# --- bayes ------------------------------------------------------------------------------


def write_posterior(post, dest) -> None:
    a, c = post.post.a, post.post.c
    q05, q50, q95 = (float(post.quantile(q)) for q in (0.05, 0.5, 0.95))
    _write(
        dest,
        POSTERIOR_HEADER,
        [[fmt(a.nu), fmt(a.lam), fmt(c.nu), fmt(c.lam), fmt(post.mean), fmt(q05), fmt(q50), fmt(q95), _flags(post.flags)]],
    )


def read_posterior(src) -> dict:
    (r,) = _read(src, POSTERIOR_HEADER)
    out = {k: float(r[k]) for k in POSTERIOR_HEADER[:-1]}
    out["flags"] = _split_flags(r["flags"])
    return out


# --- monte carlo ------------------------------------------------------------------------


def write_table(estimand: str, summaries, dest) -> None:
    rows = []
    for s in summaries:
        d, m = s.design, s.moments(estimand)
        rows.append([d.N2_0, d.T, fmt(d.a), fmt(d.c), fmt(d.r0), fmt(m.mean), fmt(m.var), fmt(m.median), fmt(s.rho), s.flagged])
    _write(dest, TABLE_HEADER, rows)


def read_table(src) -> list[dict]:
    ints = {"N2_0", "T", "flagged"}
    return [{k: (int(v) if k in ints else float(v)) for k, v in r.items()} for r in _read(src, TABLE_HEADER)]


def write_histogram(hist, dest) -> None:
    rows = ([fmt(lo), fmt(hi), fmt(d)] for lo, hi, d in zip(hist.edges[:-1], hist.edges[1:], hist.density))
    _write(dest, HISTOGRAM_HEADER, rows)


def read_histogram(src) -> dict:
    rows = _read(src, HISTOGRAM_HEADER)
    return {k: np.array([float(r[k]) for r in rows]) for k in HISTOGRAM_HEADER}


def write_comparison(series: dict, dest, rep: int = 0) -> None:
    """One column per estimator for replication ``rep`` of :func:`comparison_series`."""
    names = list(series)
    T1 = series[names[0]].shape[1]
    _write(dest, ["t", *names], ([t, *(fmt(series[k][rep, t]) for k in names)] for t in range(T1)))


def gnuplot_script(csv_name: str, columns, title: str = "") -> str:
    """A minimal gnuplot script plotting ``columns`` of a comma-separated file against column 1."""
    buf = _io.StringIO()
    buf.write("set datafile separator ','\nset key autotitle columnhead\n")
    if title:
        buf.write(f"set title '{title}'\n")
    parts = [f"'{csv_name}' using 1:{i + 2} with lines" for i, _ in enumerate(columns)]
    buf.write("plot " + ", \\\n     ".join(parts) + "\n")
    return buf.getvalue()
