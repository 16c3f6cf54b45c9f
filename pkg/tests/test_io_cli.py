import io as _io
import json
import subprocess
import sys

import numpy as np
import pytest

from sirratio import io
from sirratio.bayes import GammaParam, posterior_update, r0_posterior
from sirratio.cli import main
from sirratio.core import CountPath, EpidemicState, ModelParams, simulate
from sirratio.epiestim import ar_estimate, geometric_profile, instantaneous_r
from sirratio.estimators import build_stats, fit, rolling_fit
from sirratio.hetero import HeteroParams, HeteroState, simulate_sir2
from sirratio.mechanistic import MechanisticState, trajectory
from sirratio.montecarlo import TABLE3, McDesign, histogram, replicate, summarize
from sirratio.reproduction import RzeroConfig, rzero_path
from sirratio.rng import RngStream

from conftest import small_path


@pytest.fixture
def path():
    return simulate(ModelParams(0.3, 0.1, 5000), EpidemicState.initial(5000, 20), 60, RngStream(8))


def _same_path(p, q):
    return all(np.array_equal(getattr(p, k), getattr(q, k)) for k in ("N1", "N2", "N3", "N12", "N23"))


# --- round trips -------------------------------------------------------------------


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, 1e-300, 2.5e17, -0.0, np.float64(0.07)):
        assert float(io.fmt(x)) == x
    assert io.fmt(np.inf) == "inf" and io.fmt(-np.inf) == "-inf" and io.fmt(np.nan) == "nan"
    assert io.fmt(np.int64(7)) == "7"


def test_countpath_round_trip(path, tmp_path):
    io.write_countpath(path, tmp_path / "p.csv")
    assert _same_path(io.read_countpath(tmp_path / "p.csv"), path)
    buf = _io.StringIO()
    io.write_countpath(path, buf)
    assert _same_path(io.read_countpath(_io.StringIO(buf.getvalue())), path)


def test_countpath_reader_rejects_gaps_and_headers(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("t,N1,N2,N3,N12,N23\n0,9,1,0,,\n2,9,1,0,0,0\n")
    with pytest.raises(Exception):
        io.read_countpath(f)
    f.write_text("t,S,I,R\n0,9,1,0\n")
    with pytest.raises(ValueError):
        io.read_countpath(f)


def test_group_paths_round_trip(tmp_path):
    hp = HeteroParams.rank_one([0.6, 0.1], [0.25, 0.25], [0.07, 0.1], [500, 300])
    paths = simulate_sir2(hp, HeteroState(((490, 10, 0), (295, 5, 0))), 30, RngStream(1))
    io.write_group_paths(paths, tmp_path / "g.csv")
    back = io.read_group_paths(tmp_path / "g.csv")
    assert len(back) == 2 and all(_same_path(p, q) for p, q in zip(paths, back))


def test_fits_round_trip(path, tmp_path):
    fits = [fit(build_stats(path), m) for m in ("binomial-ml", "poisson-aml")] + rolling_fit(path, "gaussian-aml")[:5]
    fits.append(fit(build_stats(path.head(1)), "poisson-aml"))
    io.write_fits(fits, tmp_path / "f.csv")
    for f, g in zip(fits, io.read_fits(tmp_path / "f.csv")):
        assert (f.method, f.T, f.flags) == (g.method, g.T, g.flags)
        for k in ("a_hat", "c_hat", "r0_hat", "var_a", "var_c"):
            assert np.array_equal(getattr(f, k), getattr(g, k), equal_nan=True)


def test_rzero_round_trip(path, tmp_path):
    s = rzero_path(path, ModelParams(0.3, 0.1, 5000), RzeroConfig(20, 10, RngStream(2)), np.arange(0, 61, 10))
    io.write_rzero(s, tmp_path / "r.csv")
    d = io.read_rzero(tmp_path / "r.csv")
    assert np.array_equal(d["t"], s.t) and np.array_equal(d["effective"], s.effective)
    assert np.array_equal(d["basic"], s.basic) and (d["H"], d["S"]) == (20, 10)


def test_trajectory_round_trip(tmp_path):
    traj = trajectory(ModelParams(0.1, 0.07, 1), MechanisticState(0.99, 0.01, 0.0), 50)
    io.write_trajectory(traj, tmp_path / "t.csv")
    assert np.array_equal(io.read_trajectory(tmp_path / "t.csv"), traj)


def test_series_round_trip(path, tmp_path):
    inc = np.concatenate([[path.N2[0]], path.N12, np.zeros(20)])
    s = instantaneous_r(inc, geometric_profile(0.1, 50), 7)
    io.write_series(s, tmp_path / "s.csv")
    d = io.read_series(tmp_path / "s.csv")
    assert np.array_equal(d["posterior_mean"], s.posterior_mean, equal_nan=True)
    assert np.array_equal(d["raw_ratio"], s.raw_ratio, equal_nan=True)
    assert sorted(d["flags"]) == sorted((int(t), r) for t, r in s.flags)


def test_ar_round_trip(path, tmp_path):
    inc = np.concatenate([[path.N2[0]], path.N12]).astype(float)
    res = [ar_estimate(inc, H) for H in (3, 7)]
    io.write_ar(res, tmp_path / "a.csv")
    back = io.read_ar(tmp_path / "a.csv")
    for r, b in zip(res, back):
        assert b["H"] == r.H and b["R_ar"] == r.r_ar and np.array_equal(b["gamma"], r.gamma)


def test_posterior_round_trip(path, tmp_path):
    post = r0_posterior(posterior_update((GammaParam(1, 1e-3), GammaParam(1, 1e-3)), build_stats(path)))
    io.write_posterior(post, tmp_path / "b.csv")
    d = io.read_posterior(tmp_path / "b.csv")
    assert d["nu_a"] == post.post.a.nu and d["lambda_c"] == post.post.c.lam and d["r0_mean"] == post.mean
    assert d["flags"] == ()


def test_table_and_histogram_round_trip(tmp_path):
    reps = replicate(McDesign(100, 20, 0.14, reps=50), 1)
    s = summarize(reps, "poisson-aml")
    io.write_table("a", [s], tmp_path / "t.csv")
    (row,) = io.read_table(tmp_path / "t.csv")
    assert row["mean"] == s.a.mean and row["var"] == s.a.var and row["rho"] == s.rho and row["N2_0"] == 100
    h = histogram(reps, "poisson-aml", "a", bins=10)
    io.write_histogram(h, tmp_path / "h.csv")
    d = io.read_histogram(tmp_path / "h.csv")
    assert np.array_equal(d["density"], h.density) and np.array_equal(d["bin_left"], h.edges[:-1])


def test_gnuplot_script():
    s = io.gnuplot_script("x.csv", ["a", "b"], "title")
    assert "set datafile separator ','" in s and "using 1:3" in s


# --- command line --------------------------------------------------------------------


def run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def epidemic_csv(tmp_path, capsys):
    f = tmp_path / "epi.csv"
    assert run(["simulate", "--a", "0.1", "--c", "0.07", "--n", "3000000", "--i0", "50", "--t", "700",
                "--seed", "1", "--out", str(f)], capsys)[0] == 0
    return f


def test_simulate_row_count_and_determinism(epidemic_csv, tmp_path, capsys):
    lines = epidemic_csv.read_text().splitlines()
    assert len(lines) == 702 and lines[0] == "t,N1,N2,N3,N12,N23"
    g = tmp_path / "again.csv"
    run(["simulate", "--a", "0.1", "--c", "0.07", "--n", "3000000", "--i0", "50", "--t", "700",
         "--seed", "1", "--out", str(g)], capsys)
    assert g.read_bytes() == epidemic_csv.read_bytes()


def test_simulate_without_infectives_is_constant(capsys):
    rc, out, _ = run(["simulate", "--i0", "0", "--n", "1000", "--t", "20"], capsys)
    p = io.read_countpath(_io.StringIO(out))
    assert rc == 0 and np.all(p.N1 == 1000) and not p.N12.any()


def test_estimate_all_methods(epidemic_csv, capsys):
    rc, out, _ = run(["estimate", "--input", str(epidemic_csv), "--method", "all"], capsys)
    fits = io.read_fits(_io.StringIO(out))
    assert rc == 0 and len(fits) == 5 and len({f.method for f in fits}) == 5


def test_estimate_without_recoveries_reports_inf(tmp_path, capsys):
    f = tmp_path / "norec.csv"
    io.write_countpath(CountPath([90, 85, 80], [10, 15, 20], [0, 0, 0]), f)
    rc, out, _ = run(["estimate", "--input", str(f)], capsys)
    (row,) = io.read_fits(_io.StringIO(out))
    assert rc == 0 and row.r0_hat == np.inf and ",inf," in out


def test_estimate_rolling(epidemic_csv, capsys):
    _, out, _ = run(["estimate", "--input", str(epidemic_csv), "--rolling", "expanding"], capsys)
    fits = io.read_fits(_io.StringIO(out))
    assert [f.T for f in fits] == list(range(1, 701))
    _, out, _ = run(["estimate", "--input", str(epidemic_csv), "--rolling", "window", "--window", "30"], capsys)
    last = io.read_fits(_io.StringIO(out))[-1]
    direct = fit(build_stats(io.read_countpath(epidemic_csv)).window(671, 700), "poisson-aml")
    assert last.T == 700 and last.a_hat == direct.a_hat


def test_final_size_command(capsys):
    rc, out, _ = run(["final-size", "--a", "0.105", "--c", "0.07"], capsys)
    assert rc == 0 and float(out) == pytest.approx(0.583, abs=1e-3)
    _, out, _ = run(["final-size", "--a", "0.105", "--c", "0.07", "--susceptible"], capsys)
    assert float(out) == pytest.approx(0.417, abs=1e-3)


def test_mc_table_schema(capsys):
    rc, out, _ = run(["mc", "--table", "3", "--reps", "20"], capsys)
    rows = io.read_table(_io.StringIO(out))
    assert rc == 0 and len(rows) == len(TABLE3)
    assert [(r["N2_0"], r["T"], r["a"]) for r in rows] == [d for d, _ in TABLE3]


def test_mc_threads_do_not_change_bytes(tmp_path, capsys):
    outs = []
    for th in ("1", "4"):
        f, h = tmp_path / f"m{th}.csv", tmp_path / f"h{th}.csv"
        run(["mc", "--reps", "600", "--threads", th, "--estimand", "r0", "--histogram", str(h), "--out", str(f)], capsys)
        outs.append((f.read_bytes(), h.read_bytes()))
    assert outs[0] == outs[1]


def test_other_commands_run(epidemic_csv, tmp_path, capsys):
    e = str(epidemic_csv)
    rc, out, _ = run(["epiestim", "--input", e, "--profile", "lognormal:4.5:2.5", "--window", "7"], capsys)
    assert rc == 0 and len(io.read_series(_io.StringIO(out))["t"]) == 701
    rc, out, _ = run(["ar", "--input", e, "--order", "7", "14"], capsys)
    assert rc == 0 and [r["H"] for r in io.read_ar(_io.StringIO(out))] == [7, 14]
    rc, out, _ = run(["posterior", "--input", e], capsys)
    assert rc == 0 and io.read_posterior(_io.StringIO(out))["r0_mean"] > 1
    rc, out, _ = run(["rzero", "--input", e, "--a", "0.1", "--c", "0.07", "--horizon", "20", "--forward", "5",
                      "--every", "100"], capsys)
    assert rc == 0 and list(io.read_rzero(_io.StringIO(out))["t"]) == list(range(0, 701, 100))


def test_usage_errors_exit_2(capsys):
    for argv in (["simulate", "--t", "0"], ["estimate"], ["bogus"], ["simulate", "-a", "0.1"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_bad_thread_environment_exit_2(monkeypatch):
    monkeypatch.setenv("REPRO_THREADS", "zero")
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--t", "1"])
    assert exc.value.code == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    rc, _, err = run(["simulate", "--a", "30", "--n", "100", "--i0", "50", "--t", "5"], capsys)
    assert rc == 1 and "error" in err
    rc, _, err = run(["estimate", "--input", str(tmp_path / "missing.csv")], capsys)
    assert rc == 1


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "sirratio.cli", "final-size", "--a", "0.14", "--c", "0.07"],
                         capture_output=True, text=True, check=True)
    assert 0.79 < float(res.stdout) < 0.81


def test_repro_small(tmp_path, capsys):
    rc, _, _ = run(["repro", "--outdir", str(tmp_path), "--reps", "10", "--comparison-reps", "2", "--threads", "2"], capsys)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert rc == 0 and len(manifest["files"]) == 16
    for name, digest in manifest["files"].items():
        assert io.file_digest(tmp_path / name) == digest
