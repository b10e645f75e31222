from __future__ import annotations

import csv
import json
import os

import numpy as np
import pytest

from vm3bp.cli import EXIT_CONFIG, EXIT_OK, EXIT_THRESHOLD, main
from vm3bp.config import load_config
from vm3bp.emit import atomic_write, format_float

# quadrature oracle for the unit radial fall down to R = 1e-6
FALL_TIME_1E6 = 1.1107207340681868


def run(tmp_path, *argv):
    out = str(tmp_path / "out")
    return main([argv[0], "--out", out, *argv[1:]]), out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_equilibria_five_records(tmp_path):
    code, out = run(tmp_path, "equilibria", "--nu", "0.01215", "--families", "collinear,triangular")
    assert code == EXIT_OK
    with open(os.path.join(out, "equilibria.json")) as fh:
        recs = json.load(fh)
    assert [r["label"] for r in recs] == ["L1", "L2", "L3", "L4", "L5"]
    assert set(recs[0]) == {"label", "nu", "kappa", "xi", "eta", "zeta", "residual"}
    assert recs[0]["kappa"] is None
    header, rows = read_csv(os.path.join(out, "equilibria.csv"))
    assert header == ["nu", "kappa", "label", "xi", "eta", "zeta", "residual"]
    assert len(rows) == 5 and rows[0][1] == ""


def test_equilibria_symmetric_coplanar_pair(tmp_path):
    code, out = run(tmp_path, "equilibria", "--nu", "0.5", "--kappa", "2", "--families", "coplanar")
    assert code == EXIT_OK
    with open(os.path.join(out, "equilibria.json")) as fh:
        recs = {r["label"]: r for r in json.load(fh)}
    zeta = np.sqrt(2 ** (2 / 3) - 0.25)
    assert recs["L6"]["zeta"] == pytest.approx(zeta, abs=1e-10)
    assert recs["L7"]["zeta"] == pytest.approx(-zeta, abs=1e-10)


@pytest.mark.parametrize("cmd", ["equilibria", "verify", "sweep"])
def test_kappa_below_one_rejected(tmp_path, capsys, cmd):
    code, out = run(tmp_path, cmd, "--kappa", "0.5")
    assert code == EXIT_CONFIG
    assert "kappa must exceed 1" in capsys.readouterr().err
    assert not os.path.exists(out)


def test_usage_errors_exit_one(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        main(["equilibria", "--bogus"])
    assert info.value.code == EXIT_CONFIG
    code, _ = run(tmp_path, "equilibria", "--config", str(tmp_path / "missing.ini"))
    assert code == EXIT_CONFIG


def test_config_file_with_flag_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[system]\nnu = 0.3\n[run]\nfamilies = triangular\n")
    code, out = run(tmp_path, "equilibria", "--config", str(ini), "--nu", "0.2")
    assert code == EXIT_OK
    _, rows = read_csv(os.path.join(out, "equilibria.csv"))
    assert {float(r[0]) for r in rows} == {0.2}
    # the copied config reproduces the run on its own
    cfg = load_config(os.path.join(out, "config.ini"))
    assert cfg.nu == 0.2 and cfg.families == ("triangular",)


def test_verify_L1_to_L5_linear_law(tmp_path):
    code, out = run(tmp_path, "verify", "--mass-law", "linear:0.1", "--t-end", "10")
    with open(os.path.join(out, "residuals.json")) as fh:
        report = json.load(fh)
    assert [r["point_label"] for r in report] == ["L1", "L2", "L3", "L4", "L5"]
    assert set(report[0]) == {"point_label", "xi", "eta", "zeta", "law", "t_end", "residual"}
    assert report[0]["law"] == "linear:0.1"
    worst = {r["point_label"]: r["residual"] for r in report}
    assert code == EXIT_OK, f"residuals {worst}"


def test_verify_triangular_passes_and_threshold_exit(tmp_path):
    code, _ = run(tmp_path, "verify", "--mass-law", "linear:0.1", "--points", "L4,L5")
    assert code == EXIT_OK
    code, _ = run(tmp_path, "verify", "--mass-law", "linear:0.1", "--points", "L4",
                  "--threshold", "1e-30")
    assert code == EXIT_THRESHOLD


def test_verify_coplanar_under_kappa_law(tmp_path):
    code, out = run(tmp_path, "verify", "--nu", "0.5", "--kappa", "2", "--mass-law", "kappa:1,-0.1",
                    "--points", "L6,L7")
    assert code == EXIT_OK
    with open(os.path.join(out, "residuals.json")) as fh:
        assert all(r["residual"] < 1e-6 for r in json.load(fh))


@pytest.mark.parametrize("argv", [
    ["--mass-law", "linear:0.1", "--points", "L6"],
    ["--points", "L0"],
    ["--mode", "collinear", "--kappa", "2", "--mass-law", "kappa", "--points", "L6"],
])
def test_verify_guards(tmp_path, argv):
    code, _ = run(tmp_path, "verify", *argv)
    assert code == EXIT_CONFIG


def test_propagate_collinear_stops_at_collision(tmp_path):
    code, out = run(tmp_path, "propagate", "--mode", "collinear", "--t-end", "5", "--svg")
    assert code == EXIT_OK
    header, rows = read_csv(os.path.join(out, "ephemeris.csv"))
    assert header == ["t", "u", "R", "Rdot", "theta", "omega"]
    assert all(len(r) == 6 for r in rows)
    t = np.array([float(r[0]) for r in rows])
    assert abs(t[-1] - FALL_TIME_1E6) < 1e-8
    assert all(float(r[5]) == 0.0 for r in rows)
    with open(os.path.join(out, "ephemeris.svg")) as fh:
        assert "<polyline" in fh.read()


def test_simulate_classical_L4_spot(tmp_path):
    code, out = run(tmp_path, "simulate", "--points", "L4", "--t-end", "20", "--svg")
    assert code == EXIT_OK
    header, rows = read_csv(os.path.join(out, "trajectory_L4.csv"))
    assert header == ["t", "x", "y", "z", "vx", "vy", "vz"]
    xyz = np.array([[float(c) for c in r[1:4]] for r in rows])
    L4 = np.array([0.5 - 0.01215, np.sqrt(3) / 2, 0.0])
    assert np.max(np.linalg.norm(xyz - L4, axis=1)) < 1e-6
    assert os.path.exists(os.path.join(out, "trajectory_L4.svg"))


def test_simulate_explicit_point(tmp_path):
    code, out = run(tmp_path, "simulate", "--points", "", "--explicit", "2,0,0", "--t-end", "1")
    assert code == EXIT_OK
    assert os.path.exists(os.path.join(out, "trajectory_P1.csv"))


def test_full_precision_formatting():
    assert format_float(0.1) == "1.0000000000000001e-01"
    assert float(format_float(np.pi)) == np.pi
    assert format_float(None) == ""
    assert format_float(float("inf")) == "inf"


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "x.csv"
    target.write_text("old")

    def boom(src, dst):
        raise OSError("interrupted")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(str(target), "new")
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["x.csv"]


SWEEP = ["--nu-grid", "0.1,0.3,0.5", "--kappa-grid", "1.5,2"]


def test_sweep_rows_and_summary(tmp_path):
    code, out = run(tmp_path, "sweep", *SWEEP)
    assert code == EXIT_OK
    header, rows = read_csv(os.path.join(out, "sweep.csv"))
    assert header == ["nu", "kappa", "label", "xi", "eta", "zeta", "residual"]
    cells = {}
    for r in rows:
        cells.setdefault((float(r[0]), float(r[1])), []).append(r[2])
    assert len(cells) == 6
    for labels in cells.values():
        assert labels == ["L1", "L2", "L3", "L4", "L5", "L6", "L7"]
    keys = [(float(r[0]), float(r[1])) for r in rows]
    assert keys == sorted(keys)
    _, bound = read_csv(os.path.join(out, "kappa_bound.csv"))
    assert [b[1] for b in bound] == ["none"] * 3


def test_sweep_byte_identical_across_runs_and_workers(tmp_path):
    a = main(["sweep", "--out", str(tmp_path / "a"), *SWEEP, "--nu-grid", "0.1,0.3"])
    b = main(["sweep", "--out", str(tmp_path / "b"), *SWEEP, "--nu-grid", "0.3,0.1", "--workers", "2"])
    assert a == b == EXIT_OK
    for name in ("sweep.csv", "flags.csv", "kappa_bound.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_flags_near_limit(tmp_path):
    code, out = run(tmp_path, "sweep", "--nu", "0.5", "--kappa-grid", "1.000000000001")
    assert code == EXIT_OK
    _, flags = read_csv(os.path.join(out, "flags.csv"))
    assert flags[0][2] == "near-limit"
    _, rows = read_csv(os.path.join(out, "sweep.csv"))
    zeta = max(abs(float(r[5])) for r in rows if r[2] == "L6")
    assert zeta > 1e3
