from __future__ import annotations

import copy
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from conewave.harness import (
    ScenarioError,
    builtin_names,
    load_scenario,
    oracle_check,
    parse_number,
    report,
    run,
    sweep,
)
from conewave.harness.scenario import BUILTINS, auto_truncation, scan_angles, schema_json, set_axis
from conewave.harness.svg import Series, line_chart, nice_ticks

PLANE = {
    "name": "small-plane",
    "model": {"kind": "circle", "rho": "2*pi", "R": 1.0},
    "data": {"type": "point_pole", "xbar": 0.3, "p": 0.0, "sigma": 0.05},
    "times": [0.3],
    "checks": [
        {"type": "oracle", "oracle": "FreePlane2D", "r_max": 0.9, "tol": 1e-3},
        {"type": "energy", "steps": 20, "dt": 0.01, "tol": 1e-12},
    ],
}

WEDGE = {
    "name": "small-wedge",
    "model": {"kind": "circle", "rho": "3*pi/2", "R": 1.0},
    "data": {"type": "point_pole", "xbar": 0.25, "p": 0.0, "sigma": 0.03},
    "times": [0.55],
    "checks": [
        {"type": "scan", "time": 0.55, "angles": {"count": 5, "start": 0, "stop": "3*pi/2"}},
        {"type": "emission", "annulus": [0.03, 0.09], "t_end": 0.4, "dt": 0.02, "threshold": 2e-3},
    ],
}


def scenario(base=PLANE, **changes):
    raw = copy.deepcopy(base)
    raw.update(changes)
    return raw


class TestNumbers:
    @pytest.mark.parametrize(
        "text, value",
        [(1, 1.0), (0.25, 0.25), ("pi", math.pi), ("3*pi/2", 1.5 * math.pi), ("2e-3", 2e-3), ("-(pi - 1)", 1 - math.pi), ("2*pi/3", 2 * math.pi / 3)],
    )
    def test_parse(self, text, value):
        assert parse_number(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["__import__('os')", "1/0", "pi**1000", "x", "", True, None, [1]])
    def test_reject(self, text):
        with pytest.raises(ScenarioError):
            parse_number(text)


class TestScenario:
    def test_builtins_load(self):
        assert set(builtin_names()) == set(BUILTINS)
        for name in builtin_names():
            sc = load_scenario(name)
            assert sc.name == name and len(sc.config_hash) == 64

    def test_pi_strings(self):
        sc = load_scenario(WEDGE)
        assert sc.model.boundary.rho == pytest.approx(1.5 * math.pi)

    def test_auto_truncation(self):
        sc = load_scenario(PLANE)
        lam_max = 6.5 / 0.05
        assert sc.M == math.ceil(lam_max / math.pi) + 10
        assert sc.modes == math.ceil(lam_max * 0.3) + 10
        with pytest.raises(ScenarioError):
            auto_truncation(sc.model, {"type": "none"})

    def test_hash_tracks_content(self):
        a = load_scenario(PLANE).config_hash
        assert load_scenario(copy.deepcopy(PLANE)).config_hash == a
        assert load_scenario(scenario(times=[0.31])).config_hash != a

    @pytest.mark.parametrize(
        "mutate, match",
        [
            (lambda r: r.pop("model"), "model"),
            (lambda r: r["model"].update(kind="torus"), "schema"),
            (lambda r: r["data"].update(colour=1), "schema"),
            (lambda r: r["checks"].append({"type": "bogus"}), "schema"),
            (lambda r: r["checks"].append({"type": "oracle"}), "oracle"),
            (lambda r: r["model"].pop("rho"), "rho"),
            (lambda r: r["data"].update(sigma=0), "sigma"),
            (lambda r: r["data"].update(xbar=1.5), "pole"),
            (lambda r: r["checks"].append(dict(r["checks"][1])), "unique"),
            (lambda r: r["model"].update(rho="pi/0"), "division"),
        ],
    )
    def test_schema_errors(self, mutate, match):
        raw = copy.deepcopy(PLANE)
        mutate(raw)
        with pytest.raises(ScenarioError, match=match):
            load_scenario(raw)

    def test_wall_shadow_rejected_up_front(self):
        with pytest.raises(ScenarioError, match="wall"):
            load_scenario(scenario(times=[0.7]))

    def test_sphere_pole_on_axis(self):
        raw = scenario(model={"kind": "sphere", "c": 2, "R": 1.0}, checks=[])
        raw["data"] = dict(raw["data"], p=0.5)
        with pytest.raises(ScenarioError, match="axis"):
            load_scenario(raw)

    def test_file_and_json_errors(self, tmp_path):
        good = tmp_path / "s.json"
        good.write_text(json.dumps(PLANE))
        assert load_scenario(str(good)).name == "small-plane"
        bad = tmp_path / "bad.json"
        bad.write_text('{"name": "x",\n "model": }')
        with pytest.raises(ScenarioError, match="line 2"):
            load_scenario(str(bad))
        with pytest.raises(ScenarioError, match="no scenario"):
            load_scenario("not-a-scenario")

    def test_set_axis(self):
        assert set_axis(PLANE, "sigma", 0.04)["data"]["sigma"] == 0.04
        assert set_axis(PLANE, "rho", "pi")["model"]["rho"] == "pi"
        assert set_axis(PLANE, "data.xbar", 0.2)["data"]["xbar"] == 0.2
        assert PLANE["data"]["sigma"] == 0.05  # template untouched
        with pytest.raises(ScenarioError):
            set_axis(PLANE, "k", 2)

    def test_scan_angles(self):
        assert np.allclose(scan_angles([0, "pi"], 0), [0, math.pi])
        assert np.allclose(scan_angles({"count": 3, "start": 0, "stop": "pi"}, 0), [0, math.pi / 2, math.pi])
        r1 = scan_angles({"count": 4, "random": True}, 7)
        assert np.array_equal(r1, scan_angles({"count": 4, "random": True}, 7))
        assert not np.array_equal(r1, scan_angles({"count": 4, "random": True}, 8))

    def test_schema_document(self):
        doc = json.loads(schema_json())
        assert doc["type"] == "object" and "check_scan" in doc["$defs"]


@pytest.fixture(scope="module")
def wedge_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    return run(WEDGE, root / "one"), run(WEDGE, root / "two")


class TestRun:
    def test_oracle_pass(self, tmp_path):
        res = run(PLANE, tmp_path / "b")
        assert res.passed
        assert res.check("oracle").metrics["error"] < 1e-3
        assert res.check("energy").metrics["drift"] <= 1e-12
        assert (tmp_path / "b" / "oracle.svg").read_text().startswith("<svg")

    def test_oracle_fail(self):
        bad = scenario(checks=[{"type": "oracle", "oracle": "FreePlane2D", "tol": 1e-12}])
        res = run(bad, write=False)
        assert not res.passed and not res.files

    def test_oracle_check_helper(self):
        res = oracle_check(PLANE, "FreePlane2D", 1e-3)
        assert res.passed
        with pytest.raises(Exception):
            oracle_check(PLANE, "ImagesQuotient(2)", 1e-3)

    def test_bundle_contents(self, wedge_runs):
        res = wedge_runs[0]
        root = res.bundle
        names = {p.name for p in root.iterdir()}
        for f in ("report.json", "manifest.json", "scan.csv", "scan_summary.json", "scan.svg", "emission.csv", "emission.svg", "snapshot_t0.5500.npz"):
            assert f in names
        manifest = json.loads((root / "manifest.json").read_text())
        assert set(manifest) >= {"library", "version", "scenario", "config_hash", "files"}
        assert set(manifest["files"]) == names - {"manifest.json"}
        doc = json.loads((root / "report.json").read_text())
        assert doc["config_hash"] == manifest["config_hash"]
        assert "emission_times" in doc

    def test_deterministic(self, wedge_runs):
        one, two = (r.bundle for r in wedge_runs)
        for f in sorted(one.iterdir()):
            assert f.read_bytes() == (two / f.name).read_bytes(), f.name

    def test_report_verifies_hashes(self, wedge_runs, tmp_path):
        import shutil

        copy_dir = tmp_path / "copy"
        shutil.copytree(wedge_runs[0].bundle, copy_dir)
        rep = report(copy_dir)
        assert rep.kind == "run" and rep.hashes_ok
        with open(copy_dir / "scan.csv", "a") as fh:
            fh.write("tampered\n")
        rep = report(copy_dir)
        assert not rep.hashes_ok and rep.mismatched == ["scan.csv"]

    def test_scan_csv(self, wedge_runs):
        lines = (wedge_runs[0].bundle / "scan.csv").read_text().strip().split("\n")
        assert lines[0] == "angle,front_r,s_hat,residual,band_lo,band_hi"
        assert len(lines) == 6


class TestSweep:
    def test_small_sweep(self, tmp_path):
        tmpl = scenario(checks=[{"type": "oracle", "oracle": "FreePlane2D", "tol": 1e-3}])
        res = sweep(tmpl, "sigma", [0.06, 0.05], tmp_path / "sw")
        assert res.passed
        root = tmp_path / "sw"
        assert (root / "sweep.csv").exists() and (root / "sweep_oracle.svg").exists()
        doc = json.loads((root / "sweep.json").read_text())
        assert doc["values"] == ["0.06", "0.05"]
        assert [p["axis_value"] for p in doc["points"]] == [0.06, 0.05]
        assert report(root).kind == "sweep" and report(root).hashes_ok


    def test_radial_refinement(self):
        tmpl = scenario(checks=[{"type": "oracle", "oracle": "FreePlane2D", "tol": 1e-3}])
        res = sweep(tmpl, "M", [16, 24, 36, 54])
        errors = [row["oracle.error"] for row in res.table]
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < 1e-3 < errors[0]

    def test_smoothing_order_table(self):
        tmpl = {
            "name": "k-table",
            "model": {"kind": "sphere", "c": 2, "R": 1.0},
            "data": {"type": "point_pole", "xbar": 0.5, "p": 0, "sigma": 0.03},
            "times": [0.05, 0.1],
            "checks": [{"type": "nonfocusing", "times": [0.05, 0.1], "k": 0, "ell": 0.0, "angle": 0}],
        }
        res = sweep(tmpl, "k", [0, 1, 2])
        gains = [row["nonfocusing.gain"] for row in res.table]
        assert gains[0] == 0.0
        assert 0 < gains[1] < gains[2]


class TestSvg:
    def test_ticks(self):
        assert nice_ticks(0, 1) == [0, 0.2, 0.4, 0.6, 0.8, 1.0]
        assert nice_ticks(math.nan, 1) == []

    def test_nan_breaks_lines(self):
        svg = line_chart([Series([0, 1, 2, 3], [1, math.nan, 2, 3], "s")], "t", "x", "y")
        assert svg.count("<polyline") == 2
        assert svg == line_chart([Series([0, 1, 2, 3], [1, math.nan, 2, 3], "s")], "t", "x", "y")

    def test_log_axis(self):
        svg = line_chart([Series([1, 2, 3], [1e-3, 1e-2, 0])], "t", "x", "y", logy=True, hlines=[(1e-2, "bound")])
        assert "1e-3" in svg and "bound" in svg


def cli(*args, env=None, cwd=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "conewave.cli", *args], capture_output=True, text=True, env=e, cwd=cwd)


class TestCli:
    def test_run_pass(self, tmp_path):
        path = tmp_path / "plane.json"
        path.write_text(json.dumps(PLANE))
        out = cli("run", str(path), "--out", str(tmp_path / "b"), env={"CONEWAVE_THREADS": "1"})
        assert out.returncode == 0, out.stderr
        assert "PASS  oracle" in out.stdout
        rep = cli("report", str(tmp_path / "b"))
        assert rep.returncode == 0 and "manifest ok" in rep.stdout

    def test_run_fail(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(scenario(checks=[{"type": "oracle", "oracle": "FreePlane2D", "tol": 1e-12}])))
        out = cli("run", str(path), "--out", str(tmp_path / "b"))
        assert out.returncode == 1 and "FAIL" in out.stdout

    def test_invalid(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(scenario(times=[0.9])))
        out = cli("run", str(path), "--out", str(tmp_path / "b"))
        assert out.returncode == 2 and "wall" in out.stderr
        assert cli("run").returncode == 2
        assert cli("run", str(path), env={"CONEWAVE_THREADS": "zero"}).returncode == 2

    def test_oracle_subcommand(self, tmp_path):
        path = tmp_path / "plane.json"
        path.write_text(json.dumps(PLANE))
        out = cli("oracle", str(path), "--oracle", "FreePlane2D", "--tol", "1e-3", "--out", str(tmp_path / "o"))
        assert out.returncode == 0, out.stderr

    def test_listing(self):
        out = cli("scenarios")
        assert out.returncode == 0 and all(n in out.stdout for n in builtin_names())
        dump = cli("scenarios", "--dump", "weyl-2d")
        assert json.loads(dump.stdout)["name"] == "weyl-2d"
        assert json.loads(cli("schema").stdout)["title"] == "conewave scenario"
        assert cli("--version").stdout.strip().endswith("0.1.0")
