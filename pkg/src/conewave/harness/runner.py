"""Run scenarios into artifact bundles, sweep them, and re-read bundles.

A bundle is a directory holding ``report.json``, per-check CSV/SVG files,
state snapshots, a copy of the scenario and ``manifest.json`` listing the
SHA-256 of every other file.  Nothing time-dependent is written, so a
repeated run with the same scenario and library version reproduces the
bundle byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..diagnostics import (
    GAIN_BOUND_NOTE,
    EstimatorConfig,
    emission_trace,
    measure_front,
    mode_decay_profile,
    mode_energies,
    nonfocusing_test,
    ray_sample,
    tip_emission_monitor,
    wavefront_scan,
)
from ..errors import ConewaveError, ParameterError
from ..geometry import build_cone
from ..propagator import (
    CoefficientList,
    ConormalRing,
    PointPole,
    WaveState,
    build_basis,
    evolve,
    initial_state,
    project,
    save_state,
    synthesize_many,
    tangential_smooth,
    weyl_count,
)
from .oracles import OracleSpec, oracle_compare, oracle_field
from .scenario import Scenario, ScenarioError, load_scenario, parse_number, scan_angles, scenario_from_dict, set_axis
from .svg import Series, line_chart

log = logging.getLogger("conewave")

MANIFEST = "manifest.json"


class StageError(ConewaveError):
    """A run stage failed; ``stage`` names it and ``cause`` is the original error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")

    def diagnostic(self) -> dict:
        return {"stage": self.stage, "error": type(self.cause).__name__, "message": str(self.cause)}


@dataclass
class CheckResult:
    name: str
    type: str
    passed: bool
    metrics: dict
    primary: str

    def to_dict(self) -> dict:
        return {"name": self.name, "type": self.type, "passed": self.passed, "primary": self.primary, "metrics": self.metrics}


@dataclass
class RunResult:
    scenario: Scenario
    checks: list[CheckResult]
    report: dict
    bundle: Path | None = None
    files: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


# -- JSON helpers ------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Bundle:
    """Output directory that remembers what was written (``None`` = dry run)."""

    def __init__(self, root: Path | None):
        self.root = root
        self.names: list[str] = []
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str) -> None:
        if self.root is None:
            return
        with open(self.root / name, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        self.names.append(name)

    def snapshot(self, name: str, state: WaveState) -> None:
        if self.root is None:
            return
        save_state(state, self.root / name)
        self.names.append(name)

    def manifest(self, scenario: Scenario, extra: dict | None = None) -> dict:
        if self.root is None:
            return {}
        files = {name: sha256_file(self.root / name) for name in sorted(set(self.names))}
        doc = {
            "library": "conewave",
            "version": __version__,
            "scenario": scenario.name,
            "config_hash": scenario.config_hash,
            "files": files,
        }
        if extra:
            doc.update(extra)
        with open(self.root / MANIFEST, "w", encoding="utf-8", newline="") as fh:
            fh.write(dump_json(doc))
        return files


# -- run context -------------------------------------------------------------

def _angular_profile(scenario: Scenario) -> Callable | None:
    spec = scenario.data.get("angular")
    if spec is None or spec["kind"] == "constant":
        return None
    kappa = spec.get("kappa", 1.0)
    center = spec.get("center", 0.0)
    if scenario.model.kind == "circle":
        freq = 2 * math.pi / scenario.model.boundary.rho
        return lambda y: np.exp(kappa * np.cos(freq * (np.asarray(y) - center)))
    return lambda y: np.exp(kappa * np.cos(np.asarray(y) - center))


class _Context:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._basis = None
        self._initial = None

    @property
    def basis(self):
        if self._basis is None:
            self._basis = build_basis(self.scenario.model, self.scenario.modes, self.scenario.M)
        return self._basis

    @property
    def initial(self) -> WaveState:
        if self._initial is None:
            self._initial = make_initial_state(self.scenario, self.basis)
        return self._initial

    def state_at(self, t: float) -> WaveState:
        # each time is reached by one exact step from t = 0, so no error accumulates
        return evolve(self.initial, t)

    def estimator(self, sigma: float | None = None) -> EstimatorConfig:
        d = self.scenario.diagnostics
        return EstimatorConfig(
            sigma if sigma is not None else self.scenario.sigma,
            window=d.get("window"),
            shells=int(d.get("shells", 4)),
            threshold=d.get("threshold", 0.01),
            match=d.get("match"),
        )


def make_initial_state(scenario: Scenario, basis) -> WaveState:
    """Initial state described by ``scenario.data`` on ``basis``."""
    data = scenario.data
    kind = data["type"]
    if kind == "point_pole":
        return initial_state(basis, PointPole(data["xbar"], data["p"], data["sigma"]))
    if kind == "conormal_ring":
        ring = ConormalRing(
            data["r0"],
            data["exponent"],
            _angular_profile(scenario),
            data["cutoff"],
            data["sigma"],
            data["component"],
        )
        return initial_state(basis, ring)
    if kind == "radial_gaussian":
        w = data["width"]
        coef = project(basis, lambda r, y: np.exp(-0.5 * (r / w) ** 2) + 0.0 * y)
        zero = np.zeros_like(coef)
        a, b = (coef, zero) if data["component"] == "u" else (zero, coef)
        return initial_state(basis, CoefficientList(a, b, support=8.0 * w))
    raise ScenarioError(f"scenario {scenario.name!r} has no initial data")


# -- checks ------------------------------------------------------------------

def _check_oracle(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    sc = ctx.scenario
    kind = chk["oracle"]
    N = chk.get("N")
    if kind == "ImagesQuotient" and N is None:
        N = int(round(2 * math.pi / sc.model.boundary.rho)) if sc.model.kind == "circle" else None
    width = sc.data.get("width") if kind == "FreeSpace3DRadial" else None
    if kind == "FreeSpace3DRadial" and sc.data.get("component") != "ut":
        raise ScenarioError("FreeSpace3DRadial compares against data placed in du/dt")
    spec = OracleSpec(kind, r_max=chk["r_max"], tol=chk["tol"], N=N, width=width)
    state = ctx.state_at(chk["time"])
    pole = (sc.data["xbar"], sc.data["p"]) if sc.data["type"] == "point_pole" else None
    err = oracle_compare(state, spec, pole)
    # radial cut through the pole direction for the plot
    angle = pole[1] if pole is not None else 0.0
    r = np.linspace(0.0, chk["r_max"], 361)
    y = np.array([angle])
    sim = synthesize_many([state], r, y)[0][:, 0]
    ref = oracle_field(state, spec, pole, r, y)[:, 0]
    out.text(
        f"{chk['name']}.svg",
        line_chart(
            [Series(r, ref, "oracle", markers=False), Series(r, sim, "spectral", markers=False, dashed=True)],
            f"{sc.name}: u(t={state.t:g}) along angle {angle:.4g}",
            "r",
            "u",
        ),
    )
    metrics = {"oracle": kind, "N": N, "time": state.t, "error": err, "tol": spec.tol, "r_max": spec.r_max}
    return CheckResult(chk["name"], "oracle", bool(err <= spec.tol), metrics, "error")


def _nearest(report, angle: float):
    idx = int(np.argmin(np.abs(report.angles - angle)))
    return report.records[idx]


def _check_scan(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    sc = ctx.scenario
    state = ctx.state_at(chk["time"])
    if chk.get("smoothing"):
        state = tangential_smooth(state, chk["smoothing"])
    angles = scan_angles(chk["angles"], sc.seed)
    report = wavefront_scan(state, angles, ctx.estimator(), t_bar=chk["t_bar"])
    first_scan = next(c["name"] for c in sc.checks if c["type"] == "scan")
    stem = "scan" if chk["name"] == first_scan else f"scan-{chk['name']}"
    out.text(f"{stem}.csv", report.to_csv())
    out.text(f"{stem}_summary.json", dump_json(report.summary()))
    vlines = []
    passed = True
    metrics = {
        "time": state.t,
        "t_bar": chk["t_bar"],
        "angles": report.angles,
        "s_hat": report.s_hat,
        "front_r": [rec.front_r for rec in report.records],
        "min_angle": report.min_angle(),
    }
    primary = "min_angle"
    if "expect_min_angle" in chk:
        step = float(np.min(np.diff(np.sort(angles)))) if angles.size > 1 else 0.0
        tol = chk.get("angle_tol", step)
        ok = math.isfinite(report.min_angle()) and abs(report.min_angle() - chk["expect_min_angle"]) <= tol + 1e-9
        metrics.update(expected_min_angle=chk["expect_min_angle"], angle_tol=tol, min_angle_ok=ok)
        passed &= ok
        vlines.append((chk["expect_min_angle"], "expected minimum"))
    if "contrast" in chk:
        c = chk["contrast"]
        ref = _nearest(report, c["reference"]).s_hat
        others = [_nearest(report, a).s_hat for a in c["angles"]]
        gaps = [s - ref for s in others]
        gap = min(gaps) if all(math.isfinite(g) for g in gaps) else math.nan
        ok = math.isfinite(gap) and gap >= c["min_gap"]
        metrics.update(
            s_reference=ref,
            s_contrast=others,
            gaps=gaps,
            gap=gap,
            gain=float(np.mean(gaps)) if all(math.isfinite(g) for g in gaps) else math.nan,
            min_gap=c["min_gap"],
            gap_ok=ok,
        )
        passed &= ok
        primary = "gap"
    out.text(
        f"{stem}.svg",
        line_chart(
            [Series(report.angles, report.s_hat, "s_hat")],
            f"{sc.name}: front regularity at t={state.t:g}",
            "angle",
            "estimated Sobolev exponent",
            vlines=vlines,
        ),
    )
    return CheckResult(chk["name"], "scan", bool(passed), metrics, primary)


def _check_nonfocusing(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    states = [ctx.state_at(t) for t in chk["times"]]
    res = nonfocusing_test(states, chk["k"], chk["ell"], ctx.estimator(), angle=chk["angle"], t_bar=chk["t_bar"])
    metrics = {
        "k": chk["k"],
        "ell": chk["ell"],
        "gain": res.gain,
        "margin": res.margin,
        "per_state": [{"t": t, "s0": s0, "sk": sk} for t, s0, sk in res.per_state],
        "note": res.note,
    }
    return CheckResult(chk["name"], "nonfocusing", bool(res.passed), metrics, "gain")


def _check_emission(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    sc = ctx.scenario
    count = int(round(chk["t_end"] / chk["dt"]))
    times = chk["dt"] * np.arange(count + 1)
    traj = [ctx.state_at(float(t)) for t in times]
    trace = emission_trace(traj, chk["annulus"])
    del traj
    events = tip_emission_monitor([], chk["annulus"], chk["threshold"], trace=trace)
    first = trace.first_above(chk["threshold"])
    expect = chk["expect"]
    matched = len(events) == len(expect) and all(abs(e - x) <= chk["tol"] for e, x in zip(events, expect))
    quiet = True
    if "quiet_before" in chk:
        quiet = math.isnan(first) or first >= chk["quiet_before"] - 1e-12
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "energy_fraction"])
    for t, e in zip(trace.times, trace.energy):
        w.writerow([repr(round(float(t), 12)), repr(float(e))])
    out.text("emission.csv", buf.getvalue())
    out.text(
        "emission.svg",
        line_chart(
            [Series(trace.times, np.maximum(trace.energy, 1e-30), "annulus energy fraction", markers=False)],
            f"{sc.name}: top-octave energy in r in [{chk['annulus'][0]:g}, {chk['annulus'][1]:g}]",
            "t",
            "energy fraction",
            logy=True,
            hlines=[(chk["threshold"], "threshold")],
            vlines=[(x, "expected") for x in expect],
        ),
    )
    errors = [abs(e - x) for e, x in zip(events, expect)]
    metrics = {
        "events": events,
        "expected": expect,
        "tol": chk["tol"],
        "event_error": max(errors) if errors and len(events) == len(expect) else math.nan,
        "first_above": first,
        "quiet_before": chk.get("quiet_before"),
        "quiet_ok": quiet,
        "peak_energy": float(trace.energy.max()),
        "threshold": chk["threshold"],
        "band": list(trace.band),
    }
    return CheckResult(chk["name"], "emission", bool(matched and quiet), metrics, "event_error")


def _front_radius(r0: float, t: float) -> float:
    return r0 if t == 0 else abs(t - r0)


def _check_conormal(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    sc = ctx.scenario
    r0 = sc.data["r0"]
    cfg = ctx.estimator()
    rows = []
    curves = []
    for t in chk["times"]:
        st = ctx.state_at(t)
        fit = mode_decay_profile(st)
        radius = _front_radius(r0, t)
        rec = measure_front(ray_sample(st, chk["angle"]), radius, cfg)
        rows.append({"t": t, "slope": fit.slope, "residual": fit.residual, "superpolynomial": fit.superpolynomial,
                     "degenerate": fit.degenerate, "front_expected": radius, "front_r": rec.front_r, "s_hat": rec.s_hat})
        mu, e = mode_energies(st)
        curves.append(Series(np.log1p(mu), np.maximum(e, 1e-300), f"t = {t:g}", dashed=len(curves) > 0))
    s0, s1 = rows[0]["slope"], rows[1]["slope"]
    slope_rel = abs(s1 - s0) / abs(s0) if s0 and math.isfinite(s0) and math.isfinite(s1) else math.nan
    ds = rows[1]["s_hat"] - rows[0]["s_hat"]
    slope_ok = math.isfinite(slope_rel) and slope_rel <= chk["slope_tol"]
    front_ok = all(math.isfinite(r["front_r"]) for r in rows) and math.isfinite(ds) and abs(ds) <= chk["s_tol"]
    out.text(
        f"{chk['name']}_decay.svg",
        line_chart(curves, f"{sc.name}: boundary-mode energy", "log(1 + mu)", "energy", logy=True),
    )
    metrics = {
        "rows": rows,
        "slope_rel_diff": slope_rel,
        "slope_tol": chk["slope_tol"],
        "s_hat_diff": ds,
        "s_tol": chk["s_tol"],
        "slope_ok": slope_ok,
        "front_ok": front_ok,
    }
    return CheckResult(chk["name"], "conormal", bool(slope_ok and front_ok), metrics, "slope_rel_diff")


def weyl_fit(rho: float, R: float, lam_min: float, lam_max: float, points: int, M: int):
    """Quadratic fit of the eigenvalue count on the cone over a circle of length ``rho``.

    Returns ``(Lam, counts, coefficients)``; the leading coefficient is to be
    compared with ``area / (4 pi) = rho R^2 / (8 pi)``.
    """
    model = build_cone("circle", rho, R)
    modes = int(math.ceil((lam_max + 10.0) * R * rho / (2 * math.pi)))
    basis = build_basis(model, modes, M)
    Lam = np.linspace(lam_min, lam_max, points)
    counts = np.array([weyl_count(basis, L) for L in Lam], dtype=float)
    return Lam, counts, np.polyfit(Lam, counts, 2)


def _check_weyl(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    sc = ctx.scenario
    if sc.model.kind != "circle":
        raise ScenarioError("the Weyl check is implemented for 2D cones")
    params = chk.get("params") or [sc.model.boundary.rho]
    R = sc.model.R
    M = int(chk.get("M", max(sc.M, int(math.ceil(chk["lam_max"] * R / math.pi)) + 10)))
    rows, series = [], []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rho", "Lam", "count"])
    for rho in params:
        Lam, counts, coef = weyl_fit(rho, R, chk["lam_min"], chk["lam_max"], chk["points"], M)
        target = rho * R * R / (8 * math.pi)
        rows.append({"rho": rho, "leading": coef[0], "linear": coef[1], "constant": coef[2], "target": target,
                     "rel_error": (coef[0] - target) / target})
        for L, n in zip(Lam, counts):
            w.writerow([repr(round(float(rho), 12)), repr(round(float(L), 12)), int(n)])
        series.append(Series(Lam, counts, f"rho = {rho / math.pi:.3g} pi", markers=False))
        series.append(Series(Lam, np.polyval(coef, Lam), "", markers=False, dashed=True, color="#888"))
    out.text(f"{chk['name']}.csv", buf.getvalue())
    out.text(f"{chk['name']}.svg", line_chart(series, f"{sc.name}: eigenvalue counts", "Lam", "N(Lam)"))
    worst = max(abs(r["rel_error"]) for r in rows)
    return CheckResult(chk["name"], "weyl", bool(worst <= chk["tol"]), {"fits": rows, "max_rel_error": worst, "tol": chk["tol"]}, "max_rel_error")


def _check_energy(ctx: _Context, chk: dict, out: _Bundle) -> CheckResult:
    st = ctx.initial
    e0 = st.energy()
    drift = 0.0
    for _ in range(chk["steps"]):
        st = evolve(st, chk["dt"])
        drift = max(drift, abs(st.energy() - e0) / e0)
    return CheckResult(chk["name"], "energy", bool(drift <= chk["tol"]), {"steps": chk["steps"], "dt": chk["dt"], "drift": drift, "tol": chk["tol"]}, "drift")


_CHECKS = {
    "oracle": _check_oracle,
    "scan": _check_scan,
    "nonfocusing": _check_nonfocusing,
    "emission": _check_emission,
    "conormal": _check_conormal,
    "weyl": _check_weyl,
    "energy": _check_energy,
}


# -- run ---------------------------------------------------------------------

def _stage(name: str, fn, *args):
    log.info("stage %s", name)
    try:
        return fn(*args)
    except StageError:
        raise
    except (ConewaveError, ValueError, ArithmeticError, MemoryError, OSError) as exc:
        raise StageError(name, exc) from exc


def run(scenario, out_dir=None, *, write: bool = True) -> RunResult:
    """Run a scenario (object, dict, path or built-in name) into a bundle.

    ``out_dir`` overrides the scenario's ``output`` entry; with neither
    (or ``write=False``) nothing is written to disk.
    """
    sc = _stage("validate", load_scenario, scenario)
    root = None
    if write:
        target = out_dir if out_dir is not None else sc.output
        root = Path(target) if target is not None else None
    bundle = _stage("write", _Bundle, root)
    ctx = _Context(sc)
    if sc.data["type"] != "none":
        _stage("basis", lambda: ctx.basis)
        _stage("initial-data", lambda: ctx.initial)
        for t in sc.times:
            state = _stage("evolve", ctx.state_at, t)
            _stage("snapshot", bundle.snapshot, f"snapshot_t{t:.4f}.npz", state)
    results = []
    for chk in sc.checks:
        res = _stage(f"check:{chk['name']}", _CHECKS[chk["type"]], ctx, chk, bundle)
        log.info("check %s: %s", res.name, "pass" if res.passed else "FAIL")
        results.append(res)
    report = _report(sc, results)
    bundle.text("scenario.json", sc.to_json())
    bundle.text("report.json", dump_json(report))
    files = _stage("write", bundle.manifest, sc)
    return RunResult(sc, results, report, root, files)


def _report(sc: Scenario, results: list[CheckResult]) -> dict:
    doc = {
        "scenario": sc.name,
        "description": sc.description,
        "version": __version__,
        "config_hash": sc.config_hash,
        "model": sc.model.describe(),
        "truncation": {"modes": sc.modes, "M": sc.M},
        "data": sc.data,
        "times": sc.times,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
        "notes": [],
    }
    oracle = [r for r in results if r.type == "oracle"]
    if oracle:
        doc["oracle_pass"] = all(r.passed for r in oracle)
    emission = [r for r in results if r.type == "emission"]
    if emission:
        doc["emission_times"] = emission[0].metrics["events"]
    if any(r.type in ("scan", "nonfocusing") for r in results):
        doc["notes"].append(GAIN_BOUND_NOTE)
    return doc


def oracle_check(scenario, oracle: str, tol: float, *, N: int | None = None, r_max: float | None = None, out_dir=None) -> RunResult:
    """Run only an oracle comparison for ``scenario`` at its last time."""
    sc = _stage("validate", load_scenario, scenario)
    match = oracle.replace(" ", "")
    if match.startswith("ImagesQuotient") and match != "ImagesQuotient":
        inner = match[len("ImagesQuotient"):].strip("():")
        try:
            N = int(inner)
        except ValueError:
            raise StageError("validate", ScenarioError(f"cannot read the image count in {oracle!r}")) from None
        match = "ImagesQuotient"
    raw = dict(sc.raw)
    chk = {"type": "oracle", "name": "oracle", "oracle": match, "tol": tol}
    if N is not None:
        chk["N"] = N
    if r_max is not None:
        chk["r_max"] = r_max
    raw["checks"] = [chk]
    return run(raw, out_dir, write=out_dir is not None)


# -- sweeps ------------------------------------------------------------------

def _scalars(results: list[CheckResult]) -> dict:
    out = {}
    for res in results:
        for key, val in res.metrics.items():
            if isinstance(val, (bool, np.bool_)) or not isinstance(val, (int, float, np.floating, np.integer)):
                continue
            out[f"{res.name}.{key}"] = float(val)
        out[f"{res.name}.passed"] = float(res.passed)
    return out


def _trend(x: np.ndarray, y: np.ndarray) -> str:
    order = np.argsort(x)
    d = np.diff(y[order])
    if np.all(d == 0):
        return "constant"
    if np.all(d >= 0):
        return "increasing"
    if np.all(d <= 0):
        return "decreasing"
    return "mixed"


@dataclass
class SweepResult:
    axis: str
    values: list
    points: list[RunResult]
    table: list[dict]
    fits: dict
    bundle: Path | None = None

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)


def sweep(template, axis: str, values, out_dir=None) -> SweepResult:
    """Run ``template`` once per axis value and fit each scalar metric against the axis.

    Each fit is a straight line in the axis value; ``at_zero`` is its
    intercept (e.g. the ``sigma -> 0`` extrapolation) and ``trend`` says
    whether the metric rises or falls along the axis.
    """
    base = _stage("validate", load_scenario, template)
    root = Path(out_dir) if out_dir is not None else (Path(base.output) if base.output else None)
    points, table = [], []
    xs = []
    for i, v in enumerate(values):
        x = float(int(v)) if axis in ("M", "modes") else parse_number(v)
        raw = set_axis(base.raw, axis, v)
        raw["name"] = f"{base.name}[{axis}={v}]"
        raw.pop("output", None)
        sc = _stage("validate", scenario_from_dict, raw)
        sub = root / f"point_{i:02d}" if root is not None else None
        res = run(sc, sub, write=sub is not None)
        points.append(res)
        xs.append(x)
        table.append({"axis_value": x, "passed": res.passed, **_scalars(res.checks)})
    x = np.array(xs)
    fits = {}
    keys = sorted({k for row in table for k in row if k not in ("axis_value", "passed")})
    for key in keys:
        y = np.array([row.get(key, math.nan) for row in table])
        if not np.all(np.isfinite(y)) or len(set(xs)) < 2:
            continue
        slope, icpt = np.polyfit(x, y, 1)
        fits[key] = {"slope": slope, "at_zero": icpt, "trend": _trend(x, y)}
    result = SweepResult(axis, list(values), points, table, fits, root)
    if root is not None:
        _write_sweep(base, result, root)
    return result


def _write_sweep(base: Scenario, result: SweepResult, root: Path) -> None:
    out = _Bundle(root)
    for i, p in enumerate(result.points):
        for name in p.files:
            out.names.append(f"point_{i:02d}/{name}")
        out.names.append(f"point_{i:02d}/{MANIFEST}")
    keys = sorted({k for row in result.table for k in row})
    keys.remove("axis_value")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis_value"] + keys)
    for row in result.table:
        w.writerow([repr(row["axis_value"])] + [_cell(row.get(k)) for k in keys])
    out.text("sweep.csv", buf.getvalue())
    doc = {
        "template": base.name,
        "config_hash": base.config_hash,
        "version": __version__,
        "axis": result.axis,
        "values": [str(v) for v in result.values],
        "passed": result.passed,
        "points": result.table,
        "fits": result.fits,
    }
    out.text("sweep.json", dump_json(doc))
    x = np.array([row["axis_value"] for row in result.table])
    for chk in result.points[0].checks:
        key = f"{chk.name}.{chk.primary}"
        if key in result.fits:
            y = np.array([row[key] for row in result.table])
            out.text(
                f"sweep_{chk.name}.svg",
                line_chart([Series(x, y, key)], f"{base.name}: {key} against {result.axis}", result.axis, chk.primary),
            )
    out.manifest(base, {"sweep_axis": result.axis})


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float) and not math.isfinite(v):
        return "nan"
    return repr(v)


# -- bundle reports ----------------------------------------------------------

@dataclass
class BundleReport:
    path: Path
    kind: str
    passed: bool
    hashes_ok: bool
    mismatched: list[str]
    summary: dict

    @property
    def ok(self) -> bool:
        return self.passed and self.hashes_ok


def report(bundle) -> BundleReport:
    """Re-read a run or sweep bundle and verify every manifest hash."""
    root = Path(bundle)
    mpath = root / MANIFEST
    if not mpath.exists():
        raise ParameterError(f"{root} has no {MANIFEST}")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    bad = []
    for name, digest in sorted(manifest.get("files", {}).items()):
        f = root / name
        if not f.exists() or sha256_file(f) != digest:
            bad.append(name)
    if (root / "report.json").exists():
        doc = json.loads((root / "report.json").read_text(encoding="utf-8"))
        summary = {
            "scenario": doc["scenario"],
            "config_hash": doc["config_hash"],
            "version": doc["version"],
            "checks": [
                {"name": c["name"], "passed": c["passed"], c["primary"]: c["metrics"].get(c["primary"])} for c in doc["checks"]
            ],
        }
        for key in ("oracle_pass", "emission_times"):
            if key in doc:
                summary[key] = doc[key]
        return BundleReport(root, "run", bool(doc["passed"]), not bad, bad, summary)
    if (root / "sweep.json").exists():
        doc = json.loads((root / "sweep.json").read_text(encoding="utf-8"))
        summary = {"template": doc["template"], "axis": doc["axis"], "values": doc["values"], "fits": doc["fits"]}
        return BundleReport(root, "sweep", bool(doc["passed"]), not bad, bad, summary)
    raise ParameterError(f"{root} holds neither report.json nor sweep.json")
