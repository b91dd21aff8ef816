"""Scenario files: JSON experiments with a published schema.

A scenario names a cone, initial data, observation times and a list of
checks.  Numbers may be written as arithmetic in ``pi`` (``"3*pi/2"``) so
files stay readable.  Validation happens in two passes: the JSON schema
(structure and types), then semantic checks such as the wall-shadow
condition for every time the run will visit.
"""

from __future__ import annotations

import ast
import copy
import hashlib
import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .. import __version__
from ..errors import ParameterError
from ..geometry import ConeModel, build_cone
from ..propagator import TAIL_WIDTHS

_NUM = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^[0-9eE.+\-*/() pi]+$"}]}
_NUM_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}

CHECK_TYPES = ("oracle", "scan", "nonfocusing", "emission", "conormal", "weyl", "energy")

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "conewave scenario",
    "type": "object",
    "required": ["name", "model", "data"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["kind", "R"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["circle", "sphere"]},
                "rho": _NUM,
                "c": _NUM,
                "R": _NUM,
            },
        },
        "truncation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "modes": {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "auto"}]},
                "M": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}]},
            },
        },
        "data": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["point_pole", "conormal_ring", "radial_gaussian", "none"]},
                "xbar": _NUM,
                "p": _NUM,
                "sigma": _NUM,
                "r0": _NUM,
                "exponent": _NUM,
                "cutoff": _NUM,
                "component": {"enum": ["u", "ut"]},
                "width": _NUM,
                "angular": {
                    "oneOf": [
                        {"type": "null"},
                        {
                            "type": "object",
                            "required": ["kind"],
                            "additionalProperties": False,
                            "properties": {
                                "kind": {"enum": ["constant", "von_mises"]},
                                "kappa": _NUM,
                                "center": _NUM,
                            },
                        },
                    ]
                },
            },
            "additionalProperties": False,
        },
        "times": {"type": "array", "items": _NUM},
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window": _NUM,
                "shells": {"type": "integer", "minimum": 2},
                "threshold": _NUM,
                "match": _NUM,
            },
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type"],
                "properties": {"type": {"enum": list(CHECK_TYPES)}, "name": {"type": "string"}},
            },
        },
        "output": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

CHECK_SCHEMAS = {
    "oracle": {
        "properties": {
            "oracle": {"enum": ["FreePlane2D", "FreeSpace3DRadial", "ImagesQuotient"]},
            "N": {"type": "integer", "minimum": 1},
            "time": _NUM,
            "r_max": _NUM,
            "tol": _NUM,
        },
        "required": ["oracle"],
    },
    "scan": {
        "properties": {
            "time": _NUM,
            "angles": {
                "oneOf": [
                    _NUM_LIST,
                    {
                        "type": "object",
                        "properties": {
                            "count": {"type": "integer", "minimum": 2},
                            "start": _NUM,
                            "stop": _NUM,
                            "random": {"type": "boolean"},
                        },
                        "required": ["count"],
                        "additionalProperties": False,
                    },
                ]
            },
            "t_bar": _NUM,
            "smoothing": _NUM,
            "expect_min_angle": _NUM,
            "angle_tol": _NUM,
            "contrast": {
                "type": "object",
                "properties": {"angles": _NUM_LIST, "reference": _NUM, "min_gap": _NUM},
                "required": ["angles", "reference", "min_gap"],
                "additionalProperties": False,
            },
        },
        "required": ["time", "angles"],
    },
    "nonfocusing": {
        "properties": {"times": _NUM_LIST, "k": _NUM, "ell": _NUM, "angle": _NUM, "t_bar": _NUM},
        "required": ["times", "k", "ell"],
    },
    "emission": {
        "properties": {
            "annulus": _NUM_PAIR,
            "t_end": _NUM,
            "dt": _NUM,
            "threshold": _NUM,
            "expect": {"type": "array", "items": _NUM},
            "tol": _NUM,
            "quiet_before": _NUM,
        },
        "required": ["annulus", "t_end", "dt", "threshold"],
    },
    "conormal": {
        "properties": {"times": _NUM_PAIR, "angle": _NUM, "slope_tol": _NUM, "s_tol": _NUM},
        "required": ["times"],
    },
    "weyl": {
        "properties": {
            "params": _NUM_LIST,
            "lam_min": _NUM,
            "lam_max": _NUM,
            "points": {"type": "integer", "minimum": 5},
            "tol": _NUM,
            "M": {"type": "integer", "minimum": 1},
        },
    },
    "energy": {
        "properties": {"steps": {"type": "integer", "minimum": 1}, "dt": _NUM, "tol": _NUM},
    },
}


class ScenarioError(ParameterError):
    """A scenario file is malformed or describes an invalid run."""


# -- numbers -----------------------------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(value) -> float:
    """Number or arithmetic string in ``pi`` (``"pi/2"``, ``"1.5*pi"``)."""
    if isinstance(value, bool):
        raise ScenarioError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioError(f"expected a number, got {value!r}")
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(f"cannot parse number {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ScenarioError(f"unsupported expression in {value!r}")

    try:
        out = ev(tree)
    except ZeroDivisionError as exc:
        raise ScenarioError(f"division by zero in {value!r}") from exc
    if not math.isfinite(out):
        raise ScenarioError(f"{value!r} is not finite")
    return out


def _numbers(values) -> list[float]:
    return [parse_number(v) for v in values]


# -- scenario ----------------------------------------------------------------

@dataclass
class Scenario:
    """A validated experiment description.

    ``raw`` keeps the file contents as written; the typed fields hold the
    parsed values used by the runner.
    """

    name: str
    model: ConeModel
    data: dict
    times: list[float]
    modes: int
    M: int
    diagnostics: dict
    checks: list[dict]
    output: str | None
    seed: int
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the scenario."""
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    @property
    def sigma(self) -> float:
        return float(self.data.get("sigma", 0.0))

    @property
    def support(self) -> float | None:
        return data_support(self.data)

    def visited_times(self) -> list[float]:
        """Every time the run will evaluate, for the wall-shadow pre-check."""
        ts = list(self.times)
        for chk in self.checks:
            kind = chk["type"]
            if kind in ("oracle", "scan"):
                ts.append(chk.get("time", self.times[-1] if self.times else 0.0))
            elif kind in ("nonfocusing", "conormal"):
                ts.extend(chk["times"])
            elif kind == "emission":
                ts.append(chk["t_end"])
            elif kind == "energy":
                ts.append(chk["steps"] * chk["dt"])
        return ts


def data_support(data: dict) -> float | None:
    kind = data["type"]
    if kind == "point_pole":
        return data["xbar"] + TAIL_WIDTHS * data["sigma"]
    if kind == "conormal_ring":
        return data["r0"] + data["cutoff"] + TAIL_WIDTHS * data.get("sigma", 0.0)
    if kind == "radial_gaussian":
        return 8.0 * data["width"]
    return None


def auto_truncation(model: ConeModel, data: dict) -> tuple[int, int]:
    """Angular and radial truncation resolving the data's spectral content.

    The Gaussian factor ``exp(-lam^2 s^2 / 2)`` is below ``1e-9`` once
    ``lam > 6.5 / s``; radial indices follow from ``j_{nu,m} ~ pi m`` and
    the angular ones from ``nu <~ lam * radius``.
    """
    kind = data["type"]
    if kind == "point_pole":
        scale, radius = data["sigma"], data["xbar"]
    elif kind == "conormal_ring":
        scale, radius = data.get("sigma", 0.0), None
    elif kind == "radial_gaussian":
        scale, radius = data["width"], 0.0
    else:
        raise ScenarioError("'auto' truncation needs initial data; give modes and M explicitly")
    if not scale > 0:
        raise ScenarioError("'auto' truncation needs mollified data (sigma > 0)")
    lam_max = 6.5 / scale
    M = int(math.ceil(lam_max * model.R / math.pi)) + 10
    if radius is None:
        # smooth angular profile: a fixed handful of boundary modes suffices
        modes = 32
    elif model.kind == "circle":
        modes = int(math.ceil(lam_max * radius * model.boundary.rho / (2 * math.pi))) + 10
    else:
        modes = int(math.ceil(lam_max * radius * model.boundary.c)) + 10
    return modes, M


def _fill_check(chk: dict, scenario_times: list[float], data: dict) -> dict:
    kind = chk["type"]
    out = dict(chk)
    out.setdefault("name", kind)
    num_keys = {
        "oracle": ("time", "r_max", "tol"),
        "scan": ("time", "t_bar", "smoothing", "expect_min_angle", "angle_tol"),
        "nonfocusing": ("k", "ell", "angle", "t_bar"),
        "emission": ("t_end", "dt", "threshold", "tol", "quiet_before"),
        "conormal": ("angle", "slope_tol", "s_tol"),
        "weyl": ("lam_min", "lam_max", "tol"),
        "energy": ("dt", "tol"),
    }[kind]
    for key in num_keys:
        if key in out:
            out[key] = parse_number(out[key])
    for key in ("times", "annulus", "expect", "params"):
        if key in out:
            out[key] = _numbers(out[key])
    if kind == "scan":
        ang = out["angles"]
        if isinstance(ang, dict):
            ang = dict(ang)
            ang["start"] = parse_number(ang.get("start", 0.0))
            ang["stop"] = parse_number(ang.get("stop", "pi"))
        else:
            ang = _numbers(ang)
        out["angles"] = ang
        if "contrast" in out:
            c = out["contrast"]
            out["contrast"] = {
                "angles": _numbers(c["angles"]),
                "reference": parse_number(c["reference"]),
                "min_gap": parse_number(c["min_gap"]),
            }
    # defaults
    last = scenario_times[-1] if scenario_times else 0.0
    if kind == "oracle":
        out.setdefault("time", last)
        out.setdefault("r_max", 0.9)
        out.setdefault("tol", 1e-3)
    elif kind in ("scan", "nonfocusing"):
        if "t_bar" not in out:
            if data["type"] == "point_pole":
                out["t_bar"] = data["xbar"]
            elif data["type"] == "conormal_ring":
                out["t_bar"] = data["r0"]
            else:
                raise ScenarioError(f"check {out['name']!r} needs t_bar for this data type")
        if kind == "nonfocusing":
            out.setdefault("angle", 0.0)
    elif kind == "emission":
        out.setdefault("expect", [])
        out.setdefault("tol", 0.03)
    elif kind == "conormal":
        out.setdefault("angle", 0.0)
        out.setdefault("slope_tol", 0.1)
        out.setdefault("s_tol", 0.1)
    elif kind == "weyl":
        out.setdefault("lam_min", 20.0)
        out.setdefault("lam_max", 60.0)
        out.setdefault("points", 161)
        out.setdefault("tol", 0.05)
    elif kind == "energy":
        out.setdefault("steps", 100)
        out.setdefault("dt", 0.004)
        out.setdefault("tol", 1e-12)
    return out


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate ``raw`` against the schema and the run preconditions."""
    raw = copy.deepcopy(raw)
    try:
        jsonschema.validate(raw, SCHEMA)
        for chk in raw.get("checks", []):
            sub = {"type": "object", **CHECK_SCHEMAS[chk["type"]]}
            sub["properties"] = {**sub["properties"], "type": {"const": chk["type"]}, "name": {"type": "string"}}
            sub["additionalProperties"] = False
            jsonschema.validate(chk, sub)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"scenario schema violation at {where}: {exc.message}") from exc

    m = raw["model"]
    key = "rho" if m["kind"] == "circle" else "c"
    if key not in m:
        raise ScenarioError(f"model of kind {m['kind']!r} needs {key!r}")
    model = build_cone(m["kind"], parse_number(m[key]), parse_number(m["R"]))

    data = {k: (v if k in ("type", "component", "angular") else parse_number(v)) for k, v in raw["data"].items()}
    if isinstance(data.get("angular"), dict):
        data["angular"] = {k: (v if k == "kind" else parse_number(v)) for k, v in data["angular"].items()}
    _check_data(model, data)

    times = _numbers(raw.get("times", []))
    checks = [_fill_check(c, times, data) for c in raw.get("checks", [])]
    names = [c["name"] for c in checks]
    if len(set(names)) != len(names):
        raise ScenarioError("check names must be unique")

    trunc = raw.get("truncation", {})
    modes, M = trunc.get("modes", "auto"), trunc.get("M", "auto")
    if "auto" in (modes, M):
        auto_modes, auto_M = auto_truncation(model, data)
        modes = auto_modes if modes == "auto" else modes
        M = auto_M if M == "auto" else M

    sc = Scenario(
        name=raw["name"],
        model=model,
        data=data,
        times=times,
        modes=int(modes),
        M=int(M),
        diagnostics={k: parse_number(v) if k != "shells" else int(v) for k, v in raw.get("diagnostics", {}).items()},
        checks=checks,
        output=raw.get("output"),
        seed=int(raw.get("seed", 0)),
        description=raw.get("description", ""),
        raw=raw,
    )
    _check_shadow(sc)
    return sc


def _check_data(model: ConeModel, data: dict) -> None:
    kind = data["type"]
    need = {
        "point_pole": ("xbar", "sigma"),
        "conormal_ring": ("r0",),
        "radial_gaussian": ("width",),
        "none": (),
    }[kind]
    missing = [k for k in need if k not in data]
    if missing:
        raise ScenarioError(f"{kind} data needs {', '.join(missing)}")
    if kind == "point_pole":
        data.setdefault("p", 0.0)
        if model.kind == "sphere" and min(abs(data["p"]), abs(data["p"] - math.pi)) > 1e-12:
            raise ScenarioError("3D poles must sit on the symmetry axis (p = 0 or pi)")
        if not 0 < data["xbar"] < model.R:
            raise ScenarioError("pole radius must lie in (0, R)")
        if not data["sigma"] > 0:
            raise ScenarioError("sigma must be positive")
    elif kind == "conormal_ring":
        data.setdefault("exponent", 0.5)
        data.setdefault("cutoff", 0.12)
        data.setdefault("sigma", 0.0)
        data.setdefault("component", "u")
        data.setdefault("angular", None)
    elif kind == "radial_gaussian":
        data.setdefault("component", "ut")
        if not data["width"] > 0:
            raise ScenarioError("Gaussian width must be positive")


def _check_shadow(sc: Scenario) -> None:
    support = sc.support
    if support is None:
        return
    for t in sc.visited_times():
        if support + abs(t) > sc.model.R + 1e-12:
            raise ScenarioError(
                f"time {t:.4g} violates the wall-shadow condition: support {support:.4g} + |t| > R = {sc.model.R:.4g}"
            )


def load_scenario(source) -> Scenario:
    """Scenario from a JSON path, a dict, or the name of a built-in."""
    if isinstance(source, Scenario):
        return source
    if isinstance(source, dict):
        return scenario_from_dict(source)
    text = str(source)
    if text in BUILTINS:
        return scenario_from_dict(BUILTINS[text])
    path = Path(text)
    if not path.exists():
        raise ScenarioError(f"no scenario file or built-in named {text!r}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return scenario_from_dict(raw)


def set_axis(raw: dict, axis: str, value) -> dict:
    """Copy of ``raw`` with one sweep axis set to ``value``.

    Short names: ``sigma`` (data), ``M`` and ``modes`` (truncation), ``k``
    (every nonfocusing check), ``rho``/``c``/``param`` (cone).  Anything
    else is a dotted path such as ``data.xbar`` or ``checks.0.tol``.
    """
    out = copy.deepcopy(raw)
    if axis == "sigma":
        out["data"]["sigma"] = value
    elif axis in ("M", "modes"):
        out.setdefault("truncation", {})[axis] = int(value)
    elif axis == "k":
        hits = [c for c in out.get("checks", []) if c["type"] == "nonfocusing"]
        if not hits:
            raise ScenarioError("axis 'k' needs a nonfocusing check")
        for c in hits:
            c["k"] = value
    elif axis in ("rho", "c", "param"):
        key = "rho" if out["model"]["kind"] == "circle" else "c"
        out["model"][key] = value
    else:
        node = out
        parts = axis.split(".")
        try:
            for part in parts[:-1]:
                node = node[int(part)] if isinstance(node, list) else node[part]
            last = parts[-1]
            if isinstance(node, list):
                node[int(last)] = value
            else:
                node[last] = value
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ScenarioError(f"cannot set sweep axis {axis!r}") from exc
    return out


def scan_angles(spec, seed: int) -> np.ndarray:
    """Angles for a scan: an explicit list, a uniform grid, or seeded random draws."""
    if isinstance(spec, list):
        return np.array(_numbers(spec))
    count = spec["count"]
    start, stop = parse_number(spec.get("start", 0)), parse_number(spec.get("stop", "pi"))
    if spec.get("random"):
        rng = np.random.default_rng(seed)
        return np.sort(rng.uniform(start, stop, count))
    return np.linspace(start, stop, count)


# -- built-in scenarios ------------------------------------------------------

BUILTINS: dict[str, dict] = {
    "oracle-trivial": {
        "name": "oracle-trivial",
        "description": "Flat plane (rho = 2 pi): mollified pole against the free-space kernel.",
        "model": {"kind": "circle", "rho": "2*pi", "R": 1.0},
        "data": {"type": "point_pole", "xbar": 0.3, "p": 0.0, "sigma": 0.01},
        "times": [0.5],
        "checks": [
            {"type": "oracle", "oracle": "FreePlane2D", "r_max": 0.9, "tol": 1e-3},
            {"type": "energy", "steps": 100, "dt": 0.005, "tol": 1e-12},
        ],
    },
    "oracle-images": {
        "name": "oracle-images",
        "description": "Wedge quotient rho = pi against the two-image sum.",
        "model": {"kind": "circle", "rho": "pi", "R": 1.0},
        "data": {"type": "point_pole", "xbar": 0.3, "p": 0.1, "sigma": 0.01},
        "times": [0.5],
        "checks": [{"type": "oracle", "oracle": "ImagesQuotient", "r_max": 0.9, "tol": 1e-3}],
    },
    "oracle-trivial-3d": {
        "name": "oracle-trivial-3d",
        "description": "Flat 3-space (c = 1): radial Gaussian velocity against spherical means.",
        "model": {"kind": "sphere", "c": 1.0, "R": 1.0},
        "data": {"type": "radial_gaussian", "width": 0.05, "component": "ut"},
        "truncation": {"modes": 0, "M": 120},
        "times": [0.2, 0.4],
        "checks": [
            {"type": "oracle", "name": "oracle-t0.2", "oracle": "FreeSpace3DRadial", "time": 0.2, "r_max": 0.9, "tol": 1e-3},
            {"type": "oracle", "name": "oracle-t0.4", "oracle": "FreeSpace3DRadial", "time": 0.4, "r_max": 0.9, "tol": 1e-3},
        ],
    },
    "diffractive-2d": {
        "name": "diffractive-2d",
        "description": "Cone of angle 1.5 pi: the only tip emission happens when the pole's front hits the tip.",
        "model": {"kind": "circle", "rho": "1.5*pi", "R": 1.0},
        "data": {"type": "point_pole", "xbar": 0.25, "p": 0.0, "sigma": 0.01},
        "times": [0.45],
        "checks": [
            {
                "type": "emission",
                "annulus": [0.02, 0.05],
                "t_end": 0.45,
                "dt": 0.005,
                "threshold": 2e-3,
                "expect": [0.25],
                "tol": 0.03,
                "quiet_before": 0.2,
            }
        ],
    },
    "geometric-3d": {
        "name": "geometric-3d",
        "description": "Cone over the sphere of radius 2: the diffracted front is strongest on the circle at boundary distance pi from the pole.",
        "model": {"kind": "sphere", "c": 2.0, "R": 1.0},
        "data": {"type": "point_pole", "xbar": 0.25, "p": 0.0, "sigma": 0.01},
        "times": [0.45],
        "checks": [
            {
                "type": "scan",
                "time": 0.45,
                "angles": {"count": 9, "start": 0, "stop": "pi"},
                "expect_min_angle": "pi/2",
                "angle_tol": "pi/8",
                "contrast": {"angles": [0, "pi"], "reference": "pi/2", "min_gap": 0.3},
            },
            {"type": "nonfocusing", "times": [0.05, 0.1], "k": 2, "ell": 0.5, "angle": 0},
        ],
    },
    "conormal-ring": {
        "name": "conormal-ring",
        "description": "Ring data conormal to r = 0.3 on the cone rho = 1.5 pi, before and after tip passage.",
        "model": {"kind": "circle", "rho": "1.5*pi", "R": 1.0},
        "data": {
            "type": "conormal_ring",
            "r0": 0.3,
            "exponent": 0.5,
            "cutoff": 0.12,
            "sigma": 0.01,
            "component": "u",
            "angular": {"kind": "von_mises", "kappa": 1.0, "center": 0.0},
        },
        "truncation": {"modes": 24, "M": "auto"},
        "times": [0.0, 0.5],
        "checks": [{"type": "conormal", "times": [0.0, 0.5], "angle": 0, "slope_tol": 0.1, "s_tol": 0.1}],
    },
    "weyl-2d": {
        "name": "weyl-2d",
        "description": "Eigenvalue counts of the truncated 2D cones against the area term.",
        "model": {"kind": "circle", "rho": "pi", "R": 1.0},
        "data": {"type": "none"},
        "truncation": {"modes": 35, "M": 30},
        "checks": [{"type": "weyl", "params": ["pi", "2*pi", "1.5*pi"], "lam_min": 20, "lam_max": 60, "points": 161, "tol": 0.05}],
    },
}


def builtin_names() -> list[str]:
    return sorted(BUILTINS)


def schema_json() -> str:
    """The published scenario schema, including the per-check schemas."""
    doc = copy.deepcopy(SCHEMA)
    doc["$defs"] = {f"check_{k}": v for k, v in CHECK_SCHEMAS.items()}
    doc["version"] = __version__
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
