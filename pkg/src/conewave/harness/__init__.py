"""Scenario files, oracle comparisons, bundles and sweeps."""

from __future__ import annotations

from .oracles import ORACLE_NAMES, OracleSpec, free_plane_profile, free_space_3d_radial, oracle_compare, oracle_field
from .runner import (
    BundleReport,
    CheckResult,
    RunResult,
    StageError,
    SweepResult,
    make_initial_state,
    oracle_check,
    report,
    run,
    sweep,
    weyl_fit,
)
from .scenario import (
    BUILTINS,
    SCHEMA,
    Scenario,
    ScenarioError,
    builtin_names,
    load_scenario,
    parse_number,
    scenario_from_dict,
    schema_json,
)

__all__ = [
    "BUILTINS",
    "BundleReport",
    "CheckResult",
    "ORACLE_NAMES",
    "OracleSpec",
    "RunResult",
    "SCHEMA",
    "Scenario",
    "ScenarioError",
    "StageError",
    "SweepResult",
    "builtin_names",
    "free_plane_profile",
    "free_space_3d_radial",
    "load_scenario",
    "make_initial_state",
    "oracle_check",
    "oracle_compare",
    "oracle_field",
    "parse_number",
    "report",
    "run",
    "scenario_from_dict",
    "schema_json",
    "sweep",
    "weyl_fit",
]
