"""Experiment configuration: schema validation and exact parsing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigInvalid
from ..projmap import Lift, lift_from_json
from ..valfield import parse_rational
from .presets import PRESETS, preset_map

COMMON_KEYS = {"command", "map", "preset", "p", "seed", "out", "csv", "timing", "precision"}

COMMANDS = {
    "green-eval": ({"point", "n_max"}, {"C"}),
    "crucial-measure": ({"n"}, {"route"}),
    "equidist": ({"graph", "f", "n_max"}, {"reference", "C", "n_min"}),
    "barycenter": ({"measure"}, {"e"}),
    "minresloc": ({"n"}, set()),
    "containment": ({"bary", "eps", "n_max"}, {"n_min"}),
    "verify": ({"suite"}, {"trials"}),
}

NEEDS_MAP = {"green-eval", "crucial-measure", "equidist", "minresloc", "containment"}
ROUTES = {"laplacian", "weights", "both"}
SUITES = {"metric", "resfunc", "crucial", "all"}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description; ``params`` holds command-specific fields."""

    command: str
    params: dict
    map_spec: Any = None
    preset: Optional[str] = None
    p: int = 3
    seed: int = 0
    out: Optional[str] = None
    csv: Optional[str] = None
    timing: bool = False
    precision: int = 12
    raw: dict = field(default_factory=dict, compare=False)

    def lift(self) -> Lift:
        if self.preset is not None:
            return preset_map(self.preset, self.p)
        if self.map_spec is None:
            raise ConfigInvalid(f"command {self.command!r} needs a map or a preset")
        return lift_from_json(self.map_spec)

    def echo(self) -> dict:
        """The configuration as given, minus output-only fields."""
        return {k: v for k, v in sorted(self.raw.items()) if k not in ("out", "csv", "timing")}


def _positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigInvalid(f"{name} must be a positive integer, got {value!r}")
    return value


def _rational(value, name: str) -> Fraction:
    try:
        return parse_rational(value if not isinstance(value, float) else str(value))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigInvalid(f"{name} is not an exact rational: {value!r}") from exc


def _load_json_field(value, name: str):
    """Accept inline JSON data or a path to a JSON file."""
    if isinstance(value, (dict, list)):
        return value
    if isinstance(value, str):
        path = Path(value)
        if path.is_file():
            try:
                return json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigInvalid(f"{name}: {path} is not valid JSON") from exc
    raise ConfigInvalid(f"{name} must be JSON data or a path to a JSON file, got {value!r}")


def validate_config(data: dict) -> ExperimentConfig:
    """Check ``data`` against the schema of its command and parse it exactly."""
    if not isinstance(data, dict):
        raise ConfigInvalid("configuration must be a JSON object")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigInvalid(f"unknown command {command!r}; choose from {sorted(COMMANDS)}")
    required, optional = COMMANDS[command]
    unknown = set(data) - COMMON_KEYS - required - optional
    if unknown:
        raise ConfigInvalid(f"unknown fields for {command}: {sorted(unknown)}")
    missing = {k for k in required if data.get(k) is None}
    if missing:
        raise ConfigInvalid(f"missing fields for {command}: {sorted(missing)}")

    p = data.get("p", 3)
    if isinstance(p, bool) or not isinstance(p, int):
        raise ConfigInvalid(f"p must be an integer, got {p!r}")
    preset = data.get("preset")
    map_spec = data.get("map")
    if isinstance(map_spec, str) and map_spec.startswith("preset:"):
        preset, map_spec = map_spec.split(":", 1)[1], None
    if preset is not None and preset not in PRESETS:
        raise ConfigInvalid(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    if map_spec is not None:
        map_spec = _load_json_field(map_spec, "map")
    if command in NEEDS_MAP and preset is None and map_spec is None:
        raise ConfigInvalid(f"{command} needs --map or --preset")
    if preset is not None and map_spec is not None:
        raise ConfigInvalid("give either a map or a preset, not both")

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigInvalid(f"seed must be an integer, got {seed!r}")
    precision = data.get("precision", 12)
    if isinstance(precision, bool) or not isinstance(precision, int) or not 1 <= precision <= 100:
        raise ConfigInvalid(f"precision must be an integer in 1..100, got {precision!r}")

    params = {}
    for key in ("n", "n_max", "trials", "e"):
        if key in data and data[key] is not None:
            params[key] = _positive_int(data[key], key)
    if "n_min" in data and data["n_min"] is not None:
        params["n_min"] = _positive_int(data["n_min"], "n_min")
    for key in ("C", "eps"):
        if data.get(key) is not None:
            params[key] = _rational(data[key], key)
            if params[key] <= 0 and key == "C":
                raise ConfigInvalid("C must be positive")
            if params[key] < 0:
                raise ConfigInvalid(f"{key} must be nonnegative")
    for key in ("point", "bary"):
        if key in data:
            if not isinstance(data[key], str):
                raise ConfigInvalid(f"{key} must be a point literal string")
            params[key] = data[key]
    if command == "crucial-measure":
        route = data.get("route", "laplacian")
        if route not in ROUTES:
            raise ConfigInvalid(f"route must be one of {sorted(ROUTES)}")
        params["route"] = route
    if command == "verify":
        if data["suite"] not in SUITES:
            raise ConfigInvalid(f"suite must be one of {sorted(SUITES)}")
        params["suite"] = data["suite"]
        params.setdefault("trials", 20)
    if command == "equidist":
        params["graph"] = _load_json_field(data["graph"], "graph")
        params["f"] = _load_json_field(data["f"], "f")
        reference = data.get("reference")
        if isinstance(reference, str) and reference not in ("haar", "gauss"):
            reference = _load_json_field(reference, "reference")
        params["reference"] = reference
    if command == "barycenter":
        params["measure"] = _load_json_field(data["measure"], "measure")

    return ExperimentConfig(
        command=command,
        params=params,
        map_spec=map_spec,
        preset=preset,
        p=p,
        seed=seed,
        out=data.get("out"),
        csv=data.get("csv"),
        timing=bool(data.get("timing", False)),
        precision=precision,
        raw=dict(data),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read configuration {path}: {exc}") from exc
    return validate_config(data)
