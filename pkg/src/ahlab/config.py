"""Run configuration: JSON schema, defaults and loading."""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ConfigError

_NUM = {"type": "number"}
_NUMS = {"type": "array", "items": _NUM, "minItems": 1}
_GRID = {
    "oneOf": [
        _NUMS,
        {"type": "object", "additionalProperties": False,
         "required": ["start", "stop", "num"],
         "properties": {"start": _NUM, "stop": _NUM, "num": {"type": "integer", "minimum": 1}}},
    ]
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["geometry", "coupling"],
    "properties": {
        "constants": {"type": "object", "additionalProperties": False,
                      "properties": {"hbar": _NUM, "c": _NUM, "omega": _NUM}},
        "geometry": {"type": "object", "additionalProperties": False,
                     "required": ["x1", "d", "N"],
                     "properties": {"x1": _NUM, "d": _NUM, "N": {"type": "integer"}}},
        "coupling": {"type": "object", "additionalProperties": False, "required": ["n_bar"],
                     "properties": {"n_bar": _NUM}},
        "potential": {"type": "object", "additionalProperties": False,
                      "properties": {"kind": {"enum": ["delta", "square"]}, "width": _NUM}},
        "packet": {"type": "object", "additionalProperties": False,
                   "properties": {"kind": {"enum": ["point", "square", "gaussian"]},
                                  "a": _NUM, "p0": _NUM, "x0": _NUM}},
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "times": _GRID,
                "betas": _NUMS,
                "beta_scales": _NUMS,
                "max_order": {"type": "integer", "minimum": 1, "maximum": 4},
                "N_values": {"type": "array", "items": {"type": "integer", "minimum": 1},
                             "minItems": 1},
                "observable": {"enum": ["decay", "covariance", "mean_energy", "charfunc",
                                        "gaussianity", "border"]},
                "fractions": _NUMS,
                "drop_smallest": {"type": "boolean"},
                "lambdas": _NUMS,
                "snap": {"type": "boolean"},
                "samples": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULT_CONFIG: dict[str, Any] = {
    "constants": {"hbar": 1.0, "c": 1.0, "omega": 1.0},
    "geometry": {"x1": 100.0, "d": 0.1, "N": 1001},
    "coupling": {"n_bar": 4.0},
    "potential": {"kind": "delta", "width": 0.0},
    "packet": {"kind": "point", "x0": 0.0, "p0": 0.0},
    "run": {},
}


def validate(raw: Any) -> dict:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    return raw


def load_config(path: str | Path | None) -> dict:
    """Read and validate a config file; without a path the built-in default is used."""
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return validate(raw)
