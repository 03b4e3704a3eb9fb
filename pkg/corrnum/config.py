"""Run configuration.

JSON documents validated against `RUN_CONFIG_SCHEMA` before any computation,
then frozen into a `RunConfig`. Command line flags override keys one for one.
"""

import dataclasses
import json
import math
from typing import Any, Dict, List, Mapping, Optional, Tuple

import jsonschema
import jsonschema.exceptions
import numpy as np

from .errors import *
from .freegroup import DEFAULT_MAX_CLASSES
from .growth import WindowPolicy
from .representation import LengthFunctional, Representation, load_representation
from .utils import sha256_text

__all__ = [
    "RUN_CONFIG_SCHEMA",
    "RunConfig",
    "load_config",
    "validate_config",
    "parameter_hash",
    "grid_values",
]

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_GRID = {
    "anyOf": [
        {"type": "array", "items": _NUMBER, "minItems": 1},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["points", "lo", "hi"],
            "properties": {"points": {"type": "integer", "minimum": 2}, "lo": _NUMBER, "hi": _NUMBER},
        },
    ]
}

_FUNCTIONAL = {
    "anyOf": [
        {"type": "string", "pattern": "^(H|a[1-9][0-9]*)$"},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["coefficients"],
            "properties": {
                "coefficients": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "scale": _POSITIVE,
            },
        },
    ]
}

RUN_CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "corrnum run configuration",
    "type": "object",
    "additionalProperties": False,
    "definitions": {
        "representation": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dimension", "generators"],
                    "properties": {
                        "type": {"const": "inline"},
                        "label": {"type": "string", "minLength": 1},
                        "dimension": {"type": "integer", "minimum": 2},
                        "rank": {"type": "integer", "minimum": 2},
                        "eig_tolerance": _POSITIVE,
                        "generators": {
                            "type": "array",
                            "minItems": 2,
                            "items": {
                                "type": "array",
                                "items": {"anyOf": [_NUMBER, {"type": "array", "items": _NUMBER}]},
                            },
                        },
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "la", "lb", "angle"],
                    "properties": {
                        "type": {"const": "schottky"},
                        "label": {"type": "string", "minLength": 1},
                        "la": _POSITIVE,
                        "lb": _POSITIVE,
                        "angle": _POSITIVE,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "base", "d"],
                    "properties": {
                        "type": {"const": "sym_power"},
                        "label": {"type": "string", "minLength": 1},
                        "base": {"$ref": "#/definitions/representation"},
                        "d": {"type": "integer", "minimum": 3},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "base"],
                    "properties": {
                        "type": {"const": "contragredient"},
                        "label": {"type": "string", "minLength": 1},
                        "base": {"$ref": "#/definitions/representation"},
                    },
                },
            ]
        }
    },
    "properties": {
        "representations": {"type": "array", "items": {"$ref": "#/definitions/representation"}, "minItems": 1},
        "functionals": {"anyOf": [_FUNCTIONAL, {"type": "array", "items": _FUNCTIONAL, "minItems": 1}]},
        "pair": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "rank": {"type": "integer", "minimum": 2},
        "n_max": {"type": "integer", "minimum": 1},
        "include_powers": {"type": "boolean"},
        "b_grid": _GRID,
        "epsilon": _POSITIVE,
        "x_grid": _GRID,
        "window": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lo": {"type": "number", "minimum": 0},
                "hi": {"type": "number", "exclusiveMinimum": 0},
                "shells": {"type": "integer", "minimum": 3},
                "min_items": {"type": "integer", "minimum": 1},
            },
        },
        "renormalized": {"type": "boolean"},
        "output": {"type": "string", "minLength": 1},
        "threads": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "force": {"type": "boolean"},
        "max_classes": {"type": "integer", "minimum": 1},
        "pilot_n": {"type": "integer", "minimum": 1},
        "demo": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilons": {"type": "array", "items": _POSITIVE, "minItems": 2},
                "K": _POSITIVE,
                "angle": _POSITIVE,
                "n_max": {"type": "integer", "minimum": 2},
            },
        },
    },
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated run configuration, see `RUN_CONFIG_SCHEMA` for the keys."""

    representations: Tuple[Mapping[str, Any], ...] = ()
    functionals: Any = "a1"
    pair: Tuple[int, int] = (0, 1)
    rank: int = 2
    n_max: int = 12
    include_powers: bool = True
    b_grid: Any = dataclasses.field(default_factory=lambda: {"points": 33, "lo": -0.1, "hi": 1.1})
    epsilon: float = 0.2
    x_grid: Any = dataclasses.field(default_factory=lambda: {"points": 12, "lo": 0.35, "hi": 0.8})
    window: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    renormalized: bool = True
    output: str = "out"
    threads: int = 1
    seed: int = 0
    force: bool = False
    max_classes: int = DEFAULT_MAX_CLASSES
    pilot_n: int = 6
    demo: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Replace keys whose override is not None."""

        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def window_policy(self) -> WindowPolicy:
        return WindowPolicy(**self.window)

    def functional(self, i: int, d: int) -> LengthFunctional:
        f = self.functionals
        if isinstance(f, (list, tuple)):
            if i >= len(f):
                raise ConfigError("functionals", f"no functional for representation {i}")
            f = f[i]
        return LengthFunctional.parse(f, d)

    def build_representations(self) -> List[Representation]:
        if not self.representations:
            raise ConfigError("representations", "at least one representation is required")
        reps = [load_representation(spec) for spec in self.representations]
        labels = [r.label for r in reps]
        return [load_representation(dict(spec, label=f"{rep.label}#{i}")) if labels.count(rep.label) > 1 else rep
                for i, (spec, rep) in enumerate(zip(self.representations, reps))]

    def columns(self) -> List[Tuple[Representation, LengthFunctional]]:
        """One (representation, functional) pair per configured representation."""

        return [(rep, self.functional(i, rep.dimension)) for i, rep in enumerate(self.build_representations())]

    def demo_params(self) -> Dict[str, Any]:
        params = {"epsilons": [1.0, 0.5, 0.25], "K": 6.0, "angle": math.pi / 2, "n_max": 10}
        params.update(self.demo)
        return params


def validate_config(doc: Mapping[str, Any]) -> RunConfig:
    """Validate a configuration document.

    Raises:
        ConfigError: Schema violation, with the offending key path.
    """

    validator = jsonschema.Draft7Validator(RUN_CONFIG_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ConfigError("/".join(str(p) for p in error.absolute_path), error.message)
    window = doc.get("window", {})
    if window.get("lo", 0.5) >= window.get("hi", 0.95):
        raise ConfigError("window", "lo must be below hi")

    values = dict(doc)
    if "representations" in values:
        values["representations"] = tuple(values["representations"])
    if "functionals" in values and isinstance(values["functionals"], list):
        values["functionals"] = tuple(values["functionals"])
    if "pair" in values:
        values["pair"] = tuple(values["pair"])
    return RunConfig(**values)


def load_config(path: Optional[str]) -> RunConfig:
    """Read and validate a JSON configuration file, defaults when `path` is None.

    Raises:
        ConfigError: Unreadable file, invalid JSON or schema violation.
    """

    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise ConfigError(path, e.strerror or str(e)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(path, f"line {e.lineno}: {e.msg}") from e
    return validate_config(doc)


def parameter_hash(config: RunConfig, version: str) -> str:
    """SHA-256 over the canonical JSON of the keys a spectrum depends on."""

    keys = {
        "representations": list(config.representations),
        "functionals": config.functionals,
        "rank": config.rank,
        "n_max": config.n_max,
        "include_powers": config.include_powers,
        "pilot_n": config.pilot_n,
        "seed": config.seed,
        "force": config.force,
        "version": version,
    }
    return sha256_text([json.dumps(keys, sort_keys=True, separators=(",", ":"))])


def grid_values(spec: Any, unit: float) -> np.ndarray:
    """Explicit list as is, or ``{points, lo, hi}`` scaled by `unit`."""

    if isinstance(spec, Mapping):
        return np.linspace(spec["lo"] * unit, spec["hi"] * unit, spec["points"])
    return np.asarray(spec, dtype=float)
