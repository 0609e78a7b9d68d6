"""Run configuration: JSON schema, defaults, parsing into model objects, hashing."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .cocycle_core import DEFAULT_LAMBDAS
from .errors import CocycleError, ConfigError
from .symbol_model import (
    ClassicalSymbolModel,
    ConstantAngular,
    ConstantWeight,
    CosineWeight,
    CutoffProfile,
    HomogeneousLayer,
    PairAngular,
    TrigAngular,
    torus_grid,
)

_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}
_positive = {"type": "number", "exclusiveMinimum": 0}


def _obj(props: dict, required: tuple = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


ANGULAR_SCHEMA = {
    "oneOf": [
        _obj({"const": _complex}, ("const",)),
        _obj({"pair": {"type": "array", "items": _complex, "minItems": 2, "maxItems": 2}}, ("pair",)),
        _obj({"trig": _obj({"cos": {"type": "array", "items": _number},
                            "sin": {"type": "array", "items": _number}})}, ("trig",)),
        _obj({"preset": {"enum": ["unit", "cos", "sign"]}}, ("preset",)),
    ]
}

SPATIAL_SCHEMA = {
    "oneOf": [
        _obj({"const": _complex}, ("const",)),
        _obj({"cosine": _number}, ("cosine",)),
    ]
}

SCHEMA = _obj(
    {
        "dimension": {"enum": [1, 2, 3]},
        "order": _complex,
        "layers": {
            "type": "array",
            "minItems": 1,
            "items": _obj(
                {"j": {"type": "integer", "minimum": 0}, "angular": ANGULAR_SCHEMA, "spatial": SPATIAL_SCHEMA},
                ("j",),
            ),
        },
        "cutoff": _obj(
            {
                "profile": {"enum": ["piecewise-linear", "smoothstep"]},
                "r0": _positive,
                "rho": _positive,
                "degree": {"type": "integer", "minimum": 1},
            }
        ),
        "grids": _obj(
            {
                "t_nodes": {"type": "integer", "minimum": 2},
                "t_max": _positive,
                "x_nodes": {"type": "integer", "minimum": 1},
                "lambda_set": {"type": "array", "items": _positive, "minItems": 1},
            }
        ),
        "tolerances": _obj(
            {name: _positive for name in ("cocycle", "decompose", "spread", "series", "oracle")}
        ),
        "zeta": _obj(
            {
                "re": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "im": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "re_nodes": {"type": "integer", "minimum": 1},
                "im_nodes": {"type": "integer", "minimum": 1},
                "t": _positive,
                "exclusion": _positive,
            }
        ),
        "contour": _obj(
            {
                "radius": _positive,
                "nodes": {"type": "integer", "minimum": 4},
                "poles": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            }
        ),
    },
    ("dimension", "order", "layers"),
)

DEFAULTS: dict[str, Any] = {
    "cutoff": {"profile": "piecewise-linear", "r0": 1.0, "rho": 2.0, "degree": 5},
    "grids": {"t_nodes": 33, "t_max": 2.0, "x_nodes": 4, "lambda_set": list(DEFAULT_LAMBDAS)},
    "tolerances": {"cocycle": 1e-8, "decompose": 1e-8, "spread": 1e-9, "series": 1e-13, "oracle": 1e-9},
    "zeta": {"re": [-1.75, 1.75], "im": [-0.5, 0.5], "re_nodes": 8, "im_nodes": 3, "t": 1.0, "exclusion": 0.05},
    "contour": {"radius": 0.1, "nodes": 16, "poles": [0]},
}

PRESETS: dict[str, dict] = {
    "wodzicki-n1": {"dimension": 1, "order": [-1, 0], "layers": [{"j": 0, "angular": {"const": 1}}]},
    "wodzicki-n2": {"dimension": 2, "order": [-2, 0], "layers": [{"j": 0, "angular": {"const": 1}}]},
    "kv-n1": {"dimension": 1, "order": [-2, 0], "layers": [{"j": 0, "angular": {"const": 1}}]},
    "kv-half": {"dimension": 1, "order": [-0.5, 0], "layers": [{"j": 0, "angular": {"const": 1}}]},
    "mixed-n1": {
        "dimension": 1,
        "order": [0, 0],
        "layers": [
            {"j": 0, "angular": {"pair": [1.0, 0.5]}},
            {"j": 1, "angular": {"const": 1}, "spatial": {"cosine": 0.5}},
        ],
    },
    "mixed-n2": {
        "dimension": 2,
        "order": [-1, 0],
        "layers": [
            {"j": 0, "angular": {"trig": {"cos": [1.0, 0.3], "sin": [0.0, 0.2]}}},
            {"j": 1, "angular": {"const": 2.0}, "spatial": {"cosine": 0.25}},
        ],
    },
}


def _complex_value(v) -> complex:
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def _angular(entry: dict | None, n: int):
    if entry is None:
        return ConstantAngular(1.0)
    if "const" in entry:
        return ConstantAngular(_complex_value(entry["const"]))
    if "pair" in entry:
        if n != 1:
            raise ConfigError("angular 'pair' is only meaningful in dimension 1")
        return PairAngular(_complex_value(entry["pair"][0]), _complex_value(entry["pair"][1]))
    if "trig" in entry:
        if n != 2:
            raise ConfigError("angular 'trig' is only meaningful in dimension 2")
        return TrigAngular(tuple(entry["trig"].get("cos", ())), tuple(entry["trig"].get("sin", ())))
    preset = entry["preset"]
    if preset == "unit":
        return ConstantAngular(1.0)
    if preset == "sign":
        if n != 1:
            raise ConfigError("angular preset 'sign' needs dimension 1")
        return PairAngular(1.0, -1.0)
    if n != 2:
        raise ConfigError("angular preset 'cos' needs dimension 2")
    return TrigAngular((0.0, 1.0))


def _spatial(entry: dict | None):
    if entry is None:
        return ConstantWeight(1.0)
    if "const" in entry:
        return ConstantWeight(_complex_value(entry["const"]))
    return CosineWeight(float(entry["cosine"]))


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _canonical(obj):
    # ints and floats hash alike (1 == 1.0)
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_canonical(v) for v in obj]
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        return obj
    return float(obj)


@dataclass
class RunConfig:
    """Validated configuration with defaults filled in."""

    raw: dict
    symbol: ClassicalSymbolModel

    @property
    def grids(self) -> dict:
        return self.raw["grids"]

    @property
    def tolerances(self) -> dict:
        return self.raw["tolerances"]

    @property
    def zeta(self) -> dict:
        return self.raw["zeta"]

    @property
    def contour(self) -> dict:
        return self.raw["contour"]

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.grids["lambda_set"])

    def x_grid(self):
        return torus_grid(self.symbol.n, int(self.grids["x_nodes"]))

    @property
    def hash(self) -> str:
        payload = json.dumps(_canonical(self.raw), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _format_error(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"field {path}: {err.message}"


def parse_config(data: dict) -> RunConfig:
    """Validate a config mapping and build the symbol model."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ConfigError("; ".join([_format_error(best)] + [_format_error(e) for e in errors if e is not best][:4]))
    raw = _merge(DEFAULTS, data)
    n = raw["dimension"]
    try:
        cutoff = CutoffProfile(
            float(raw["cutoff"]["r0"]), float(raw["cutoff"]["rho"]), raw["cutoff"]["profile"],
            int(raw["cutoff"]["degree"]),
        )
        layers = [
            HomogeneousLayer(int(entry["j"]), _angular(entry.get("angular"), n), _spatial(entry.get("spatial")))
            for entry in raw["layers"]
        ]
        symbol = ClassicalSymbolModel(n, _complex_value(raw["order"]), tuple(layers), cutoff)
    except ConfigError:
        raise
    except CocycleError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    if any(not math.isfinite(float(v)) for v in raw["tolerances"].values()):
        raise ConfigError("tolerances must be finite")
    return RunConfig(raw, symbol)


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file; errors carry line/column or field path."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def preset(name: str) -> RunConfig:
    try:
        return parse_config(copy.deepcopy(PRESETS[name]))
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
