"""Run configuration: JSON loading, schema validation and JSON-pointer errors."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ConfigError

SUBCOMMANDS = ("gauge-check", "oned-shallow", "oned-slowdecay", "oned-hardy", "landau",
               "accumulate", "eta-count", "exponent-fit", "reduce3d")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}


def _ladder(item=_pos, min_items=1):
    return {"type": "array", "items": item, "minItems": min_items}


_profile1d = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["gaussian", "square-well", "bracket-power", "homogeneous-power", "hardy"]},
        "depth": _num, "width": _pos, "c": _num, "q": _pos,
    },
    "additionalProperties": False,
}

PARAM_SCHEMAS = {
    "gauge-check": {
        "type": "object",
        "properties": {
            "points": _posint,
            "r_min": _pos, "r_max": _pos,
            "mode": {"enum": ["analytic", "finite-difference"]},
            "tol": _pos,
            "eta": _pos,
        },
        "additionalProperties": False,
    },
    "oned-shallow": {
        "type": "object",
        "required": ["eps"],
        "properties": {
            "profile": _profile1d,
            "eps": _ladder(),
            "ratio_tol": _pos,
            "box_factor": _pos,
        },
        "additionalProperties": False,
    },
    "oned-slowdecay": {
        "type": "object",
        "properties": {
            "q": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
            "c": _pos,
            "eps": _ladder(min_items=2),
            "slope_tol": _pos,
            "ratio_tol": _pos,
        },
        "additionalProperties": False,
    },
    "oned-hardy": {
        "type": "object",
        "required": ["c"],
        "properties": {
            "c": _num,
            "L": _ladder({"type": "number", "exclusiveMinimum": 1}, 2),
            "r2_min": _pos,
        },
        "additionalProperties": False,
    },
    "landau": {
        "type": "object",
        "properties": {
            "B": _pos, "L": _pos, "n": _posint, "levels": _posint,
            "boundary": {"enum": ["dirichlet", "periodic"]},
            "compare": {
                "type": "object",
                "required": ["L", "n"],
                "properties": {"L": _pos, "n": _posint},
                "additionalProperties": False,
            },
            "band": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        },
        "additionalProperties": False,
    },
    "accumulate": {
        "type": "object",
        "properties": {
            "B": _pos, "c": _pos, "m": {"type": "number", "exclusiveMaximum": 0},
            "eta": _ladder(), "L": _pos, "n": _posint,
            "band": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        },
        "additionalProperties": False,
    },
    "eta-count": {
        "type": "object",
        "required": ["eta", "method"],
        "properties": {
            "method": {"enum": ["landau", "pauli"]},
            "eta": _ladder(),
            "W": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
            "f_inf": _ladder(),
            "sign": {"enum": [-1, 1]},
            "p": _posint,
            "r_max": _pos,
            "n_angles": _posint,
        },
        "additionalProperties": False,
    },
    "exponent-fit": {
        "type": "object",
        "required": ["d", "m", "m1", "h", "mu_h"],
        "properties": {
            "kind": {"enum": ["schrodinger", "pauli"]},
            "d": {"enum": [2, 3]},
            "m": _num, "m1": _num,
            "regime": {"enum": ["standard", "strong-field"]},
            "location": {"enum": ["origin", "infinity"]},
            "h": _ladder(min_items=4),
            "mu_h": _ladder(min_items=4),
            "r_min": _pos,
            "schrodinger_levels": {"type": "boolean"},
            "band": _pos,
        },
        "additionalProperties": False,
    },
    "reduce3d": {
        "type": "object",
        "required": ["grid", "f_inf", "eta"],
        "properties": {
            "grid": {"type": "array", "items": _ladder({"type": "number"}, 2),
                     "minItems": 2, "maxItems": 2},
            "f_inf": _ladder(),
            "eta": _ladder(),
            "axis": {"enum": [0, 1, 2]},
            "L": _pos,
        },
        "additionalProperties": False,
    },
}

NEEDS_MODEL = {"eta-count", "reduce3d"}

#: ladders that must be strictly monotone, by subcommand
LADDERS = {
    "oned-shallow": ("eps",), "oned-slowdecay": ("eps",), "oned-hardy": ("L",),
    "accumulate": ("eta",), "eta-count": ("eta",), "exponent-fit": ("h", "mu_h"),
    "reduce3d": ("eta",),
}


def run_schema(subcommand):
    props = {
        "subcommand": {"const": subcommand},
        "model": {"type": ["object", "string"]},
        "params": PARAM_SCHEMAS[subcommand],
        "dimension": {"type": "integer", "minimum": 2},
        "vector_potential": {"type": "object"},
    }
    req = ["model"] if subcommand in NEEDS_MODEL else []
    if subcommand == "gauge-check":
        props.pop("model")
        req = ["dimension", "vector_potential"]
    return {"type": "object", "properties": props, "required": req, "additionalProperties": False}


def model_schema():
    text = resources.files("magspec").joinpath("data/modelspec.schema.json").read_text()
    return json.loads(text)


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _validate(doc, schema, base=""):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), str(list(e.absolute_path))))
    if not errors:
        return
    err = jsonschema.exceptions.best_match(errors)
    ptr = base + _pointer(err.absolute_path)
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            ptr += _pointer([missing[0]])
    elif err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            ptr += _pointer([extra[0]])
    raise ConfigError(err.message, ptr)


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    model_doc: dict | None = None
    raw: dict = field(default_factory=dict)
    source: Path | None = None

    def model(self):
        from ..model import model_from_json
        if self.model_doc is None:
            raise ConfigError("this run needs a model", "/model")
        return model_from_json(self.model_doc, "/model")


def check_ladders(subcommand, params):
    for key in LADDERS.get(subcommand, ()):
        vals = params.get(key)
        if vals is None or len(vals) < 2:
            continue
        diffs = [b - a for a, b in zip(vals[:-1], vals[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ConfigError("ladder must be strictly monotone", f"/params/{key}")


def parse_config(doc, subcommand, source=None) -> RunConfig:
    """Validate a parsed run document for ``subcommand``."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}", "/subcommand")
    _validate(doc, run_schema(subcommand))
    params = dict(doc.get("params", {}))
    check_ladders(subcommand, params)
    model_doc = doc.get("model")
    if isinstance(model_doc, str):
        path = Path(model_doc)
        if source is not None and not path.is_absolute():
            path = Path(source).parent / path
        try:
            model_doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read model file: {exc.strerror}", "/model") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file is not valid JSON (line {exc.lineno})", "/model") from None
    if model_doc is not None:
        _validate(model_doc, model_schema(), "/model")
    if subcommand == "gauge-check":
        model_doc = {"dimension": doc["dimension"], "vector_potential": doc["vector_potential"]}
    return RunConfig(subcommand, params, model_doc, doc, None if source is None else Path(source))


def load_config(path, subcommand) -> RunConfig:
    """Read and validate the JSON file at ``path``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", "") from None
    return parse_config(doc, subcommand, path)
