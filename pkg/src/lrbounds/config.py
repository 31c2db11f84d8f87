"""Experiment configuration: JSON document, schema validation, CLI overrides."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .bounds import BoundKind

DEFAULT_BOUNDS = (
    "pert_upper",
    "pert_lower",
    "pert_lower_simplified",
    "poly_with_F",
    "poly_plain",
    "original_lambda",
    "trivial",
)

_SITE_OP = {
    "type": "object",
    "properties": {
        "site": {"type": "integer", "minimum": 1},
        "op": {"type": "string", "enum": ["x", "y", "z"]},
    },
    "required": ["site"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "model": {"enum": ["xy_chain", "custom_terms"]},
        "L": {
            "oneOf": [
                {"type": "integer", "minimum": 2},
                {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            ]
        },
        "J": {"type": "number", "not": {"const": 0}},
        "time_grid": {
            "type": "object",
            "properties": {
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "n_points": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "bounds_requested": {
            "type": "array",
            "items": {"enum": [k.value for k in BoundKind]},
            "uniqueItems": True,
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        # custom_terms only: Pauli-string couplings on a graph
        "graph": {
            "type": "object",
            "properties": {
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 1},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "local_dim": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "sites": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                    "paulis": {"type": "string", "pattern": "^[xyziXYZI]+$"},
                    "coeff": {"type": "number"},
                },
                "required": ["sites", "paulis"],
                "additionalProperties": False,
            },
        },
        "observables": {
            "type": "object",
            "properties": {"A": _SITE_OP, "B": _SITE_OP},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "xy_chain"
    L: tuple[int, ...] = (4,)
    J: float = 1.0
    t_max: float | None = None
    n_points: int = 400
    bounds_requested: tuple[str, ...] = DEFAULT_BOUNDS
    output_dir: str = "."
    seed: int = 0
    edges: tuple[tuple[int, int], ...] | None = None
    local_dim: int = 2
    terms: tuple[dict, ...] = field(default_factory=tuple)
    observables: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.L or min(self.L) < 2:
            raise ConfigError("L must be >= 2")
        if self.n_points < 2:
            raise ConfigError("n_points must be >= 2")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if self.model == "custom_terms" and not self.terms:
            raise ConfigError("model custom_terms needs a 'terms' list")
        if self.model == "custom_terms" and len(self.L) != 1:
            raise ConfigError("model custom_terms takes a single L (number of sites)")

    def to_json(self) -> dict:
        d = asdict(self)
        d["L"] = list(self.L)
        d["bounds_requested"] = list(self.bounds_requested)
        d["terms"] = list(self.terms)
        if self.edges is not None:
            d["edges"] = [list(e) for e in self.edges]
        return d

    def digest(self) -> str:
        # output_dir does not affect the numbers
        payload = {k: v for k, v in self.to_json().items() if k != "output_dir"}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _field_path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"config field {_field_path(err)}: {err.message}") from None
    L = doc.get("L", 4)
    grid = doc.get("time_grid", {})
    graph = doc.get("graph", {})
    edges = graph.get("edges")
    return ExperimentConfig(
        model=doc.get("model", "xy_chain"),
        L=tuple(L) if isinstance(L, list) else (L,),
        J=float(doc.get("J", 1.0)),
        t_max=grid.get("t_max"),
        n_points=grid.get("n_points", 400),
        bounds_requested=tuple(doc.get("bounds_requested", DEFAULT_BOUNDS)),
        output_dir=doc.get("output_dir", os.environ.get("OUTPUT_DIR", ".")),
        seed=doc.get("seed", 0),
        edges=tuple(tuple(e) for e in edges) if edges is not None else None,
        local_dim=graph.get("local_dim", 2),
        terms=tuple(doc.get("terms", ())),
        observables=dict(doc.get("observables", {})),
    )


def load_config(path: str | os.PathLike | None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config (or start empty) and apply CLI overrides on top."""
    doc: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("t_max", "n_points"):
            doc.setdefault("time_grid", {})[key] = value
        else:
            doc[key] = value
    return parse_config(doc)
