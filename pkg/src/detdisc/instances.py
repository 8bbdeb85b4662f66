"""JSON instance files for subspace tuples and lattice-point tuples."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema

from .discriminant import LatticePointTuple
from .fields import QQ, GF
from .polymatroid import SubspaceTuple

_scalar = {"oneOf": [{"type": "integer"},
                     {"type": "string", "pattern": r"^-?\d+(/-?\d+)?$"}]}

_meta = {
    "name": {"type": "string"},
    "expected": {"type": "object"},
    "generator": {"type": "object"},
    "warnings": {"type": "array", "items": {"type": "string"}},
}

SUBSPACE_SCHEMA = {
    "type": "object",
    "required": ["type", "field", "ambient_dim", "subspaces"],
    "properties": {
        "type": {"const": "subspace-tuple"},
        "field": {"oneOf": [
            {"type": "object", "required": ["kind"], "additionalProperties": False,
             "properties": {"kind": {"const": "rationals"}}},
            {"type": "object", "required": ["kind", "p"], "additionalProperties": False,
             "properties": {"kind": {"const": "prime"}, "p": {"type": "integer", "minimum": 2}}},
        ]},
        "ambient_dim": {"type": "integer", "minimum": 1},
        "subspaces": {"type": "array", "items": {"type": "array", "items": {
            "type": "array", "items": _scalar}}},
        **_meta,
    },
    "additionalProperties": False,
}

LATTICE_SCHEMA = {
    "type": "object",
    "required": ["type", "ambient_rank", "sets"],
    "properties": {
        "type": {"const": "lattice-tuple"},
        "ambient_rank": {"type": "integer", "minimum": 1},
        "sets": {"type": "array", "minItems": 1, "items": {
            "type": "array", "minItems": 1, "items": {"type": "array", "items": {"type": "integer"}}}},
        **_meta,
    },
    "additionalProperties": False,
}


class InstanceError(ValueError):
    pass


def parse_instance(doc: dict):
    """Validate a document; returns ``(SubspaceTuple | LatticePointTuple, metadata)``."""
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object")
    kind = doc.get("type")
    schema = {"subspace-tuple": SUBSPACE_SCHEMA, "lattice-tuple": LATTICE_SCHEMA}.get(kind)
    if schema is None:
        raise InstanceError(f"unknown instance type {kind!r}")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        raise InstanceError(f"schema violation at {list(e.absolute_path)}: {e.message}") from None
    meta = {k: doc[k] for k in _meta if k in doc}
    try:
        if kind == "subspace-tuple":
            f = doc["field"]
            field = QQ if f["kind"] == "rationals" else GF(f["p"])
            obj = SubspaceTuple.from_generators(doc["subspaces"], doc["ambient_dim"], field)
        else:
            obj = LatticePointTuple(doc["ambient_rank"], tuple(
                tuple(tuple(a) for a in A) for A in doc["sets"]))
    except (ValueError, ZeroDivisionError) as e:
        raise InstanceError(str(e)) from None
    return obj, meta


def load_instance(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise InstanceError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: invalid JSON ({e.msg})") from None
    obj, meta = parse_instance(doc)
    return obj, meta, doc


def dump_instance(obj, meta: dict | None = None) -> dict:
    doc = obj.to_json()
    if meta:
        doc.update(meta)
    return doc


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def digest(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()
