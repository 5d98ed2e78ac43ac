"""Flat named feature vectors shared by every descriptor type."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class SchemaMismatchError(ValueError):
    pass


class Field(NamedTuple):
    name: str
    group: str
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    schema: tuple[Field, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.setflags(write=False)
        schema = tuple(Field(*f) for f in self.schema)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "schema", schema)
        if len(values) != len(schema):
            raise ValueError(f"{len(values)} values for a schema of {len(schema)} fields")
        names = [f.name for f in schema]
        if len(set(names)) != len(names):
            raise ValueError("schema names must be unique")
        if any(not f.weight > 0 for f in schema):
            raise ValueError("schema weights must be positive")

    @classmethod
    def from_names(cls, values, names, group, weight=1.0):
        return cls(values, tuple(Field(n, group, weight) for n in names))

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.values, other.values)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.schema]

    @property
    def weights(self) -> np.ndarray:
        return np.array([f.weight for f in self.schema])

    def with_values(self, values) -> FeatureVector:
        return FeatureVector(values, self.schema)

    def with_group_weights(self, group_weights: dict) -> FeatureVector:
        schema = tuple(f._replace(weight=float(group_weights.get(f.group, f.weight))) for f in self.schema)
        return FeatureVector(self.values, schema)

    def check_schema(self, other: FeatureVector):
        if [f[:2] for f in self.schema] != [f[:2] for f in other.schema]:
            raise SchemaMismatchError(
                f"schema mismatch: {schema_summary(self.schema)} vs {schema_summary(other.schema)}"
            )

    def schema_hash(self) -> str:
        return schema_hash(self.schema)

    def to_dict(self) -> dict:
        return {
            "schema": [{"name": f.name, "group": f.group, "weight": f.weight} for f in self.schema],
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, d) -> FeatureVector:
        schema = tuple(Field(f["name"], f["group"], float(f.get("weight", 1.0))) for f in d["schema"])
        return cls(np.asarray(d["values"], dtype=float), schema)


def schema_hash(schema) -> str:
    blob = json.dumps([[f.name, f.group] for f in schema], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def schema_summary(schema) -> str:
    groups = {}
    for f in schema:
        groups[f.group] = groups.get(f.group, 0) + 1
    body = ", ".join(f"{g}:{n}" for g, n in groups.items())
    return f"[{len(schema)} fields; {body}]"
