"""Check reports and JSON conversion of library values."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from fractions import Fraction
from typing import Any

from .woset import NEG_INF, POS_INF, rat_str


def jsonable(obj: Any) -> Any:
    """Convert library values to plain JSON data (rationals as "p/q")."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Fraction):
        return rat_str(obj)
    if isinstance(obj, float):
        if obj == POS_INF:
            return "inf"
        if obj == NEG_INF:
            return "-inf"
        raise TypeError("finite floats never appear in reports")
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((jsonable(v) for v in obj), key=lambda v: (str(type(v)), str(v)))
    if is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in fields(obj)}
    raise TypeError(f"not JSON-convertible: {obj!r}")


@dataclass
class Report:
    name: str
    violations: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, **details):
        self.violations.append({"kind": kind, **details})

    def kinds(self) -> set:
        return {v["kind"] for v in self.violations}

    def to_json(self):
        return {"name": self.name, "ok": self.ok,
                "violations": jsonable(self.violations), "info": jsonable(self.info)}

