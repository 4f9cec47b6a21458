"""Verdict objects shared by every checker."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import rational as Q


def jsonable(x):
    """Recursively convert report payloads to JSON-friendly values."""
    if isinstance(x, Fraction):
        return Q.fmt(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return round(x, 12)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return repr(x)


@dataclass
class Witness:
    kind: str
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **jsonable(self.data)}


@dataclass
class ConvexityReport:
    """Verdict of a checker plus reproducible witnesses.

    A failing verdict always carries at least one witness.
    """

    verdict: bool
    witnesses: list = field(default_factory=list)
    tolerance: float = 1e-9
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.verdict

    def fail(self, kind: str, **data) -> "ConvexityReport":
        self.verdict = False
        self.witnesses.append(Witness(kind, data))
        return self

    def note(self, kind: str, **data) -> None:
        self.witnesses.append(Witness(kind, data))

    def first(self, kind: str | None = None):
        for w in self.witnesses:
            if kind is None or w.kind == kind:
                return w
        return None

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "tolerance": self.tolerance,
                "witnesses": [w.to_json() for w in self.witnesses],
                "details": jsonable(self.details)}
