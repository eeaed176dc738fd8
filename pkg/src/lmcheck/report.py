"""Check reports and their byte-stable JSON/CSV serialization."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

DEFAULT_SLACK = 1e-9


class Kind(enum.Enum):
    EXPLICIT = "explicit"  # zero violations required
    IMPLICIT = "implicit"  # constant estimated; judged on finiteness and flatness
    INFO = "info"


@dataclass
class Violation:
    case: str
    lhs: float
    rhs: float
    ratio: float


@dataclass
class CheckReport:
    check_id: str
    params: dict[str, Any] = field(default_factory=dict)
    cases: int = 0
    vacuous: int = 0
    violations: list[Violation] = field(default_factory=list)
    worst_ratio: float = 0.0
    constant_estimate: float | None = None
    notes: str = ""
    # not serialized: how the report is judged and the per-q curve behind it
    kind: Kind = Kind.EXPLICIT
    curve: list[tuple[float, float]] = field(default_factory=list)
    slope: float | None = None
    passed: bool | None = None

    def record(self, case: str, lhs: float, rhs: float, slack: float = DEFAULT_SLACK) -> float | None:
        """Count one comparison ``lhs <= rhs``; a zero right side makes the case vacuous."""
        if not (rhs > 0 and math.isfinite(rhs)):
            self.vacuous += 1
            return None
        ratio = lhs / rhs
        self.worst_ratio = ratio if self.cases == 0 else max(self.worst_ratio, ratio)
        self.cases += 1
        if not ratio <= 1.0 + slack:
            self.violations.append(Violation(case, lhs, rhs, ratio))
        return ratio

    def record_many(self, name, lhs, rhs, slack: float = DEFAULT_SLACK) -> np.ndarray:
        """Vectorised :meth:`record`; ``name(i)`` labels the i-th comparison if it fails."""
        lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
        lhs, rhs = np.ravel(lhs), np.ravel(rhs)
        live = (rhs > 0) & np.isfinite(rhs)
        self.vacuous += int(np.count_nonzero(~live))
        if not np.any(live):
            return np.zeros(0)
        ratio = np.full(lhs.shape, np.nan)
        ratio[live] = lhs[live] / rhs[live]
        top = float(np.max(ratio[live]))
        self.worst_ratio = top if self.cases == 0 else max(self.worst_ratio, top)
        self.cases += int(np.count_nonzero(live))
        bad = np.flatnonzero(live & ~(ratio <= 1.0 + slack))
        for i in bad:
            self.violations.append(Violation(name(int(i)), float(lhs[i]), float(rhs[i]), float(ratio[i])))
        return ratio[live]

    def vacant(self) -> None:
        self.vacuous += 1

    def add_note(self, text: str) -> None:
        self.notes = f"{self.notes}; {text}" if self.notes else text

    def ok(self) -> bool:
        if self.passed is not None:
            return self.passed
        if self.kind is Kind.EXPLICIT:
            return not self.violations
        if self.kind is Kind.IMPLICIT:
            return self.constant_estimate is not None and math.isfinite(self.constant_estimate)
        return True

    def merge(self, other: "CheckReport", prefix: str = "") -> None:
        """Fold another explicit report's counts and violations into this one."""
        if other.cases:
            if self.cases == 0:
                self.worst_ratio = other.worst_ratio
            else:
                self.worst_ratio = max(self.worst_ratio, other.worst_ratio)
        self.cases += other.cases
        self.vacuous += other.vacuous
        for v in other.violations:
            self.violations.append(Violation(prefix + v.case, v.lhs, v.rhs, v.ratio))

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "params": {k: _plain(v) for k, v in sorted(self.params.items())},
            "cases": int(self.cases),
            "vacuous": int(self.vacuous),
            "violations": [
                {"case": v.case, "lhs": _num(v.lhs), "rhs": _num(v.rhs), "ratio": _num(v.ratio)}
                for v in self.violations
            ],
            "worst_ratio": _num(self.worst_ratio),
            "constant_estimate": _num(self.constant_estimate),
            "notes": self.notes,
        }


class Number(float):
    """Float that serializes in fixed 12-significant-digit scientific notation."""


def _num(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return Number(x)


def _plain(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return v
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return _num(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in sorted(v.items())}
    try:
        return _num(float(v))
    except (TypeError, ValueError):
        return str(v)


def format_number(x: float) -> str:
    return f"{x:.11e}"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON writer; ``Number`` values use ``format_number``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, Number):
        return format_number(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_number(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def reports_json(reports: list[CheckReport]) -> str:
    return dumps([r.to_dict() for r in reports]) + "\n"


def curve_csv(curve: list[tuple[float, float]]) -> str:
    lines = ["q,ratio"]
    lines += [f"{format_number(q)},{format_number(r)}" for q, r in curve]
    return "\n".join(lines) + "\n"
