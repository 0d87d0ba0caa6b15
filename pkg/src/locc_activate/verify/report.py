"""Structured pass/fail evidence and its machine-readable form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class Evidence:
    name: str
    passed: bool
    value: Any = None
    tol: float | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    claim: str
    evidence: list[Evidence] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    seconds: float | None = None

    @property
    def passed(self) -> bool:
        return bool(self.evidence) and all(e.passed for e in self.evidence)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self):
        return self.passed

    def add(self, name, passed, value=None, tol=None, **detail) -> Evidence:
        e = Evidence(name, bool(passed), value, tol, detail)
        self.evidence.append(e)
        return e

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        """Fold another report's evidence in, names prefixed."""
        for e in other.evidence:
            name = f"{prefix}{e.name}" if prefix else e.name
            self.evidence.append(Evidence(name, e.passed, e.value, e.tol, e.detail))
        for k, v in other.tolerances.items():
            self.tolerances.setdefault(k, v)
        self.notes.extend(other.notes)

    def failures(self) -> list[Evidence]:
        return [e for e in self.evidence if not e.passed]

    def max_residual(self) -> float | None:
        vals = [e.detail["residual"] for e in self.evidence if "residual" in e.detail]
        return max(vals) if vals else None

    def to_dict(self) -> dict:
        out = {
            "claim": self.claim,
            "verdict": self.verdict,
            "tolerances": dict(sorted(self.tolerances.items())),
            "evidence": [
                {
                    "name": e.name,
                    "passed": e.passed,
                    "value": e.value,
                    "tol": e.tol,
                    "detail": e.detail,
                }
                for e in self.evidence
            ],
            "notes": list(self.notes),
        }
        if self.max_residual() is not None:
            out["max_residual"] = self.max_residual()
        return _jsonable(out)

    def summary_line(self) -> str:
        n = len(self.evidence)
        ok = sum(e.passed for e in self.evidence)
        line = f"[{self.verdict.upper()}] {self.claim}: {ok}/{n} evidence items"
        r = self.max_residual()
        if r is not None:
            line += f", max residual {r:.3e}"
        if self.seconds is not None:
            line += f" ({self.seconds:.3f} s)"
        return line


def _num(x: float) -> float:
    if not np.isfinite(x):
        return float(x)
    return float(f"{x:.12g}")


def _jsonable(obj):
    """Convert to plain JSON types; floats carry 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        if c.imag == 0:
            return _num(c.real)
        return [_num(c.real), _num(c.imag)]
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(reports: list[VerificationReport], **meta) -> str:
    """Deterministic JSON document: sorted keys, 12 significant digits."""
    doc = {"reports": [r.to_dict() for r in reports], **_jsonable(meta)}
    doc["passed"] = all(r.passed for r in reports)
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
