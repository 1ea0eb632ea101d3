"""Check reports: per-condition maximal residuals with verdicts.

A report lists one record per verified identity.  A condition passes iff its
scale-normalized residual stays below the plan tolerance at every sample
point; there is no majority voting.  The witness point of the worst residual
is kept whenever the residual is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .sampling import SamplePlan


@dataclass
class ConditionResult:
    cid: str
    description: str
    residual: Optional[float]  # None when the condition could not be evaluated
    witness: Optional[tuple]
    passed: bool
    note: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "id": self.cid,
            "description": self.description,
            "max_residual": self.residual,
            "witness": None if self.witness is None else list(self.witness),
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class CheckReport:
    title: str
    conditions: list[ConditionResult]
    plan: SamplePlan
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
            "plan": self.plan.echo(),
            "notes": list(self.notes),
        }

    def format_table(self, color: bool = False) -> str:
        green, red, reset = ("\x1b[32m", "\x1b[31m", "\x1b[0m") if color else ("", "", "")
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.conditions:
            mark = f"{green}pass{reset}" if c.passed else f"{red}FAIL{reset}"
            res = "   n/a   " if c.residual is None else f"{c.residual:9.3e}"
            line = f"  [{mark}] {c.cid:<24} max residual {res}  {c.description}"
            if c.witness is not None:
                line += "  @ (" + ", ".join(f"{x:.4g}" for x in c.witness) + ")"
            if c.note:
                line += f"  [{c.note}]"
            lines.append(line)
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def condition_from_samples(cid: str, description: str, samples, tolerance: float,
                           note: Optional[str] = None) -> ConditionResult:
    """Aggregate (point, raw_residual, scale) triples into one condition.

    The normalized residual at a point is raw / max(1, scale); the condition
    passes iff the normalized residual is within tolerance everywhere.
    """
    worst = 0.0
    witness = None
    for point, raw, scale in samples:
        norm = float(abs(raw)) / max(1.0, float(scale))
        if norm > worst:
            worst = norm
            witness = tuple(float(x) for x in point)
    return ConditionResult(
        cid=cid,
        description=description,
        residual=worst,
        witness=None if worst == 0.0 else witness,
        passed=bool(worst <= tolerance),
        note=note,
    )
