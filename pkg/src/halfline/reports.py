"""Structured diagnostic reports: a list of named checks plus free-form details."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class Check:
    """One diagnostic: ``value`` compared against ``threshold``."""

    name: str
    value: Any
    threshold: Any
    verdict: bool
    note: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "value": self.value, "threshold": self.threshold, "verdict": self.verdict}
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class Report:
    title: str
    checks: tuple = ()
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.verdict for c in self.checks)

    def check(self, name: str) -> Optional[Check]:
        for c in self.checks:
            if c.name == name:
                return c
        return None

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.verdict]

    def to_dict(self) -> dict:
        return {"title": self.title, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "details": self.details}

    def table(self) -> str:
        """Plain-text rendering, one check per line."""
        rows = [(c.name, _fmt(c.value), _fmt(c.threshold), "pass" if c.verdict else "FAIL") for c in self.checks]
        w = [max([len(r[i]) for r in rows] + [len(h)]) for i, h in enumerate(("check", "value", "threshold", "verdict"))]
        lines = [f"== {self.title} =="]
        lines.append("  ".join(h.ljust(w[i]) for i, h in enumerate(("check", "value", "threshold", "verdict"))))
        lines.extend("  ".join(r[i].ljust(w[i]) for i in range(4)) for r in rows)
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)
