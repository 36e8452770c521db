"""Residual checks and reports shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

import numpy as np


@dataclass(frozen=True)
class Check:
    """One named residual compared against a threshold."""

    name: str
    residual: float
    threshold: float
    kind: str = "below"

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.residual):
            return False
        if self.kind == "above":
            return self.residual > self.threshold
        return self.residual < self.threshold

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "residual": float(self.residual),
            "threshold": float(self.threshold),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class Report:
    """An ordered collection of checks with free-form extra values."""

    checks: tuple[Check, ...] = ()
    values: dict[str, Any] = field(default_factory=dict)

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks)

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(check.name == name for check in self.checks)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]

    def merged(self, other: "Report", prefix: str = "") -> "Report":
        renamed = tuple(
            Check(prefix + c.name, c.residual, c.threshold, c.kind) for c in other.checks
        )
        values = dict(self.values)
        values.update({prefix + k: v for k, v in other.values.items()})
        return Report(self.checks + renamed, values)

    def to_json(self) -> list[dict[str, Any]]:
        return [check.to_json() for check in self.checks]


def build_report(checks: Iterable[Check], **values: Any) -> Report:
    return Report(tuple(checks), dict(values))
