"""Numerical thresholds and catalog bounds.

The residual tolerance can be overridden with the ``TRISYM_TOL`` environment
variable; a JSON config file can override any field (see ``load_config``).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

RANK_THRESHOLD = 1e-8
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Config:
    tol: float = DEFAULT_TOL
    rank_threshold: float = RANK_THRESHOLD
    angle_tol: float = 1e-6
    soliton_tol: float = 1e-7
    non_soliton_tol: float = 1e-3
    max_sp: int = 4
    max_su: int = 6
    max_su1n: int = 8
    max_so_star: int = 4
    max_so2n: int = 8


def residual_tol() -> float:
    value = os.environ.get("TRISYM_TOL")
    return float(value) if value else DEFAULT_TOL


def load_config(path: str | Path | None = None) -> Config:
    config = Config(tol=residual_tol())
    if path is None:
        return config
    data = json.loads(Path(path).read_text())
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(config, **data)
