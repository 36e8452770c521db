"""Shared helpers for the test suite: cached model builds and metric families."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from trisym import geometry
from trisym.cli import build_model
from trisym.lie_core import killing_matrix
from trisym.rep_catalog import centralizer_split

# spectral radii of S for the deformed metrics
DEFORMATION_RADII = (0.15, 0.3, 0.45, 0.6, 0.75)


@lru_cache(maxsize=None)
def model(model_id: str):
    return build_model(model_id)


@lru_cache(maxsize=None)
def background(model_id: str) -> geometry.MetricSpec:
    return geometry.default_metric(model(model_id))


@lru_cache(maxsize=None)
def package(model_id: str) -> geometry.GeometryPackage:
    return geometry.geometry_package(model(model_id), background(model_id))


def deformation_direction(rep) -> np.ndarray | None:
    """A generic admissible S with spectral radius one, or None when there is none.

    Non-compact reps deform by S = -A J_V with A in c^-; compact ones by the
    trace-free part of c^+.
    """
    split = centralizer_split(rep)
    n = rep.dimV
    if rep.is_compact:
        generators = [c - np.trace(c) / n * np.eye(n) for c in split.c_plus]
        generators = [c for c in generators if np.max(np.abs(c)) > 1e-9]
    else:
        generators = [-c @ rep.J_V for c in split.c_minus]
    if not generators:
        return None
    weights = np.sqrt(np.arange(2, len(generators) + 2, dtype=float))
    S = sum(w * c for w, c in zip(weights, generators))
    return S / float(np.max(np.abs(np.linalg.eigvals(S))))


def deformed_metrics(model_id: str, radii=DEFORMATION_RADII) -> list[geometry.MetricSpec]:
    sm = model(model_id)
    S = deformation_direction(sm.rep)
    if S is None:
        return []
    return [geometry.metric_from_S(sm.rep, r * S) for r in radii]


@lru_cache(maxsize=None)
def deformed_packages(model_id: str) -> tuple[geometry.GeometryPackage, ...]:
    sm = model(model_id)
    return tuple(geometry.geometry_package(sm, metric) for metric in deformed_metrics(model_id))


# one line per acceptance criterion, printed in the terminal summary
CRITERION_LINES: list[str] = []


def record(number: int, title: str, failures: list[str], detail: str = "") -> None:
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {number:2d} {title}: {status}"
    if detail:
        line += f" ({detail})"
    if failures:
        shown = "; ".join(failures[:5])
        more = f" and {len(failures) - 5} more" if len(failures) > 5 else ""
        line += f" -- {shown}{more}"
    CRITERION_LINES.append(line)
    print(line)


def reductive_ricci(sm, metric) -> np.ndarray:
    """Ricci tensor of an invariant metric on a reductive homogeneous space.

    Ric(X, Y) = -1/2 sum <[X, X_j]_m, [Y, X_j]_m> - 1/2 B(X, Y)
                + 1/4 sum <[X_i, X_j]_m, X> <[X_i, X_j]_m, Y> - sym <[Z, X]_m, Y>
    with Z = sum U(X_i, X_i) over a g-orthonormal frame X_i.
    """
    model = sm.model
    algebra = model.algebra
    L = np.linalg.cholesky(metric.g)
    frame = model.V_basis @ np.linalg.inv(L.T)
    m = frame.shape[1]
    T = np.array([[L.T @ model.V_coords(algebra.bracket(frame[:, i], frame[:, j])) for j in range(m)]
                  for i in range(m)])
    U = 0.5 * (np.einsum("wab->abw", T) + np.einsum("wba->abw", T))
    Z = np.einsum("iiw->w", U)
    ZX = np.einsum("w,wak->ak", Z, T)
    ric = (-0.5 * np.einsum("ajk,bjk->ab", T, T)
           - 0.5 * frame.T @ killing_matrix(algebra) @ frame
           + 0.25 * np.einsum("ija,ijb->ab", T, T)
           - 0.5 * (ZX + ZX.T))
    return L @ ric @ L.T
