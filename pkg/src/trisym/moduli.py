"""Moduli of invariant metrics on Type III models.

Invariant metrics correspond to c^- x R_{>0}: a skew centralizer element A gives
h_V^{-1} g_V = 1 + A J_V and t scales the H block.  Each isotypic component of
the module contributes a normal form under conjugation by the centralizer
group, and the Ricci spectrum on V separates the points of that normal form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla

from .config import RANK_THRESHOLD
from .errors import (
    InvalidDimension,
    NotAdmissible,
    OutOfDomain,
    QuaternionicUnsupported,
    TheoremViolation,
)
from .geometry import (
    MetricSpec,
    intrinsic_torsion,
    metric_from_S,
    ricci,
    riemann_curvature,
    soliton_fit,
)
from .lie_core import Subspace, column_span, commutant, numerical_nullspace
from .rep_catalog import Representation, casimir, centralizer_split, complex_type_I, default_g_H
from .semidirect import SemidirectModel

REAL_POINT = "real_point"
QUATERNIONIC = "quaternionic_unsupported"
FACTORWISE = "factorwise"
DOMAIN = "{S = A J_V : A in c^-, 1 + S positive definite} x {t > 0}"


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


def complex_delta(d: int) -> str:
    return f"complex_delta_d({d})"


def psi(x: float | np.ndarray) -> float | np.ndarray:
    """2x / (1 - x^2), the Ricci eigenvalue factor along a one-parameter deformation."""
    return 2.0 * np.asarray(x) / (1.0 - np.asarray(x) ** 2)


# ---------------------------------------------------------------------------
# Isotypic decomposition


@dataclass(frozen=True, eq=False)
class IsotypicComponent:
    """One isotypic summand: d copies of an irreducible of the given kind."""

    basis: np.ndarray
    kind: str
    copies: int
    commutant_dim: int
    c_minus_dim: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def rank(self) -> int:
        """Number of normal-form parameters."""
        if self.kind == "complex":
            return self.copies
        if self.kind == "real":
            return self.copies // 2
        return 0

    @property
    def normal_form(self) -> str:
        if self.kind == "quaternionic":
            return QUATERNIONIC
        return REAL_POINT if self.rank == 0 else complex_delta(self.rank)

    def to_json(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "kind": self.kind,
            "copies": self.copies,
            "commutant_dim": self.commutant_dim,
            "c_minus_dim": self.c_minus_dim,
            "normal_form": self.normal_form,
        }


def _generic_coefficients(k: int) -> np.ndarray:
    """Fixed, rationally independent weights so results are reproducible."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53]
    roots = np.sqrt(np.array([primes[i % len(primes)] + 60 * (i // len(primes)) for i in range(k)], float))
    return roots - np.floor(roots) + 0.5


def _h_adjoint(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.linalg.solve(h, f.T @ h)


def _algebra_center(basis: Sequence[np.ndarray], threshold: float) -> list[np.ndarray]:
    if len(basis) <= 1:
        return list(basis)
    rows = []
    for g in basis:
        rows.append(np.array([(f @ g - g @ f).ravel() for f in basis]).T)
    system = np.vstack(rows)
    if _mx(system) < 1e-12:
        return list(basis)
    null = numerical_nullspace(system, threshold)
    return [np.einsum("p,pij->ij", v, np.array(basis), optimize=True) for v in null.basis.T]


def _clusters(values: np.ndarray, tol: float = 1e-6) -> list[list[int]]:
    order = np.argsort(values)
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(values[i] - values[groups[-1][-1]]) < tol * max(1.0, abs(values[i])):
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def _classify(commutant_dim: int, center_dim: int, c_plus_dim: int) -> tuple[str, int]:
    if center_dim == 2:
        d = math.isqrt(commutant_dim // 2)
        if 2 * d * d == commutant_dim:
            return "complex", d
    elif center_dim == 1:
        d = math.isqrt(commutant_dim)
        if d * d == commutant_dim and c_plus_dim == d * (d + 1) // 2:
            return "real", d
        d = math.isqrt(commutant_dim // 4)
        if 4 * d * d == commutant_dim:
            return "quaternionic", d
    raise NotAdmissible(f"unrecognized centralizer (dim {commutant_dim}, centre {center_dim}, "
                        f"symmetric part {c_plus_dim})")


def isotypic_components(rep: Representation, threshold: float = RANK_THRESHOLD) -> list[IsotypicComponent]:
    """Split V by a generic self-adjoint element of the centre of the commutant."""
    h = rep.h_V
    basis = commutant(rep.rho, threshold)
    center = _algebra_center(basis, threshold)
    sym = [0.5 * (z + _h_adjoint(z, h)) for z in center]
    weights = _generic_coefficients(len(sym))
    generic = np.einsum("p,pij->ij", weights, np.array(sym), optimize=True)
    values, vectors = sla.eigh(0.5 * (h @ generic + (h @ generic).T), h)
    components = []
    for group in _clusters(values):
        B = vectors[:, group]  # h-orthonormal columns
        rho_U = [B.T @ h @ r @ B for r in rep.rho]
        comm_U = commutant(rho_U, threshold)
        center_U = _algebra_center(comm_U, threshold)
        plus = [0.5 * (f + f.T) for f in comm_U]
        minus = [0.5 * (f - f.T) for f in comm_U]

        def span_dim(mats: list[np.ndarray]) -> int:
            mats = [m for m in mats if _mx(m) > 1e-9]
            if not mats:
                return 0
            return column_span(np.array([m.ravel() for m in mats]).T, threshold).dim

        c_plus_dim = span_dim(plus)
        kind, copies = _classify(len(comm_U), len(center_U), c_plus_dim)
        components.append(IsotypicComponent(B, kind, copies, len(comm_U), span_dim(minus)))
    return components


# ---------------------------------------------------------------------------
# Description


@dataclass(frozen=True, eq=False)
class ModuliDescription:
    c_minus_dim: int
    domain: str
    normal_form: str
    generators: tuple[np.ndarray, ...]
    factors: tuple[IsotypicComponent, ...] = field(default=())
    rep_name: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "model": self.rep_name,
            "c_minus_dim": self.c_minus_dim,
            "domain": self.domain,
            "normal_form": self.normal_form,
            "generators": [{"name": f"c{k}", "matrix": g.tolist()} for k, g in enumerate(self.generators)],
            "factors": [f.to_json() for f in self.factors],
        }


def moduli_space(rep: Representation, threshold: float = RANK_THRESHOLD) -> ModuliDescription:
    """c^- with its normal form, chosen from the isotypic summands of the module."""
    if rep.is_compact:
        raise NotAdmissible(f"{rep.name}: the moduli description covers the non-compact case")
    components = isotypic_components(rep, threshold)
    for comp in components:
        if comp.kind == "quaternionic":
            raise QuaternionicUnsupported(
                f"{rep.name}: an isotypic summand has quaternionic type; its moduli are not treated")
    generators = tuple(centralizer_split(rep).c_minus)
    if sum(c.c_minus_dim for c in components) != len(generators):
        raise TheoremViolation(f"{rep.name}: isotypic c^- dimensions do not add up")
    nontrivial = [c for c in components if c.rank]
    if not nontrivial:
        normal_form = REAL_POINT
    elif len(components) == 1:
        normal_form = components[0].normal_form
    else:
        normal_form = FACTORWISE
    return ModuliDescription(len(generators), DOMAIN, normal_form, generators, tuple(components), rep.name)


# ---------------------------------------------------------------------------
# Block-diagonal lambda family


@dataclass(frozen=True, eq=False)
class LambdaBlock:
    """A summand with one-dimensional c^- generated by I, I^2 = -1."""

    indices: slice
    I: np.ndarray
    J: np.ndarray
    rep: Representation

    @property
    def IJ(self) -> np.ndarray:
        return self.I @ self.J


def block_representation(rep: Representation, indices: slice) -> Representation:
    rho = tuple(r[indices, indices].copy() for r in rep.rho)
    size = indices.stop - indices.start
    return replace(rep, rho=rho, J_V=rep.J_V[indices, indices].copy(),
                   h_V=rep.h_V[indices, indices].copy(), blocks=(size,),
                   name=f"{rep.name}[{indices.start}:{indices.stop}]")


def lambda_blocks(rep: Representation) -> list[LambdaBlock]:
    """The block-diagonal summands of rep, each required to have a one-dimensional c^-."""
    sizes = rep.blocks or (rep.dimV,)
    if sum(sizes) != rep.dimV:
        raise InvalidDimension(f"{rep.name}: block sizes do not cover the module")
    out, start = [], 0
    for size in sizes:
        indices = slice(start, start + size)
        sub = block_representation(rep, indices)
        out.append(LambdaBlock(indices, complex_type_I(sub), sub.J_V, sub))
        start += size
    return out


def in_normal_form(lam: Sequence[float]) -> bool:
    """0 <= lambda_1 <= ... <= lambda_d < 1."""
    lam = list(lam)
    return all(0.0 <= x < 1.0 for x in lam) and lam == sorted(lam)


def g_lambda(rep: Representation, lam: Sequence[float], t: float = 1.0) -> MetricSpec:
    """Block-diagonal metric with h_V^{-1} g_V = 1 + lambda_k I J on block k.

    Any |lambda_k| < 1 is accepted so that the permutation and sign actions can
    be exercised; ``in_normal_form`` tells whether lambda lies in Delta_d.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    blocks = lambda_blocks(rep)
    if lam.ndim != 1 or len(lam) != len(blocks):
        raise OutOfDomain(f"expected {len(blocks)} lambda values, got {lam.size}")
    if not np.all(np.isfinite(lam)) or np.any(np.abs(lam) >= 1.0):
        raise OutOfDomain(f"lambda must satisfy |lambda_k| < 1, got {lam.tolist()}")
    S = np.zeros((rep.dimV, rep.dimV))
    for value, block in zip(lam, blocks):
        S[block.indices, block.indices] = value * block.IJ
    return metric_from_S(rep, S, t)


# ---------------------------------------------------------------------------
# Ricci spectrum


def ricci_spectrum_invariant(sm: SemidirectModel, metric: MetricSpec) -> np.ndarray:
    """Sorted eigenvalues of g^{-1} ric on the module block."""
    eta = intrinsic_torsion(sm, metric)
    Rg = riemann_curvature(sm, metric, eta)
    ric = ricci(sm, metric, Rg).ric
    Vs = sm.module_slice
    ric_VV = 0.5 * (ric[Vs, Vs] + ric[Vs, Vs].T)
    g_V = metric.g[Vs, Vs]
    return np.sort(sla.eigh(ric_VV, g_V, eigvals_only=True))


@dataclass(frozen=True)
class CasimirSplit:
    """Casimir eigenvalues at lambda = 0 on ker(IJ - 1) and ker(IJ + 1) of one block."""

    d_minus: float
    d_plus: float
    mult_minus: int
    mult_plus: int
    scalar_residual: float


def _eigenspace(matrix: np.ndarray, value: float, threshold: float) -> Subspace:
    return numerical_nullspace(matrix - value * np.eye(matrix.shape[0]), threshold)


def casimir_split(block: LambdaBlock, g_H: np.ndarray | None = None,
                  threshold: float = RANK_THRESHOLD) -> CasimirSplit:
    """Measure d_- on ker(IJ - 1) and d_+ on ker(IJ + 1)."""
    C = casimir(block.rep, g_H)
    values = {}
    residual = 0.0
    for sign in (1.0, -1.0):
        space = _eigenspace(block.IJ, sign, threshold)
        Pb = space.basis
        restricted = np.linalg.lstsq(Pb, C @ Pb, rcond=None)[0]
        value = float(np.trace(restricted) / space.dim) if space.dim else 0.0
        residual = max(residual, _mx(restricted - value * np.eye(space.dim)),
                       _mx(C @ Pb - Pb @ restricted))
        values[sign] = (value, space.dim)
    return CasimirSplit(values[1.0][0], values[-1.0][0], values[1.0][1], values[-1.0][1], residual)


def predicted_spectrum(rep: Representation, lam: Sequence[float], t: float = 1.0) -> np.ndarray:
    """psi(lambda_k) d_- on ker(IJ - 1) and -psi(lambda_k) d_+ on ker(IJ + 1), block by block."""
    g_H = t * default_g_H(rep)
    values = []
    for value, block in zip(np.atleast_1d(lam), lambda_blocks(rep)):
        split = casimir_split(block, g_H)
        factor = float(psi(value))
        values += [factor * split.d_minus] * split.mult_minus
        values += [-factor * split.d_plus] * split.mult_plus
    return np.sort(np.array(values))


def nonnegative_part(spectrum: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    scale = max(1.0, _mx(spectrum))
    return np.sort(spectrum[spectrum >= -tol * scale])


def spectrum_distance(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) != len(b):
        return math.inf
    return _mx(np.sort(a) - np.sort(b))


def relative_spectrum_error(measured: np.ndarray, predicted: np.ndarray) -> float:
    """Sup-norm error relative to the spectrum size; absolute for a vanishing spectrum."""
    distance = spectrum_distance(measured, predicted)
    scale = max(_mx(predicted), _mx(measured))
    return distance / scale if scale > 1e-12 else distance


# ---------------------------------------------------------------------------
# Grid scans


def grid_values(k: int) -> np.ndarray:
    """k evenly spaced points of [0, 1), starting at 0."""
    if k < 1:
        raise OutOfDomain("grid size must be positive")
    return np.arange(k) / k


def delta_grid(d: int, k: int) -> list[tuple[float, ...]]:
    """Points of Delta_d with coordinates on the k-point grid."""
    return [tuple(float(x) for x in p)
            for p in itertools.combinations_with_replacement(grid_values(k), d)]


def product_grid(d: int, k: int) -> list[tuple[float, ...]]:
    """All k^d grid points, including those outside the ordered chamber."""
    return [tuple(float(x) for x in p) for p in itertools.product(grid_values(k), repeat=d)]


@dataclass(frozen=True)
class ScanRow:
    lam: tuple[float, ...]
    spectrum: tuple[float, ...]
    predicted: tuple[float, ...]
    relative_error: float
    soliton_residual: float

    def to_json(self) -> dict[str, Any]:
        return {
            "lambda": list(self.lam),
            "spectrum": list(self.spectrum),
            "predicted": list(self.predicted),
            "relative_error": self.relative_error,
            "soliton_residual": self.soliton_residual,
        }


def scan_point(sm: SemidirectModel, lam: Sequence[float], t: float = 1.0) -> ScanRow:
    metric = g_lambda(sm.rep, lam, t)
    eta = intrinsic_torsion(sm, metric)
    Rg = riemann_curvature(sm, metric, eta)
    ric = ricci(sm, metric, Rg).ric
    Vs = sm.module_slice
    spectrum = np.sort(sla.eigh(0.5 * (ric[Vs, Vs] + ric[Vs, Vs].T), metric.g[Vs, Vs], eigvals_only=True))
    predicted = predicted_spectrum(sm.rep, lam, t)
    _, _, residual = soliton_fit(sm, metric, ric)
    return ScanRow(tuple(float(x) for x in lam), tuple(spectrum.tolist()), tuple(predicted.tolist()),
                   relative_spectrum_error(spectrum, predicted), float(residual))


def moduli_scan(sm: SemidirectModel, k: int, t: float = 1.0) -> list[ScanRow]:
    """Sweep Delta_d on the k-point grid."""
    d = len(lambda_blocks(sm.rep))
    return [scan_point(sm, lam, t) for lam in delta_grid(d, k)]


def min_separation(rows: Sequence[ScanRow]) -> float:
    """Smallest spectrum distance between distinct points."""
    best = math.inf
    for a, b in itertools.combinations(rows, 2):
        if a.lam != b.lam:
            best = min(best, spectrum_distance(np.array(a.spectrum), np.array(b.spectrum)))
    return best


def scan_csv_rows(rows: Sequence[ScanRow]) -> list[list[str]]:
    header = ["lambda", "spectrum", "soliton_residual"]
    body = [[" ".join(f"{x:.12g}" for x in r.lam), " ".join(f"{x:.12g}" for x in r.spectrum),
             f"{r.soliton_residual:.6e}"] for r in rows]
    return [header] + body
