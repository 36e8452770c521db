"""Invariant metrics and their curvature at the level of infinitesimal models.

Everything is expressed in tangent coordinates of the model, that is in the
basis of ``V`` stored in :class:`~trisym.threesym.ThreeSymModel`.  For
semidirect models these are the module coordinates followed by H.

Conventions:

* ``eta[a, b]`` is the vector eta_{e_a} e_b, fixed by
  2 g(eta_X Y, Z) = g(tau(X, Y), Z) - g(tau(Y, Z), X) + g(tau(Z, X), Y).
* ``R(X, Y) = R^D(X, Y) - [eta_X, eta_Y] + eta_{tau(X, Y)}`` as an endomorphism and
  ``Rg[a, b, c, d] = g(R(e_a, e_b) e_c, e_d)``, so sectional curvature is
  ``Rg(x, y, x, y)``.
* ``ric(X, Y) = sum_ij g^ij Rg(X, e_i, Y, e_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg as sla

from .config import RANK_THRESHOLD, Config
from .errors import Inconclusive, NotInCentralizer, NotPositive, SymmetryViolation
from .lie_core import (
    Subspace,
    column_span,
    commutant,
    derivations,
    killing_matrix,
    numerical_nullspace,
    principal_angle,
)
from .rep_catalog import Representation, casimir, default_g_H, killing_on_H
from .report import Check, Report
from .semidirect import SemidirectModel


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


def _sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """A tangent metric, with its canonical parametrization when it has one.

    ``g`` is the full tangent Gram matrix.  For semidirect models
    ``g = g_V + t g_H0`` where ``g_V = h_V (1 + S)`` and ``g_H0`` is plus or
    minus the Killing form on H.
    """

    g: np.ndarray
    h_V: np.ndarray | None = None
    S: np.ndarray | None = None
    t: float = 1.0
    g_H: np.ndarray | None = None

    @property
    def g_V(self) -> np.ndarray | None:
        if self.h_V is None:
            return None
        return self.h_V @ (np.eye(self.h_V.shape[0]) + self.S)

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    def to_json(self) -> dict[str, Any]:
        return {
            "g": self.g.tolist(),
            "S": None if self.S is None else self.S.tolist(),
            "t": self.t,
        }


def metric_from_S(rep: Representation, S: np.ndarray | None = None, t: float = 1.0,
                  tol: float = 1e-9) -> MetricSpec:
    """Metric with h_V^{-1} g_V = 1 + S on the module and t (+-B) on H.

    Non-compact branch: S J_V must lie in c^- (commute with rho(L), h_V-skew).
    Compact branch: S must lie in c^+ (commute with rho(L), h_V-symmetric).
    """
    n = rep.dimV
    S = np.zeros((n, n)) if S is None else np.asarray(S, dtype=float)
    if S.shape != (n, n):
        raise NotInCentralizer(f"S must be {n} x {n}")
    if not t > 0:
        raise NotPositive(f"the H scale must be positive, got {t}")
    h = rep.h_V
    element = S @ rep.J_V if not rep.is_compact else S
    scale = max(1.0, _mx(element))
    commute = max(_mx(element @ r - r @ element) for r in rep.rho) / scale
    adj = np.linalg.solve(h, element.T @ h)
    sign_residual = _mx(adj - element) if rep.is_compact else _mx(adj + element)
    if commute > tol * 10 or sign_residual / scale > tol * 10:
        branch = "c^+" if rep.is_compact else "c^-"
        raise NotInCentralizer(f"deformation is not in {branch} (commutator {commute:.2e}, "
                               f"adjoint {sign_residual:.2e})")
    g_V = h @ (np.eye(n) + S)
    eigs = np.linalg.eigvalsh(_sym(g_V))
    if eigs[0] <= tol:
        raise NotPositive(f"1 + S is not positive definite (smallest eigenvalue {eigs[0]:.3e})")
    g_H = t * default_g_H(rep)
    g = sla.block_diag(_sym(g_V), g_H)
    return MetricSpec(g, h, S, float(t), g_H)


def plain_metric(sm: SemidirectModel, g: np.ndarray | None = None) -> MetricSpec:
    """A tangent metric for a fixture; defaults to the identity or to B on H."""
    m = sm.model.dim_V
    if g is None:
        if sm.model.dim_h:
            B = sm.model.killing
            g = sm.model.V_basis.T @ B @ sm.model.V_basis
        else:
            g = np.eye(m)
    g = np.asarray(g, dtype=float)
    if np.linalg.eigvalsh(_sym(g))[0] <= 0:
        raise NotPositive("tangent metric is not positive definite")
    return MetricSpec(_sym(g))


def default_metric(sm: SemidirectModel) -> MetricSpec:
    return metric_from_S(sm.rep) if sm.is_semidirect else plain_metric(sm)


def metric_invariance_report(sm: SemidirectModel, metric: MetricSpec, tol: float = 1e-9) -> Report:
    g, J = metric.g, sm.model.J
    iso = sm.model.isotropy
    k_res = max((_mx(a.T @ g + g @ a) for a in iso), default=0.0)
    return Report((
        Check("metric_symmetric", _mx(g - g.T), tol),
        Check("metric_J_invariant", _mx(J.T @ g @ J - g), tol),
        Check("metric_isotropy_invariant", k_res, tol),
    ))


# ---------------------------------------------------------------------------
# Intrinsic torsion


def intrinsic_torsion(sm: SemidirectModel, metric: MetricSpec) -> np.ndarray:
    """eta[a, b] = eta_{e_a} e_b in tangent coordinates."""
    tau = sm.model.tau
    g = metric.g
    low = np.einsum("abk,kc->abc", tau, g, optimize=True)
    total = low - low.transpose(2, 0, 1) + low.transpose(1, 2, 0)
    # total[a, b, c] = g(tau(a,b),c) - g(tau(b,c),a) + g(tau(c,a),b)
    return 0.5 * np.einsum("abk,kc->abc", total, metric.inverse, optimize=True)


def eta_matrices(eta: np.ndarray) -> np.ndarray:
    """E[a] is the matrix of eta_{e_a}: E[a][c, b] = eta[a, b, c]."""
    return eta.transpose(0, 2, 1)


def rho_split(rep: Representation, g_V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g_V-symmetric and g_V-skew parts of rho on the H basis."""
    rho_H = rep.rho_H
    adj = np.array([np.linalg.solve(g_V, r.T @ g_V) for r in rho_H])
    return 0.5 * (rho_H + adj), 0.5 * (rho_H - adj)


def torsion_report(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray,
                   tol: float = 1e-9) -> Report:
    g, J = metric.g, sm.model.J
    E = eta_matrices(eta)
    scale = max(1.0, _mx(sm.model.tau))
    skew = max(_mx(e.T @ g + g @ e) for e in E) / scale
    E_J = np.einsum("ia,ikl->akl", J, E, optimize=True)  # eta_{J e_a}
    checks = [
        Check("eta_skew", skew, tol),
        Check("eta_JX", max(_mx(E_J[a] - E[a] @ J) for a in range(len(E))) / scale, tol),
        Check("eta_anti_J", max(_mx(e @ J + J @ e) for e in E) / scale, tol),
    ]
    values: dict[str, Any] = {}
    if sm.is_semidirect:
        Vs, Hs = sm.module_slice, sm.H_slice
        checks += [
            Check("eta_VV_in_H", _mx(eta[Vs, Vs][:, :, Vs]) / scale, tol),
            Check("eta_HV_in_V", _mx(eta[Hs, Vs][:, :, Hs]) / scale, tol),
            Check("eta_VH_in_V", _mx(eta[Vs, Hs][:, :, Hs]) / scale, tol),
            Check("eta_HH_zero", _mx(eta[Hs, Hs]) / scale, tol),
        ]
        g_V = g[Vs, Vs]
        rho_plus, rho_minus = rho_split(sm.rep, g_V)
        # g(eta_{v1} v2, x) = g_V(rho+(x) v1, v2) ; g(eta_x v1, v2) = g_V(rho-(x) v1, v2)
        lhs2 = np.einsum("abk,kx->abx", eta[Vs, Vs][:, :, Hs], g[Hs, Hs], optimize=True)
        rhs2 = np.einsum("xka,kb->abx", rho_plus, g_V, optimize=True)
        lhs3 = np.einsum("xak,kb->xab", eta[Hs, Vs][:, :, Vs], g_V, optimize=True)
        rhs3 = np.einsum("xka,kb->xab", rho_minus, g_V, optimize=True)
        checks += [
            Check("eta_rho_plus", _mx(lhs2 - rhs2) / scale, tol),
            Check("eta_rho_minus", _mx(lhs3 - rhs3) / scale, tol),
        ]
        values["eta_H_norm"] = _mx(eta[Hs])
    return Report(tuple(checks), values)


# ---------------------------------------------------------------------------
# Curvature


def curvature_operators(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray) -> np.ndarray:
    """Rop[a, b] is the matrix of R(e_a, e_b)."""
    E = eta_matrices(eta)
    tau = sm.model.tau
    comm = np.einsum("aij,bjk->abik", E, E, optimize=True)
    comm = comm - comm.transpose(1, 0, 2, 3)
    torsion_term = np.einsum("abk,kij->abij", tau, E, optimize=True)
    return sm.model.RD - comm + torsion_term


def riemann_curvature(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray | None = None,
                      tol: float = 1e-9) -> np.ndarray:
    """Lowered Riemann tensor from the comparison formula.

    Raises SymmetryViolation when pair symmetry fails, which signals a metric
    that is not compatible with the model.
    """
    eta = intrinsic_torsion(sm, metric) if eta is None else eta
    Rop = curvature_operators(sm, metric, eta)
    Rg = np.einsum("abkc,kd->abcd", Rop, metric.g, optimize=True)
    scale = max(1.0, _mx(Rg))
    pair = _mx(Rg - Rg.transpose(2, 3, 0, 1)) / scale
    if pair > tol * 100:
        raise SymmetryViolation(f"curvature is not pair-symmetric (residual {pair:.2e})")
    return Rg


def riemann_symmetry_report(Rg: np.ndarray, tol: float = 1e-9) -> Report:
    scale = max(1.0, _mx(Rg))
    bianchi = Rg + Rg.transpose(1, 2, 0, 3) + Rg.transpose(2, 0, 1, 3)
    return Report((
        Check("R_antisym_12", _mx(Rg + Rg.transpose(1, 0, 2, 3)) / scale, tol),
        Check("R_antisym_34", _mx(Rg + Rg.transpose(0, 1, 3, 2)) / scale, tol),
        Check("R_pair_symmetry", _mx(Rg - Rg.transpose(2, 3, 0, 1)) / scale, tol),
        Check("R_first_bianchi", _mx(bianchi) / scale, tol),
    ))


def curvature_component_report(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray,
                               Rg: np.ndarray, tol: float = 1e-9) -> Report:
    """The four block formulas for the curvature of a semidirect model."""
    rep = sm.rep
    Vs, Hs = sm.module_slice, sm.H_slice
    g = metric.g
    g_V, g_H = g[Vs, Vs], g[Hs, Hs]
    scale = max(1.0, _mx(Rg))
    # (i) vanishing mixed components
    zero_i = max(_mx(Rg[Vs, Vs, Vs, Hs]), _mx(Rg[Hs, Hs, Hs, Vs]))
    # (ii) R(x1, x2, x3, x4) = g_H([[x1, x2], x3], x4)
    c = sm.model.algebra.structconsts
    H_amb = list(sm.H_block)
    cHH = c[np.ix_(H_amb, H_amb)]  # [x1, x2] in ambient coords
    nested = np.einsum("abk,kcl->abcl", cHH, c[:, H_amb, :][:, :, H_amb], optimize=True)
    pred_ii = np.einsum("abcl,ld->abcd", nested, g_H, optimize=True)
    res_ii = _mx(Rg[Hs, Hs, Hs, Hs] - pred_ii)
    # (iii) R(v1, x1, v2, x2) = -g(rho+(x1) v1, rho+(x2) v2) + g([rho-(x1), rho+(x2)] v1, v2)
    rho_plus, rho_minus = rho_split(rep, g_V)
    first = -np.einsum("xka,kl,ylb->axby", rho_plus, g_V, rho_plus, optimize=True)
    comm = np.einsum("xij,yjk->xyik", rho_minus, rho_plus, optimize=True) - np.einsum("yij,xjk->xyik", rho_plus, rho_minus, optimize=True)
    second = np.einsum("xyka,kb->axby", comm, g_V, optimize=True)
    res_iii = _mx(Rg[Vs, Hs, Vs, Hs] - (first + second))
    # (iv) R(v1, v2, v3, v4) = g(eta_{v2} v3, eta_{v1} v4) - g(eta_{v1} v3, eta_{v2} v4)
    eVV = eta[Vs, Vs]
    term = np.einsum("bck,adl,kl->abcd", eVV, eVV, g, optimize=True)
    res_iv = _mx(Rg[Vs, Vs, Vs, Vs] - (term - term.transpose(1, 0, 2, 3)))
    return Report((
        Check("curv_i_mixed_zero", zero_i / scale, tol),
        Check("curv_ii_HHHH", res_ii / scale, tol),
        Check("curv_iii_VHVH", res_iii / scale, tol),
        Check("curv_iv_VVVV", res_iv / scale, tol),
    ))


# ---------------------------------------------------------------------------
# Ricci


def ricci_from_curvature(Rg: np.ndarray, metric: MetricSpec) -> np.ndarray:
    return np.einsum("aibj,ij->ab", Rg, metric.inverse, optimize=True)


def Q_operator(rep: Representation, metric: MetricSpec) -> np.ndarray:
    g_V, g_H = metric.g_V, metric.g_H
    rho_plus, rho_minus = rho_split(rep, _sym(g_V))
    inv = np.linalg.inv(g_H)
    return np.einsum("ab,aij,bjk->ik", inv, rho_minus, rho_plus, optimize=True) - \
        np.einsum("ab,aij,bjk->ik", inv, rho_plus, rho_minus, optimize=True)


def trace_form_scale(rep: Representation, tol: float = 1e-9) -> dict[str, float]:
    """mu with Tr(rho(x) rho(y)) = mu B(x, y), fitted on L and on H separately."""
    rho = rep.rho_array
    trace_form = np.einsum("aij,bji->ab", rho, rho, optimize=True)
    B = killing_matrix(rep.L)
    mu = float(np.sum(trace_form * B) / np.sum(B * B))
    H = list(rep.cartan.H_indices)
    tH, BH = trace_form[np.ix_(H, H)], B[np.ix_(H, H)]
    mu_H = float(np.sum(tH * BH) / np.sum(BH * BH))
    return {
        "mu": mu,
        "mu_residual": _mx(trace_form - mu * B) / max(1.0, _mx(B)),
        "mu_H": mu_H,
        "mu_H_residual": _mx(tH - mu_H * BH) / max(1.0, _mx(BH)),
    }


@dataclass(frozen=True, eq=False)
class RicciResult:
    ric: np.ndarray
    Q: np.ndarray | None
    report: Report


def ricci(sm: SemidirectModel, metric: MetricSpec, Rg: np.ndarray | None = None,
          tol: float = 1e-9) -> RicciResult:
    """Ricci tensor by contraction, checked against the block formulas for semidirect models."""
    eta = None
    if Rg is None:
        eta = intrinsic_torsion(sm, metric)
        Rg = riemann_curvature(sm, metric, eta)
    ric = ricci_from_curvature(Rg, metric)
    scale = max(1.0, _mx(ric))
    checks = [Check("ric_symmetric", _mx(ric - ric.T) / scale, tol)]
    values: dict[str, Any] = {}
    Q = None
    if sm.is_semidirect:
        rep = sm.rep
        Vs, Hs = sm.module_slice, sm.H_slice
        g_V = metric.g[Vs, Vs]
        Q = Q_operator(rep, metric)
        checks.append(Check("ric_VV_is_Q", _mx(ric[Vs, Vs] - Q.T @ g_V) / scale, tol))
        checks.append(Check("ric_VH_zero", _mx(ric[Vs, Hs]) / scale, tol))
        rho_plus, _ = rho_split(rep, g_V)
        tr = np.einsum("aij,bji->ab", rho_plus, rho_plus, optimize=True)
        R_H = Rg[Hs, Hs, Hs, Hs]
        ric_H = np.einsum("aibj,ij->ab", R_H, np.linalg.inv(metric.g[Hs, Hs]), optimize=True)
        checks.append(Check("ric_HH_formula", _mx(ric[Hs, Hs] - (-tr + ric_H)) / scale, tol))
        if metric.S is not None and not rep.is_compact:
            S = metric.S
            n = S.shape[0]
            C = casimir(rep, metric.g_H)
            inv = np.linalg.inv(np.eye(n) - S @ S)
            checks.append(Check("Q_from_casimir", _mx(Q - 2.0 * S @ inv @ C) / scale, tol))
            rho_H = rep.rho_H
            lhs = tr
            rhs = np.einsum("ij,ajk,bki->ab", inv, rho_H, rho_H, optimize=True)
            checks.append(Check("trace_rho_plus", _mx(lhs - _sym(rhs)) / scale, tol))
        BH = killing_on_H(rep)
        const = float(np.sum(ric[Hs, Hs] * BH) / np.sum(BH * BH))
        values["H_constant"] = const
        values["H_constant_residual"] = _mx(ric[Hs, Hs] - const * BH) / scale
        values.update(trace_form_scale(rep))
    return RicciResult(ric, Q, Report(tuple(checks), values))


# ---------------------------------------------------------------------------
# Solitons


@dataclass(frozen=True)
class SolitonResult:
    is_soliton: bool
    lam: float
    derivation_coords: np.ndarray
    residual: float

    def to_json(self) -> dict[str, Any]:
        return {
            "is_soliton": self.is_soliton,
            "lambda": self.lam,
            "residual": self.residual,
            "derivation_coords": self.derivation_coords.tolist(),
        }


def tangent_derivations(sm: SemidirectModel, threshold: float = RANK_THRESHOLD) -> np.ndarray:
    """Tangent blocks zeta_V of a basis of Der(g)."""
    cached = sm.__dict__.get("_tangent_derivations")
    if cached is not None:
        return cached
    model = sm.model
    blocks = np.array([model.V_coords(D @ model.V_basis) for D in derivations(model.algebra, threshold)])
    object.__setattr__(sm, "_tangent_derivations", blocks)
    return blocks


def soliton_fit(sm: SemidirectModel, metric: MetricSpec, ric: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Least squares for ric = lam g + sym(g zeta) over lam and the derivation span."""
    g = metric.g
    blocks = tangent_derivations(sm)
    columns = [g.ravel()] + [_sym(z.T @ g).ravel() for z in blocks]
    A = np.array(columns).T
    coeff, *_ = np.linalg.lstsq(A, ric.ravel(), rcond=None)
    norm = float(np.linalg.norm(ric))
    miss = float(np.linalg.norm(A @ coeff - ric.ravel()))
    residual = miss / norm if norm > 1e-12 else miss
    return float(coeff[0]), coeff[1:], residual


def soliton_check(sm: SemidirectModel, metric: MetricSpec, ric: np.ndarray | None = None,
                  config: Config | None = None) -> SolitonResult:
    """Algebraic Ricci soliton test.

    Raises Inconclusive when the residual falls between the soliton and
    non-soliton thresholds.
    """
    config = config or Config()
    if ric is None:
        ric = ricci(sm, metric).ric
    lam, coords, residual = soliton_fit(sm, metric, ric)
    if residual < config.soliton_tol:
        return SolitonResult(True, lam, coords, residual)
    if residual > config.non_soliton_tol:
        return SolitonResult(False, lam, coords, residual)
    raise Inconclusive(f"soliton residual {residual:.3e} lies between "
                       f"{config.soliton_tol:g} and {config.non_soliton_tol:g}")


# ---------------------------------------------------------------------------
# Kahler-type conditions


def d_omega(sm: SemidirectModel, metric: MetricSpec) -> np.ndarray:
    """(d omega)(a, b, c) = -omega(tau(a,b), c) - omega(tau(b,c), a) - omega(tau(c,a), b)."""
    omega = sm.model.J.T @ metric.g
    t = np.einsum("abk,kc->abc", sm.model.tau, omega, optimize=True)
    return -(t + t.transpose(2, 0, 1) + t.transpose(1, 2, 0))


def _J_on_slots(tensor: np.ndarray, J: np.ndarray, slots: tuple[int, ...]) -> np.ndarray:
    out = tensor
    letters = "abcd"[: tensor.ndim]
    for s in slots:
        src = letters.replace(letters[s], "z")
        out = np.einsum(f"z{letters[s]},{src}->{letters}", J, out, optimize=True)
    return out


def gray_residuals(Rg: np.ndarray, J: np.ndarray) -> dict[str, float]:
    scale = max(1.0, _mx(Rg))
    G1 = _J_on_slots(Rg, J, (0, 1)) - Rg
    G2 = sum(_J_on_slots(Rg, J, (s,)) for s in range(4))
    G3 = _J_on_slots(Rg, J, (0, 1, 2, 3)) - Rg
    return {"G1": _mx(G1) / scale, "G2": _mx(G2) / scale, "G3": _mx(G3) / scale}


def kahler_checks(sm: SemidirectModel, metric: MetricSpec, Rg: np.ndarray | None = None,
                  tol: float = 1e-9) -> Report:
    J = sm.model.J
    dw = d_omega(sm, metric)
    P = (_J_on_slots(dw, J, (0, 1)) + _J_on_slots(dw, J, (0, 2)) + _J_on_slots(dw, J, (1, 2)))
    mixed = 0.25 * (3.0 * dw + P)  # (2,1) + (1,2) component
    scale = max(1.0, _mx(sm.model.tau))
    if Rg is None:
        Rg = riemann_curvature(sm, metric)
    gray = gray_residuals(Rg, J)
    d_norm = _mx(dw) / scale
    almost = d_norm < tol
    checks = [
        Check("quasi_kahler", _mx(mixed) / scale, tol),
        Check("gray_G2", gray["G2"], tol),
    ]
    values: dict[str, Any] = {"d_omega_norm": d_norm, "almost_kahler": almost, **gray}
    if sm.is_semidirect:
        Vs = sm.module_slice
        _, rho_minus = rho_split(sm.rep, metric.g[Vs, Vs])
        symmetric_action = _mx(rho_minus) < tol
        values["rho_H_symmetric"] = symmetric_action
        checks.append(Check("almost_kahler_iff_symmetric_action",
                            0.0 if symmetric_action == almost else 1.0, 0.5))
    return Report(tuple(checks), values)


# ---------------------------------------------------------------------------
# Foliation and reducibility


def foliation_check(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray | None = None,
                    tol: float = 1e-9) -> Report:
    """Polar foliation by the module directions with totally geodesic H."""
    eta = intrinsic_torsion(sm, metric) if eta is None else np.asarray(eta)
    Vs, Hs = sm.module_slice, sm.H_slice
    scale = max(1.0, _mx(sm.model.tau))
    eVV = eta[Vs, Vs]
    # O'Neill tensor: H-projection of nabla_{v1} v2 = -eta_{v1} v2 for invariant fields
    oneill = np.zeros_like(eVV)
    oneill[:, :, Hs] = -eVV[:, :, Hs]
    checks = Report((
        Check("H_totally_geodesic", _mx(eta[Hs, Hs]) / scale, tol),
        Check("eta_VV_symmetric", _mx(eVV - eVV.transpose(1, 0, 2)) / scale, tol),
        Check("oneill_is_minus_eta", _mx(oneill + eVV) / scale, tol),
    ))
    return Report(checks.checks, {"polar": checks.passed})


def curvature_nullity(Rg: np.ndarray, threshold: float = RANK_THRESHOLD) -> Subspace:
    """{u : R(u, ., ., .) = 0} in tangent coordinates."""
    m = Rg.shape[0]
    op = Rg.reshape(m, -1).T
    if _mx(op) < 1e-12:
        return Subspace.full(m)
    return numerical_nullspace(op, threshold)


@dataclass(frozen=True, eq=False)
class ReducibilityResult:
    irreducible: bool
    splitting: tuple[Subspace, ...]
    V_R: Subspace
    symmetric_commutant_dim: int

    def to_json(self) -> dict[str, Any]:
        return {
            "irreducible": self.irreducible,
            "splitting_dims": [s.dim for s in self.splitting],
            "V_R_dim": self.V_R.dim,
            "symmetric_commutant_dim": self.symmetric_commutant_dim,
        }


def _cluster_eigenspaces(matrix: np.ndarray, tol: float = 1e-6) -> list[np.ndarray]:
    eigs, vecs = np.linalg.eigh(_sym(matrix))
    groups: list[list[int]] = []
    for i, e in enumerate(eigs):
        if groups and abs(e - eigs[groups[-1][-1]]) < tol * max(1.0, abs(e)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return [vecs[:, g] for g in groups]


def reducibility_test(sm: SemidirectModel, metric: MetricSpec, Rg: np.ndarray | None = None,
                      eta: np.ndarray | None = None,
                      threshold: float = RANK_THRESHOLD) -> ReducibilityResult:
    """Detect a g-orthogonal splitting invariant under the holonomy generators and eta."""
    eta = intrinsic_torsion(sm, metric) if eta is None else eta
    Rg = riemann_curvature(sm, metric, eta) if Rg is None else Rg
    m = sm.model.dim_V
    g = metric.g
    V_R = curvature_nullity(Rg, threshold)
    if V_R.dim == m:
        parts = tuple(column_span(np.eye(m)[:, [i]], n=m) for i in range(m)) if m > 1 else (V_R,)
        return ReducibilityResult(m <= 1, parts, V_R, m * (m + 1) // 2)
    L = np.linalg.cholesky(g)
    to_on = L.T
    from_on = np.linalg.inv(L.T)
    if V_R.dim:
        complement = numerical_nullspace(V_R.basis.T @ g)
        return ReducibilityResult(False, (V_R, complement), V_R, 2)
    gens = []
    RD = sm.model.RD.reshape(-1, m, m)
    hol = column_span(np.array([r.ravel() for r in RD]).T, threshold, n=m * m) if _mx(RD) > 1e-12 \
        else Subspace.zero(m * m)
    gens += [b.reshape(m, m) for b in hol.basis.T]
    gens += list(eta_matrices(eta))
    gens = [to_on @ a @ from_on for a in gens if _mx(a) > 1e-12]
    if not gens:
        comm = [e.reshape(m, m) for e in np.eye(m * m)]
    else:
        comm = commutant(gens, threshold)
    sym = [_sym(c) for c in comm]
    span = column_span(np.array([s.ravel() for s in sym]).T, threshold, n=m * m) if sym \
        else Subspace.zero(m * m)
    dim_sym = span.dim
    if dim_sym <= 1:
        return ReducibilityResult(True, (Subspace.full(m),), V_R, dim_sym)
    # generic symmetric element, deterministic weights
    weights = np.sqrt(np.arange(2, dim_sym + 2, dtype=float))
    element = sum(w * b.reshape(m, m) for w, b in zip(weights, span.basis.T))
    pieces = _cluster_eigenspaces(element)
    splitting = tuple(column_span(from_on @ p, n=m) for p in pieces)
    return ReducibilityResult(False, splitting, V_R, dim_sym)


def module_null_directions(sm: SemidirectModel, metric: MetricSpec,
                           threshold: float = RANK_THRESHOLD) -> Subspace:
    """{v in V : rho+(H) v = 0}, embedded in tangent coordinates."""
    Vs = sm.module_slice
    rho_plus, _ = rho_split(sm.rep, metric.g[Vs, Vs])
    n = sm.dim_module
    m = sm.model.dim_V
    null = numerical_nullspace(np.vstack(list(rho_plus)), threshold) if _mx(rho_plus) > 1e-12 \
        else Subspace.full(n)
    emb = np.zeros((m, null.dim))
    emb[Vs] = null.basis
    return column_span(emb, n=m) if null.dim else Subspace.zero(m)


def splitting_matches(result: ReducibilityResult, blocks: list[Subspace], angle_tol: float = 1e-6) -> bool:
    if len(result.splitting) != len(blocks):
        return False
    remaining = list(blocks)
    for piece in result.splitting:
        match = [b for b in remaining if principal_angle(piece, b) < angle_tol]
        if not match:
            return False
        remaining.remove(match[0])
    return True


# ---------------------------------------------------------------------------
# Package


@dataclass(frozen=True, eq=False)
class GeometryPackage:
    metric: MetricSpec
    eta: np.ndarray
    Rg: np.ndarray
    ric: np.ndarray
    Q: np.ndarray | None
    omega: np.ndarray
    report: Report = field(default_factory=lambda: Report(()))

    def to_json(self) -> dict[str, Any]:
        return {
            "metric": self.metric.to_json(),
            "eta": self.eta.tolist(),
            "Rg": self.Rg.tolist(),
            "ric": self.ric.tolist(),
            "Q": None if self.Q is None else self.Q.tolist(),
            "omega": self.omega.tolist(),
            "checks": self.report.to_json(),
            "values": self.report.values,
        }


def geometry_package(sm: SemidirectModel, metric: MetricSpec | None = None,
                     tol: float = 1e-9) -> GeometryPackage:
    metric = default_metric(sm) if metric is None else metric
    eta = intrinsic_torsion(sm, metric)
    Rg = riemann_curvature(sm, metric, eta, tol)
    ric = ricci(sm, metric, Rg, tol)
    report = metric_invariance_report(sm, metric, tol)
    report = report.merged(torsion_report(sm, metric, eta, tol))
    report = report.merged(riemann_symmetry_report(Rg, tol))
    if sm.is_semidirect:
        report = report.merged(curvature_component_report(sm, metric, eta, Rg, tol))
    report = report.merged(ric.report)
    omega = sm.model.J.T @ metric.g
    return GeometryPackage(metric, eta, Rg, ric.ric, ric.Q, omega, report)


def sectional_H_extremes(sm: SemidirectModel, metric: MetricSpec, Rg: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of the curvature operator on Lambda^2 H in a g_H-orthonormal frame."""
    Hs = sm.H_slice
    g_H = metric.g[Hs, Hs]
    L = np.linalg.cholesky(g_H)
    Linv = np.linalg.inv(L)
    R_H = np.einsum("abcd,ia,jb,kc,ld->ijkl", Rg[Hs, Hs, Hs, Hs], Linv, Linv, Linv, Linv, optimize=True)
    dH = R_H.shape[0]
    pairs = [(a, b) for a in range(dH) for b in range(a + 1, dH)]
    # quadratic form X -> R(X, X) with R(x, y, x, y) the sectional numerator
    matrix = np.array([[R_H[a, b, c, d] for c, d in pairs] for a, b in pairs])
    eigs = np.linalg.eigvalsh(_sym(matrix))
    return float(eigs[0]), float(eigs[-1])
