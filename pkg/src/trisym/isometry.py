"""Killing generators of an Ambrose-Singer model by iterated stabilizers.

Work happens in a g-orthonormal frame of the tangent space, where so(V, g)
is the space of skew matrices.  i^0 stabilizes the curvature tensor and each
refinement keeps the F whose images l_v(F) = [F, eta_v] - eta_{F v} stay in the
previous space.  The limit i carries the bracket of g_b = i + V.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .config import RANK_THRESHOLD
from .errors import InvalidDimension, JacobiViolation, TheoremViolation
from .geometry import (
    MetricSpec,
    ReducibilityResult,
    default_metric,
    eta_matrices,
    intrinsic_torsion,
    reducibility_test,
    riemann_curvature,
)
from .lie_core import (
    LieAlgebra,
    Subspace,
    column_span,
    commutant,
    commutator_closure_residual,
    jacobi_residual,
    numerical_nullspace,
)
from .semidirect import SemidirectModel

# The curvature stabilizer is a dense solve with (dim so(V)) unknowns.
MAX_TANGENT_DIM = 24
# working-set bound (array entries) for batched tensor actions
CHUNK_ENTRIES = 8_000_000


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


@dataclass(frozen=True, eq=False)
class OrthonormalFrame:
    """Model tensors re-expressed in a g-orthonormal basis."""

    to_on: np.ndarray
    from_on: np.ndarray
    Rg: np.ndarray
    E: np.ndarray
    tau: np.ndarray
    RD: np.ndarray
    J: np.ndarray

    @property
    def dim(self) -> int:
        return self.J.shape[0]


def orthonormal_frame(sm: SemidirectModel, metric: MetricSpec, eta: np.ndarray,
                      Rg: np.ndarray) -> OrthonormalFrame:
    L = np.linalg.cholesky(metric.g)
    to_on = L.T  # y = L^T x
    from_on = np.linalg.inv(L.T)
    P = from_on  # columns: orthonormal basis vectors in tangent coordinates
    Rg_on = np.einsum("abcd,ai,bj,ck,dl->ijkl", Rg, P, P, P, P, optimize=True)
    E = eta_matrices(eta)
    E_on = np.einsum("ai,ajk->ijk", P, E, optimize=True)
    E_on = np.einsum("jk,akl,lm->ajm", to_on, E_on, from_on, optimize=True)
    tau = np.einsum("ai,bj,abk,lk->ijl", P, P, sm.model.tau, to_on, optimize=True)
    RD = np.einsum("ai,bj,abkl->ijkl", P, P, sm.model.RD, optimize=True)
    RD = np.einsum("mk,ijkl,ln->ijmn", to_on, RD, from_on, optimize=True)
    J = to_on @ sm.model.J @ from_on
    return OrthonormalFrame(to_on, from_on, Rg_on, E_on, tau, RD, J)


def skew_basis(m: int) -> np.ndarray:
    basis = []
    for a in range(m):
        for b in range(a + 1, m):
            F = np.zeros((m, m))
            F[a, b], F[b, a] = -1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)
            basis.append(F)
    return np.array(basis).reshape(-1, m, m)


def curvature_action(F: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Derivation action of F on a 4-tensor in an orthonormal frame."""
    return (np.einsum("ea,ebcd->abcd", F, R, optimize=True) + np.einsum("eb,aecd->abcd", F, R, optimize=True)
            + np.einsum("ec,abed->abcd", F, R, optimize=True) + np.einsum("ed,abce->abcd", F, R, optimize=True))


def l_operator(frame: OrthonormalFrame, F: np.ndarray, v: int) -> np.ndarray:
    """l_v(F) = [F, eta_v] - eta_{F v}."""
    E = frame.E
    return F @ E[v] - E[v] @ F - np.einsum("w,wij->ij", F[:, v], E, optimize=True)


def _span_of(mats: np.ndarray, threshold: float) -> np.ndarray:
    m = mats.shape[-1]
    if len(mats) == 0:
        return np.zeros((0, m, m))
    span = column_span(mats.reshape(len(mats), -1).T, threshold, n=m * m)
    return span.basis.T.reshape(-1, m, m)


def _chunks(count: int, size: int) -> list[slice]:
    return [slice(start, min(count, start + size)) for start in range(0, count, size)]


def curvature_actions(Fs: np.ndarray, R: np.ndarray) -> np.ndarray:
    """curvature_action for a stack of matrices."""
    return (np.einsum("pea,ebcd->pabcd", Fs, R, optimize=True)
            + np.einsum("peb,aecd->pabcd", Fs, R, optimize=True)
            + np.einsum("pec,abed->pabcd", Fs, R, optimize=True)
            + np.einsum("ped,abce->pabcd", Fs, R, optimize=True))


def l_operators(frame: OrthonormalFrame, Fs: np.ndarray) -> np.ndarray:
    """l_v(F) for every F in the stack and every basis vector v, shape (F, v, m, m)."""
    E = frame.E
    return (np.einsum("pij,vjk->pvik", Fs, E, optimize=True)
            - np.einsum("vij,pjk->pvik", E, Fs, optimize=True)
            - np.einsum("pwv,wij->pvij", Fs, E, optimize=True))


def _chunk_size(m: int) -> int:
    return max(1, CHUNK_ENTRIES // max(1, m ** 4))


def stabilizer_of_curvature(frame: OrthonormalFrame, threshold: float = RANK_THRESHOLD) -> np.ndarray:
    m = frame.dim
    basis = skew_basis(m)
    rows_a, rows_b = np.triu_indices(m, 1)
    # F.R keeps the pair antisymmetries and the pair exchange symmetry
    upper = np.triu_indices(len(rows_a))
    blocks = []
    for chunk in _chunks(len(basis), _chunk_size(m)):
        act = curvature_actions(basis[chunk], frame.Rg)
        act = act[:, rows_a, rows_b][:, :, rows_a, rows_b]
        blocks.append(act[:, upper[0], upper[1]])
    system = np.vstack(blocks).T
    if _mx(system) < 1e-12:
        return basis
    null = numerical_nullspace(system, threshold)
    return np.einsum("pk,pij->kij", null.basis, basis, optimize=True)


@dataclass(frozen=True, eq=False)
class IsometryResult:
    """i as g-skew endomorphisms of the tangent space (model coordinates)."""

    i_basis: np.ndarray
    k_stabilized: int
    dims: tuple[int, ...]
    frame: OrthonormalFrame
    gb: LieAlgebra | None = None
    dichotomy: dict[str, Any] | None = None
    gb_jacobi: float | None = None

    @property
    def orthonormal_basis(self) -> np.ndarray:
        """The same generators written in the g-orthonormal frame."""
        f = self.frame
        return np.einsum("ij,pjk,kl->pil", f.to_on, self.i_basis, f.from_on, optimize=True) if len(self.i_basis) \
            else np.zeros((0, f.dim, f.dim))

    @property
    def dim_i(self) -> int:
        return len(self.i_basis)

    @property
    def dim(self) -> int:
        return self.dim_i + self.frame.dim

    def to_json(self) -> dict[str, Any]:
        return {
            "dim_i": self.dim_i,
            "k_stabilized": self.k_stabilized,
            "filtration_dims": list(self.dims),
            "dim_gb": self.dim,
            "gb_jacobi": self.gb_jacobi,
            "dichotomy": self.dichotomy,
        }


def _to_tangent(frame: OrthonormalFrame, basis_on: np.ndarray) -> np.ndarray:
    if not len(basis_on):
        return np.zeros((0, frame.dim, frame.dim))
    return np.einsum("ij,pjk,kl->pil", frame.from_on, basis_on, frame.to_on, optimize=True)


def model_frame(sm: SemidirectModel, metric: MetricSpec) -> OrthonormalFrame:
    if sm.model.dim_V > MAX_TANGENT_DIM:
        raise InvalidDimension(f"isometry solve is limited to tangent dimension {MAX_TANGENT_DIM}")
    eta = intrinsic_torsion(sm, metric)
    Rg = riemann_curvature(sm, metric, eta)
    return orthonormal_frame(sm, metric, eta, Rg)


def i_filtration(sm: SemidirectModel, metric: MetricSpec | None = None,
                 threshold: float = RANK_THRESHOLD) -> IsometryResult:
    """i^0 = stab(R^g) in so(V, g), refined by l_v-stability until the dimension settles."""
    metric = default_metric(sm) if metric is None else metric
    frame = model_frame(sm, metric)
    m = frame.dim
    current = stabilizer_of_curvature(frame, threshold)
    dims = [len(current)]
    k = 0
    while len(current):
        flat = current.reshape(len(current), -1).T  # orthonormal columns
        projector_out = np.eye(m * m) - flat @ flat.T
        images = l_operators(frame, current).reshape(len(current), m, m * m)
        system = np.einsum("xy,pvy->vxp", projector_out, images, optimize=True).reshape(m * m * m, -1)
        if _mx(system) < 1e-12:
            break
        null = numerical_nullspace(system, threshold)
        if null.dim == len(current):
            break
        current = _span_of(np.einsum("pk,pij->kij", null.basis, current, optimize=True), threshold)
        k += 1
        dims.append(len(current))
        if k > m * (m - 1) // 2:
            raise TheoremViolation("stabilizer filtration failed to terminate")
    return IsometryResult(_to_tangent(frame, current), k, tuple(dims), frame)


def build_killing_algebra(sm: SemidirectModel, metric: MetricSpec | None, i_basis: np.ndarray,
                          tol: float = 1e-9, frame: OrthonormalFrame | None = None) -> LieAlgebra:
    """Structure constants of g_b = i + V.

    The basis is (i basis, g-orthonormal tangent basis) with
    [F, G] the commutator, [F, v] = F v + l_v(F) and [v1, v2] = tau + R^D.
    """
    return killing_algebra_with_residual(sm, metric, i_basis, tol, frame)[0]


def killing_algebra_with_residual(sm: SemidirectModel, metric: MetricSpec | None, i_basis: np.ndarray,
                                  tol: float = 1e-9,
                                  frame: OrthonormalFrame | None = None) -> tuple[LieAlgebra, float]:
    """build_killing_algebra together with its Jacobi residual."""
    if frame is None:
        frame = model_frame(sm, default_metric(sm) if metric is None else metric)
    i_basis = np.asarray(i_basis, dtype=float).reshape(-1, frame.dim, frame.dim)
    basis = np.einsum("ij,pjk,kl->pil", frame.to_on, i_basis, frame.from_on, optimize=True)
    r, m = len(basis), frame.dim
    n = r + m
    if r and len(_span_of(basis, RANK_THRESHOLD)) != r:
        raise InvalidDimension("i basis is linearly dependent")
    c = np.zeros((n, n, n))
    RD = frame.RD.reshape(m, m, m * m)
    if r:
        design = basis.reshape(r, -1).T
        pinv = np.linalg.pinv(design)
        comm = np.einsum("pij,qjk->pqik", basis, basis, optimize=True)
        comm = (comm - comm.transpose(1, 0, 2, 3)).reshape(r, r, m * m)
        ls = l_operators(frame, basis).reshape(r, m, m * m)
        coeff_comm = comm @ pinv.T
        coeff_l = ls @ pinv.T
        coeff_RD = RD @ pinv.T
        worst = max(_mx(comm - coeff_comm @ design.T), _mx(ls - coeff_l @ design.T),
                    _mx(RD - coeff_RD @ design.T))
        c[:r, :r, :r] = coeff_comm
        c[:r, r:, :r] = coeff_l
        # [F_p, e_a] has tangent part F_p e_a
        c[:r, r:, r:] = basis.transpose(0, 2, 1)
        c[r:, :r] = -c[:r, r:].transpose(1, 0, 2)
        c[r:, r:, :r] = coeff_RD
    else:
        worst = _mx(RD)
    c[r:, r:, r:] = frame.tau
    if worst > 1e-7:
        raise JacobiViolation(f"brackets leave i (miss {worst:.2e}); the filtration is incomplete")
    names = tuple([f"F{p}" for p in range(r)] + [f"e{a}" for a in range(m)])
    algebra = LieAlgebra(c, names)
    jac = jacobi_residual(algebra)
    if jac > tol * max(1.0, _mx(c)) ** 2:
        raise JacobiViolation(f"g_b fails the Jacobi identity (residual {jac:.2e})")
    return algebra, jac


def closure_residual(result: IsometryResult) -> float:
    return commutator_closure_residual(list(result.orthonormal_basis))


def curvature_residual(result: IsometryResult) -> float:
    basis = result.orthonormal_basis
    m = result.frame.dim
    return max((_mx(curvature_actions(basis[chunk], result.frame.Rg))
                for chunk in _chunks(len(basis), _chunk_size(m))), default=0.0)


def l_invariance_residual(result: IsometryResult) -> float:
    frame, basis = result.frame, result.orthonormal_basis
    if not len(basis):
        return 0.0
    flat = _span_of(basis, RANK_THRESHOLD).reshape(len(basis), -1).T
    out = np.eye(flat.shape[0]) - flat @ flat.T
    return max(_mx(out @ l_operator(frame, F, v).ravel()) for F in basis for v in range(frame.dim))


def skew_residual(result: IsometryResult, metric: MetricSpec) -> float:
    """max |F^T g + g F| over the tangent-coordinate basis."""
    g = metric.g
    return max((_mx(F.T @ g + g @ F) for F in result.i_basis), default=0.0)


def hbar_J(frame: OrthonormalFrame, threshold: float = RANK_THRESHOLD) -> np.ndarray:
    """Skew F commuting with J and annihilating tau and R^D, in the orthonormal frame."""
    m = frame.dim
    basis = skew_basis(m)
    tau, RD, J = frame.tau, frame.RD, frame.J
    comm = np.einsum("pij,jk->pik", basis, J, optimize=True) - np.einsum("ij,pjk->pik", J, basis, optimize=True)
    comm = comm.reshape(len(basis), -1).T
    if _mx(comm) > 1e-12:
        null = numerical_nullspace(comm, threshold)
        if not null.dim:
            return np.zeros((0, m, m))
        basis = np.einsum("pk,pij->kij", null.basis, basis, optimize=True)
    rows_a, rows_b = np.triu_indices(m, 1)
    columns = []
    for chunk in _chunks(len(basis), _chunk_size(m)):
        Fs = basis[chunk]
        # derivation action on tau(a, b) = sum_k tau[a, b, k] e_k
        tau_act = (np.einsum("abk,plk->pabl", tau, Fs, optimize=True) - np.einsum("pea,ebl->pabl", Fs, tau, optimize=True)
                   - np.einsum("peb,ael->pabl", Fs, tau, optimize=True))
        RD_act = (np.einsum("pik,abkj->pabij", Fs, RD, optimize=True)
                  - np.einsum("abik,pkj->pabij", RD, Fs, optimize=True)
                  - np.einsum("pea,ebij->pabij", Fs, RD, optimize=True)
                  - np.einsum("peb,aeij->pabij", Fs, RD, optimize=True))
        RD_act = RD_act[:, rows_a, rows_b]
        columns.append(np.concatenate([tau_act.reshape(len(Fs), -1), RD_act.reshape(len(Fs), -1)], axis=1))
    system = np.vstack(columns).T
    if _mx(system) < 1e-12:
        return basis
    null = numerical_nullspace(system, threshold)
    if not null.dim:
        return np.zeros((0, m, m))
    return np.einsum("pk,pij->kij", null.basis, basis, optimize=True)


def hbar_membership_residual(result: IsometryResult, threshold: float = RANK_THRESHOLD) -> float:
    """Distance of the J-commuting stabilizer of (tau, R^D) from i."""
    hbar = hbar_J(result.frame, threshold)
    if not len(hbar):
        return 0.0
    basis = result.orthonormal_basis
    if not len(basis):
        return _mx(hbar)
    span = column_span(basis.reshape(len(basis), -1).T, threshold)
    return span.distance_to(hbar.reshape(len(hbar), -1).T)


def _split_by_J(basis: np.ndarray, J: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    m = J.shape[0]
    if not len(basis):
        empty = np.zeros((0, m, m))
        return empty, empty
    comm = np.array([(F @ J - J @ F).ravel() for F in basis]).T
    anti = np.array([(F @ J + J @ F).ravel() for F in basis]).T
    plus = numerical_nullspace(comm, threshold) if _mx(comm) > 1e-12 else Subspace.full(len(basis))
    minus = numerical_nullspace(anti, threshold) if _mx(anti) > 1e-12 else Subspace.full(len(basis))
    return (np.einsum("pk,pij->kij", plus.basis, basis, optimize=True) if plus.dim else np.zeros((0, m, m)),
            np.einsum("pk,pij->kij", minus.basis, basis, optimize=True) if minus.dim else np.zeros((0, m, m)))


def dichotomy(sm: SemidirectModel, metric: MetricSpec | None, result: IsometryResult,
              reducibility: ReducibilityResult | None = None,
              threshold: float = RANK_THRESHOLD) -> dict[str, Any]:
    """Split i by commutation with J and classify the metric.

    ``holomorphic_isometries`` is raised when i^- = 0 and ``symmetric_candidate``
    when V^+ = 0 or eta annihilates the curvature (the Levi-Civita curvature is
    parallel).  Both flags together are reported as symmetric.  When the metric
    is reducible the i^- count is also given per detected factor; a reducible
    input without a usable splitting is reported as inconclusive.
    """
    frame = result.frame
    m = frame.dim
    i_plus, i_minus = _split_by_J(result.orthonormal_basis, frame.J, threshold)
    if len(i_minus):
        V_minus = column_span(np.hstack(list(i_minus)), threshold, n=m)
    else:
        V_minus = Subspace.zero(m)
    V_plus_dim = m - V_minus.dim
    parallel = max((_mx(curvature_action(frame.E[v], frame.Rg)) for v in range(m)), default=0.0)
    locally_symmetric = parallel < 1e-9 * max(1.0, _mx(frame.Rg))
    holomorphic = len(i_minus) == 0
    symmetric_candidate = V_plus_dim == 0 or locally_symmetric
    if symmetric_candidate:
        classification = "symmetric"
    elif holomorphic:
        classification = "holomorphic_isometries"
    else:
        classification = "inconclusive"
    out: dict[str, Any] = {
        "i_plus_dim": len(i_plus),
        "i_minus_dim": len(i_minus),
        "V_plus_dim": V_plus_dim,
        "V_minus_dim": V_minus.dim,
        "split_complete": len(i_plus) + len(i_minus) == result.dim_i,
        "holomorphic_isometries": holomorphic,
        "symmetric_candidate": symmetric_candidate,
        "locally_symmetric": locally_symmetric,
        "classification": classification,
    }
    if reducibility is None and metric is not None:
        reducibility = reducibility_test(sm, metric)
    if reducibility is not None and not reducibility.irreducible:
        factors = []
        for piece in reducibility.splitting:
            q, _ = np.linalg.qr(frame.to_on @ piece.basis)
            proj = q @ q.T
            preserving = [F for F in i_minus if _mx(F @ proj - proj @ F) < 1e-7]
            factors.append({"dim": piece.dim, "i_minus_dim": len(preserving)})
        out["factors"] = factors
        if not factors:
            out["classification"] = "inconclusive"
    return out


def isometry_analysis(sm: SemidirectModel, metric: MetricSpec | None = None,
                      threshold: float = RANK_THRESHOLD) -> IsometryResult:
    """Filtration, g_b and dichotomy in one call."""
    metric = default_metric(sm) if metric is None else metric
    result = i_filtration(sm, metric, threshold)
    gb, jac = killing_algebra_with_residual(sm, metric, result.i_basis, frame=result.frame)
    dich = dichotomy(sm, metric, result, threshold=threshold)
    return IsometryResult(result.i_basis, result.k_stabilized, result.dims, result.frame, gb, dich, jac)


def centralizer_isometry_dim(sm: SemidirectModel, g_V: np.ndarray | None = None,
                             threshold: float = RANK_THRESHOLD) -> int:
    """dim of c intersected with so(V, g_V).

    For a background metric the centralizer is closed under the adjoint and this
    is dim c^-; for deformed metrics only the skew elements that stay in c count.
    """
    rep = sm.rep
    g_V = rep.h_V if g_V is None else np.asarray(g_V, dtype=float)
    basis = commutant(rep.rho, threshold)
    if not basis:
        return 0
    system = np.array([(g_V @ f + f.T @ g_V).ravel() for f in basis]).T
    if _mx(system) < 1e-12:
        return len(basis)
    return numerical_nullspace(system, threshold).dim


def predicted_type_three_dim(sm: SemidirectModel, metric: MetricSpec | None = None) -> int:
    """dim V + dim L + dim (c and so(g_V)), the isometry dimension of a Type III metric."""
    g_V = None if metric is None else metric.g[sm.module_slice, sm.module_slice]
    return sm.dim_module + len(sm.L_block) + centralizer_isometry_dim(sm, g_V)
