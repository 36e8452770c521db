"""Order-3 automorphisms: canonical reductive split, J, torsion and curvature.

A model stores the isotropy part ``h`` and the complement ``V`` through two
bases.  Torsion ``tau[a, b]`` is the V-coordinate vector of ``[v_a, v_b]``,
``frak_r[a, b]`` the h-coordinate vector, and ``RD[a, b]`` the matrix of
``ad`` of that h-element restricted to V, so ``RD[a, b] @ w`` is the canonical
curvature applied to ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .config import RANK_THRESHOLD
from .errors import NotAutomorphism, NotOrderThree, SigmaIsIdentity, TheoremViolation
from .lie_core import (
    LieAlgebra,
    Subspace,
    bracket_span,
    column_span,
    ideal_residual,
    intersect,
    killing_matrix,
    killing_radical,
    numerical_nullspace,
    principal_angle,
    radical,
    subspace_sum,
)
from .report import Check, Report

Z0 = -0.5
Z1 = np.sqrt(3.0) / 2.0
BIANCHI_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True, eq=False)
class ThreeSymModel:
    """A Lie algebra with an order-3 automorphism and its derived tensors."""

    algebra: LieAlgebra
    sigma: np.ndarray
    h_basis: np.ndarray
    V_basis: np.ndarray
    J: np.ndarray
    tau: np.ndarray
    frak_r: np.ndarray
    RD: np.ndarray

    @property
    def dim_h(self) -> int:
        return self.h_basis.shape[1]

    @property
    def dim_V(self) -> int:
        return self.V_basis.shape[1]

    @cached_property
    def _split_inverse(self) -> np.ndarray:
        return np.linalg.inv(np.hstack([self.h_basis, self.V_basis]))

    def h_coords(self, x: np.ndarray) -> np.ndarray:
        """h-coordinates of algebra vectors (columns or a single vector)."""
        return self._split_inverse[: self.dim_h] @ x

    def V_coords(self, x: np.ndarray) -> np.ndarray:
        return self._split_inverse[self.dim_h:] @ x

    @cached_property
    def isotropy(self) -> np.ndarray:
        """iso[p] is the matrix of ad_{h_p} restricted to V, in V-coordinates."""
        c = self.algebra.structconsts
        out = np.einsum("ip,ja,ijk->pak", self.h_basis, self.V_basis, c, optimize=True)
        return np.einsum("bk,pak->pba", self._split_inverse[self.dim_h:], out, optimize=True)

    @cached_property
    def killing(self) -> np.ndarray:
        return killing_matrix(self.algebra)

    def subspace_V(self) -> Subspace:
        return column_span(self.V_basis, n=self.algebra.dim)

    def subspace_h(self) -> Subspace:
        return column_span(self.h_basis, n=self.algebra.dim)

    def to_json(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra.to_json(),
            "sigma": self.sigma.tolist(),
            "h_basis": self.h_basis.T.tolist(),
            "V_basis": self.V_basis.T.tolist(),
            "J": self.J.tolist(),
            "tau": self.tau.tolist(),
        }


def _automorphism_residual(algebra: LieAlgebra, sigma: np.ndarray) -> float:
    c = algebra.structconsts
    lhs = np.einsum("ijk,lk->ijl", c, sigma, optimize=True)
    rhs = np.einsum("ai,bj,abl->ijl", sigma, sigma, c, optimize=True)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def _check_split_basis(basis: np.ndarray, operator: np.ndarray, name: str, tol: float) -> None:
    if basis.shape[1] and np.max(np.abs(operator @ basis)) > tol * max(1.0, np.max(np.abs(basis))):
        raise TheoremViolation(f"supplied {name} basis is not in the expected eigenspace")


def reductive_split(algebra: LieAlgebra, sigma: np.ndarray, h_basis: np.ndarray | None = None,
                    V_basis: np.ndarray | None = None, tol: float = 1e-9) -> ThreeSymModel:
    """Split g = h + V for an order-3 automorphism and build J, tau, R^D.

    Optional bases let a caller keep a preferred coordinate layout; they are
    checked against the eigenspaces.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = algebra.dim
    eye = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(algebra.structconsts))))
    if sigma.shape != (n, n):
        raise NotAutomorphism("sigma has the wrong shape")
    if np.max(np.abs(sigma - eye)) < tol:
        raise SigmaIsIdentity("sigma is the identity")
    cube = sigma @ sigma @ sigma
    if np.max(np.abs(cube - eye)) > tol * 10 * max(1.0, np.max(np.abs(sigma)) ** 3):
        raise NotOrderThree(f"sigma^3 differs from 1 by {np.max(np.abs(cube - eye)):.2e}")
    aut = _automorphism_residual(algebra, sigma)
    if aut > tol * 10 * scale * max(1.0, np.max(np.abs(sigma)) ** 2):
        raise NotAutomorphism(f"sigma fails the bracket check by {aut:.2e}")

    fixed_op = sigma - eye
    rotate_op = sigma @ sigma + sigma + eye
    if h_basis is None:
        h_basis = numerical_nullspace(fixed_op).basis
    else:
        h_basis = np.asarray(h_basis, dtype=float).reshape(n, -1)
        _check_split_basis(h_basis, fixed_op, "h", 1e-8)
    if V_basis is None:
        V_basis = numerical_nullspace(rotate_op).basis
    else:
        V_basis = np.asarray(V_basis, dtype=float).reshape(n, -1)
        _check_split_basis(V_basis, rotate_op, "V", 1e-8)
    if h_basis.shape[1] + V_basis.shape[1] != n:
        raise TheoremViolation("eigenspace dimensions do not add up to dim g")

    split = np.hstack([h_basis, V_basis])
    inverse = np.linalg.inv(split)
    dh = h_basis.shape[1]
    to_h, to_V = inverse[:dh], inverse[dh:]
    sigma_V = to_V @ sigma @ V_basis
    J = (2.0 * sigma_V + np.eye(V_basis.shape[1])) / np.sqrt(3.0)

    c = algebra.structconsts
    products = np.einsum("ia,jb,ijk->abk", V_basis, V_basis, c, optimize=True)
    tau = np.einsum("ck,abk->abc", to_V, products, optimize=True)
    frak_r = np.einsum("pk,abk->abp", to_h, products, optimize=True)
    iso = np.einsum("ip,ja,ijk->pak", h_basis, V_basis, c, optimize=True)
    iso = np.einsum("bk,pak->pba", to_V, iso, optimize=True)
    RD = np.einsum("abp,pij->abij", frak_r, iso, optimize=True)
    return ThreeSymModel(algebra, sigma, h_basis, V_basis, J, tau, frak_r, RD)


def tau_map(model: ThreeSymModel, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("a,b,abc->c", v, w, model.tau, optimize=True)


def verify_model_identities(model: ThreeSymModel, tol: float = 1e-9) -> Report:
    """Residuals of the J-type identities of tau and frak_r and both Bianchi identities."""
    J = model.J
    tau, fr, RD = model.tau, model.frak_r, model.RD
    m = model.dim_V
    scale = max(1.0, float(np.max(np.abs(model.algebra.structconsts)))) ** 2
    t_JJ = np.einsum("ia,jb,ijc->abc", J, J, tau, optimize=True)
    t_vJ = np.einsum("jb,ajc->abc", J, tau, optimize=True)
    J_t = np.einsum("ck,abk->abc", J, tau, optimize=True)
    r_JJ = np.einsum("ia,jb,ijp->abp", J, J, fr, optimize=True)
    # first Bianchi: cyclic RD(va,vb)vc = cyclic tau(va, tau(vb,vc))
    rd_abc = np.einsum("abic->abci", RD)
    cyc_rd = rd_abc + rd_abc.transpose(1, 2, 0, 3) + rd_abc.transpose(2, 0, 1, 3)
    tt = np.einsum("bck,akd->abcd", tau, tau, optimize=True)
    cyc_tt = tt + tt.transpose(1, 2, 0, 3) + tt.transpose(2, 0, 1, 3)
    # second Bianchi: cyclic RD(tau(v1,v2), v3) = 0
    # R^D factors through the isotropy, so the cyclic sum is taken on frak_r first
    frt = np.einsum("abk,kcp->abcp", tau, fr, optimize=True)
    cyc_frt = (frt + frt.transpose(1, 2, 0, 3) + frt.transpose(2, 0, 1, 3)).reshape(m ** 3, -1)
    iso = model.isotropy.reshape(model.dim_h, m * m)
    rows = max(1, BIANCHI_CHUNK_ENTRIES // max(1, m * m))
    b2 = max((_mx(cyc_frt[s:s + rows] @ iso) for s in range(0, m ** 3, rows)), default=0.0)
    B = model.killing
    BhV = model.h_basis.T @ B @ model.V_basis
    BV = model.V_basis.T @ B @ model.V_basis
    rd_J = np.einsum("abij,jk->abik", RD, J, optimize=True) - np.einsum("ij,abjk->abik", J, RD, optimize=True)
    checks = [
        Check("TJ1_tau_JJ", _mx(t_JJ + tau) / scale, tol),
        Check("TJ1_tau_vJ", _mx(t_vJ + J_t) / scale, tol),
        Check("RJ1", _mx(r_JJ - fr) / scale, tol),
        Check("B1", _mx(cyc_rd - cyc_tt) / scale, tol),
        Check("B2", b2 / scale, tol),
        Check("B_inv_hV", _mx(BhV) / scale, tol),
        Check("B_inv_JJ", _mx(J.T @ BV @ J - BV) / scale, tol),
        Check("J_squared", _mx(J @ J + np.eye(m)), tol),
        Check("RD_commutes_J", _mx(rd_J) / scale, tol),
    ]
    if model.dim_h:
        Bh = model.h_basis.T @ B @ model.h_basis
        top = float(np.max(np.linalg.eigvalsh(0.5 * (Bh + Bh.T))))
        checks.append(Check("B_h_negative_definite", top / scale, 0.0))
    return Report(tuple(checks))


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


def transvection(model: ThreeSymModel, threshold: float = RANK_THRESHOLD) -> tuple[Subspace, Subspace]:
    """(V + [V, V], span of frak_r(V, V)) in ambient algebra coordinates."""
    n = model.algebra.dim
    V = model.subspace_V()
    gb = subspace_sum(V, bracket_span(model.algebra, V, V, threshold), threshold=threshold)
    m = model.dim_V
    holo_vectors = model.h_basis @ model.frak_r.reshape(m * m, -1).T
    hb = column_span(holo_vectors, threshold, n=n)
    gb_res = ideal_residual(model.algebra, gb)
    h_space = model.subspace_h()
    hb_res = _relative_ideal_residual(model.algebra, hb, h_space)
    scale = max(1.0, float(np.max(np.abs(model.algebra.structconsts))))
    if gb_res > 1e-7 * scale or hb_res > 1e-7 * scale:
        raise TheoremViolation("transvection algebra or holonomy algebra is not an ideal")
    return gb, hb


def _relative_ideal_residual(algebra: LieAlgebra, sub: Subspace, ambient: Subspace) -> float:
    if sub.dim == 0 or ambient.dim == 0:
        return 0.0
    products = bracket_span(algebra, ambient, sub)
    return sub.distance_to(products.basis) if products.dim else 0.0


@dataclass(frozen=True)
class NullityResult:
    W: Subspace
    from_killing: Subspace
    from_transvection: Subspace
    angles: tuple[float, float]


def curvature_nullity_W(model: ThreeSymModel, threshold: float = RANK_THRESHOLD,
                        angle_tol: float = 1e-6) -> NullityResult:
    """Curvature nullity inside V, computed three independent ways.

    Returned subspaces live in V-coordinates.
    """
    m = model.dim_V
    # v -> R^D(v, .) as a linear map into (m x m x m) values
    op = model.RD.transpose(1, 2, 3, 0).reshape(-1, m)
    if not np.any(np.abs(op) > 1e-13):
        W = Subspace.full(m)
    else:
        W = numerical_nullspace(op, threshold)
    krad = killing_radical(model.algebra, threshold)
    in_V = intersect(krad, model.subspace_V(), threshold)
    W_killing = column_span(model.V_coords(in_V.basis), threshold, n=m)
    gb, _ = transvection(model, threshold)
    sub = model.algebra.restricted(gb)
    rad = radical(sub, threshold)
    rad_ambient = gb.basis @ rad.basis
    rad_in_V = intersect(column_span(rad_ambient, threshold, n=model.algebra.dim),
                         model.subspace_V(), threshold)
    if rad_in_V.dim != rad.dim:
        raise TheoremViolation("the transvection radical is not contained in V")
    W_trans = column_span(model.V_coords(rad_in_V.basis), threshold, n=m)
    angles = (principal_angle(W, W_killing), principal_angle(W, W_trans))
    if max(angles) > angle_tol:
        raise TheoremViolation(
            f"curvature nullity dims {W.dim}/{W_killing.dim}/{W_trans.dim} disagree"
            f" (angles {angles[0]:.2e}, {angles[1]:.2e})")
    return NullityResult(W, W_killing, W_trans, angles)


@dataclass(frozen=True)
class NijenhuisResult:
    N: np.ndarray
    torsion_residual: float
    kernel: Subspace
    image: Subspace

    @property
    def kernel_dim(self) -> int:
        return self.kernel.dim

    @property
    def image_dim(self) -> int:
        return self.image.dim


def nijenhuis(model: ThreeSymModel, threshold: float = RANK_THRESHOLD) -> NijenhuisResult:
    """Nijenhuis tensor of J from V-projected brackets.

    ``torsion_residual`` is |N + 4 T| with T the torsion of the canonical
    connection.  At model level T(v, w) = -[v, w]_V = -tau(v, w).
    """
    J, tau = model.J, model.tau
    m = model.dim_V
    t_JJ = np.einsum("ia,jb,ijc->abc", J, J, tau, optimize=True)
    t_vJ = np.einsum("jb,ajc->abc", J, tau, optimize=True)
    t_Jv = np.einsum("ia,ibc->abc", J, tau, optimize=True)
    N = tau - t_JJ + np.einsum("ck,abk->abc", J, t_vJ + t_Jv, optimize=True)
    connection_torsion = -tau
    scale = max(1.0, float(np.max(np.abs(model.algebra.structconsts))))
    torsion_residual = _mx(N + 4.0 * connection_torsion) / scale
    # kernel: v with N(v, .) = 0 ; image: span of all N(v, w)
    op = N.transpose(1, 2, 0).reshape(-1, m)
    kernel = numerical_nullspace(op, threshold) if np.any(np.abs(op) > 1e-13) else Subspace.full(m)
    image = column_span(N.reshape(m * m, m).T, threshold, n=m)
    return NijenhuisResult(N, torsion_residual, kernel, image)


def type_two_report(model: ThreeSymModel, tol: float = 1e-9) -> Report:
    """Checks certifying a 2-step nilpotent model: tau_v tau_w = 0 and [[g, g], g] = 0."""
    tau = model.tau
    comp = np.einsum("bck,akd->abcd", tau, tau, optimize=True)
    c = model.algebra.structconsts
    nested = np.einsum("ijm,mkl->ijkl", c, c, optimize=True)
    return Report((
        Check("tau_composition", _mx(comp), tol),
        Check("two_step", _mx(nested), tol),
        Check("h_trivial", float(model.dim_h), 0.5),
    ))
