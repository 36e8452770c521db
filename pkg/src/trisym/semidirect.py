"""Semidirect products V x_rho L with their canonical order-3 automorphism.

The algebra basis is laid out as the module V first, then k, then H, so block
assertions reduce to index ranges.  sigma fixes k and acts on V + H as
z0 + z1 (J_V + J_H).  A few hand-built fixtures (a Hermitian symmetric sl(2),
a 2-step nilpotent model and a flat abelian model) exercise the other types.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg as sla

from .config import RANK_THRESHOLD
from .errors import NotAdmissible, NotAutomorphism, TheoremViolation
from .lie_core import (
    LieAlgebra,
    Subspace,
    center,
    derivations,
    is_simple,
    principal_angle,
    radical,
)
from .rep_catalog import Representation, centralizer_split, check_admissible, complex_structure
from .report import Check, Report
from .threesym import Z0, Z1, ThreeSymModel, reductive_split

TYPE_III = "III"
TYPE_IV = "IV"


@dataclass(frozen=True, eq=False)
class SemidirectModel:
    """A 3-symmetric model together with the representation it was built from.

    ``V_block``, ``k_block`` and ``H_block`` are index ranges into the algebra
    basis.  In model (tangent) coordinates the module occupies the first
    ``dim V`` slots and H the rest.
    """

    model: ThreeSymModel
    rep: Representation | None
    V_block: range
    k_block: range
    H_block: range
    type_flag: str
    name: str
    # whether the Levi factor is simple; non-simple factors split the geometry
    L_simple: bool = True

    @property
    def L_block(self) -> range:
        return range(self.k_block.start, self.H_block.stop)

    @property
    def dim_module(self) -> int:
        return len(self.V_block)

    @property
    def module_slice(self) -> slice:
        """Model-coordinate slice of the module V inside the tangent space V + H."""
        return slice(0, len(self.V_block))

    @property
    def H_slice(self) -> slice:
        n = len(self.V_block)
        return slice(n, n + len(self.H_block))

    @property
    def is_semidirect(self) -> bool:
        return self.rep is not None

    @cached_property
    def rho_H_model(self) -> np.ndarray:
        """rho on an H basis indexed by tangent H coordinates."""
        return self.rep.rho_H

    def to_json(self) -> dict[str, Any]:
        def span(r: range) -> list[int]:
            return [r.start, r.stop]

        return {
            "name": self.name,
            "type": self.type_flag,
            "L_simple": self.L_simple,
            "V_block": span(self.V_block),
            "k_block": span(self.k_block),
            "H_block": span(self.H_block),
            "model": self.model.to_json(),
        }


def semidirect_algebra(rep: Representation) -> LieAlgebra:
    """V x_rho L with basis (V, k, H)."""
    nV = rep.dimV
    order = list(rep.cartan.k_indices) + list(rep.cartan.H_indices)
    nL = len(order)
    n = nV + nL
    c = np.zeros((n, n, n))
    cL = rep.L.structconsts[np.ix_(order, order, order)]
    c[nV:, nV:, nV:] = cL
    for pos, idx in enumerate(order):
        r = rep.rho[idx]
        a = nV + pos
        # [l_a, v_j] = sum_i rho_a[i, j] v_i
        c[a, :nV, :nV] = r.T
        c[:nV, a, :nV] = -r.T
    names = [f"v{i}" for i in range(nV)] + [rep.L.basis_names[i] for i in order]
    return LieAlgebra(c, tuple(names))


def build_type_model(rep: Representation, tol: float = 1e-9) -> SemidirectModel:
    """Assemble V x_rho L with sigma = 1 on k and z0 + z1 J on V + H."""
    nV = rep.dimV
    dim_k = len(rep.cartan.k_indices)
    dim_H = len(rep.cartan.H_indices)
    algebra = semidirect_algebra(rep)
    n = algebra.dim
    J_W = sla.block_diag(rep.J_V, rep.cartan.J_H)
    sigma = np.zeros((n, n))
    W_idx = list(range(nV)) + list(range(nV + dim_k, n))
    k_idx = list(range(nV, nV + dim_k))
    sigma[np.ix_(k_idx, k_idx)] = np.eye(dim_k)
    sigma[np.ix_(W_idx, W_idx)] = Z0 * np.eye(nV + dim_H) + Z1 * J_W
    eye = np.eye(n)
    try:
        model = reductive_split(algebra, sigma, h_basis=eye[:, k_idx], V_basis=eye[:, W_idx], tol=tol)
    except NotAutomorphism as exc:
        raise NotAdmissible(f"{rep.name}: sigma is not an automorphism ({exc})") from exc
    type_flag = TYPE_IV if rep.is_compact else TYPE_III
    return SemidirectModel(model, rep, range(0, nV), range(nV, nV + dim_k), range(nV + dim_k, n),
                           type_flag, f"model:{rep.name}", is_simple(rep.L))


def bracket_structure_residual(sm: SemidirectModel) -> float:
    """Max deviation of the bracket from [v, v] = 0, [l, v] = rho(l) v, [l, l] = [l, l]_L."""
    rep = sm.rep
    c = sm.model.algebra.structconsts
    nV = rep.dimV
    order = list(rep.cartan.k_indices) + list(rep.cartan.H_indices)
    worst = float(np.max(np.abs(c[:nV, :nV]), initial=0.0))
    for pos, idx in enumerate(order):
        a = nV + pos
        worst = max(worst, float(np.max(np.abs(c[a, :nV, :nV] - rep.rho[idx].T))))
        worst = max(worst, float(np.max(np.abs(c[a, :nV, nV:]), initial=0.0)))
    cL = rep.L.structconsts[np.ix_(order, order, order)]
    worst = max(worst, float(np.max(np.abs(c[nV:, nV:, nV:] - cL))))
    worst = max(worst, float(np.max(np.abs(c[nV:, nV:, :nV]), initial=0.0)))
    return worst


def rank_sum(sm: SemidirectModel) -> int:
    """dim V + dim L + dim c, the predicted dimension of Der(g)."""
    return sm.dim_module + len(sm.L_block) + centralizer_split(sm.rep).dim


def structural_report(sm: SemidirectModel, threshold: float = RANK_THRESHOLD,
                      angle_tol: float = 1e-6, raise_on_failure: bool = True) -> Report:
    """Radical, centre and derivation dimension against the block structure."""
    algebra = sm.model.algebra
    n = algebra.dim
    V_space = Subspace.coordinate(n, sm.V_block)
    rad = radical(algebra, threshold)
    cen = center(algebra, threshold)
    fixed_dim = check_admissible(sm.rep).fixed_vectors_dim
    der = derivations(algebra, threshold)
    predicted = rank_sum(sm)
    report = Report((
        Check("radical_is_V", principal_angle(rad, V_space), angle_tol),
        Check("center_dim", float(abs(cen.dim - fixed_dim)), 0.5),
        Check("derivation_dim", float(abs(len(der) - predicted)), 0.5),
        Check("bracket_structure", bracket_structure_residual(sm), 1e-9),
    ), {
        "radical_dim": rad.dim,
        "center_dim": cen.dim,
        "derivation_dim": len(der),
        "predicted_derivation_dim": predicted,
    })
    if raise_on_failure and not report.passed:
        failed = ", ".join(c.name for c in report.failures())
        raise TheoremViolation(f"{sm.name}: structural check failed ({failed})")
    return report


def block_structure_report(sm: SemidirectModel, tol: float = 1e-9) -> Report:
    """tau(V, V) = 0, tau(H, H) = 0 and tau(V, H) inside V, in tangent coordinates."""
    tau = sm.model.tau
    Vs, Hs = sm.module_slice, sm.H_slice
    return Report((
        Check("tau_VV", _mx(tau[Vs, Vs]), tol),
        Check("tau_HH", _mx(tau[Hs, Hs]), tol),
        Check("tau_VH_in_V", _mx(tau[Vs, Hs][:, :, Hs]), tol),
    ))


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


# ---------------------------------------------------------------------------
# Fixtures


def _fixture(algebra: LieAlgebra, sigma: np.ndarray, h_idx: list[int], W_idx: list[int],
             type_flag: str, name: str, module_dim: int = 0) -> SemidirectModel:
    n = algebra.dim
    eye = np.eye(n)
    model = reductive_split(algebra, sigma, h_basis=eye[:, h_idx], V_basis=eye[:, W_idx])
    k_block = range(0, len(h_idx)) if h_idx else range(0, 0)
    return SemidirectModel(model, None, range(0, module_dim), k_block,
                           range(len(h_idx), n) if h_idx else range(0, n), type_flag, name)


def hermitian_symmetric_sl2() -> SemidirectModel:
    """sl(2, R) = so(2) + H with sigma = 1 on so(2) and z0 + z1 J_H on H.

    Its torsion vanishes, so the model is a Hermitian symmetric space.
    """
    k = np.array([[0.0, -0.5], [0.5, 0.0]])
    h1 = np.array([[0.5, 0.0], [0.0, -0.5]])
    h2 = np.array([[0.0, 0.5], [0.5, 0.0]])
    algebra = LieAlgebra.from_matrices([k, h1, h2], ("k", "h1", "h2"))
    J_H = algebra.ad_matrices()[0][1:, 1:]
    sigma = sla.block_diag(np.eye(1), Z0 * np.eye(2) + Z1 * J_H)
    return _fixture(algebra, sigma, [0], [1, 2], "I", "fixture:hermitian_sl2")


def two_step_nilpotent() -> SemidirectModel:
    """C^2 + C with [z, w] = conj(det(z, w)) and sigma = multiplication by exp(2 pi i/3).

    Real coordinates (Re z1, Im z1, Re z2, Im z2, Re u, Im u).
    """
    n = 6
    c = np.zeros((n, n, n))
    # det(z, w) = z1 w2 - z2 w1; bracket of real basis vectors e_a (from z) and e_b (from w)
    for a in range(4):
        for b in range(4):
            za = np.zeros(2, dtype=complex)
            wb = np.zeros(2, dtype=complex)
            za[a // 2] = 1.0 if a % 2 == 0 else 1j
            wb[b // 2] = 1.0 if b % 2 == 0 else 1j
            value = np.conj(za[0] * wb[1] - za[1] * wb[0])
            c[a, b, 4] = value.real
            c[a, b, 5] = value.imag
    algebra = LieAlgebra(c, ("x1", "y1", "x2", "y2", "u", "w"))
    sigma = Z0 * np.eye(n) + Z1 * complex_structure(3)
    return _fixture(algebra, sigma, [], list(range(n)), "II", "fixture:two_step")


def flat_abelian(complex_dim: int = 1) -> SemidirectModel:
    """Abelian R^{2n} with sigma a rotation by 2 pi / 3 in every complex line."""
    n = 2 * complex_dim
    algebra = LieAlgebra.abelian(n)
    sigma = Z0 * np.eye(n) + Z1 * complex_structure(complex_dim)
    return _fixture(algebra, sigma, [], list(range(n)), "flat", f"fixture:flat{n}")


FIXTURES = {
    "hermitian_sl2": hermitian_symmetric_sl2,
    "two_step": two_step_nilpotent,
    "flat": flat_abelian,
}
