import numpy as np
import pytest
import scipy.linalg as sla

from trisym.errors import NotAdmissible
from trisym.lie_core import jacobi_residual, principal_angle, radical, Subspace
from trisym.rep_catalog import resolve, with_J_V
from trisym.semidirect import (
    TYPE_III,
    TYPE_IV,
    block_structure_report,
    bracket_structure_residual,
    build_type_model,
    rank_sum,
    structural_report,
)

import support

# frozen from the dense oracle below: dim Der = dim V + dim L + dim c
DERIVATION_DIMS = {"sp:1": 6, "su:1,1": 11, "su1n:1:1": 11, "su1n:2:1": 16, "dual:sp:1": 11}


def dense_derivation_dim(c: np.ndarray) -> int:
    """dim {D : D[x, y] = [Dx, y] + [x, Dy]} from a dense null space."""
    n = c.shape[0]
    eye = np.eye(n)
    # unknown D with D[a, b] at index a * n + b; equations indexed by (i, j, l)
    lhs = np.einsum("ijk,la->ijlak", c, eye).reshape(n ** 3, n, n)  # sum_k c_ijk D_lk
    first = np.einsum("mjl,ia->ijlma", c, eye).reshape(n ** 3, n, n)  # sum_m D_mi c_mjl
    second = np.einsum("iml,ja->ijlma", c, eye).reshape(n ** 3, n, n)  # sum_m D_mj c_iml
    system = (lhs - first - second).reshape(n ** 3, n * n)
    return sla.null_space(system, rcond=1e-10).shape[1]


@pytest.mark.parametrize("cid", sorted(DERIVATION_DIMS))
def test_derivation_dimension_matches_dense_oracle(cid):
    sm = support.model(cid)
    assert dense_derivation_dim(sm.model.algebra.structconsts) == DERIVATION_DIMS[cid]
    report = structural_report(sm)
    assert report.values["derivation_dim"] == DERIVATION_DIMS[cid] == rank_sum(sm)


@pytest.mark.parametrize("cid", ["sp:1", "su:1,2", "su1n:2:1", "so_star:2", "so2n:3", "dual:su1n:2:1"])
def test_structure_of_semidirect_models(cid):
    sm = support.model(cid)
    assert jacobi_residual(sm.model.algebra) < 1e-12
    assert bracket_structure_residual(sm) < 1e-12
    assert structural_report(sm, raise_on_failure=False).passed
    assert block_structure_report(sm).passed


def test_radical_is_the_module():
    sm = support.model("su1n:2:1")
    n = sm.model.algebra.dim
    assert principal_angle(radical(sm.model.algebra), Subspace.coordinate(n, sm.V_block)) < 1e-9


def test_blocks_are_laid_out_module_first():
    sm = support.model("su1n:2:1")
    assert sm.V_block == range(0, 6)
    assert sm.k_block == range(6, 10)
    assert sm.H_block == range(10, 14)
    assert sm.module_slice == slice(0, 6) and sm.H_slice == slice(6, 10)


@pytest.mark.parametrize("cid, flag", [("sp:1", TYPE_III), ("dual:sp:1", TYPE_IV), ("so2n:3", TYPE_III)])
def test_type_flags(cid, flag):
    assert support.model(cid).type_flag == flag


@pytest.mark.parametrize("cid, simple", [("sp:1", True), ("su1n:2:1", True), ("so_star:2", False),
                                         ("so2n:2", False), ("so2n:3", True)])
def test_levi_factor_simplicity(cid, simple):
    assert support.model(cid).L_simple is simple


def test_non_admissible_rep_is_rejected():
    rep = resolve("su:1,2")
    with pytest.raises(NotAdmissible):
        build_type_model(with_J_V(rep, -rep.J_V))


def test_sigma_is_order_three_automorphism():
    sm = support.model("su1n:2:1")
    sigma = sm.model.sigma
    n = sigma.shape[0]
    assert np.allclose(sigma @ sigma @ sigma, np.eye(n))
    c = sm.model.algebra.structconsts
    lhs = np.einsum("ijk,lk->ijl", c, sigma)
    rhs = np.einsum("ai,bj,abl->ijl", sigma, sigma, c)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
