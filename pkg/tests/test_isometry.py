import pytest

from trisym import isometry, moduli
from trisym.errors import InvalidDimension
from trisym.lie_core import jacobi_residual

import support

# dim g_b = dim V + dim L + dim c^- at the background metric
TYPE_THREE_DIMS = {"sp:1": 5, "su:1,1": 8, "su1n:1:1": 8, "su1n:2:1": 15, "so2n:3": 19}
# flat plane: E(2); hyperbolic plane: sl(2); two-step model: U(2) isotropy on a 6-dim group
FIXTURE_DIMS = {"fixture:flat": (1, 3), "fixture:hermitian_sl2": (1, 3), "fixture:two_step": (4, 10)}


@pytest.fixture(scope="module")
def analyses():
    ids = list(TYPE_THREE_DIMS) + list(FIXTURE_DIMS)
    return {cid: isometry.isometry_analysis(support.model(cid), support.background(cid)) for cid in ids}


@pytest.mark.parametrize("cid", sorted(TYPE_THREE_DIMS))
def test_type_three_isometry_dimension(analyses, cid):
    sm = support.model(cid)
    result = analyses[cid]
    assert result.dim == TYPE_THREE_DIMS[cid] == isometry.predicted_type_three_dim(sm, support.background(cid))
    assert result.gb_jacobi < 1e-9
    assert result.dichotomy["i_minus_dim"] == 0
    assert result.dichotomy["holomorphic_isometries"]


@pytest.mark.parametrize("cid", sorted(FIXTURE_DIMS))
def test_fixture_isometry_dimensions(analyses, cid):
    result = analyses[cid]
    assert (result.dim_i, result.dim) == FIXTURE_DIMS[cid]


@pytest.mark.parametrize("cid", sorted(TYPE_THREE_DIMS) + sorted(FIXTURE_DIMS))
def test_isotropy_algebra_residuals(analyses, cid):
    result = analyses[cid]
    metric = support.background(cid)
    assert isometry.closure_residual(result) < 1e-7
    assert isometry.curvature_residual(result) < 1e-9
    assert isometry.l_invariance_residual(result) < 1e-7
    assert isometry.skew_residual(result, metric) < 1e-7
    assert isometry.hbar_membership_residual(result) < 1e-7


def test_killing_algebra_is_a_lie_algebra(analyses):
    sm = support.model("su1n:2:1")
    result = analyses["su1n:2:1"]
    algebra = isometry.build_killing_algebra(sm, support.background("su1n:2:1"), result.i_basis,
                                             frame=result.frame)
    assert algebra.dim == 15
    assert jacobi_residual(algebra) < 1e-9


def test_symmetric_fixtures_are_classified_locally_symmetric(analyses):
    assert analyses["fixture:hermitian_sl2"].dichotomy["locally_symmetric"]
    assert analyses["fixture:flat"].dichotomy["locally_symmetric"]
    assert not analyses["sp:1"].dichotomy["locally_symmetric"]


@pytest.mark.parametrize("cid, lam, expected", [
    ("su1n:1:1", (0.5,), 8),
    ("sum:su1n:1:1+su1n:1:1", (0.2, 0.5), 13),
    ("sum:su1n:1:1+su1n:1:1", (0.5, 0.5), 15),
])
def test_deformed_metrics_match_the_centralizer_count(cid, lam, expected):
    sm = support.model(cid)
    metric = moduli.g_lambda(sm.rep, lam)
    result = isometry.isometry_analysis(sm, metric)
    assert result.dim == expected == isometry.predicted_type_three_dim(sm, metric)


def test_large_tangent_spaces_are_refused():
    sm = support.model("su1n:4:2")
    assert sm.model.dim_V > isometry.MAX_TANGENT_DIM
    with pytest.raises(InvalidDimension):
        isometry.model_frame(sm, support.background("su1n:4:2"))
