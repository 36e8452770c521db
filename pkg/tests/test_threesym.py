import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trisym.errors import NotAutomorphism, NotOrderThree, SigmaIsIdentity
from trisym.lie_core import LieAlgebra
from trisym.semidirect import hermitian_symmetric_sl2
from trisym.threesym import (
    Z0,
    Z1,
    curvature_nullity_W,
    nijenhuis,
    reductive_split,
    transvection,
    type_two_report,
    verify_model_identities,
)

import support

MODELS = ["fixture:hermitian_sl2", "fixture:two_step", "fixture:flat", "sp:1", "su1n:2:1",
          "dual:su:1,2", "so2n:3"]


@pytest.mark.parametrize("cid", MODELS)
def test_model_identities_hold(cid):
    report = verify_model_identities(support.model(cid).model)
    assert report.passed, [c.name for c in report.failures()]


@pytest.mark.parametrize("cid", MODELS)
def test_J_is_a_complex_structure_from_sigma(cid):
    model = support.model(cid).model
    m = model.dim_V
    assert np.allclose(model.J @ model.J, -np.eye(m))
    sigma_V = model.V_coords(model.sigma @ model.V_basis)
    assert np.allclose(sigma_V, Z0 * np.eye(m) + Z1 * model.J)


def test_hermitian_symmetric_fixture_has_no_torsion():
    model = support.model("fixture:hermitian_sl2").model
    assert np.max(np.abs(model.tau)) < 1e-14
    assert model.dim_h == 1 and model.dim_V == 2


def test_sigma_identity_is_rejected():
    algebra = support.model("fixture:hermitian_sl2").model.algebra
    with pytest.raises(SigmaIsIdentity):
        reductive_split(algebra, np.eye(3))


def test_order_two_automorphism_is_rejected():
    # conjugation by diag(1, -1) on sl(2) in the (k, h1, h2) basis: k -> -k, h1 -> h1, h2 -> -h2
    algebra = support.model("fixture:hermitian_sl2").model.algebra
    with pytest.raises(NotOrderThree):
        reductive_split(algebra, np.diag([-1.0, 1.0, -1.0]))


def test_non_automorphism_is_rejected():
    # a cyclic permutation of basis vectors has order three but breaks the bracket
    algebra = LieAlgebra.from_brackets(3, {(0, 1): {2: 1.0}})
    perm = np.eye(3)[:, [1, 2, 0]]
    with pytest.raises(NotAutomorphism):
        reductive_split(algebra, perm)


def test_two_step_report_and_nullity():
    sm = support.model("fixture:two_step")
    assert type_two_report(sm.model).passed
    assert curvature_nullity_W(sm.model).W.dim == 6


def test_semisimple_nullity_is_zero():
    assert curvature_nullity_W(support.model("fixture:hermitian_sl2").model).W.dim == 0


@pytest.mark.parametrize("cid, expected", [("sp:1", 2), ("su1n:2:1", 6), ("so2n:3", 8)])
def test_nullity_of_semidirect_models_is_the_module(cid, expected):
    result = curvature_nullity_W(support.model(cid).model)
    assert result.W.dim == expected
    assert max(result.angles) < 1e-6


@pytest.mark.parametrize("cid", MODELS)
def test_nijenhuis_is_four_times_the_bracket(cid):
    assert nijenhuis(support.model(cid).model).torsion_residual < 1e-9


def test_nijenhuis_vanishes_on_the_symmetric_fixture():
    nij = nijenhuis(support.model("fixture:hermitian_sl2").model)
    assert nij.image_dim == 0 and nij.kernel_dim == 2


def test_transvection_of_a_semidirect_model_is_everything():
    model = support.model("sp:1").model
    gb, hb = transvection(model)
    assert gb.dim == model.algebra.dim
    assert hb.dim == model.dim_h


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_identities_survive_a_change_of_basis(seed):
    base = hermitian_symmetric_sl2().model
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
    Pinv = np.linalg.inv(P)
    c = np.einsum("ai,bj,ijk,ck->abc", P.T, P.T, base.algebra.structconsts, Pinv)
    sigma = Pinv @ base.sigma @ P
    model = reductive_split(LieAlgebra(c), sigma)
    assert verify_model_identities(model, tol=1e-8).passed
    assert model.dim_h == 1
    assert curvature_nullity_W(model).W.dim == 0
