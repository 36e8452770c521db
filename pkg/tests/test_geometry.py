import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trisym import geometry
from trisym.errors import NotInCentralizer, NotPositive
from trisym.lie_core import Subspace

import support

NONCOMPACT = ["sp:1", "su:1,2", "su1n:1:1", "su1n:2:1", "so_star:2", "so2n:3"]
COMPACT = ["dual:sp:1", "dual:su1n:2:1", "dual:so2n:3"]


def metrics_for(cid):
    return [support.background(cid)] + support.deformed_metrics(cid, radii=(0.3, 0.7))


@pytest.mark.parametrize("cid", NONCOMPACT + COMPACT + ["fixture:hermitian_sl2", "fixture:two_step"])
def test_ricci_matches_reductive_formula(cid):
    sm = support.model(cid)
    metrics = metrics_for(cid) if sm.is_semidirect else [support.background(cid)]
    for metric in metrics:
        ric = geometry.ricci(sm, metric).ric
        assert np.max(np.abs(ric - support.reductive_ricci(sm, metric))) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=-0.85, max_value=0.85))
def test_ricci_oracle_on_random_deformations(radius):
    cid = "su1n:2:1"
    sm = support.model(cid)
    metric = geometry.metric_from_S(sm.rep, radius * support.deformation_direction(sm.rep))
    ric = geometry.ricci(sm, metric)
    assert ric.report.passed
    assert np.max(np.abs(ric.ric - support.reductive_ricci(sm, metric))) < 1e-10


@pytest.mark.parametrize("cid", NONCOMPACT + COMPACT)
def test_geometry_package_checks_pass(cid):
    pkg = support.package(cid)
    assert pkg.report.passed, [c.name for c in pkg.report.failures()]


@pytest.mark.parametrize("cid", ["su1n:2:1", "so2n:3"])
def test_deformed_geometry_checks_pass(cid):
    sm = support.model(cid)
    for metric in support.deformed_metrics(cid, radii=(0.5,)):
        report = geometry.geometry_package(sm, metric).report
        assert report.passed, [c.name for c in report.failures()]


def test_flat_fixture_has_zero_curvature():
    assert np.max(np.abs(support.package("fixture:flat").Rg)) == 0.0


@pytest.mark.parametrize("cid", NONCOMPACT)
def test_background_metric_is_an_expanding_soliton(cid):
    sm, pkg = support.model(cid), support.package(cid)
    lam, _, residual = geometry.soliton_fit(sm, pkg.metric, pkg.ric)
    assert residual < 1e-7
    assert lam < 0


def test_sp1_soliton_constant():
    sm, pkg = support.model("sp:1"), support.package("sp:1")
    lam, _, _ = geometry.soliton_fit(sm, pkg.metric, pkg.ric)
    assert lam == pytest.approx(-0.75, abs=1e-12)


@pytest.mark.parametrize("cid", ["su1n:1:1", "su1n:2:1", "so2n:3"])
def test_deformed_metrics_are_not_solitons_nor_almost_kahler(cid):
    sm = support.model(cid)
    for metric in support.deformed_metrics(cid, radii=(0.2, 0.6)):
        ric = geometry.ricci(sm, metric).ric
        _, _, residual = geometry.soliton_fit(sm, metric, ric)
        assert residual > 1e-3
        assert not geometry.kahler_checks(sm, metric).values["almost_kahler"]


@pytest.mark.parametrize("cid", NONCOMPACT)
def test_H_block_constant(cid):
    values = support.package(cid).report.values
    assert values["H_constant"] == pytest.approx(-(values["mu"] + 0.5), rel=1e-9)
    assert values["H_constant_residual"] < 1e-9


@pytest.mark.parametrize("cid", NONCOMPACT + COMPACT)
def test_module_directions_form_a_polar_foliation(cid):
    sm, pkg = support.model(cid), support.package(cid)
    assert geometry.foliation_check(sm, pkg.metric, pkg.eta).values["polar"]


@pytest.mark.parametrize("cid", ["sp:1", "su1n:2:1", "so2n:3"])
def test_type_three_is_irreducible(cid):
    sm, pkg = support.model(cid), support.package(cid)
    assert geometry.reducibility_test(sm, pkg.metric, pkg.Rg, pkg.eta).irreducible


@pytest.mark.parametrize("cid", COMPACT)
def test_compact_duals_split_as_module_plus_H(cid):
    sm, pkg = support.model(cid), support.package(cid)
    result = geometry.reducibility_test(sm, pkg.metric, pkg.Rg, pkg.eta)
    m = sm.model.dim_V
    blocks = [Subspace.coordinate(m, range(0, sm.dim_module)), Subspace.coordinate(m, range(sm.dim_module, m))]
    assert not result.irreducible
    assert geometry.splitting_matches(result, blocks)


def test_gray_identity_on_quasi_kahler_models():
    for cid in ["sp:1", "su1n:2:1", "dual:su1n:2:1", "fixture:hermitian_sl2"]:
        sm, pkg = support.model(cid), support.package(cid)
        kahler = geometry.kahler_checks(sm, pkg.metric, pkg.Rg)
        assert kahler["quasi_kahler"].passed
        assert kahler.values["G2"] < 1e-9


def test_background_is_almost_kahler_exactly_when_H_acts_symmetrically():
    sm = support.model("su1n:2:1")
    assert geometry.kahler_checks(sm, support.background("su1n:2:1")).values["almost_kahler"]


def test_metric_off_the_centralizer_is_rejected():
    rep = support.model("su1n:2:1").rep
    S = np.random.default_rng(0).normal(size=(rep.dimV, rep.dimV)) * 0.1
    with pytest.raises(NotInCentralizer):
        geometry.metric_from_S(rep, S)


def test_non_positive_metrics_are_rejected():
    rep = support.model("su1n:2:1").rep
    with pytest.raises(NotPositive):
        geometry.metric_from_S(rep, t=0.0)
    with pytest.raises(NotPositive):
        geometry.metric_from_S(rep, 1.2 * support.deformation_direction(rep))


def test_scaling_H_keeps_the_soliton():
    sm = support.model("su1n:2:1")
    metric = geometry.metric_from_S(sm.rep, t=2.5)
    ric = geometry.ricci(sm, metric).ric
    _, _, residual = geometry.soliton_fit(sm, metric, ric)
    assert residual < 1e-7
