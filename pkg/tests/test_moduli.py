import csv
import io

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from trisym import moduli
from trisym.errors import NotAdmissible, OutOfDomain, QuaternionicUnsupported

import support

SUM_TWO = "sum:su1n:1:1+su1n:1:1"
SUM_THREE = "sum:su1n:2:1+su1n:2:1+su1n:2:1"

# (normal form, dim c^-)
MODULI = {
    "sp:1": (moduli.REAL_POINT, 0),
    "sp:2": (moduli.REAL_POINT, 0),
    "su:1,1": (moduli.complex_delta(1), 1),
    "su:1,2": (moduli.complex_delta(1), 1),
    "su1n:1:1": (moduli.complex_delta(1), 1),
    "su1n:2:1": (moduli.complex_delta(1), 1),
    "so2n:3": (moduli.complex_delta(1), 1),
    SUM_TWO: (moduli.complex_delta(2), 6),
    SUM_THREE: (moduli.complex_delta(3), 9),
}

# Casimir eigenvalues (d_-, d_+) and multiplicities on ker(IJ - 1), ker(IJ + 1)
CASIMIR_SPLITS = {
    "su1n:1:1": (0.25, 0.25, 2, 2),
    "su1n:2:1": (1 / 3, 1 / 6, 2, 4),
    "so2n:3": (0.25, 0.25, 4, 4),
}


def oracle_spectrum(cid, lam, t=1.0) -> np.ndarray:
    """Module block of g^{-1} Ric from the reductive homogeneous formula."""
    sm = support.model(cid)
    metric = moduli.g_lambda(sm.rep, lam, t)
    ric = support.reductive_ricci(sm, metric)
    Vs = sm.module_slice
    return np.sort(sla.eigh(0.5 * (ric[Vs, Vs] + ric[Vs, Vs].T), metric.g[Vs, Vs], eigvals_only=True))


def test_psi_values():
    assert moduli.psi(0.0) == 0.0
    assert moduli.psi(0.5) == pytest.approx(4 / 3)
    assert moduli.psi(-0.5) == pytest.approx(-4 / 3)
    assert moduli.complex_delta(3) == "complex_delta_d(3)"


@pytest.mark.parametrize("cid", sorted(MODULI))
def test_moduli_normal_form(cid):
    description = moduli.moduli_space(support.model(cid).rep)
    assert (description.normal_form, description.c_minus_dim) == MODULI[cid]
    assert len(description.generators) == description.c_minus_dim


def test_generators_are_h_skew_and_commute_with_L():
    rep = support.model(SUM_TWO).rep
    for f in moduli.moduli_space(rep).generators:
        assert np.max(np.abs(f.T @ rep.h_V + rep.h_V @ f)) < 1e-9
        assert max(np.max(np.abs(f @ r - r @ f)) for r in rep.rho) < 1e-9


@pytest.mark.parametrize("cid", ["so_star:2", "su1n:3:2"])
def test_quaternionic_summands_are_unsupported(cid):
    with pytest.raises(QuaternionicUnsupported):
        moduli.moduli_space(support.model(cid).rep)


def test_compact_reps_are_rejected():
    with pytest.raises(NotAdmissible):
        moduli.moduli_space(support.model("dual:su1n:2:1").rep)


@pytest.mark.parametrize("lam", [(1.0,), (-1.0,), (1.5,), (float("nan"),), (0.1, 0.2)])
def test_g_lambda_domain(lam):
    with pytest.raises(OutOfDomain):
        moduli.g_lambda(support.model("su1n:2:1").rep, lam)


@pytest.mark.parametrize("cid", sorted(CASIMIR_SPLITS))
def test_casimir_split(cid):
    (block,) = moduli.lambda_blocks(support.model(cid).rep)
    split = moduli.casimir_split(block)
    d_minus, d_plus, mult_minus, mult_plus = CASIMIR_SPLITS[cid]
    assert split.d_minus == pytest.approx(d_minus, abs=1e-12)
    assert split.d_plus == pytest.approx(d_plus, abs=1e-12)
    assert (split.mult_minus, split.mult_plus) == (mult_minus, mult_plus)
    assert split.scalar_residual < 1e-9


@pytest.mark.parametrize("cid, lam, t", [
    ("su1n:2:1", (0.5,), 1.0),
    ("su1n:2:1", (-0.5,), 1.0),
    ("su1n:2:1", (0.5,), 2.5),
    ("su1n:1:1", (0.3,), 1.0),
    ("so2n:3", (0.7,), 1.0),
    (SUM_TWO, (0.2, 0.6), 1.0),
])
def test_predicted_spectrum_matches_the_oracle(cid, lam, t):
    sm = support.model(cid)
    measured = oracle_spectrum(cid, lam, t)
    assert moduli.relative_spectrum_error(measured, moduli.predicted_spectrum(sm.rep, lam, t)) < 1e-9
    row = moduli.scan_point(sm, lam, t)
    assert np.max(np.abs(np.array(row.spectrum) - measured)) < 1e-10


def test_frozen_spectrum_for_su1n_2_1():
    # psi(1/2) = 4/3 with d_- = 1/3 twice and d_+ = 1/6 four times
    expected = np.array([-2 / 9] * 4 + [4 / 9] * 2)
    assert np.max(np.abs(oracle_spectrum("su1n:2:1", (0.5,)) - expected)) < 1e-12


def test_background_module_ricci_vanishes():
    assert np.max(np.abs(oracle_spectrum("su1n:2:1", (0.0,)))) < 1e-12


@settings(max_examples=8, deadline=None)
@given(st.floats(min_value=-0.9, max_value=0.9), st.floats(min_value=-0.9, max_value=0.9))
def test_spectrum_is_invariant_under_permutation_and_sign(a, b):
    sm = support.model(SUM_TWO)
    base = np.array(moduli.scan_point(sm, (a, b)).spectrum)
    swapped = np.array(moduli.scan_point(sm, (b, a)).spectrum)
    assert np.max(np.abs(base - swapped)) < 1e-10
    # flipping the sign of lambda_k exchanges the roles of ker(IJ +- 1); d_- = d_+ here
    flipped = np.array(moduli.scan_point(sm, (-a, b)).spectrum)
    assert np.max(np.abs(base - flipped)) < 1e-10


def test_psi_prediction_on_random_points():
    sm = support.model(SUM_TWO)
    rng = np.random.default_rng(11)
    for lam in rng.uniform(-0.9, 0.9, size=(4, 2)):
        row = moduli.scan_point(sm, tuple(lam))
        assert row.relative_error < 1e-9


def test_normal_form_membership():
    assert moduli.in_normal_form((0.0, 0.3, 0.3))
    assert not moduli.in_normal_form((0.3, 0.1))
    assert not moduli.in_normal_form((-0.1,))
    assert not moduli.in_normal_form((1.0,))


def test_delta_grid():
    grid = moduli.delta_grid(2, 5)
    assert len(grid) == 15
    assert all(moduli.in_normal_form(p) for p in grid)
    assert len(moduli.product_grid(2, 5)) == 25
    assert np.allclose(moduli.grid_values(5), [0.0, 0.2, 0.4, 0.6, 0.8])
    with pytest.raises(OutOfDomain):
        moduli.grid_values(0)


def test_scan_separates_points_and_writes_csv():
    sm = support.model("su1n:2:1")
    rows = moduli.moduli_scan(sm, 4)
    assert [r.lam for r in rows] == [(0.0,), (0.25,), (0.5,), (0.75,)]
    assert max(r.relative_error for r in rows) < 1e-9
    assert moduli.min_separation(rows) > 1e-4
    assert rows[0].soliton_residual < 1e-7
    assert all(r.soliton_residual > 1e-3 for r in rows[1:])
    buffer = io.StringIO()
    csv.writer(buffer).writerows(moduli.scan_csv_rows(rows))
    parsed = list(csv.reader(io.StringIO(buffer.getvalue())))
    assert parsed[0] == ["lambda", "spectrum", "soliton_residual"]
    assert len(parsed) == 5
    assert [float(x) for x in parsed[2][1].split()] == pytest.approx(rows[1].spectrum, abs=1e-11)
