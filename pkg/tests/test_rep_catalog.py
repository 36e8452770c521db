import numpy as np
import pytest
import scipy.linalg as sla

from trisym.config import Config
from trisym.errors import NotAdmissible, UnknownModelId
from trisym.rep_catalog import (
    acceptance_ids,
    background_report,
    casimir,
    casimir_report,
    catalog_ids,
    centralizer_split,
    check_admissible,
    complex_type_I,
    direct_sum,
    dualize,
    resolve,
    rho_z_spectrum_report,
    with_J_V,
)

import support

SMALL_IDS = ["sp:1", "sp:2", "su:1,1", "su:1,2", "su1n:1:1", "su1n:2:1", "so_star:2", "so2n:1",
             "so2n:3", "dual:sp:1", "dual:su1n:2:1"]

# (type, dim L, dim V, centralizer type, dim c+, dim c-)
CENTRALIZERS = {
    "sp:1": ("noncompact", 3, 2, "real", 1, 0),
    "sp:2": ("noncompact", 10, 4, "real", 1, 0),
    "su:1,1": ("noncompact", 3, 4, "reducible", 3, 1),
    "su:1,2": ("noncompact", 8, 6, "complex", 1, 1),
    "su1n:1:1": ("noncompact", 3, 4, "reducible", 3, 1),
    "su1n:2:1": ("noncompact", 8, 6, "complex", 1, 1),
    "so_star:2": ("noncompact", 6, 8, "quaternionic", 1, 3),
    "so2n:1": ("noncompact", 3, 2, "real", 1, 0),
    "so2n:3": ("noncompact", 10, 8, "reducible", 3, 1),
    "so2n:5": ("noncompact", 21, 32, "reducible", 6, 10),
    "dual:sp:1": ("compact", 3, 4, "quaternionic", 1, 3),
    "dual:su1n:2:1": ("compact", 8, 12, "reducible", 4, 4),
}


def generic_pair_commutant_dim(rho) -> int:
    """Commutant dimension from two generic elements, which generate a semisimple L."""
    n = rho[0].shape[0]
    eye = np.eye(n)
    rng = np.random.default_rng(3)
    generic = [np.einsum("i,iab->ab", rng.normal(size=len(rho)), np.array(rho)) for _ in range(2)]
    system = np.vstack([np.kron(eye, r.T) - np.kron(r, eye) for r in generic])
    return sla.null_space(system, rcond=1e-10).shape[1]


def test_sp1_casimir_is_a_quarter():
    C = casimir(resolve("sp:1"))
    assert np.max(np.abs(C - 0.25 * np.eye(2))) < 1e-12


@pytest.mark.parametrize("cid", SMALL_IDS)
def test_casimir_identity(cid):
    assert casimir_report(resolve(cid)).passed


@pytest.mark.parametrize("cid", SMALL_IDS)
def test_catalog_reps_are_admissible_with_a_background_metric(cid):
    rep = resolve(cid)
    assert check_admissible(rep).verdict
    assert background_report(rep, rep.h_V).passed
    assert rho_z_spectrum_report(rep).passed


@pytest.mark.parametrize("cid", sorted(CENTRALIZERS))
def test_centralizer_dimensions(cid):
    rep = resolve(cid)
    split = centralizer_split(rep)
    assert (rep.type_flag, rep.L.dim, rep.dimV, split.rep_type, len(split.c_plus),
            len(split.c_minus)) == CENTRALIZERS[cid]


@pytest.mark.parametrize("cid", ["su1n:2:1", "so2n:3", "so2n:5", "dual:su1n:2:1"])
def test_centralizer_matches_generic_pair_oracle(cid):
    rep = resolve(cid)
    assert centralizer_split(rep).dim == generic_pair_commutant_dim(rep.rho)


def test_centralizer_elements_commute_and_have_the_right_symmetry():
    rep = resolve("so2n:5")
    split = centralizer_split(rep)
    h = rep.h_V
    for f in split.c_plus + split.c_minus:
        assert max(np.max(np.abs(f @ r - r @ f)) for r in rep.rho) < 1e-9
    for f in split.c_minus:
        assert np.max(np.abs(f.T @ h + h @ f)) < 1e-9
    for f in split.c_plus:
        assert np.max(np.abs(f.T @ h - h @ f)) < 1e-9


def test_flipping_J_breaks_admissibility():
    rep = resolve("su:1,2")
    assert not check_admissible(with_J_V(rep, -rep.J_V)).verdict


def test_dual_is_compact_with_skew_H():
    rep = dualize(resolve("su1n:2:1"))
    assert rep.is_compact
    h = rep.h_V
    assert max(np.max(np.abs(r.T @ h + h @ r)) for r in rep.rho) < 1e-9
    assert check_admissible(rep).verdict


def test_direct_sum_records_blocks():
    rep = direct_sum([resolve("su1n:1:1"), resolve("su1n:1:1")])
    assert rep.blocks == (4, 4)
    assert rep.dimV == 8
    assert len(centralizer_split(rep).c_minus) == 6


def test_complex_type_I_is_a_complex_structure_in_c_minus():
    rep = resolve("su:1,2")
    I = complex_type_I(rep)
    assert np.allclose(I @ I, -np.eye(rep.dimV))
    assert max(np.max(np.abs(I @ r - r @ I)) for r in rep.rho) < 1e-9


def test_complex_type_I_rejects_real_type():
    with pytest.raises(NotAdmissible):
        complex_type_I(resolve("sp:1"))


@pytest.mark.parametrize("cid", ["sp:0", "su:0,1", "xyz:1", "so2n:0", "su1n:2:3", ""])
def test_unknown_ids(cid):
    with pytest.raises(UnknownModelId):
        resolve(cid)


def test_catalog_sizes():
    assert len(catalog_ids()) == 108
    assert len(catalog_ids(duals=False)) == 54
    assert len(acceptance_ids()) == 52
    assert catalog_ids(Config(max_sp=1, max_su=2, max_su1n=1, max_so_star=2, max_so2n=1),
                       duals=False) == ["sp:1", "su:1,1", "su1n:1:1", "so_star:2", "so2n:1"]


def test_models_are_cached_consistently():
    assert support.model("sp:1") is support.model("sp:1")
