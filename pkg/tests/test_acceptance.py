"""Acceptance criteria 1-10 over the acceptance window of the catalog.

Each criterion test prints one pass/fail line; the lines are repeated in the
pytest terminal summary.  Per-model geometry is computed once and reduced to
scalar facts so the large models do not stay in memory.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Any

import numpy as np
import pytest

import support
from trisym import geometry, isometry, moduli, semidirect, threesym
from trisym.cli import nullity_report
from trisym.config import Config
from trisym.lie_core import Subspace, jacobi_residual, principal_angle
from trisym.rep_catalog import (
    acceptance_ids,
    background_report,
    casimir,
    casimir_report,
    centralizer_split,
    check_admissible,
)

TOL = 1e-9
CONFIG = Config()
CATALOG = acceptance_ids()
FIXTURES = ["fixture:hermitian_sl2", "fixture:two_step", "fixture:flat"]
ISOMETRY_MODELS = ["sp:1", "su:1,1", "su1n:1:1", "su1n:2:1", "so2n:3"]
MODULI_MODEL = "sum:su1n:1:1+su1n:1:1"


def _metric_facts(sm, package: geometry.GeometryPackage) -> dict[str, Any]:
    report = package.report
    curvature_names = [c.name for c in report if c.name.startswith(("curv_", "R_"))]
    kahler = geometry.kahler_checks(sm, package.metric, package.Rg, TOL)
    facts: dict[str, Any] = {
        "curvature_worst": max(report[name].residual for name in curvature_names),
        "curvature_checks": len(curvature_names),
        "quasi_kahler": kahler["quasi_kahler"].passed,
        "gray_G2": kahler.values["G2"],
        "almost_kahler": kahler.values["almost_kahler"],
        "polar": geometry.foliation_check(sm, package.metric, package.eta, TOL).values["polar"],
    }
    red = geometry.reducibility_test(sm, package.metric, package.Rg, package.eta)
    facts["irreducible"] = red.irreducible
    m = sm.model.dim_V
    blocks = [Subspace.coordinate(m, range(sm.module_slice.start, sm.module_slice.stop)),
              Subspace.coordinate(m, range(sm.H_slice.start, sm.H_slice.stop))]
    facts["splits_V_H"] = geometry.splitting_matches(red, blocks, CONFIG.angle_tol)
    if not sm.rep.is_compact:
        lam, _, residual = geometry.soliton_fit(sm, package.metric, package.ric)
        facts["soliton_lambda"] = lam
        facts["soliton_residual"] = residual
    return facts


@lru_cache(maxsize=None)
def catalog_facts(model_id: str) -> dict[str, Any]:
    sm = support.model(model_id)
    rep = sm.rep
    facts: dict[str, Any] = {
        "type": sm.type_flag,
        "L_simple": sm.L_simple,
        "compact": rep.is_compact,
        "jacobi_L": jacobi_residual(rep.L),
        "jacobi_g": jacobi_residual(sm.model.algebra),
        "admissible": check_admissible(rep, TOL).verdict,
        "background_ok": background_report(rep, rep.h_V, TOL).passed,
        "casimir_residual": casimir_report(rep, tol=TOL)["casimir_identity"].residual,
        "nullity": nullity_report(sm, CONFIG),
        "c_minus_dim": len(centralizer_split(rep).c_minus),
    }
    nij = threesym.nijenhuis(sm.model)
    m = sm.model.dim_V
    module = Subspace.coordinate(m, range(sm.module_slice.start, sm.module_slice.stop))
    facts["nijenhuis"] = {
        "torsion": nij.torsion_residual,
        "kernel_dim": nij.kernel_dim,
        "image_angle": principal_angle(nij.image, module),
        "image_dim": nij.image_dim,
        "dim_V": m,
    }
    bg = geometry.geometry_package(sm, support.background(model_id), TOL)
    facts["background"] = _metric_facts(sm, bg)
    values = bg.report.values
    facts["H_constant"] = values["H_constant"]
    facts["mu"] = values["mu"]
    del bg
    deformed = []
    if not rep.is_compact:
        for metric in support.deformed_metrics(model_id):
            deformed.append(_metric_facts(sm, geometry.geometry_package(sm, metric, TOL)))
    facts["deformed"] = deformed
    return facts


def _all_metrics(facts: dict[str, Any]) -> list[tuple[str, dict[str, Any]]]:
    out = [("S=0", facts["background"])]
    out += [(f"S#{k}", f) for k, f in enumerate(facts["deformed"])]
    return out


def test_criterion_1_catalog_integrity():
    failures = []
    for cid in CATALOG:
        f = catalog_facts(cid)
        if not (f["jacobi_L"] < TOL and f["jacobi_g"] < TOL):
            failures.append(f"{cid}: jacobi {max(f['jacobi_L'], f['jacobi_g']):.1e}")
        if not f["admissible"]:
            failures.append(f"{cid}: not admissible")
        if not f["background_ok"]:
            failures.append(f"{cid}: background branch checks")
    support.record(1, "catalog integrity", failures, f"{len(CATALOG)} representations")
    assert not failures


def test_criterion_2_casimir_identity():
    failures = [f"{cid}: {catalog_facts(cid)['casimir_residual']:.1e}" for cid in CATALOG
                if not catalog_facts(cid)["casimir_residual"] < TOL]
    C = casimir(support.model("sp:1").rep)
    baseline = float(np.max(np.abs(C - 0.25 * np.eye(C.shape[0]))))
    if not baseline < 1e-12:
        failures.append(f"sp:1 casimir differs from 1/4 by {baseline:.1e}")
    support.record(2, "Casimir identity", failures, f"sp:1 |C - 1/4| = {baseline:.1e}")
    assert not failures


def test_criterion_3_radical_is_nullity():
    failures = []
    for cid in CATALOG:
        report = catalog_facts(cid)["nullity"]
        failures += [f"{cid}: {c.name} {c.residual:.1e}" for c in report.failures()]
    semisimple = threesym.curvature_nullity_W(support.model("fixture:hermitian_sl2").model)
    if semisimple.W.dim != 0:
        failures.append(f"semisimple fixture has W of dim {semisimple.W.dim}")
    two_step = support.model("fixture:two_step")
    nilpotent = threesym.curvature_nullity_W(two_step.model)
    if nilpotent.W.dim != two_step.model.dim_V:
        failures.append(f"type II fixture has W of dim {nilpotent.W.dim}")
    support.record(3, "radical equals nullity", failures, f"{len(CATALOG)} models, 2 fixtures")
    assert not failures


def test_criterion_4_curvature_consistency():
    failures = []
    certified = 0
    for cid in CATALOG:
        for label, f in _all_metrics(catalog_facts(cid)):
            if not f["curvature_worst"] < TOL or f["curvature_checks"] != 8:
                failures.append(f"{cid} {label}: component/symmetry {f['curvature_worst']:.1e}")
            if f["quasi_kahler"]:
                certified += 1
                if not f["gray_G2"] < TOL:
                    failures.append(f"{cid} {label}: G2 {f['gray_G2']:.1e}")
    for fid in FIXTURES:
        sm, pkg = support.model(fid), support.package(fid)
        sym = geometry.riemann_symmetry_report(pkg.Rg, TOL)
        kahler = geometry.kahler_checks(sm, pkg.metric, pkg.Rg, TOL)
        if not sym.passed:
            failures.append(f"{fid}: Riemann symmetries")
        if kahler["quasi_kahler"].passed:
            certified += 1
            if not kahler.values["G2"] < TOL:
                failures.append(f"{fid}: G2 {kahler.values['G2']:.1e}")
    support.record(4, "curvature consistency", failures, f"{certified} quasi-Kahler model+metric pairs")
    assert not failures


def test_criterion_5_ricci_soliton():
    failures = []
    deformed_count = 0
    complex_models = 0
    for cid in CATALOG:
        f = catalog_facts(cid)
        if f["compact"]:
            continue
        bg = f["background"]
        if not (bg["soliton_residual"] < 1e-7 and bg["soliton_lambda"] < 0):
            failures.append(f"{cid}: soliton residual {bg['soliton_residual']:.1e}, "
                            f"lambda {bg['soliton_lambda']:.3f}")
        predicted = -(f["mu"] + 0.5)
        if not abs(f["H_constant"] - predicted) <= 1e-7 * abs(predicted):
            failures.append(f"{cid}: H constant {f['H_constant']:.9f} vs {predicted:.9f}")
        if f["c_minus_dim"]:
            complex_models += 1
            if len(f["deformed"]) < 5:
                failures.append(f"{cid}: only {len(f['deformed'])} deformed metrics")
            for k, d in enumerate(f["deformed"]):
                deformed_count += 1
                if not (d["soliton_residual"] > 1e-3 and not d["almost_kahler"]):
                    failures.append(f"{cid} S#{k}: residual {d['soliton_residual']:.1e}, "
                                    f"almost Kahler {d['almost_kahler']}")
    support.record(5, "Ricci soliton iff almost Kahler", failures,
                   f"{deformed_count} deformed metrics on {complex_models} models")
    assert not failures


def test_criterion_6_irreducibility():
    failures = []
    type_three = type_four = skipped = 0
    for cid in CATALOG:
        f = catalog_facts(cid)
        if f["type"] == semidirect.TYPE_III:
            if not f["L_simple"]:
                skipped += 1
                continue
            for label, mf in _all_metrics(f):
                type_three += 1
                if not mf["irreducible"]:
                    failures.append(f"{cid} {label}: reducible")
        elif f["type"] == semidirect.TYPE_IV:
            type_four += 1
            bg = f["background"]
            if bg["irreducible"] or not bg["splits_V_H"]:
                failures.append(f"{cid}: (V, H) splitting not recovered")
    support.record(6, "irreducibility", failures,
                   f"{type_three} type III pairs irreducible, {type_four} duals split, "
                   f"{skipped} non-simple L excluded")
    assert not failures


@lru_cache(maxsize=None)
def isometry_facts(model_id: str) -> dict[str, Any]:
    sm = support.model(model_id)
    result = isometry.isometry_analysis(sm, support.background(model_id))
    return {
        "dim_gb": result.dim,
        "predicted": sm.dim_module + len(sm.L_block) + len(centralizer_split(sm.rep).c_minus),
        "jacobi": result.gb_jacobi,
        "i_minus": result.dichotomy["i_minus_dim"],
    }


def test_criterion_7_isometry_dimension():
    failures = []
    dims = []
    for cid in ISOMETRY_MODELS:
        f = isometry_facts(cid)
        dims.append(f"{cid}={f['dim_gb']}")
        if f["dim_gb"] != f["predicted"]:
            failures.append(f"{cid}: dim g_b {f['dim_gb']} vs {f['predicted']}")
        if not f["jacobi"] < TOL:
            failures.append(f"{cid}: g_b jacobi {f['jacobi']:.1e}")
        if f["i_minus"] != 0:
            failures.append(f"{cid}: i^- has dim {f['i_minus']}")
    support.record(7, "isometry dimension", failures, ", ".join(dims))
    assert not failures


def test_criterion_8_moduli_separation():
    sm = support.model(MODULI_MODEL)
    rows = moduli.moduli_scan(sm, 5)
    failures = []
    worst = max(r.relative_error for r in rows)
    separation = moduli.min_separation(rows)
    if len(rows) != 15:
        failures.append(f"{len(rows)} grid points instead of 15")
    if not worst < 1e-7:
        failures.append(f"psi prediction error {worst:.1e}")
    if not separation > 1e-4:
        failures.append(f"separation {separation:.1e}")
    permutation = 0.0
    for row in rows:
        swapped = moduli.scan_point(sm, row.lam[::-1])
        permutation = max(permutation, float(np.max(np.abs(np.subtract(swapped.spectrum, row.spectrum)))))
    if not permutation < 1e-12:
        failures.append(f"permuted lambda changes the spectrum by {permutation:.1e}")
    support.record(8, "moduli separation", failures,
                   f"{len(rows)} points, error {worst:.1e}, separation {separation:.3f}, "
                   f"permutation {permutation:.1e}")
    assert not failures


def test_criterion_9_polar_foliation():
    failures = []
    count = 0
    for cid in CATALOG:
        f = catalog_facts(cid)
        if f["type"] != semidirect.TYPE_III:
            continue
        for label, mf in _all_metrics(f):
            count += 1
            if not mf["polar"]:
                failures.append(f"{cid} {label}: not polar")
    support.record(9, "polar foliation", failures, f"{count} type III model+metric pairs")
    assert not failures


def test_criterion_10_nijenhuis():
    failures = []
    for cid in CATALOG:
        f = catalog_facts(cid)
        nij = f["nijenhuis"]
        if not nij["torsion"] < TOL:
            failures.append(f"{cid}: |N + 4T| {nij['torsion']:.1e}")
        if nij["kernel_dim"] != 0:
            failures.append(f"{cid}: Nijenhuis kernel of dim {nij['kernel_dim']}")
        if f["type"] == semidirect.TYPE_III:
            if not (nij["image_angle"] < CONFIG.angle_tol and nij["image_dim"] < nij["dim_V"]):
                failures.append(f"{cid}: Nijenhuis image is not the module block")
    for fid in FIXTURES:
        residual = threesym.nijenhuis(support.model(fid).model).torsion_residual
        if not residual < TOL:
            failures.append(f"{fid}: |N + 4T| {residual:.1e}")
    support.record(10, "Nijenhuis tensor", failures, f"{len(CATALOG)} models, {len(FIXTURES)} fixtures")
    assert not failures


@pytest.mark.parametrize("cid", ["su1n:1:1", "so2n:3"])
def test_deformations_stay_in_centralizer(cid):
    rep = support.model(cid).rep
    S = support.deformation_direction(rep)
    element = S @ rep.J_V
    assert max(float(np.max(np.abs(element @ r - r @ element))) for r in rep.rho) < 1e-9
