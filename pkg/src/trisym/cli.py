"""Command-line front end and theorem-check runner.

Every command builds a model from a catalog id, runs one family of checks and
prints a table of residuals.  ``--json`` writes the same report as a
deterministic JSON document.  Exit codes: 0 all checks pass, 1 some check
failed, 2 unknown model id, 3 bad metric flag.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import geometry, isometry, moduli, semidirect, threesym
from .config import Config, load_config
from .errors import (
    BadMetricFlag,
    Inconclusive,
    NotInCentralizer,
    NotPositive,
    OutOfDomain,
    QuaternionicUnsupported,
    TrisymError,
    UnknownModelId,
)
from .geometry import MetricSpec
from .lie_core import Subspace, jacobi_residual, principal_angle
from .rep_catalog import (
    acceptance_ids,
    background_report,
    casimir_report,
    catalog_ids,
    centralizer_split,
    check_admissible,
    resolve,
    rho_z_spectrum_report,
)
from .report import Check, Report
from .semidirect import SemidirectModel

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_UNKNOWN_MODEL = 2
EXIT_BAD_METRIC = 3

FIXTURE_PREFIX = "fixture:"


# ---------------------------------------------------------------------------
# Reports


def jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, Subspace):
        return value.dim
    return value


@dataclass
class RunReport:
    command: str
    model_id: str
    report: Report = field(default_factory=Report)
    artifacts: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def add(self, other: Report, prefix: str = "") -> None:
        self.report = self.report.merged(other, prefix)

    def to_json(self) -> dict[str, Any]:
        return jsonable({
            "command": self.command,
            "model_id": self.model_id,
            "pass": self.passed,
            "checks": self.report.to_json(),
            "values": self.report.values,
            "artifacts": self.artifacts,
        })

    def render(self) -> str:
        lines = [f"{self.command} {self.model_id}"]
        if self.report.checks:
            width = max(len(c.name) for c in self.report.checks)
            for c in self.report.checks:
                relation = ">" if c.kind == "above" else "<"
                status = "pass" if c.passed else "FAIL"
                lines.append(f"  {c.name:<{width}}  {c.residual:11.3e} {relation} {c.threshold:<9.2e} {status}")
        for key, value in self.report.values.items():
            lines.append(f"  {key} = {_short(value)}")
        lines.append(f"  overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _short(value: Any) -> str:
    value = jsonable(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list) and value and all(isinstance(v, float) for v in value):
        return "[" + ", ".join(f"{v:.6g}" for v in value) + "]"
    return json.dumps(value, sort_keys=True)


def dumps(payload: Any) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2)


def _flag(name: str, ok: bool) -> Check:
    """A boolean outcome expressed as a residual check."""
    return Check(name, 0.0 if ok else 1.0, 0.5)


# ---------------------------------------------------------------------------
# Model and metric resolution


def build_model(model_id: str) -> SemidirectModel:
    cid = model_id.strip()
    if cid.startswith("model:"):
        cid = cid[len("model:"):]
    if cid.startswith(FIXTURE_PREFIX):
        name = cid[len(FIXTURE_PREFIX):]
        if name not in semidirect.FIXTURES:
            raise UnknownModelId(f"unknown fixture {name!r}; known: {sorted(semidirect.FIXTURES)}")
        return semidirect.FIXTURES[name]()
    return semidirect.build_type_model(resolve(cid))


def _split_metric_flag(text: str) -> dict[str, str]:
    """Split key=value items on top-level commas; bare items extend the previous value."""
    items: list[str] = []
    depth, current = 0, ""
    for char in text:
        depth += char in "[("
        depth -= char in "])"
        if char == "," and depth == 0:
            items.append(current)
            current = ""
        else:
            current += char
    items.append(current)
    out: dict[str, str] = {}
    last = None
    for item in items:
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if sep and key.strip() in ("S", "t", "lambda"):
            last = key.strip()
            if last in out:
                raise BadMetricFlag(f"metric key {last!r} given twice")
            out[last] = value.strip()
        elif last is not None and last != "t":
            out[last] += "," + item
        else:
            raise BadMetricFlag(f"cannot parse metric item {item!r}")
    return out


def _parse_float(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise BadMetricFlag(f"{what} must be a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise BadMetricFlag(f"{what} must be finite")
    return value


def _S_from_text(sm: SemidirectModel, text: str) -> np.ndarray:
    rep = sm.rep
    n = rep.dimV
    text = text.strip()
    if text in ("0", "0.0", ""):
        return np.zeros((n, n))
    if text.startswith("["):
        try:
            matrix = np.array(json.loads(text), dtype=float)
        except (ValueError, TypeError) as exc:
            raise BadMetricFlag(f"S is not a JSON matrix: {exc}") from exc
        if matrix.shape != (n, n):
            raise BadMetricFlag(f"S must be {n} x {n}, got shape {matrix.shape}")
        return matrix
    generators = centralizer_split(rep).c_minus
    A = np.zeros((n, n))
    for term in text.split(","):
        name, sep, coeff = term.partition(":")
        name = name.strip()
        if not sep or not name.startswith("c") or not name[1:].isdigit():
            raise BadMetricFlag(f"S term {term!r} is not of the form c<k>:<coeff>")
        k = int(name[1:])
        if k >= len(generators):
            raise BadMetricFlag(f"generator {name} does not exist (c^- has dimension {len(generators)})")
        A += _parse_float(coeff, name) * generators[k]
    # S J must equal A, and J^2 = -1
    return -A @ rep.J_V


def parse_metric(sm: SemidirectModel, text: str | None) -> MetricSpec:
    """Interpret ``--metric``; fixtures only accept the default."""
    if text is None:
        return geometry.default_metric(sm)
    fields_ = _split_metric_flag(text)
    if not sm.is_semidirect:
        if set(fields_) - {"S"} or fields_.get("S", "0") not in ("0", "0.0"):
            raise BadMetricFlag("fixtures only support the default metric")
        return geometry.default_metric(sm)
    t = _parse_float(fields_["t"], "t") if "t" in fields_ else 1.0
    try:
        if "lambda" in fields_:
            if "S" in fields_:
                raise BadMetricFlag("give either S or lambda, not both")
            values = [_parse_float(v, "lambda") for v in fields_["lambda"].split(",") if v.strip()]
            return moduli.g_lambda(sm.rep, values, t)
        S = _S_from_text(sm, fields_.get("S", "0"))
        return geometry.metric_from_S(sm.rep, S, t)
    except (NotInCentralizer, NotPositive, OutOfDomain) as exc:
        raise BadMetricFlag(str(exc)) from exc


def _is_background(metric: MetricSpec) -> bool:
    return metric.S is not None and float(np.max(np.abs(metric.S), initial=0.0)) == 0.0


# ---------------------------------------------------------------------------
# Commands


def cmd_catalog(config: Config, window: str = "catalog") -> RunReport:
    ids = acceptance_ids() if window == "acceptance" else catalog_ids(config)
    run = RunReport("catalog", window)
    entries = []
    for cid in ids:
        rep = resolve(cid)
        entries.append({"id": cid, "dim_L": rep.L.dim, "dim_V": rep.dimV, "type": rep.type_flag})
    run.artifacts["entries"] = entries
    return run


def cmd_build(model_id: str, config: Config) -> RunReport:
    sm = build_model(model_id)
    run = RunReport("build", model_id)
    model = sm.model
    run.add(Report((Check("jacobi", jacobi_residual(model.algebra), config.tol),), {
        "type": sm.type_flag,
        "dim_g": model.algebra.dim,
        "dim_h": model.dim_h,
        "dim_V": model.dim_V,
        "dim_module": sm.dim_module,
    }))
    run.artifacts["model"] = sm.to_json()
    return run


def representation_report(rep, config: Config) -> Report:
    tol = config.tol
    adm = check_admissible(rep, tol)
    report = Report((
        Check("L_jacobi", jacobi_residual(rep.L), tol),
        _flag("admissible", adm.verdict),
    ), {"fixed_vectors_dim": adm.fixed_vectors_dim})
    report = report.merged(background_report(rep, rep.h_V, tol), "background.")
    report = report.merged(casimir_report(rep, tol=tol), "casimir.")
    report = report.merged(rho_z_spectrum_report(rep))
    return report


def nullity_report(sm: SemidirectModel, config: Config) -> Report:
    """The curvature nullity W three ways, compared with the module block."""
    model = sm.model
    m = model.dim_V
    result = threesym.curvature_nullity_W(model, config.rank_threshold, config.angle_tol)
    expected = Subspace.coordinate(m, range(sm.module_slice.start, sm.module_slice.stop))
    if sm.type_flag == "II" or sm.type_flag == "flat":
        expected = Subspace.full(m)
    checks = [Check("W_killing_agree", result.angles[0], config.angle_tol),
              Check("W_transvection_agree", result.angles[1], config.angle_tol),
              Check("W_is_module", principal_angle(result.W, expected), config.angle_tol)]
    return Report(tuple(checks), {"W_dim": result.W.dim})


def nijenhuis_report(sm: SemidirectModel, config: Config) -> Report:
    model = sm.model
    nij = threesym.nijenhuis(model, config.rank_threshold)
    checks = [Check("nijenhuis_torsion", nij.torsion_residual, config.tol)]
    values: dict[str, Any] = {"nijenhuis_kernel_dim": nij.kernel_dim, "nijenhuis_image_dim": nij.image_dim}
    if sm.is_semidirect:
        m = model.dim_V
        module = Subspace.coordinate(m, range(sm.module_slice.start, sm.module_slice.stop))
        checks.append(Check("nijenhuis_kernel_zero", float(nij.kernel_dim), 0.5))
        checks.append(Check("nijenhuis_image_is_module", principal_angle(nij.image, module), config.angle_tol))
        checks.append(_flag("nijenhuis_not_maximal", nij.image_dim < m))
    return Report(tuple(checks), values)


def cmd_check(model_id: str, config: Config) -> RunReport:
    sm = build_model(model_id)
    run = RunReport("check", model_id)
    tol = config.tol
    run.add(Report((Check("jacobi", jacobi_residual(sm.model.algebra), tol),)))
    if sm.is_semidirect:
        run.add(representation_report(sm.rep, config), "rep.")
        run.add(semidirect.structural_report(sm, config.rank_threshold, config.angle_tol,
                                             raise_on_failure=False), "structure.")
        run.add(semidirect.block_structure_report(sm, tol), "blocks.")
    elif sm.type_flag == "II":
        run.add(threesym.type_two_report(sm.model, tol), "type_two.")
    run.add(threesym.verify_model_identities(sm.model, tol), "identities.")
    run.add(nullity_report(sm, config), "nullity.")
    run.add(nijenhuis_report(sm, config))
    return run


def curvature_report(sm: SemidirectModel, metric: MetricSpec, config: Config) -> tuple[Report, dict[str, Any]]:
    tol = config.tol
    package = geometry.geometry_package(sm, metric, tol)
    report = package.report
    report = report.merged(geometry.kahler_checks(sm, metric, package.Rg, tol), "kahler.")
    if sm.is_semidirect:
        report = report.merged(geometry.foliation_check(sm, metric, package.eta, tol), "foliation.")
        red = geometry.reducibility_test(sm, metric, package.Rg, package.eta, config.rank_threshold)
        extra = {"irreducible": red.irreducible, "splitting_dims": [s.dim for s in red.splitting]}
        extra["L_simple"] = sm.L_simple
        if sm.type_flag == semidirect.TYPE_III and sm.L_simple:
            report = report.merged(Report((_flag("irreducible", red.irreducible),), extra))
        elif sm.type_flag == semidirect.TYPE_IV and _is_background(metric):
            m = sm.model.dim_V
            blocks = [Subspace.coordinate(m, range(sm.module_slice.start, sm.module_slice.stop)),
                      Subspace.coordinate(m, range(sm.H_slice.start, sm.H_slice.stop))]
            matched = geometry.splitting_matches(red, blocks, config.angle_tol)
            report = report.merged(Report((_flag("reducible_V_H", (not red.irreducible) and matched),), extra))
        else:
            report = report.merged(Report((), extra))
    return report, {"ricci": package.ric, "Q": package.Q}


def cmd_curvature(model_id: str, metric_text: str | None, config: Config) -> RunReport:
    sm = build_model(model_id)
    metric = parse_metric(sm, metric_text)
    run = RunReport("curvature", model_id)
    report, artifacts = curvature_report(sm, metric, config)
    run.add(report)
    run.artifacts.update(artifacts)
    run.artifacts["metric"] = metric.to_json()
    return run


def soliton_report(sm: SemidirectModel, metric: MetricSpec, config: Config) -> Report:
    ric = geometry.ricci(sm, metric, tol=config.tol)
    report = ric.report
    lam, _, residual = geometry.soliton_fit(sm, metric, ric.ric)
    decisive = residual < config.soliton_tol or residual > config.non_soliton_tol
    is_soliton = residual < config.soliton_tol
    values: dict[str, Any] = {"is_soliton": is_soliton, "lambda": lam, "soliton_residual": residual}
    checks = [_flag("soliton_decisive", decisive)]
    if sm.is_semidirect and not sm.rep.is_compact:
        almost = geometry.kahler_checks(sm, metric, tol=config.tol).values["almost_kahler"]
        values["almost_kahler"] = almost
        checks.append(_flag("soliton_iff_almost_kahler", is_soliton == almost))
        if is_soliton:
            checks.append(_flag("expanding", lam < 0))
    return report.merged(Report(tuple(checks), values))


def cmd_soliton(model_id: str, metric_text: str | None, config: Config) -> RunReport:
    sm = build_model(model_id)
    metric = parse_metric(sm, metric_text)
    run = RunReport("soliton", model_id)
    run.add(soliton_report(sm, metric, config))
    return run


def isometry_report(sm: SemidirectModel, metric: MetricSpec, config: Config) -> Report:
    result = isometry.isometry_analysis(sm, metric, config.rank_threshold)
    tol = config.tol
    checks = [
        Check("gb_jacobi", result.gb_jacobi, tol),
        Check("i_closed", isometry.closure_residual(result), 1e-7),
        Check("i_stabilizes_curvature", isometry.curvature_residual(result), tol),
        Check("i_l_invariant", isometry.l_invariance_residual(result), 1e-7),
        Check("i_g_skew", isometry.skew_residual(result, metric), 1e-7),
        Check("hbar_J_in_i", isometry.hbar_membership_residual(result, config.rank_threshold), 1e-7),
    ]
    values: dict[str, Any] = {
        "dim_i": result.dim_i,
        "k_stabilized": result.k_stabilized,
        "dim_gb": result.dim,
        "filtration_dims": list(result.dims),
        **{f"dichotomy.{k}": v for k, v in result.dichotomy.items()},
    }
    if sm.type_flag == semidirect.TYPE_III:
        c_minus = isometry.centralizer_isometry_dim(sm, metric.g[sm.module_slice, sm.module_slice])
        predicted = isometry.predicted_type_three_dim(sm, metric)
        values["reconciliation"] = (f"dim g_b = {result.dim} ; dim V + dim L + dim (c & so(g_V)) = "
                                    f"{sm.dim_module} + {len(sm.L_block)} + {c_minus} = {predicted}")
        checks.append(Check("type_three_dimension", float(abs(result.dim - predicted)), 0.5))
        checks.append(Check("i_minus_zero", float(result.dichotomy["i_minus_dim"]), 0.5))
    return Report(tuple(checks), values)


def cmd_isometry(model_id: str, metric_text: str | None, config: Config) -> RunReport:
    sm = build_model(model_id)
    metric = parse_metric(sm, metric_text)
    run = RunReport("isometry", model_id)
    run.add(isometry_report(sm, metric, config))
    return run


def cmd_moduli(model_id: str, config: Config) -> RunReport:
    rep = build_model(model_id).rep
    if rep is None:
        raise UnknownModelId(f"{model_id!r} has no representation to parametrize")
    run = RunReport("moduli", model_id)
    try:
        description = moduli.moduli_space(rep, config.rank_threshold)
    except QuaternionicUnsupported as exc:
        run.add(Report((), {"normal_form": moduli.QUATERNIONIC, "message": str(exc)}))
        return run
    run.add(Report((), {
        "c_minus_dim": description.c_minus_dim,
        "normal_form": description.normal_form,
        "domain": description.domain,
        "generators": [f"c{k}" for k in range(description.c_minus_dim)],
        "factors": [f"{f.copies} x {f.kind} (dim {f.dim}, c^- {f.c_minus_dim})" for f in description.factors],
    }))
    run.artifacts["moduli"] = description.to_json()
    return run


def cmd_moduli_scan(model_id: str, grid: int, t: float, config: Config, csv_path: str | None) -> RunReport:
    sm = build_model(model_id)
    if sm.rep is None:
        raise UnknownModelId(f"{model_id!r} has no representation to parametrize")
    rows = moduli.moduli_scan(sm, grid, t)
    run = RunReport("moduli-scan", model_id)
    worst = max(r.relative_error for r in rows)
    separation = moduli.min_separation(rows)
    checks = [Check("psi_prediction", worst, 1e-7)]
    if len(rows) > 1:
        checks.append(Check("separation", separation, 1e-4, kind="above"))
    run.add(Report(tuple(checks), {"points": len(rows), "grid": grid}))
    run.artifacts["rows"] = [r.to_json() for r in rows]
    if csv_path:
        with open(csv_path, "w", newline="") as handle:
            csv.writer(handle).writerows(moduli.scan_csv_rows(rows))
    return run


def verify_model(model_id: str, config: Config) -> RunReport:
    """The theorem-check matrix for one catalog entry with its background metric."""
    run = cmd_check(model_id, config)
    run.command = "verify"
    sm = build_model(model_id)
    metric = geometry.default_metric(sm)
    report, _ = curvature_report(sm, metric, config)
    run.add(report, "curvature.")
    if sm.is_semidirect and not sm.rep.is_compact:
        run.add(soliton_report(sm, metric, config), "soliton.")
    if sm.model.dim_V <= isometry.MAX_TANGENT_DIM:
        run.add(isometry_report(sm, metric, config), "isometry.")
    return run


def cmd_verify_all(config: Config, window: str = "catalog", ids: Sequence[str] | None = None,
                   progress: Callable[[str], None] | None = None) -> RunReport:
    if ids is None:
        ids = acceptance_ids() if window == "acceptance" else catalog_ids(config)
    run = RunReport("verify-all", window)
    summary = []
    for cid in ids:
        single = verify_model(cid, config)
        failed = [c.name for c in single.report.failures()]
        summary.append({"id": cid, "pass": single.passed, "failures": failed,
                        "checks": len(single.report.checks)})
        run.report = Report(run.report.checks + (_flag(cid, single.passed),), run.report.values)
        if progress:
            progress(f"{cid}: {'pass' if single.passed else 'FAIL ' + ', '.join(failed)}")
    run.artifacts["models"] = summary
    return run


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trisym", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file overriding tolerances and rank bounds")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", dest="json_path", help="write the report as JSON to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="list catalog ids")
    p.add_argument("--window", choices=["catalog", "acceptance"], default="catalog")
    for name, text in [("build", "build a model"), ("check", "structural identity checks"),
                       ("moduli", "describe the metric moduli")]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("model_id")
    for name, text in [("curvature", "curvature, Ricci and Kahler checks"),
                       ("soliton", "algebraic Ricci soliton test"),
                       ("isometry", "isometry algebra by the stabilizer filtration")]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("model_id")
        p.add_argument("--metric", help="S=<matrix|c<k>:<coeff>,...>,t=<float> or lambda=<csv>[,t=<float>]")
    p = sub.add_parser("moduli-scan", parents=[common], help="Ricci spectra over a grid of the normal form")
    p.add_argument("model_id")
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--csv", dest="csv_path")
    p = sub.add_parser("verify-all", parents=[common], help="run every theorem check over the catalog")
    p.add_argument("--window", choices=["catalog", "acceptance"], default="catalog")
    p.add_argument("--ids", nargs="*", help="restrict to these catalog ids")
    return parser


def run_command(args: argparse.Namespace, config: Config) -> RunReport:
    command = args.command
    if command == "catalog":
        return cmd_catalog(config, args.window)
    if command == "build":
        return cmd_build(args.model_id, config)
    if command == "check":
        return cmd_check(args.model_id, config)
    if command == "curvature":
        return cmd_curvature(args.model_id, args.metric, config)
    if command == "soliton":
        return cmd_soliton(args.model_id, args.metric, config)
    if command == "isometry":
        return cmd_isometry(args.model_id, args.metric, config)
    if command == "moduli":
        return cmd_moduli(args.model_id, config)
    if command == "moduli-scan":
        return cmd_moduli_scan(args.model_id, args.grid, args.t, config, args.csv_path)
    if command == "verify-all":
        return cmd_verify_all(config, args.window, args.ids,
                              progress=lambda line: print(line, file=sys.stderr))
    raise AssertionError(command)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    try:
        run = run_command(args, config)
    except UnknownModelId as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_MODEL
    except BadMetricFlag as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_METRIC
    except (Inconclusive, TrisymError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    if args.command == "catalog":
        for entry in run.artifacts["entries"]:
            print(f"{entry['id']:<16} dim L {entry['dim_L']:>3}  dim V {entry['dim_V']:>4}  {entry['type']}")
    else:
        print(run.render())
    if args.json_path:
        Path(args.json_path).write_text(dumps(run.to_json()) + "\n")
    return EXIT_OK if run.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
