"""Dispatch of validated experiments and report emission."""

from __future__ import annotations

import csv
import json
import random
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from importlib import metadata
from typing import Optional

from .. import baryloc, crucial, resfunc
from ..berktree import (
    CPAFn,
    Skeleton,
    TypeIIPoint,
    format_point,
    gauss_point,
    make_point,
    measure_from_json,
    parse_point,
    rho,
    skeleton_from_json,
    tree_laplacian,
)
from ..errors import ConfigInvalid
from ..valfield import context, format_rational
from .config import ExperimentConfig
from .presets import REFERENCE_FOR

try:
    VERSION = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a source checkout
    VERSION = "0.1.0"


def _to_decimal(x: Fraction, precision: int) -> str:
    with localcontext() as ctx:
        ctx.prec = precision
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _jsonable(value, precision: int):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, TypeIIPoint):
        return format_point(value)
    if isinstance(value, dict):
        return {k: _jsonable(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v, precision) for v in value]
    return value


def _row_json(row: dict, precision: int) -> dict:
    out = {}
    for key, value in row.items():
        out[key] = _jsonable(value, precision)
        if isinstance(value, Fraction) and value.denominator != 1:
            out[f"{key}_decimal"] = _to_decimal(value, precision)
    return out


@dataclass
class RunReport:
    """Outcome of one experiment; exact values are authoritative."""

    command: str
    config: dict
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    elapsed: Optional[float] = None
    precision: int = 12

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        out = {
            "artifact_version": VERSION,
            "command": self.command,
            "config": self.config,
            "rows": [_row_json(r, self.precision) for r in self.rows],
            "checks": dict(sorted(self.checks.items())),
        }
        if self.extra:
            out["result"] = _jsonable(self.extra, self.precision)
        if self.elapsed is not None:
            out["elapsed_seconds"] = round(self.elapsed, 3)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"


def export_csv(report: RunReport, path: str) -> None:
    """One row per record; exact ``num/den`` columns followed by decimal columns."""
    fraction_cols = [c for c in report.columns if any(isinstance(r.get(c), Fraction) for r in report.rows)]
    header = list(report.columns) + [f"{c}_decimal" for c in fraction_cols]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in report.rows:
            exact = [_jsonable(row.get(c), report.precision) for c in report.columns]
            dec = [
                _to_decimal(row[c], report.precision) if isinstance(row.get(c), Fraction) else ""
                for c in fraction_cols
            ]
            writer.writerow(["" if v is None else v for v in exact] + dec)


# -- commands ------------------------------------------------------------------

def _green_eval(cfg: ExperimentConfig) -> RunReport:
    lift = cfg.lift()
    P = parse_point(cfg.params["point"], lift.ctx)
    rows = [g.to_row() for g in resfunc.green_ladder(lift, P, cfg.params["n_max"], cfg.params.get("C"))]
    cols = ["n", "value", "error_bound", "empirical_gap", "C_used"]
    return RunReport(cfg.command, cfg.echo(), cols, rows,
                     extra={"C_is_user_supplied": "C" in cfg.params})


def _crucial_measure(cfg: ExperimentConfig) -> RunReport:
    lift, n = cfg.lift(), cfg.params["n"]
    route = cfg.params["route"]
    extra, checks = {}, {}
    measure = None
    if route in ("laplacian", "both"):
        details = crucial.crucial_laplacian_details(lift, n)
        measure = details.measure
        extra["certified"] = details.certified
        extra["skeleton"] = details.skeleton.to_json()
    if route in ("weights", "both"):
        reports = crucial.crucial_measure_weights(lift, n)
        weighted = crucial.measure_from_weights(lift, n, reports)
        extra["weights"] = [r.to_json() for r in reports if r.weight]
        if measure is not None:
            checks["routes_agree"] = weighted == measure
        measure = weighted
    checks["probability"] = measure.total_mass() == 1 and measure.is_nonnegative()
    rows = [{"point": format_point(P), "weight": w} for P, w in measure.items()]
    extra["measure"] = measure.to_json()
    return RunReport(cfg.command, cfg.echo(), ["point", "weight"], rows, extra, checks)


def _cpa_from_json(data, skel: Skeleton) -> CPAFn:
    ctx = skel.vertices[0].ctx
    if isinstance(data, dict) and "rho_from" in data:
        base = parse_point(data["rho_from"], ctx)
        return CPAFn.from_function(skel, lambda P: rho(base, P))
    if isinstance(data, dict) and "values" in data:
        values = {parse_point(k, ctx): Fraction(str(v)) for k, v in data["values"].items()}
        missing = [format_point(P) for P in skel.vertices if P not in values]
        if missing:
            raise ConfigInvalid(f"f has no value at vertices {missing}")
        return CPAFn(skel, [values[P] for P in skel.vertices])
    raise ConfigInvalid("f must be {'rho_from': point} or {'values': {point: rational}}")


def _graph_from_json(data, ctx) -> Skeleton:
    if isinstance(data, list):
        return Skeleton(parse_point(s, ctx) for s in data)
    if isinstance(data, dict) and "vertices" in data:
        return skeleton_from_json(data, ctx)
    raise ConfigInvalid("graph must be a list of points or {'vertices': [...]}")


def _equidist(cfg: ExperimentConfig) -> RunReport:
    lift = cfg.lift()
    skel = _graph_from_json(cfg.params["graph"], lift.ctx)
    f = _cpa_from_json(cfg.params["f"], skel)
    reference = cfg.params.get("reference") or REFERENCE_FOR.get(cfg.preset or "")
    if reference == "haar":
        if lift.ctx.e != 1:
            raise ConfigInvalid("the Haar reference needs an unramified context")
        ref = crucial.haar_reference(skel)
    elif reference == "gauss":
        ref = crucial.gauss_reference(skel)
    elif isinstance(reference, dict):
        ref = measure_from_json(reference, lift.ctx)
    else:
        raise ConfigInvalid("equidist needs a reference: 'haar', 'gauss' or a measure")
    n_values = range(cfg.params.get("n_min", 1), cfg.params["n_max"] + 1)
    rows = [r.to_row() for r in crucial.equidist_report(lift, n_values, skel, f, ref, cfg.params.get("C"))]
    checks = {"within_bound": all(r["diff"] <= r["bound"] for r in rows)}
    cols = ["n", "integral_nu", "integral_ref", "diff", "bound"]
    return RunReport(cfg.command, cfg.echo(), cols, rows, {}, checks)


def _barycenter(cfg: ExperimentConfig) -> RunReport:
    ctx = context(cfg.p, cfg.params.get("e", 1))
    nu = measure_from_json(cfg.params["measure"], ctx)
    locus = baryloc.barycenter(nu)
    rows = [{"endpoint": format_point(P)} for P in locus.endpoints]
    return RunReport(cfg.command, cfg.echo(), ["endpoint"], rows, {"locus": locus.to_json()})


def _minresloc(cfg: ExperimentConfig) -> RunReport:
    result = baryloc.minresloc(cfg.lift(), cfg.params["n"])
    rows = [{"n": result.n, "kind": result.locus.kind,
             "endpoints": ",".join(format_point(P) for P in result.locus.endpoints),
             "value": result.value}]
    return RunReport(cfg.command, cfg.echo(), ["n", "kind", "endpoints", "value"], rows,
                     {"locus": result.locus.to_json()}, {"routes_agree": True})


def _parse_locus(text: str, ctx) -> baryloc.SegmentLocus:
    pts = [parse_point(s.strip(), ctx) for s in text.split(",") if s.strip()]
    if len(pts) not in (1, 2):
        raise ConfigInvalid("bary must list one or two points")
    return baryloc.SegmentLocus(tuple(pts))


def _containment(cfg: ExperimentConfig) -> RunReport:
    lift = cfg.lift()
    ref = _parse_locus(cfg.params["bary"], lift.ctx)
    n_values = range(cfg.params.get("n_min", 1), cfg.params["n_max"] + 1)
    rows = [r.to_row() for r in baryloc.epsilon_containment(lift, n_values, ref, cfg.params["eps"])]
    return RunReport(cfg.command, cfg.echo(), ["n", "distance", "contained", "locus_kind"], rows)


# -- property suites -----------------------------------------------------------------

def _random_point(rng: random.Random, ctx) -> TypeIIPoint:
    return make_point(ctx, rng.randint(-30, 30), rng.randint(-2, 3))


def _suite_metric(rng: random.Random, trials: int) -> dict:
    ctx = context(rng.choice([2, 3, 5]))
    failures = {"triangle": 0, "laplacian_mass": 0, "retraction": 0, "branching_mass": 0}
    for _ in range(trials):
        A, B, C = (_random_point(rng, ctx) for _ in range(3))
        if rho(A, C) > rho(A, B) + rho(B, C):
            failures["triangle"] += 1
        skel = Skeleton([A, B, C, gauss_point(ctx)])
        f = CPAFn(skel, [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in skel.vertices])
        if tree_laplacian(f).total_mass() != 0:
            failures["laplacian_mass"] += 1
        X = _random_point(rng, ctx)
        R = skel.retract(X)
        if skel.retract(R) != R or not skel.contains(R):
            failures["retraction"] += 1
        from ..berktree import branching_measure

        if branching_measure(skel).total_mass() != 1:
            failures["branching_mass"] += 1
    return failures


def _suite_resfunc(rng: random.Random, trials: int) -> dict:
    from .presets import PRESETS

    failures = {"route_agreement": 0}
    for _ in range(trials):
        lift = PRESETS[rng.choice(sorted(PRESETS))](3)
        P = _random_point(rng, lift.ctx)
        n = rng.randint(1, 2)
        if resfunc.ord_res_at(lift, P, n) != resfunc.ord_res_at_conjugate(lift, P, n):
            failures["route_agreement"] += 1
    return failures


def _suite_crucial(rng: random.Random, trials: int) -> dict:
    from .presets import haar_map, quadratic_map

    failures = {"route_agreement": 0, "probability": 0}
    for lift in (haar_map(3), quadratic_map(3)):
        for n in (1, 2):
            nu = crucial.crucial_measure_laplacian(lift, n)
            weights = crucial.measure_from_weights(lift, n, crucial.crucial_measure_weights(lift, n))
            failures["route_agreement"] += nu != weights
            failures["probability"] += nu.total_mass() != 1
    return failures


SUITE_RUNNERS = {"metric": _suite_metric, "resfunc": _suite_resfunc, "crucial": _suite_crucial}


def _verify(cfg: ExperimentConfig) -> RunReport:
    rng = random.Random(cfg.seed)
    names = sorted(SUITE_RUNNERS) if cfg.params["suite"] == "all" else [cfg.params["suite"]]
    rows, checks = [], {}
    for name in names:
        for check, count in sorted(SUITE_RUNNERS[name](rng, cfg.params["trials"]).items()):
            rows.append({"suite": name, "check": check, "failures": count})
            checks[f"{name}.{check}"] = count == 0
    return RunReport(cfg.command, cfg.echo(), ["suite", "check", "failures"], rows, {}, checks)


DISPATCH = {
    "green-eval": _green_eval,
    "crucial-measure": _crucial_measure,
    "equidist": _equidist,
    "barycenter": _barycenter,
    "minresloc": _minresloc,
    "containment": _containment,
    "verify": _verify,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    report = DISPATCH[cfg.command](cfg)
    report.precision = cfg.precision
    if cfg.timing:
        report.elapsed = time.perf_counter() - start
    return report
