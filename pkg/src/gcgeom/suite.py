"""Workspaces of named structures and the check commands run over them.

A workspace is what a structure file or a catalog entry amounts to: charts,
named definitions, named structures and per-command check options.  Both the
command line and the catalog go through :func:`run_command`, so a catalog
entry and its file twin are checked by the same code path.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from .bigtangent import COURANT, Bracket, BundleEndomorphism, NotClosedError, check_closed_form
from .calculus import KForm
from .expr import Chart, SamplePlan
from .products import (
    ProductChart,
    WarpResult,
    check_closed_forms,
    check_theorem1,
    classify_factor,
    lift_to_product,
    product_chart,
    product_gacx,
    product_metric,
    theorem41_pipeline,
    warp_transform,
)
from .structures import (
    CheckReport,
    GacmsRecord,
    GacsRecord,
    GacxRecord,
    check_gacms,
    check_gacs,
    check_gacx,
    check_generalized_kahler,
    check_generalized_metric,
    classify_gacs,
)

COMMANDS = ("validate", "classify", "kahler", "theorem1", "theorem41")


class UsageError(ValueError):
    """A request that cannot be run as stated (bad names, wrong kinds)."""


@dataclass(frozen=True)
class ProductStructure:
    """The almost complex structure J induced on a product by two factor structures."""

    left: Any
    right: Any
    pc: ProductChart

    @property
    def gacx(self) -> GacxRecord:
        return product_gacx(self.left, self.right, self.pc)

    @property
    def chart(self) -> Chart:
        return self.pc.chart


@dataclass
class WarpStructure:
    """A Sasakian-type factor and the ℝ⁺ model, warped; rebuilt when the plan changes."""

    left: GacmsRecord
    right: GacmsRecord
    pc: ProductChart
    plan: SamplePlan
    _cache: dict = field(default_factory=dict, repr=False)

    def at(self, plan: SamplePlan) -> WarpResult:
        if plan not in self._cache:
            self._cache[plan] = warp_transform(self.left, self.right, self.pc, plan)
        return self._cache[plan]

    @property
    def result(self) -> WarpResult:
        return self.at(self.plan)

    @property
    def chart(self) -> Chart:
        return self.result.product.chart

    def factors(self, plan: SamplePlan) -> list[tuple[str, str, GacsRecord]]:
        res = self.at(plan)
        (l, r), (lt, rt) = res.pair, res.pair_tilde
        return [("Φ1", "left", l.gacs), ("Φ~1", "left", lt.gacs),
                ("Φ2", "right", r.gacs), ("Φ~2", "right", rt.gacs)]


@dataclass
class Workspace:
    name: str
    plan: SamplePlan
    charts: dict[str, Chart] = field(default_factory=dict)
    products: dict[str, ProductChart] = field(default_factory=dict)
    objects: dict[str, Any] = field(default_factory=dict)
    structures: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, dict] = field(default_factory=dict)
    provenance: str = ""

    def structure(self, name: str):
        """Look a structure up; ``S.J1``/``S.J2`` reach into warp and product structures."""
        base, _, attr = name.partition(".")
        if base not in self.structures:
            raise UsageError(f"unknown structure {base!r}")
        s = self.structures[base]
        if not attr:
            return s
        if isinstance(s, WarpStructure) and attr in ("J1", "J2"):
            return getattr(s.at(self.plan), attr)
        raise UsageError(f"structure {base!r} has no part {attr!r}")

    def product_for(self, left: Chart, right: Chart) -> ProductChart:
        for pc in self.products.values():
            if pc.left.same_as(left) and pc.right.same_as(right):
                return pc
        return product_chart(left, right)


@dataclass
class RunResult:
    command: str
    checks: list[CheckReport]
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, plan: SamplePlan, source: str = "") -> dict:
        out = {"command": self.command, "seed": plan.seed, "tolerance": plan.tolerance,
               "points": plan.count}
        if source:
            out["source"] = source
        out.update(self.extra)
        out["checks"] = [c.to_dict() for c in self.checks]
        out["verdict"] = "pass" if self.passed else "fail"
        return out

    def summary(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for k, v in self.extra.items():
            lines.append(f"  {k}: {v}")
        for c in self.checks:
            lines.extend("  " + s for s in c.lines())
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# brackets


def resolve_bracket(ws: Workspace, spec: str | None, chart: Chart) -> Bracket:
    """``courant`` or ``derived:<name>`` with <name> a closed one-form of the workspace.

    A one-form defined on a factor is lifted when the check runs on a product.
    """
    if spec in (None, "", "courant"):
        return COURANT
    kind, _, name = spec.partition(":")
    if kind != "derived" or not name:
        raise UsageError(f"bad bracket {spec!r}; use courant or derived:<oneform>")
    theta = ws.objects.get(name)
    if not isinstance(theta, KForm) or theta.degree != 1:
        raise UsageError(f"{name!r} is not a one-form definition")
    if not theta.chart.same_as(chart):
        for pc in ws.products.values():
            if not pc.chart.same_as(chart):
                continue
            for side, fc in (("left", pc.left), ("right", pc.right)):
                if fc.coords == theta.chart.coords:
                    theta = lift_to_product(theta, side, pc)
                    break
            break
        if not theta.chart.same_as(chart):
            raise UsageError(f"one-form {name!r} does not live on {chart.name}")
    try:
        check_closed_form(theta, ws.plan, name)
    except NotClosedError as exc:
        raise UsageError(f"derived bracket needs a closed one-form: {exc}") from exc
    return Bracket(theta, f"derived:{name}")


# ---------------------------------------------------------------------------
# commands


def _names(opts: dict, key: str, ws: Workspace, default) -> list[str]:
    raw = opts.get(key)
    if raw is None:
        return list(default)
    return raw.split() if isinstance(raw, str) else list(raw)


def _gacx(ws: Workspace, name: str) -> GacxRecord:
    s = ws.structure(name)
    if isinstance(s, ProductStructure):
        return s.gacx
    if isinstance(s, GacxRecord):
        return s
    raise UsageError(f"{name!r} is not a generalized almost complex structure")


def validate_structure(name: str, s, plan: SamplePlan) -> CheckReport:
    if isinstance(s, GacmsRecord):
        rep = check_gacms(s, plan)
    elif isinstance(s, GacsRecord):
        rep = check_gacs(s, plan)
    elif isinstance(s, GacxRecord):
        rep = check_gacx(s, plan)
    elif isinstance(s, ProductStructure):
        rep = check_gacx(s.gacx, plan)
    elif isinstance(s, WarpStructure):
        rep = s.at(plan).report
    elif isinstance(s, BundleEndomorphism):
        rep = check_generalized_metric(s, plan)
    else:
        raise UsageError(f"cannot validate {name!r}")
    rep = CheckReport.combine(f"{name}: {rep.name}", rep.children or [rep], rep.bracket)
    return rep


def _classification_report(name, cl, expect: dict | None) -> CheckReport:
    ok = True
    detail = ",".join(k for k, v in cl.flags().items() if v) or "none"
    if expect:
        bad = {k: cl.flags()[k] for k, v in expect.items() if cl.flags()[k] != v}
        ok = not bad
        if bad:
            detail += f"; expected {expect}"
    r = CheckReport(f"{name}: {cl.label}", ok, 0.0 if ok else 1.0, 0.5, witness_detail=detail,
                    bracket=cl.reports[0].bracket, children=list(cl.reports))
    return r


def _run_validate(ws, opts, bracket_spec):
    names = _names(opts, "structures", ws, ws.structures)
    return RunResult("validate", [validate_structure(n, ws.structure(n), ws.plan) for n in names])


def _run_classify(ws, opts, bracket_spec):
    default = [n for n, s in ws.structures.items() if isinstance(s, (GacsRecord, GacmsRecord, WarpStructure))]
    expect = opts.get("expect", {})
    checks, flags = [], {}
    for n in _names(opts, "structures", ws, default):
        s = ws.structure(n)
        if isinstance(s, (GacsRecord, GacmsRecord)):
            g = s.gacs if isinstance(s, GacmsRecord) else s
            cl = classify_gacs(g, ws.plan, resolve_bracket(ws, bracket_spec, g.chart))
            flags[n] = cl.flags()
            checks.append(_classification_report(n, cl, expect.get(n)))
        elif isinstance(s, WarpStructure):
            br = resolve_bracket(ws, bracket_spec, s.chart)
            for label, side, g in s.factors(ws.plan):
                key = f"{n}.{label}"
                cl = classify_factor(g, side, s.at(ws.plan).product, br, ws.plan)
                flags[key] = cl.flags()
                checks.append(_classification_report(key, cl, expect.get(key)))
        else:
            raise UsageError(f"{n!r} is not a generalized almost contact structure")
    return RunResult("classify", checks, {"flags": flags})


def _run_kahler(ws, opts, bracket_spec):
    try:
        j1, j2 = _gacx(ws, opts["j1"]), _gacx(ws, opts["j2"])
    except KeyError as exc:
        raise UsageError(f"kahler needs j1 and j2 (missing {exc})") from None
    br = resolve_bracket(ws, bracket_spec, j1.chart)
    rep = check_generalized_kahler(j1, j2, ws.plan, br)
    rep.name = f"{opts['j1']}, {opts['j2']}: generalized kahler"
    return RunResult("kahler", [rep])


def _run_theorem1(ws, opts, bracket_spec):
    try:
        p, pt = ws.structure(opts["pair"]), ws.structure(opts["tilde"])
    except KeyError as exc:
        raise UsageError(f"theorem1 needs pair and tilde (missing {exc})") from None
    if not (isinstance(p, ProductStructure) and isinstance(pt, ProductStructure)):
        raise UsageError("theorem1 pair and tilde must be product structures")
    if not p.chart.same_as(pt.chart):
        raise UsageError("theorem1 pair and tilde live on different products")
    res = check_theorem1((p.left, p.right), (pt.left, pt.right), p.pc, ws.plan)
    closed = check_closed_forms((p.left, p.right), (pt.left, pt.right), p.pc, ws.plan)
    extra = {"commute": res.commute, "conditions": res.conditions, "biconditional": res.agree}
    return RunResult("theorem1", [res.report, closed], extra)


def _run_theorem41(ws, opts, bracket_spec):
    try:
        left, right = ws.structure(opts["left"]), ws.structure(opts["right"])
    except KeyError as exc:
        raise UsageError(f"theorem41 needs left and right (missing {exc})") from None
    if not (isinstance(left, GacmsRecord) and isinstance(right, GacmsRecord)):
        raise UsageError("theorem41 factors must be generalized almost contact metric structures")
    pc = ws.product_for(left.chart, right.chart)
    br = resolve_bracket(ws, bracket_spec, pc.chart)
    if br is not COURANT:
        raise UsageError("theorem41 compares Courant verdicts only")
    res = theorem41_pipeline(left, right, pc, ws.plan)
    extra = {"agreement": res.agree, "kahler": res.kahler.verdict,
             "co_kahler": [c.verdict for c in res.co_kahler]}
    return RunResult("theorem41", [res.kahler, *res.co_kahler], extra)


_RUNNERS = {
    "validate": _run_validate,
    "classify": _run_classify,
    "kahler": _run_kahler,
    "theorem1": _run_theorem1,
    "theorem41": _run_theorem41,
}


def run_command(ws: Workspace, command: str, bracket: str | None = None) -> RunResult:
    if command not in _RUNNERS:
        raise UsageError(f"unknown command {command!r}")
    opts = ws.checks.get(command)
    if opts is None:
        if command in ("validate", "classify"):
            opts = {}
        else:
            raise UsageError(f"{ws.name}: no [check {command}] section")
    if bracket is None:
        bracket = opts.get("bracket")
    elif bracket != opts.get("bracket", "courant") and "expect" in opts:
        # recorded expectations belong to the file's own bracket
        opts = {k: v for k, v in opts.items() if k != "expect"}
    plan_keys = {k: opts[k] for k in ("seed", "points", "tol") if k in opts}
    if plan_keys:
        ws = replace(ws, plan=SamplePlan(int(plan_keys.get("seed", ws.plan.seed)),
                                         int(plan_keys.get("points", ws.plan.count)),
                                         float(plan_keys.get("tol", ws.plan.tolerance))))
    return _RUNNERS[command](ws, opts, bracket)


# ---------------------------------------------------------------------------
# structure builders shared by the file parser and the catalog


def metric_image(p: ProductStructure) -> GacxRecord:
    """J₂ = G J₁ with G the product of the factor metrics."""
    if not (isinstance(p.left, GacmsRecord) and isinstance(p.right, GacmsRecord)):
        raise UsageError("metric image needs metric factors")
    G = product_metric(p.left.metric, p.right.metric, p.pc)
    return GacxRecord(G @ p.gacx.j)


def swapped(s):
    if isinstance(s, GacmsRecord):
        return GacmsRecord(s.gacs.swapped(), s.metric)
    if isinstance(s, GacsRecord):
        return s.swapped()
    raise UsageError("only generalized almost contact structures have section labels")
