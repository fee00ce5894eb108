"""Built-in example structures.

Each entry is built in memory, validated when loaded and carries the verdicts
it is expected to produce.  A twin in the structure-file format lives under
``data/`` and must reproduce the same verdicts through the parser.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .bigtangent import BundleEndomorphism, GeneralizedSection, bfield_transform
from .calculus import KForm, MetricTensor, VectorField
from .expr import Chart, SamplePlan
from .products import product_chart
from .structures import (
    GacmsRecord,
    GacsRecord,
    lift_almost_contact,
    lift_complex,
    lift_contact,
    lift_symplectic,
    metric_lift,
)
from .suite import ProductStructure, RunResult, WarpStructure, Workspace, metric_image, run_command

CUBE = ((-1.0, 1.0),) * 3
RPLUS = ((0.1, 2.0),)

# ℝ³ with η = dz − y dx; on the Heisenberg model the metric is normalized so
# that g(φX, Y) = −½ dη(X, Y), which is what makes the cone Kähler.
HEIS_PHI = [[0, 1, 0], [-1, 0, 0], [0, "y", 0]]
HEIS_METRIC = [["1/2 + y^2", 0, "-y"], [0, "1/2", 0], ["-y", 0, 1]]


class CatalogError(ValueError):
    pass


@dataclass
class CatalogEntry:
    name: str
    workspace: Workspace
    expected: dict[str, bool]
    note: str = ""
    results: dict[str, RunResult] = field(default_factory=dict)

    def run(self, command: str, bracket: str | None = None) -> RunResult:
        return run_command(self.workspace, command, bracket)

    def twin_path(self):
        return resources.files("gcgeom") / "data" / f"{self.name}.gg"


# ---------------------------------------------------------------------------
# shared pieces


def heisenberg_chart() -> Chart:
    return Chart(("x", "y", "z"), CUBE, "heis")


def rplus_chart() -> Chart:
    return Chart(("t",), RPLUS, "rplus")


def heisenberg_data(c: Chart):
    eta = KForm.one_form(["-y", 0, 1], c)
    xi = VectorField([0, 0, 1], c)
    return eta, xi


def sasakian_lift(c: Chart, plan: SamplePlan) -> GacmsRecord:
    eta, xi = heisenberg_data(c)
    return lift_almost_contact(HEIS_PHI, xi, eta, MetricTensor(HEIS_METRIC, c), plan)


def rplus_model(r: Chart) -> GacmsRecord:
    """Φ = 0, E₊ = dt, E₋ = ∂t, G = [[0, 1], [1, 0]]."""
    gacs = GacsRecord(BundleEndomorphism.zero(r), GeneralizedSection.basis(r, 1),
                      GeneralizedSection.basis(r, 0))
    return GacmsRecord(gacs, metric_lift(MetricTensor([[1]], r)))


# ---------------------------------------------------------------------------
# entries


def _contact_r3(plan):
    c = Chart(("x", "y", "z"), CUBE, "r3")
    eta, xi = heisenberg_data(c)
    ws = Workspace("contact-r3", plan, charts={"r3": c})
    ws.objects.update(eta=eta, xi=xi)
    ws.structures["contact"] = lift_contact(eta, xi, plan)
    ws.checks["classify"] = {"expect": {"contact": {"contact": True, "strong": False, "normal": False}}}
    return ws, {"validate": True, "classify": True}, "contact lift of η = dz − y dx: contact, not strong"


def _sasakian_heisenberg(plan):
    c = heisenberg_chart()
    eta, xi = heisenberg_data(c)
    ws = Workspace("sasakian-heisenberg", plan, charts={"heis": c})
    ws.objects.update(eta=eta, xi=xi)
    m = sasakian_lift(c, plan)
    ws.structures.update(sasakian=m, tilde=m.tilde(), contact=lift_contact(eta, xi, plan))
    ws.checks["classify"] = {"expect": {
        "sasakian": {"contact": True, "strong": True, "normal": True},
        "tilde": {"contact": True, "strong": False, "normal": False},
        "contact": {"contact": True, "strong": False, "normal": False},
    }}
    note = "almost contact lift is normal; the contact lift and GΦ are not strong"
    return ws, {"validate": True, "classify": True}, note


def _kahler_r2(plan):
    c = Chart(("x", "y"), ((-1.0, 1.0),) * 2, "r2")
    omega = KForm.basis(c, "x", "y")
    B = KForm.two_form([[0, "x*y"], ["-x*y", 0]], c)
    # with J_J = diag(-J, J*) the pair is positive when ω(X, Y) = g(JY, X)
    J = [[0, 1], [-1, 0]]
    ws = Workspace("kahler-r2", plan, charts={"r2": c})
    ws.objects.update(omega=omega, b=B)
    jc, js = lift_complex(J, c, plan), lift_symplectic(omega, plan)
    ws.structures.update(complex=jc, symplectic=js,
                         complex_b=bfield_transform(jc, B, plan),
                         symplectic_b=bfield_transform(js, B, plan))
    ws.checks["kahler"] = {"j1": "complex", "j2": "symplectic"}
    return ws, {"validate": True, "kahler": True}, "standard complex and symplectic structures on ℝ², plus a B-field shear"


def _cokahler_r3(plan):
    c = Chart(("x", "y", "z"), CUBE, "r3")
    r = rplus_chart()
    pc = product_chart(c, r, "r3xline")
    phi = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]
    m = lift_almost_contact(phi, VectorField([0, 0, 1], c), KForm.one_form([0, 0, 1], c),
                            MetricTensor([[1, 0, 0], [0, 1, 0], [0, 0, 1]], c), plan)
    line = rplus_model(r)
    ws = Workspace("cokahler-r3", plan, charts={"r3": c, "line": r}, products={"r3xline": pc})
    ws.structures.update(cokahler=m, line=line,
                         pair=ProductStructure(m, line, pc),
                         pair_tilde=ProductStructure(m.tilde(), line.tilde(), pc))
    ws.checks["classify"] = {"structures": "cokahler line", "expect": {
        "cokahler": {"contact": True, "strong": True, "normal": True},
        "line": {"contact": True, "strong": True, "normal": True}}}
    ws.checks["theorem1"] = {"pair": "pair", "tilde": "pair_tilde"}
    ws.checks["theorem41"] = {"left": "cokahler", "right": "line"}
    expected = {"validate": True, "classify": True, "theorem1": True, "theorem41": True}
    return ws, expected, "Kähler ℝ² × line as a co-Kähler ℝ³, producted with the line model"


def _sasakian_times_rplus(plan):
    c, r = heisenberg_chart(), rplus_chart()
    pc = product_chart(c, r, "cyl")
    m, rp = sasakian_lift(c, plan), rplus_model(r)
    p = ProductStructure(m, rp, pc)
    # the companion pair: GΦ with swapped sections on M, the line model unchanged
    pt = ProductStructure(m.tilde(), rp, pc)
    ws = Workspace("sasakian-times-rplus", plan, charts={"heis": c, "rplus": r}, products={"cyl": pc})
    ws.structures.update(sasakian=m, rplus=rp, j1=p, j2=metric_image(p), tilde_pair=pt)
    ws.checks["classify"] = {"structures": "sasakian"}
    ws.checks["kahler"] = {"j1": "j1", "j2": "j2"}
    ws.checks["theorem1"] = {"pair": "j1", "tilde": "tilde_pair"}
    ws.checks["theorem41"] = {"left": "sasakian", "right": "rplus"}
    expected = {"validate": True, "classify": True, "kahler": False, "theorem1": False, "theorem41": False}
    note = ("J₂ = GJ₁ commutes with J₁ but is not Courant integrable; the companion "
            "pair swaps sections on one factor only, so the stated section condition "
            "fails although the structures commute")
    return ws, expected, note


def _sasakian_cone(plan):
    c, r = heisenberg_chart(), rplus_chart()
    pc = product_chart(c, r, "cone")
    m, rp = sasakian_lift(c, plan), rplus_model(r)
    w = WarpStructure(m, rp, pc, plan)
    cone = w.result.product
    ws = Workspace("sasakian-cone", plan, charts={"heis": c, "rplus": r}, products={"cone": cone})
    ws.objects["dt"] = KForm.one_form([0, 0, 0, 1], cone.chart)
    ws.objects["two_dt"] = KForm.one_form([0, 0, 0, 2], cone.chart)
    ws.structures["cone"] = w
    ws.checks["kahler"] = {"j1": "cone.J1", "j2": "cone.J2"}
    normal = {"contact": True, "strong": True, "normal": True}
    ws.checks["classify"] = {"expect": {
        "cone.Φ1": {"contact": True, "strong": True, "normal": False},
        "cone.Φ2": normal, "cone.Φ~2": normal,
        "cone.Φ~1": {"contact": False, "strong": False, "normal": False}}}
    note = "the t-warped family on the Heisenberg group; J₁, J₂ recover the Kähler cone"
    return ws, {"validate": True, "kahler": True, "classify": True}, note


_ENTRIES: dict[str, Callable] = {
    "contact-r3": _contact_r3,
    "sasakian-heisenberg": _sasakian_heisenberg,
    "kahler-r2": _kahler_r2,
    "cokahler-r3": _cokahler_r3,
    "sasakian-times-rplus": _sasakian_times_rplus,
    "sasakian-cone": _sasakian_cone,
}


def names() -> list[str]:
    return list(_ENTRIES)


def load(name: str, plan: SamplePlan | None = None, verify: bool = True) -> CatalogEntry:
    """Build an entry; with ``verify`` its structures must pass their axioms and
    the classification must come out as recorded."""
    if name not in _ENTRIES:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(_ENTRIES)}")
    plan = plan or SamplePlan()
    ws, expected, note = _ENTRIES[name](plan)
    ws.provenance = note
    entry = CatalogEntry(name, ws, expected, note)
    if verify:
        for cmd in ("validate", "classify"):
            if cmd not in expected:
                continue
            res = entry.run(cmd)
            entry.results[cmd] = res
            if not res.passed:
                bad = [c.name for c in res.checks if not c.passed]
                raise CatalogError(f"catalog entry {name} failed {cmd}: {bad}")
    return entry


def read_twin(name: str) -> str:
    return (resources.files("gcgeom") / "data" / f"{name}.gg").read_text(encoding="utf-8")


__all__ = ["CatalogEntry", "CatalogError", "load", "names", "read_twin"]
