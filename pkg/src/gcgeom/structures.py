"""Structure records and their checkers.

Every check is pointwise: the symbolic objects are evaluated at the sample
plan's points and the worst residual is reported together with the point that
produced it.  A report passes iff its max residual is below its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import calculus as calc
from .bigtangent import (
    COURANT,
    Bracket,
    BundleEndomorphism,
    GeneralizedSection,
    adjoint,
    apply,
    pairing,
    pairing_matrix,
    tensor_endo,
    two_form_block,
)
from .calculus import KForm, MetricTensor, VectorField
from .expr import Chart, SamplePlan, evaluate_batch

RANK_THRESHOLD = 1e-8
PD_THRESHOLD = 1e-10


class ClassicalPreconditionError(ValueError):
    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    witness_point: dict | None = None
    witness_detail: str = ""
    bracket: str | None = None
    children: list["CheckReport"] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @classmethod
    def from_residual(cls, name, residual, tolerance, witness_point=None, detail="", bracket=None):
        residual = float(residual)
        return cls(name, bool(residual < tolerance), residual, tolerance, witness_point, detail, bracket)

    @classmethod
    def combine(cls, name: str, children: Sequence["CheckReport"], bracket=None) -> "CheckReport":
        """Worst child wins; passes iff every child passes."""
        children = list(children)
        if not children:
            return cls(name, True, 0.0, 0.0, bracket=bracket)
        worst = max(children, key=lambda c: (not c.passed, c.max_residual))
        return cls(name, all(c.passed for c in children), worst.max_residual, worst.tolerance,
                   worst.witness_point, f"{worst.name}: {worst.witness_detail}".rstrip(": "),
                   bracket, children)

    def find(self, name: str) -> "CheckReport":
        for c in self.children:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "verdict": self.verdict,
            "max_residual": _json_float(self.max_residual),
            "tolerance": self.tolerance,
            "witness_point": self.witness_point,
            "witness_detail": self.witness_detail,
        }
        if self.bracket:
            out["bracket"] = self.bracket
        if self.children:
            out["checks"] = [c.to_dict() for c in self.children]
        return out

    def lines(self, indent: int = 0) -> list[str]:
        pad = "  " * indent
        s = f"{pad}[{self.verdict.upper()}] {self.name}  max_residual={self.max_residual:.3e}"
        if self.bracket:
            s += f"  bracket={self.bracket}"
        out = [s]
        for c in self.children:
            out.extend(c.lines(indent + 1))
        return out


def _json_float(x: float):
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return float(f"{x:.6e}")


def _witness(chart: Chart, p: np.ndarray) -> dict:
    return {v: round(float(x), 12) for v, x in zip(chart.variables, p)}


def points_for(chart: Chart, plan: SamplePlan) -> np.ndarray:
    return plan.points(chart)


def endo_residual(name: str, M: BundleEndomorphism, plan: SamplePlan, pts=None, memo=None) -> CheckReport:
    """Max |entry| of M over the sample points."""
    pts = points_for(M.chart, plan) if pts is None else pts
    vals = np.abs(M.evaluate(pts, memo))
    per_point = vals.reshape(len(pts), -1).max(axis=1) if vals.size else np.zeros(len(pts))
    k = int(np.argmax(per_point))
    detail = ""
    if vals.size:
        _, r, c = np.unravel_index(np.argmax(vals), vals.shape)
        detail = f"entry ({r},{c})"
    return CheckReport.from_residual(name, per_point[k], plan.tolerance, _witness(M.chart, pts[k]), detail)


def scalar_residual(name: str, fields, chart: Chart, plan: SamplePlan, pts=None, memo=None) -> CheckReport:
    pts = points_for(chart, plan) if pts is None else pts
    vals = np.abs(evaluate_batch(list(fields), chart, pts, memo))
    per_point = vals.max(axis=1) if vals.size else np.zeros(len(pts))
    k = int(np.argmax(per_point))
    return CheckReport.from_residual(name, per_point[k], plan.tolerance, _witness(chart, pts[k]))


def section_residual(name: str, s: GeneralizedSection, plan: SamplePlan, pts=None, memo=None) -> CheckReport:
    return scalar_residual(name, s.column(), s.chart, plan, pts, memo)


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class GacsRecord:
    phi: BundleEndomorphism
    e_plus: GeneralizedSection
    e_minus: GeneralizedSection

    @property
    def chart(self) -> Chart:
        return self.phi.chart

    def transformed(self, endo: Callable, sec: Callable) -> "GacsRecord":
        return GacsRecord(endo(self.phi), sec(self.e_plus), sec(self.e_minus))

    def swapped(self) -> "GacsRecord":
        return GacsRecord(self.phi, self.e_minus, self.e_plus)


@dataclass(frozen=True)
class GacmsRecord:
    gacs: GacsRecord
    metric: BundleEndomorphism

    @property
    def chart(self) -> Chart:
        return self.metric.chart

    @property
    def phi(self):
        return self.gacs.phi

    @property
    def e_plus(self):
        return self.gacs.e_plus

    @property
    def e_minus(self):
        return self.gacs.e_minus

    def transformed(self, endo: Callable, sec: Callable) -> "GacmsRecord":
        return GacmsRecord(self.gacs.transformed(endo, sec), endo(self.metric))

    def tilde(self) -> "GacmsRecord":
        """The companion structure (GΦ, GE₊, GE₋, G)."""
        G = self.metric
        return GacmsRecord(GacsRecord(G @ self.phi, apply(G, self.e_plus), apply(G, self.e_minus)), G)


@dataclass(frozen=True)
class GacxRecord:
    j: BundleEndomorphism

    @property
    def chart(self) -> Chart:
        return self.j.chart

    def transformed(self, endo: Callable, sec: Callable) -> "GacxRecord":
        return GacxRecord(endo(self.j))


@dataclass(frozen=True)
class SpanningFrame:
    sections: tuple
    label: str
    expected_rank: int

    @property
    def chart(self) -> Chart:
        return self.sections[0].chart


# ---------------------------------------------------------------------------
# axiom checks


def check_gacs(g: GacsRecord, plan: SamplePlan | None = None) -> CheckReport:
    plan = plan or SamplePlan()
    chart = g.chart
    pts = points_for(chart, plan)
    memo: dict = {}
    I = BundleEndomorphism.identity(chart)
    ep, em = g.e_plus, g.e_minus
    square = g.phi @ g.phi - (tensor_endo(ep, em) + tensor_endo(em, ep) - I)
    kids = [
        endo_residual("skew: Φ+Φ*=0", g.phi + adjoint(g.phi), plan, pts, memo),
        endo_residual("square: Φ²=-Id+E₊⊗E₋+E₋⊗E₊", square, plan, pts, memo),
        scalar_residual("null: ⟨E±,E±⟩=0", [pairing(ep, ep), pairing(em, em)], chart, plan, pts, memo),
        scalar_residual("normalized: 2⟨E₊,E₋⟩=1", [pairing(ep, em) * 2 - 1], chart, plan, pts, memo),
        scalar_residual("kernel: Φ(E±)=0", apply(g.phi, ep).column() + apply(g.phi, em).column(),
                        chart, plan, pts, memo),
    ]
    return CheckReport.combine("gacs axioms", kids)


def check_generalized_metric(G: BundleEndomorphism, plan: SamplePlan | None = None) -> CheckReport:
    plan = plan or SamplePlan()
    chart = G.chart
    pts = points_for(chart, plan)
    memo: dict = {}
    kids = [
        endo_residual("self-adjoint: G*=G", G - adjoint(G), plan, pts, memo),
        endo_residual("involution: G²=Id", G @ G - BundleEndomorphism.identity(chart), plan, pts, memo),
        _positivity(G, plan, pts, memo),
    ]
    return CheckReport.combine("generalized metric", kids)


def _positivity(G: BundleEndomorphism, plan, pts, memo) -> CheckReport:
    """Gram matrix b(u,v) = ⟨Gu,v⟩ in the standard frame must be positive definite."""
    n = chart_dim = G.chart.dim
    Q = pairing_matrix(chart_dim)
    vals = G.evaluate(pts, memo)
    worst, k = -np.inf, 0
    for i, M in enumerate(vals):
        S = 0.5 * Q @ M
        S = 0.5 * (S + S.T)
        lam = float(np.min(np.linalg.eigvalsh(S.real)))
        r = max(0.0, PD_THRESHOLD - lam)
        if r > worst:
            worst, k = r, i
    lam_detail = f"{2 * n}×{2 * n} Gram matrix, eigenvalue threshold {PD_THRESHOLD:g}"
    return CheckReport.from_residual("positive definite: ⟨G·,·⟩>0", worst, plan.tolerance,
                                     _witness(G.chart, pts[k]), lam_detail)


def check_gacms(m: GacmsRecord, plan: SamplePlan | None = None) -> CheckReport:
    plan = plan or SamplePlan()
    chart = m.chart
    pts = points_for(chart, plan)
    memo: dict = {}
    G, phi, ep, em = m.metric, m.phi, m.e_plus, m.e_minus
    compat = (-(phi @ G @ phi)) - (G - tensor_endo(ep, ep) - tensor_endo(em, em))
    kids = [
        check_gacs(m.gacs, plan),
        endo_residual("compatible: -ΦGΦ=G-E₊⊗E₊-E₋⊗E₋", compat, plan, pts, memo),
        check_generalized_metric(G, plan),
        section_residual("GE₊=E₋", apply(G, ep) - em, plan, pts, memo),
    ]
    return CheckReport.combine("gacms axioms", kids)


def check_gacx(x: GacxRecord, plan: SamplePlan | None = None) -> CheckReport:
    plan = plan or SamplePlan()
    pts = points_for(x.chart, plan)
    memo: dict = {}
    J = x.j
    kids = [
        endo_residual("skew: J+J*=0", J + adjoint(J), plan, pts, memo),
        endo_residual("square: J²=-Id", J @ J + BundleEndomorphism.identity(x.chart), plan, pts, memo),
    ]
    return CheckReport.combine("gacx axioms", kids)


# ---------------------------------------------------------------------------
# frames and closure


def _distinct_nonzero(sections) -> list[GeneralizedSection]:
    seen, out = set(), []
    for s in sections:
        if s.is_zero():
            continue
        key = tuple(id(c.node) for c in s.column())
        if key in seen:
            continue
        seen.add(key)
        out.append(s)
    return out


def kernel_projector(g: GacsRecord) -> BundleEndomorphism:
    """P(u) = u − 2⟨E₋,u⟩E₊ − 2⟨E₊,u⟩E₋."""
    I = BundleEndomorphism.identity(g.chart)
    return I - tensor_endo(g.e_plus, g.e_minus) - tensor_endo(g.e_minus, g.e_plus)


def build_eigenframe(g: GacsRecord, which: str = "+", plan: SamplePlan | None = None,
                     check_rank: bool = True) -> SpanningFrame:
    """Spanning frame of L⁺ = ⟨E₊⟩ ⊕ E^(1,0) or L⁻ = ⟨E₋⟩ ⊕ E^(1,0)."""
    if which not in ("+", "-"):
        raise ValueError("which must be '+' or '-'")
    chart = g.chart
    n = chart.dim
    I = BundleEndomorphism.identity(chart)
    F = (I - g.phi.scale(1j)) @ kernel_projector(g)
    cols = [GeneralizedSection.from_column([F.m[r][c] for r in range(2 * n)], chart) for c in range(2 * n)]
    head = g.e_plus if which == "+" else g.e_minus
    # maximal isotropic: complex rank equals dim M
    frame = SpanningFrame(tuple(_distinct_nonzero([head] + cols)), "L" + which, n)
    if check_rank:
        _require_rank(frame, plan or SamplePlan())
    return frame


def gacx_frame(x: GacxRecord, plan: SamplePlan | None = None, check_rank: bool = True) -> SpanningFrame:
    """Frame {(Id − iJ)eⱼ} of the +i eigenbundle."""
    chart = x.chart
    n = chart.dim
    F = BundleEndomorphism.identity(chart) - x.j.scale(1j)
    cols = [GeneralizedSection.from_column([F.m[r][c] for r in range(2 * n)], chart) for c in range(2 * n)]
    frame = SpanningFrame(tuple(_distinct_nonzero(cols)), "L(J)", n)
    if check_rank:
        _require_rank(frame, plan or SamplePlan())
    return frame


class RankDeficiencyError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def frame_values(frame: SpanningFrame, pts, memo=None) -> np.ndarray:
    """Shape (len(pts), 2n, m)."""
    cols = [c for s in frame.sections for c in s.column()]
    vals = evaluate_batch(cols, frame.chart, pts, memo)
    m = len(frame.sections)
    return vals.reshape(len(pts), m, -1).transpose(0, 2, 1)


def numeric_rank(mat: np.ndarray) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_THRESHOLD * s[0]))


def frame_ranks(frame: SpanningFrame, plan: SamplePlan) -> list[int]:
    pts = points_for(frame.chart, plan)
    return [numeric_rank(F) for F in frame_values(frame, pts)]


def _require_rank(frame: SpanningFrame, plan: SamplePlan):
    pts = points_for(frame.chart, plan)
    for p, F in zip(pts, frame_values(frame, pts)):
        r = numeric_rank(F)
        if r != frame.expected_rank:
            raise RankDeficiencyError(
                f"{frame.label} has rank {r}, expected {frame.expected_rank}", _witness(frame.chart, p))


def _span_distance(F: np.ndarray, b: np.ndarray) -> float:
    U, s, _ = np.linalg.svd(F, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return float(np.linalg.norm(b))
    U = U[:, s > RANK_THRESHOLD * s[0]]
    r = b - U @ (U.conj().T @ b)
    return float(np.linalg.norm(r) / max(1.0, np.linalg.norm(b)))


def check_closed(frame: SpanningFrame, bracket: Bracket = COURANT, plan: SamplePlan | None = None,
                 name: str | None = None) -> CheckReport:
    """Closure of the pointwise span of a frame under a bracket.

    For each unordered pair the bracket is evaluated and its distance from the
    frame's span is measured after orthonormalizing the frame with a relative
    singular-value cutoff.  Distances are relative to max(1, |bracket|).
    """
    plan = plan or SamplePlan()
    chart = frame.chart
    pts = points_for(chart, plan)
    memo: dict = {}
    Fv = frame_values(frame, pts, memo)
    worst, wk, wpair = 0.0, 0, None
    for i, j in combinations(range(len(frame.sections)), 2):
        br = bracket(frame.sections[i], frame.sections[j])
        if br.is_zero():
            continue
        bv = br.evaluate(pts, memo)
        for k in range(len(pts)):
            r = _span_distance(Fv[k], bv[k])
            if r > worst:
                worst, wk, wpair = r, k, (i, j)
    detail = f"sections ({wpair[0]},{wpair[1]})" if wpair else ""
    return CheckReport.from_residual(name or f"{frame.label} closed", worst, plan.tolerance,
                                     _witness(chart, pts[wk]), detail, bracket.name)


def check_integrable_gacx(x: GacxRecord, plan: SamplePlan | None = None,
                          bracket: Bracket = COURANT) -> CheckReport:
    plan = plan or SamplePlan()
    return check_closed(gacx_frame(x, plan), bracket, plan, name="integrable: L(J) closed")


@dataclass
class Classification:
    contact: bool
    strong: bool
    normal: bool
    reports: list[CheckReport]

    @property
    def label(self) -> str:
        if self.normal:
            return "normal"
        if self.strong:
            return "strong"
        if self.contact:
            return "contact"
        return "almost"

    def flags(self) -> dict:
        return {"contact": self.contact, "strong": self.strong, "normal": self.normal}


def classify_gacs(g: GacsRecord, plan: SamplePlan | None = None, bracket: Bracket = COURANT,
                  validate: bool = True) -> Classification:
    """contact: L⁺ or L⁻ closed; strong: both; normal: strong and [[E₊,E₋]] = 0."""
    plan = plan or SamplePlan()
    if validate:
        rep = check_gacs(g, plan)
        if not rep.passed:
            raise ValueError(f"not a generalized almost contact structure ({rep.witness_detail})")
    lp = check_closed(build_eigenframe(g, "+", plan), bracket, plan, "L+ closed")
    lm = check_closed(build_eigenframe(g, "-", plan), bracket, plan, "L- closed")
    eb = section_residual("[[E₊,E₋]]=0", bracket(g.e_plus, g.e_minus), plan)
    eb.bracket = bracket.name
    contact = lp.passed or lm.passed
    strong = lp.passed and lm.passed
    return Classification(contact, strong, strong and eb.passed, [lp, lm, eb])


def check_generalized_kahler(J1: GacxRecord, J2: GacxRecord, plan: SamplePlan | None = None,
                             bracket: Bracket = COURANT) -> CheckReport:
    plan = plan or SamplePlan()
    kids = [
        _renamed(check_gacx(J1, plan), "J1 axioms"),
        _renamed(check_gacx(J2, plan), "J2 axioms"),
        endo_residual("commute: [J1,J2]=0", J1.j @ J2.j - J2.j @ J1.j, plan),
        _renamed(check_integrable_gacx(J1, plan, bracket), "J1 integrable"),
        _renamed(check_integrable_gacx(J2, plan, bracket), "J2 integrable"),
        _renamed(check_generalized_metric(-(J1.j @ J2.j), plan), "metric: -J1J2"),
    ]
    return CheckReport.combine("generalized kahler", kids, bracket.name)


def _renamed(r: CheckReport, name: str) -> CheckReport:
    r.name = name
    return r


def _flag_report(name: str, ok: bool, basis: CheckReport | None = None) -> CheckReport:
    """A boolean fact folded into the residual convention (0 pass, 1 fail)."""
    r = CheckReport(name, ok, 0.0 if ok else 1.0, 0.5)
    if basis is not None and not ok:
        r.witness_point = basis.witness_point
        r.witness_detail = f"{basis.name} residual {basis.max_residual:.3e}"
    return r


def check_co_kahler(m: GacmsRecord, plan: SamplePlan | None = None, bracket: Bracket = COURANT) -> CheckReport:
    """(Φ, E±, G) and (GΦ, GE±, G) commute, Φ is normal and GΦ is strong."""
    plan = plan or SamplePlan()
    t = m.tilde()
    kids = [
        check_gacms(m, plan),
        _renamed(check_gacs(t.gacs, plan), "tilde gacs axioms"),
        endo_residual("commute: ΦΦ~=Φ~Φ", m.phi @ t.phi - t.phi @ m.phi, plan),
        section_residual("E~₊=GE₊=E₋", t.e_plus - m.e_minus, plan),
        section_residual("E~₋=GE₋=E₊", t.e_minus - m.e_plus, plan),
    ]
    c1 = classify_gacs(m.gacs, plan, bracket, validate=False)
    c2 = classify_gacs(t.gacs, plan, bracket, validate=False)
    kids.append(_flag_report("Φ normal", c1.normal, max(c1.reports, key=lambda r: r.max_residual)))
    kids.append(_flag_report("GΦ strong", c2.strong, max(c2.reports[:2], key=lambda r: r.max_residual)))
    return CheckReport.combine("co-kahler", kids, bracket.name)


# ---------------------------------------------------------------------------
# classical lifts


def _classical(name, fields, chart, plan, tol=None):
    pts = points_for(chart, plan)
    fields = [f for f in fields if not f.is_zero()]
    if not fields:
        return
    vals = np.abs(evaluate_batch(fields, chart, pts))
    per_point = vals.max(axis=1)
    k = int(np.argmax(per_point))
    if per_point[k] >= (tol or plan.tolerance):
        raise ClassicalPreconditionError(f"classical precondition failed: {name}",
                                         _witness(chart, pts[k]), float(per_point[k]))


def metric_lift(g: MetricTensor, plan: SamplePlan | None = None) -> BundleEndomorphism:
    """G = [[0, g⁻¹], [g, 0]]."""
    ginv = calc.invert_matrix_field(g.g, g.chart, plan)
    return BundleEndomorphism.from_blocks(0, ginv, g.g, 0, g.chart)


def lift_almost_contact(phi, xi: VectorField, eta: KForm, g: MetricTensor,
                        plan: SamplePlan | None = None) -> GacmsRecord:
    """Φ = diag(φ, −φ*), E₊ = ξ, E₋ = η, G = [[0, g⁻¹], [g, 0]]."""
    plan = plan or SamplePlan()
    chart = xi.chart
    n = chart.dim
    phi = calc.as_matrix(phi, chart)
    T = calc.transpose
    xi_c, eta_c = list(xi.components), eta.components_1()
    # φ² = −I + ξ⊗η, η(ξ) = 1, φξ = 0, g(φ·,φ·) = g − η⊗η
    phi2 = calc.mat_sub(calc.mat_mul(phi, phi, chart),
                        calc.mat_sub(calc.outer(xi_c, eta_c), calc.identity(n, chart)))
    _classical("φ² = -I + ξ⊗η", [x for r in phi2 for x in r], chart, plan)
    _classical("η(ξ) = 1", [calc.one_form_apply(eta, xi) - 1], chart, plan)
    compat = calc.mat_sub(calc.mat_mul(T(phi), calc.mat_mul(g.g, phi, chart), chart),
                          calc.mat_sub(g.g, calc.outer(eta_c, eta_c)))
    _classical("g(φX,φY) = g(X,Y) - η(X)η(Y)", [x for r in compat for x in r], chart, plan)
    if g.check_positive(plan) <= PD_THRESHOLD:
        raise ClassicalPreconditionError("metric is not positive definite")
    Phi = BundleEndomorphism.from_blocks(phi, 0, 0, calc.mat_scale(T(phi), -1), chart)
    gacs = GacsRecord(Phi, GeneralizedSection.of_vector(xi), GeneralizedSection.of_form(eta))
    return GacmsRecord(gacs, metric_lift(g, plan))


def contact_bivector(eta: KForm, plan: SamplePlan | None = None):
    """ρ(X) = ι_X dη − η(X)η and π(α,β) = dη(ρ⁻¹α, ρ⁻¹β); returns (ρ, π) as matrices.

    π is returned as the map α ↦ π(α, ·).
    """
    chart = eta.chart
    deta = two_form_block(calc.exterior_derivative(eta))
    e = eta.components_1()
    rho = calc.mat_sub(deta, calc.outer(e, e))
    rinv = calc.invert_matrix_field(rho, chart, plan)
    pi = calc.mat_mul(calc.transpose(rinv), calc.mat_mul(deta, rinv, chart), chart)
    return rho, pi


def lift_contact(eta: KForm, xi: VectorField, plan: SamplePlan | None = None) -> GacsRecord:
    """Φ = [[0, π], [dη, 0]], E₊ = η, E₋ = ξ."""
    plan = plan or SamplePlan()
    chart = eta.chart
    _classical("η(ξ) = 1", [calc.one_form_apply(eta, xi) - 1], chart, plan)
    deta = calc.exterior_derivative(eta)
    _classical("ι_ξ dη = 0", calc.interior_product(xi, deta).components_1(), chart, plan)
    _, pi = contact_bivector(eta, plan)
    Phi = BundleEndomorphism.from_blocks(0, pi, two_form_block(deta), 0, chart)
    return GacsRecord(Phi, GeneralizedSection.of_form(eta), GeneralizedSection.of_vector(xi))


def lift_complex(J, chart: Chart, plan: SamplePlan | None = None) -> GacxRecord:
    """J_J = diag(−J, J*)."""
    plan = plan or SamplePlan()
    n = chart.dim
    J = calc.as_matrix(J, chart)
    sq = calc.mat_add(calc.mat_mul(J, J, chart), calc.identity(n, chart))
    _classical("J² = -I", [x for r in sq for x in r], chart, plan)
    return GacxRecord(BundleEndomorphism.from_blocks(calc.mat_scale(J, -1), 0, 0, calc.transpose(J), chart))


def lift_symplectic(omega: KForm, plan: SamplePlan | None = None) -> GacxRecord:
    """J_ω = [[0, −ω⁻¹], [ω, 0]]; ω only needs to be nondegenerate here."""
    chart = omega.chart
    w = two_form_block(omega)
    try:
        winv = calc.invert_matrix_field(w, chart, plan)
    except calc.SingularMatrixError as exc:
        raise ClassicalPreconditionError("ω is degenerate", exc.witness) from exc
    return GacxRecord(BundleEndomorphism.from_blocks(0, calc.mat_scale(winv, -1), w, 0, chart))
