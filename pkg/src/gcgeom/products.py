"""Products of generalized almost contact (metric) structures.

Factor objects are re-indexed into the product chart.  The product big
tangent column is ordered (X₁, X₂, α₁, α₂), i.e. left vector slots, right
vector slots, left form slots, right form slots.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import calculus as calc
from .bigtangent import (
    Bracket,
    BundleEndomorphism,
    GeneralizedSection,
    apply,
    commutator,
    tensor_endo,
)
from .calculus import KForm, VectorField
from .expr import Chart, SamplePlan, ScalarField, exp
from .structures import (
    COURANT,
    CheckReport,
    Classification,
    SpanningFrame,
    GacmsRecord,
    GacsRecord,
    GacxRecord,
    build_eigenframe,
    check_closed,
    check_co_kahler,
    check_gacx,
    check_generalized_kahler,
    check_generalized_metric,
    check_integrable_gacx,
    endo_residual,
    section_residual,
    _flag_report,
    _renamed,
)


class ProductError(ValueError):
    pass


@dataclass(frozen=True)
class ProductChart:
    left: Chart
    right: Chart
    chart: Chart

    @property
    def offsets(self):
        return {"left": 0, "right": self.left.dim}


def product_chart(left: Chart, right: Chart, name: str = "") -> ProductChart:
    clash = set(left.coords) & set(right.coords)
    if clash:
        raise ProductError(f"coordinate names collide: {sorted(clash)}")
    coords = left.coords + right.coords
    params, pdom = [], []
    for ch in (left, right):
        for p, box in zip(ch.params, ch.param_domain):
            if p not in coords and p not in params:
                params.append(p)
                pdom.append(box)
    excluded = left.excluded + right.excluded
    chart = Chart(coords, left.domain + right.domain, name or f"{left.name}×{right.name}",
                  excluded, tuple(params), tuple(pdom))
    return ProductChart(left, right, chart)


def with_params(obj, chart: Chart):
    """Re-home an object onto a chart with the same coordinates and more parameters."""
    return _rehome(obj, chart, lambda i: i, chart.dim)


def lift_to_product(obj, side: str, pc: ProductChart):
    """Re-index a factor object into the product chart (zero in the other factor)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    factor = pc.left if side == "left" else pc.right
    if not set(factor.coords) <= set(pc.chart.coords):
        raise ProductError("object does not live on the named factor")
    off = pc.offsets[side]
    return _rehome(obj, pc.chart, lambda i: i + off, factor.dim)


def _rehome(obj, chart: Chart, idx, n_src: int):
    N = chart.dim
    if isinstance(obj, ScalarField):
        return ScalarField(obj.node, chart)
    if isinstance(obj, VectorField):
        comps = [chart.zero()] * N
        for i, c in enumerate(obj.components):
            comps[idx(i)] = ScalarField(c.node, chart)
        return VectorField(comps, chart)
    if isinstance(obj, KForm):
        return KForm(obj.degree, {tuple(idx(i) for i in k): ScalarField(v.node, chart)
                                  for k, v in obj.comps.items()}, chart)
    if isinstance(obj, GeneralizedSection):
        return GeneralizedSection(_rehome(obj.vec, chart, idx, n_src), _rehome(obj.form, chart, idx, n_src))
    if isinstance(obj, BundleEndomorphism):
        m = calc.zeros(2 * N, 2 * N, chart)

        def slot(k):
            return idx(k) if k < n_src else N + idx(k - n_src)

        for r, row in enumerate(obj.m):
            for c, v in enumerate(row):
                if not v.is_zero():
                    m[slot(r)][slot(c)] = ScalarField(v.node, chart)
        return BundleEndomorphism(m, chart)
    if isinstance(obj, (GacsRecord, GacmsRecord, GacxRecord)):
        return obj.transformed(lambda M: _rehome(M, chart, idx, n_src),
                               lambda s: _rehome(s, chart, idx, n_src))
    raise TypeError(f"cannot lift {type(obj).__name__}")


def _gacs(x) -> GacsRecord:
    return x.gacs if isinstance(x, GacmsRecord) else x


def product_gacx(left, right, pc: ProductChart) -> GacxRecord:
    """The almost complex structure induced on M₁×M₂ by two GACS.

    J(u₁,u₂) = (Φ₁u₁ − 2⟨E₊₂,u₂⟩E₊₁ − 2⟨E₋₂,u₂⟩E₋₁,
                Φ₂u₂ + 2⟨E₊₁,u₁⟩E₊₂ + 2⟨E₋₁,u₁⟩E₋₂)
    """
    a = lift_to_product(_gacs(left), "left", pc)
    b = lift_to_product(_gacs(right), "right", pc)
    J = (a.phi + b.phi
         - tensor_endo(a.e_plus, b.e_plus) - tensor_endo(a.e_minus, b.e_minus)
         + tensor_endo(b.e_plus, a.e_plus) + tensor_endo(b.e_minus, a.e_minus))
    return GacxRecord(J)


def product_metric(G1: BundleEndomorphism, G2: BundleEndomorphism, pc: ProductChart) -> BundleEndomorphism:
    return lift_to_product(G1, "left", pc) + lift_to_product(G2, "right", pc)


def commutator_closed_form(pair, pair_tilde, pc: ProductChart):
    """Block-diagonal closed forms of J₁J₂ and J₂J₁ built from factor data.

    J₁J₂ = (Φ₁Φ̃₁ − 2⟨E₋₁,·⟩E₊₁ − 2⟨E₊₁,·⟩E₋₁) ⊕ (same on factor 2)
    J₂J₁ = (Φ̃₁Φ₁ − 2⟨Ẽ₋₁,·⟩Ẽ₊₁ − 2⟨Ẽ₊₁,·⟩Ẽ₋₁) ⊕ (same on factor 2)
    """
    out12, out21 = [], []
    for side, g, gt in (("left", _gacs(pair[0]), _gacs(pair_tilde[0])),
                        ("right", _gacs(pair[1]), _gacs(pair_tilde[1]))):
        g = lift_to_product(g, side, pc)
        gt = lift_to_product(gt, side, pc)
        out12.append(g.phi @ gt.phi - tensor_endo(g.e_plus, g.e_minus) - tensor_endo(g.e_minus, g.e_plus))
        out21.append(gt.phi @ g.phi - tensor_endo(gt.e_plus, gt.e_minus) - tensor_endo(gt.e_minus, gt.e_plus))
    return out12[0] + out12[1], out21[0] + out21[1]


def check_closed_forms(pair, pair_tilde, pc: ProductChart, plan: SamplePlan | None = None) -> CheckReport:
    plan = plan or SamplePlan()
    J1 = product_gacx(*pair, pc).j
    J2 = product_gacx(*pair_tilde, pc).j
    c12, c21 = commutator_closed_form(pair, pair_tilde, pc)
    return CheckReport.combine("closed forms", [
        endo_residual("J1J2 closed form", c12 - J1 @ J2, plan),
        endo_residual("J2J1 closed form", c21 - J2 @ J1, plan),
    ])


# ---------------------------------------------------------------------------
# commutation of product pairs


@dataclass
class Theorem1Result:
    commute: bool
    conditions: bool
    report: CheckReport

    @property
    def agree(self) -> bool:
        return self.commute == self.conditions


def check_theorem1(pair, pair_tilde, pc: ProductChart, plan: SamplePlan | None = None) -> Theorem1Result:
    """Compare [J₁,J₂] = 0 with the factorwise criterion.

    Criterion: Φᵢ commutes with Φ̃ᵢ (i = 1, 2) and either E±ᵢ = Ẽ±ᵢ for both
    factors or E±ᵢ = Ẽ∓ᵢ for both factors.
    """
    plan = plan or SamplePlan()
    tol = plan.tolerance
    J1 = product_gacx(*pair, pc).j
    J2 = product_gacx(*pair_tilde, pc).j
    comm = endo_residual("[J1,J2]=0", commutator(J1, J2), plan)
    kids = [comm]
    phis_ok, same_ok, swap_ok = True, True, True
    for i, (g, gt) in enumerate(zip(pair, pair_tilde), start=1):
        g, gt = _gacs(g), _gacs(gt)
        c = endo_residual(f"[Φ{i},Φ~{i}]=0", commutator(g.phi, gt.phi), plan)
        same = CheckReport.combine(f"E±{i}=E~±{i}", [
            section_residual("+", g.e_plus - gt.e_plus, plan),
            section_residual("-", g.e_minus - gt.e_minus, plan)])
        swap = CheckReport.combine(f"E±{i}=E~∓{i}", [
            section_residual("+", g.e_plus - gt.e_minus, plan),
            section_residual("-", g.e_minus - gt.e_plus, plan)])
        same.children, swap.children = [], []
        kids += [c, same, swap]
        phis_ok &= c.passed
        same_ok &= same.passed
        swap_ok &= swap.passed
    conditions = phis_ok and (same_ok or swap_ok)
    commute = comm.passed
    report = _flag_report("theorem1 biconditional", commute == conditions)
    report.children = kids
    report.witness_detail = f"commute={commute} conditions={conditions}"
    report.tolerance = tol if commute == conditions else 0.5
    return Theorem1Result(commute, conditions, report)


# ---------------------------------------------------------------------------
# product Kähler versus factor co-Kähler


@dataclass
class Theorem41Result:
    kahler: CheckReport
    co_kahler: tuple
    report: CheckReport

    @property
    def agree(self) -> bool:
        return self.kahler.passed == all(c.passed for c in self.co_kahler)


def theorem41_pipeline(left: GacmsRecord, right: GacmsRecord, pc: ProductChart,
                       plan: SamplePlan | None = None, bracket: Bracket = COURANT) -> Theorem41Result:
    """J₁ from (Φ₁, Φ₂), J₂ = G J₁ with G = G₁ + G₂; Kähler verdict vs factor co-Kähler verdicts."""
    plan = plan or SamplePlan()
    J1 = product_gacx(left, right, pc)
    G = product_metric(left.metric, right.metric, pc)
    J2 = GacxRecord(G @ J1.j)
    kahler = check_generalized_kahler(J1, J2, plan, bracket)
    co = (_renamed(check_co_kahler(left, plan, bracket), "left co-kahler"),
          _renamed(check_co_kahler(right, plan, bracket), "right co-kahler"))
    agree = kahler.passed == (co[0].passed and co[1].passed)
    report = _flag_report("kahler iff both co-kahler", agree)
    report.children = [kahler, *co]
    report.witness_detail = f"kahler={kahler.passed} co_kahler={[c.passed for c in co]}"
    return Theorem41Result(kahler, co, report)


# ---------------------------------------------------------------------------
# the cone warp


def warp_endo(chart: Chart, t: str = "t") -> BundleEndomorphism:
    """R = diag(e^{-t}, e^{t}) on TM ⊕ T*M of the chart."""
    n = chart.dim
    et = exp(chart.coord(t))
    emt = exp(-chart.coord(t))
    return BundleEndomorphism.from_blocks(calc.mat_scale(calc.identity(n, chart), emt), 0, 0,
                                          calc.mat_scale(calc.identity(n, chart), et), chart)


def _warp_record(m: GacmsRecord, R, Rinv, tilde_swapped: bool):
    """(RΦR⁻¹, RE±, RGR⁻¹) and its companion (RGR⁻¹Φ, RE∓ or RE±, RGR⁻¹)."""
    G = m.metric
    Gw = R @ G @ Rinv
    phi_w = R @ m.phi @ Rinv
    ep, em = apply(R, m.e_plus), apply(R, m.e_minus)
    base = GacmsRecord(GacsRecord(phi_w, ep, em), Gw)
    phit = Gw @ phi_w
    tl = GacsRecord(phit, em, ep) if tilde_swapped else GacsRecord(phit, ep, em)
    return base, GacmsRecord(tl, Gw)


def is_rplus_model(m: GacmsRecord, plan: SamplePlan) -> bool:
    ch = m.chart
    if ch.dim != 1:
        return False
    dt = GeneralizedSection.basis(ch, 1)
    dd = GeneralizedSection.basis(ch, 0)
    reps = [endo_residual("Φ=0", m.phi, plan), section_residual("E+", m.e_plus - dt, plan),
            section_residual("E-", m.e_minus - dd, plan)]
    return all(r.passed for r in reps)


@dataclass
class WarpResult:
    J1: GacxRecord
    J2: GacxRecord
    report: CheckReport
    pair: tuple
    pair_tilde: tuple
    product: ProductChart


def warp_transform(left: GacmsRecord, right: GacmsRecord, pc: ProductChart,
                   plan: SamplePlan | None = None) -> WarpResult:
    """Build the t-warped commuting pair of a Sasakian factor and the ℝ⁺ model.

    Left data are re-homed onto the left chart with t as a parameter, then
    warped by R; the left companion has swapped sections, the right one keeps
    them, which makes J₂ = RGR⁻¹J₁.
    """
    plan = plan or SamplePlan()
    if not is_rplus_model(right, plan):
        raise ProductError("right factor must be the ℝ⁺ model (Φ₂ = 0, E₊₂ = dt, E₋₂ = ∂t)")
    t = pc.right.coords[0]
    lchart = pc.left
    if t not in lchart.params:
        lchart = Chart(lchart.coords, lchart.domain, lchart.name + f"[{t}]", lchart.excluded,
                       lchart.params + (t,), lchart.param_domain + (pc.right.domain[0],))
    pc = product_chart(lchart, pc.right, pc.chart.name)
    lrec = with_params(left, lchart)
    R1, R1i = warp_endo(lchart, t), _inverse_warp(lchart, t)
    R2, R2i = warp_endo(pc.right, t), _inverse_warp(pc.right, t)
    l, lt = _warp_record(lrec, R1, R1i, tilde_swapped=True)
    r, rt = _warp_record(right, R2, R2i, tilde_swapped=False)
    J1 = product_gacx(l, r, pc)
    J2 = product_gacx(lt, rt, pc)

    R, Ri = warp_endo(pc.chart, t), _inverse_warp(pc.chart, t)
    G = product_metric(lrec.metric, right.metric, pc)
    kids = [
        endo_residual("commute: [J1,J2]=0", commutator(J1.j, J2.j), plan),
        endo_residual("J2=RGR⁻¹J1", J2.j - R @ G @ Ri @ J1.j, plan),
        endo_residual("J2=RGJ1R⁻¹", J2.j - R @ G @ J1.j @ Ri, plan),
        _renamed(check_gacx(J1, plan), "J1 axioms"),
        _renamed(check_gacx(J2, plan), "J2 axioms"),
        _renamed(check_integrable_gacx(J1, plan), "J1 integrable"),
        _renamed(check_integrable_gacx(J2, plan), "J2 integrable"),
        _renamed(check_generalized_metric(-(J1.j @ J2.j), plan), "metric: -J1J2"),
    ]
    return WarpResult(J1, J2, CheckReport.combine("warp transform", kids), (l, r), (lt, rt), pc)


def _inverse_warp(chart: Chart, t: str) -> BundleEndomorphism:
    n = chart.dim
    et = exp(chart.coord(t))
    emt = exp(-chart.coord(t))
    return BundleEndomorphism.from_blocks(calc.mat_scale(calc.identity(n, chart), et), 0, 0,
                                          calc.mat_scale(calc.identity(n, chart), emt), chart)


def classify_factor(g: GacsRecord, side: str, pc: ProductChart, bracket: Bracket = COURANT,
                    plan: SamplePlan | None = None) -> Classification:
    """Classify a factor structure after lifting its frames into the product chart.

    Coefficients that depend on the other factor's coordinate (a family of
    structures) then contribute derivatives in that direction.
    """
    plan = plan or SamplePlan()
    reps = []
    for which in ("+", "-"):
        fr = build_eigenframe(g, which, plan)
        lifted = SpanningFrame(tuple(lift_to_product(s, side, pc) for s in fr.sections),
                               fr.label, fr.expected_rank)
        reps.append(check_closed(lifted, bracket, plan, f"L{which} closed"))
    lg = lift_to_product(g, side, pc)
    eb = section_residual("[[E₊,E₋]]=0", bracket(lg.e_plus, lg.e_minus), plan)
    eb.bracket = bracket.name
    lp, lm = reps
    strong = lp.passed and lm.passed
    return Classification(lp.passed or lm.passed, strong, strong and eb.passed, [lp, lm, eb])
