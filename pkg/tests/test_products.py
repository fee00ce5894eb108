import numpy as np
import pytest

from gcgeom.bigtangent import Bracket, GeneralizedSection, apply, pairing
from gcgeom.calculus import KForm, VectorField
from gcgeom.catalog import heisenberg_chart, rplus_chart, rplus_model, sasakian_lift
from gcgeom.expr import Chart, SamplePlan
from gcgeom.products import (
    ProductError,
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
from gcgeom.structures import GacmsRecord, GacsRecord, check_gacms, check_gacx

from .factories import acms_image, line_model, make_trial, trials

PLAN = SamplePlan()


@pytest.fixture(scope="module")
def cyl():
    c, r = heisenberg_chart(), rplus_chart()
    return sasakian_lift(c, PLAN), rplus_model(r), product_chart(c, r, "cyl")


@pytest.fixture(scope="module")
def cone(cyl):
    m, rp, pc = cyl
    return warp_transform(m, rp, pc, PLAN)


def norm(x, pts=None):
    chart = x.chart
    pts = PLAN.points(chart) if pts is None else pts
    return float(np.abs(x.evaluate(pts)).max())


def test_lift_examples(cyl):
    _, _, pc = cyl
    dx = lift_to_product(GeneralizedSection.of_vector(VectorField.basis(pc.left, "x")), "left", pc)
    col = dx.column()
    assert [c.is_zero() for c in col] == [False] + [True] * 7
    dt = lift_to_product(GeneralizedSection.of_form(KForm.basis(pc.right, "t")), "right", pc)
    assert [k for k, c in enumerate(dt.column()) if not c.is_zero()] == [7]
    assert pairing(dx, dt).is_zero()


def test_product_chart_rules():
    a = Chart(("x",), ((-1.0, 1.0),), "a", params=("s",), param_domain=((0.0, 1.0),))
    b = Chart(("s", "y"), ((-1.0, 1.0),) * 2, "b")
    pc = product_chart(a, b)
    assert pc.chart.coords == ("x", "s", "y") and pc.chart.params == ()
    with pytest.raises(ProductError):
        product_chart(a, Chart(("x",), ((-1.0, 1.0),), "c"))


def test_product_is_generalized_almost_complex(cyl):
    m, rp, pc = cyl
    J = product_gacx(m, rp, pc)
    assert check_gacx(J, PLAN).passed
    assert norm(J.j @ J.j - J.j @ J.j) == 0
    ep1 = lift_to_product(m.e_plus, "left", pc)
    em2 = lift_to_product(rp.e_minus, "right", pc)
    assert norm(apply(J.j, ep1) - em2) < 1e-12


def test_theorem1_trivial_and_swapped(cyl):
    m, rp, pc = cyl
    r = check_theorem1((m, rp), (m, rp), pc, PLAN)
    assert r.commute and r.conditions and r.agree
    r = check_theorem1((m, rp), (m.tilde(), rp.tilde()), pc, PLAN)
    assert r.commute and r.conditions and r.agree


def test_theorem1_scaled_section_has_witness(cyl):
    m, rp, pc = cyl
    g = m.gacs
    bad = GacsRecord(g.phi, g.e_plus.scale(2), g.e_minus)
    r = check_theorem1((m, rp), (bad, rp), pc, PLAN)
    comm = r.report.children[0]
    assert not r.commute and not r.conditions
    assert comm.max_residual > 1e-3 and comm.witness_point


def test_mixed_branch_commutes_although_conditions_fail(cyl):
    """The stated criterion excludes mixed branches, yet their product structures commute."""
    m, rp, pc = cyl
    r = check_theorem1((m, rp), (m.tilde(), rp), pc, PLAN)
    assert r.commute and not r.conditions and not r.agree
    assert r.report.children[0].max_residual < 1e-12


def _numpy_product_j(phi1, ep1, em1, phi2, ep2, em2):
    """J on (u₁, u₂) straight from the defining formula, with ⟨u,v⟩ = ½uᵀQv."""
    n1, n2 = phi1.shape[0] // 2, phi2.shape[0] // 2
    Q1 = np.block([[np.zeros((n1, n1)), np.eye(n1)], [np.eye(n1), np.zeros((n1, n1))]])
    Q2 = np.block([[np.zeros((n2, n2)), np.eye(n2)], [np.eye(n2), np.zeros((n2, n2))]])
    J = np.zeros((2 * (n1 + n2),) * 2)
    J[:2 * n1, :2 * n1] = phi1
    J[2 * n1:, 2 * n1:] = phi2
    J[:2 * n1, 2 * n1:] = -np.outer(ep1, ep2 @ Q2) - np.outer(em1, em2 @ Q2)
    J[2 * n1:, :2 * n1] = np.outer(ep2, ep1 @ Q1) + np.outer(em2, em1 @ Q1)
    return J


def test_mixed_branch_numpy_oracle():
    # flat co-Kähler ℝ³ and the line model, at a point
    phi = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], float)
    Phi1 = np.block([[phi, np.zeros((3, 3))], [np.zeros((3, 3)), -phi.T]])
    G1 = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])
    ep1, em1 = np.array([0, 0, 1, 0, 0, 0.]), np.array([0, 0, 0, 0, 0, 1.])
    Phi2, ep2, em2 = np.zeros((2, 2)), np.array([0, 1.]), np.array([1, 0.])
    J1 = _numpy_product_j(Phi1, ep1, em1, Phi2, ep2, em2)
    # factor 1 swapped (GΦ, GE₊ = E₋, GE₋ = E₊), factor 2 unchanged
    J2 = _numpy_product_j(G1 @ Phi1, G1 @ ep1, G1 @ em1, Phi2, ep2, em2)
    assert np.allclose(J1 @ J1, -np.eye(8)) and np.allclose(J2 @ J2, -np.eye(8))
    assert np.abs(J1 @ J2 - J2 @ J1).max() < 1e-14
    # the block-diagonal closed form of J₁J₂ does not describe this pair
    Q1 = G1
    Q2 = np.array([[0, 1], [1, 0.]])
    closed = np.zeros((8, 8))
    closed[:6, :6] = Phi1 @ (G1 @ Phi1) - np.outer(ep1, em1 @ Q1) - np.outer(em1, ep1 @ Q1)
    closed[6:, 6:] = Phi2 @ Phi2 - np.outer(ep2, em2 @ Q2) - np.outer(em2, ep2 @ Q2)
    assert np.abs(closed - J1 @ J2).max() > 0.5


def test_closed_forms_hold_on_consistent_branches_only():
    rng = np.random.default_rng(11)
    for cat in ("same", "swapped", "mixed"):
        for _ in range(3):
            tr = make_trial(cat, rng, PLAN)
            rep = check_closed_forms(tr.pair, tr.pair_tilde, tr.pc, PLAN)
            assert rep.passed == (cat != "mixed"), (cat, rep.max_residual)


def test_randomized_trials_by_category():
    seen = {}
    for tr in trials(15, seed=5, plan=PLAN):
        r = check_theorem1(tr.pair, tr.pair_tilde, tr.pc, PLAN)
        seen.setdefault(tr.category, set()).add((r.commute, r.conditions))
    assert seen["same"] == seen["swapped"] == {(True, True)}
    assert seen["scaled"] == seen["noncommuting"] == {(False, False)}
    assert seen["mixed"] == {(True, False)}


def test_product_metric(cyl):
    m, rp, pc = cyl
    G = product_metric(m.metric, rp.metric, pc)
    J = product_gacx(m, rp, pc)
    assert check_gacx(type(J)(G @ J.j), PLAN).passed


def test_theorem41(cyl):
    m, rp, pc = cyl
    r = theorem41_pipeline(m, rp, pc, PLAN)
    assert not r.kahler.passed and [c.passed for c in r.co_kahler] == [False, True] and r.agree
    assert not r.kahler.find("J2 integrable").passed and r.kahler.find("J1 integrable").passed
    c = Chart(("x", "y", "z"), ((-1.0, 1.0),) * 3, "r3")
    line = Chart(("s",), ((0.0, 1.0),), "line")
    flat = acms_image(np.eye(3), c, PLAN)
    r = theorem41_pipeline(flat, line_model(line), product_chart(c, line), PLAN)
    assert r.kahler.passed and all(x.passed for x in r.co_kahler) and r.agree


def test_negated_metric_fails_upstream(cyl):
    m, _, _ = cyl
    assert not check_gacms(GacmsRecord(m.gacs, -m.metric), PLAN).passed


def test_warp_recovers_the_kahler_cone(cone):
    assert cone.report.passed, [c.name for c in cone.report.children if not c.passed]
    assert check_gacx(cone.J1, PLAN).passed


def test_warp_at_t_zero_is_the_cylinder_metric_image(cyl, cone):
    m, rp, pc = cyl
    J2_cyl = product_metric(m.metric, rp.metric, pc) @ product_gacx(m, rp, pc).j
    pts = PLAN.points(pc.chart)
    pts[:, 3] = 0.0
    a = cone.J2.j.evaluate(pts)
    b = J2_cyl.evaluate(pts)
    assert np.abs(a - b).max() < 1e-12
    pts[:, 3] = 1.0
    assert np.abs(cone.J2.j.evaluate(pts) - J2_cyl.evaluate(pts)).max() > 0.1


def test_warp_j1_on_orthogonal_sections(cone):
    l, pc = cone.pair[0], cone.product
    lt = lift_to_product(l.gacs, "left", pc)
    # u = ∂y + dx is orthogonal to E₊₁ ∝ ∂z and E₋₁ ∝ dz − y dx
    u = GeneralizedSection(VectorField([0, 1, 0, 0], pc.chart), KForm.one_form([1, 0, 0, 0], pc.chart))
    for e in (lt.e_plus, lt.e_minus):
        assert pairing(e, u).is_zero()
    assert norm(apply(cone.J1.j, u) - apply(lt.phi, u)) < 1e-12


def test_warp_needs_the_line_model(cyl):
    m, _, pc = cyl
    with pytest.raises(ProductError):
        warp_transform(m, line_model(pc.right, 2.0), pc, PLAN)


def test_cone_factor_classification(cone):
    pc = cone.product
    (l, r), (lt, rt) = cone.pair, cone.pair_tilde
    flags = lambda g, side, br=Bracket(): classify_factor(g.gacs, side, pc, br, PLAN).flags()
    assert flags(l, "left") == {"contact": True, "strong": True, "normal": False}
    assert flags(lt, "left") == {"contact": False, "strong": False, "normal": False}
    for g in (r, rt):
        assert flags(g, "right")["normal"]


@pytest.mark.parametrize("coeff, closes", [(0, False), (1, False), (-1, False), (2, True)])
def test_companion_frame_under_twisted_brackets(cone, coeff, closes):
    """With R = diag(e^{-t}, e^t) the companion frame closes for θ = 2dt, not dt."""
    pc = cone.product
    br = Bracket(KForm.one_form([0, 0, 0, coeff], pc.chart)) if coeff else Bracket()
    cl = classify_factor(cone.pair_tilde[0].gacs, "left", pc, br, PLAN)
    assert cl.contact == closes
