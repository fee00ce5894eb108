"""Random structures for property tests and the commutation trials.

An almost contact metric structure is pushed through a constant linear map A:
(AφA⁻¹, Aξ, ηA⁻¹, A⁻ᵀgA⁻¹) satisfies the same algebraic identities pointwise,
so every trial starts from valid data without solving anything.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gcgeom import calculus as calc
from gcgeom.bigtangent import BundleEndomorphism, GeneralizedSection
from gcgeom.calculus import KForm, MetricTensor, VectorField
from gcgeom.catalog import HEIS_METRIC, HEIS_PHI
from gcgeom.expr import Chart, SamplePlan
from gcgeom.products import product_chart
from gcgeom.structures import GacmsRecord, GacsRecord, check_gacs, lift_almost_contact, metric_lift

CUBE3 = ((-1.0, 1.0),) * 3
FLAT_PHI = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]
FLAT_METRIC = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def _num(rows, chart):
    return calc.as_matrix([[float(v) for v in r] for r in rows], chart)


def random_frame(rng: np.random.Generator) -> np.ndarray:
    A = np.eye(3) + 0.35 * rng.standard_normal((3, 3))
    while abs(np.linalg.det(A)) < 0.3:
        A = np.eye(3) + 0.35 * rng.standard_normal((3, 3))
    return A


def acms_image(A: np.ndarray, chart: Chart, plan: SamplePlan, heisenberg: bool = False) -> GacmsRecord:
    """The flat co-Kähler or the Heisenberg Sasakian data pushed through A."""
    Ai = np.linalg.inv(A)
    mm = lambda a, b: calc.mat_mul(a, b, chart)
    if heisenberg:
        y = chart.coords[1]
        ren = lambda rows: [[v.replace("y", y) if isinstance(v, str) else v for v in r] for r in rows]
        phi0, g0 = calc.as_matrix(ren(HEIS_PHI), chart), calc.as_matrix(ren(HEIS_METRIC), chart)
        eta0 = [chart.field("-" + y), chart.zero(), chart.one()]
    else:
        phi0, g0 = calc.as_matrix(FLAT_PHI, chart), calc.as_matrix(FLAT_METRIC, chart)
        eta0 = [chart.zero(), chart.zero(), chart.one()]
    phi = mm(mm(_num(A, chart), phi0), _num(Ai, chart))
    xi = VectorField([float(v) for v in A[:, 2]], chart)
    eta = KForm.one_form(mm([eta0], _num(Ai, chart))[0], chart)
    g = mm(mm(_num(Ai.T, chart), g0), _num(Ai, chart))
    return lift_almost_contact(phi, xi, eta, MetricTensor(g, chart), plan)


def random_acms(rng: np.random.Generator, chart: Chart, plan: SamplePlan, heisenberg: bool = False) -> GacmsRecord:
    return acms_image(random_frame(rng), chart, plan, heisenberg)


def horizontal_shear(rng: np.random.Generator) -> np.ndarray:
    """Fixes ξ and η of the model data, not conformal on ker η."""
    P = np.eye(3)
    P[0, 1] = rng.uniform(0.5, 1.5) * rng.choice([-1, 1])
    P[1, 1] = rng.uniform(1.3, 2.0)
    return P


def line_model(chart: Chart, a: float = 1.0) -> GacmsRecord:
    """Φ = 0, E₊ = a dt, E₋ = ∂t / a with metric a² dt²."""
    gacs = GacsRecord(BundleEndomorphism.zero(chart), GeneralizedSection.basis(chart, 1).scale(a),
                      GeneralizedSection.basis(chart, 0).scale(1.0 / a))
    return GacmsRecord(gacs, metric_lift(MetricTensor([[a * a]], chart)))


def companion(m: GacmsRecord, swapped: bool, sign: int) -> GacsRecord:
    """±Φ with the same sections, or ±GΦ with GE± (which swaps the labels)."""
    if swapped:
        t = m.tilde().gacs
    else:
        t = m.gacs
    return GacsRecord(t.phi.scale(sign), t.e_plus, t.e_minus) if sign < 0 else t


def scaled(g: GacsRecord, lam: float) -> GacsRecord:
    return GacsRecord(g.phi, g.e_plus.scale(lam), g.e_minus.scale(1.0 / lam))


@dataclass
class Trial:
    category: str
    pair: tuple
    pair_tilde: tuple
    pc: object


CATEGORIES = ("same", "swapped", "mixed", "scaled", "noncommuting")


def make_trial(category: str, rng: np.random.Generator, plan: SamplePlan) -> Trial:
    left = Chart(("x", "y", "z"), CUBE3, "m1")
    # the shear below fixes η only for the flat model
    heis = bool(rng.integers(2)) and category != "noncommuting"
    A = random_frame(rng)
    m1 = acms_image(A, left, plan, heisenberg=heis)
    if rng.integers(2):
        right = Chart(("u", "v", "w"), CUBE3, "m2")
        m2 = random_acms(rng, right, plan, heisenberg=not heis)
    else:
        right = Chart(("t",), ((0.1, 2.0),), "m2")
        m2 = line_model(right, float(rng.uniform(0.5, 2.0)))
    pc = product_chart(left, right, "trial")
    branch = bool(rng.integers(2))
    s1, s2 = (int(rng.choice([-1, 1])) for _ in range(2))
    if category == "same":
        b1 = b2 = False
    elif category == "swapped":
        b1 = b2 = True
    elif category == "mixed":
        b1, b2 = branch, not branch
    elif category == "scaled":
        b1 = b2 = branch
    else:
        # GΦ built from a sheared metric still commutes with Φ, so stay on the same branch
        b1 = b2 = False
    if category == "noncommuting":
        # a second almost contact metric structure with the same ξ, η
        t1 = companion(acms_image(A @ horizontal_shear(rng), left, plan, heis), b1, s1)
    else:
        t1 = companion(m1, b1, s1)
    t2 = companion(m2, b2, s2)
    if category == "scaled":
        t1 = scaled(t1, float(rng.uniform(1.5, 3.0)))
    for g in (t1, t2):
        rep = check_gacs(g, plan)
        assert rep.passed, f"trial companion is not a GACS: {rep.witness_detail}"
    return Trial(category, (m1.gacs, m2.gacs), (t1, t2), pc)


def trials(n: int, seed: int = 2024, plan: SamplePlan | None = None):
    plan = plan or SamplePlan()
    rng = np.random.default_rng(seed)
    for k in range(n):
        yield make_trial(CATEGORIES[k % len(CATEGORIES)], rng, plan)


# ---------------------------------------------------------------------------
# random expressions, forms and vector fields


def random_expr(rng: np.random.Generator, names, depth: int = 3) -> str:
    """Expression text that stays bounded (and away from poles) on [-1, 1]^n."""
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return str(rng.choice(names))
        return f"{rng.uniform(-2, 2):.3f}"
    a = random_expr(rng, names, depth - 1)
    k = int(rng.integers(7))
    if k == 0:
        return f"({a} + {random_expr(rng, names, depth - 1)})"
    if k == 1:
        return f"({a} - {random_expr(rng, names, depth - 1)})"
    if k == 2:
        return f"({a})*({random_expr(rng, names, depth - 1)})"
    if k == 3:
        return f"({a})/(2 + ({random_expr(rng, names, depth - 1)})^2)"
    if k == 4:
        return f"({a})^{int(rng.integers(2, 4))}"
    if k == 5:
        return f"{rng.choice(['sin', 'cos', 'sinh', 'cosh'])}({a})"
    return f"exp(({a})/4)"


def random_vector(rng, chart: Chart, depth: int = 2) -> VectorField:
    return VectorField([random_expr(rng, chart.coords, depth) for _ in chart.coords], chart)


def random_form(rng, chart: Chart, degree: int, depth: int = 2) -> KForm:
    from itertools import combinations

    comps = {idx: chart.field(random_expr(rng, chart.coords, depth))
             for idx in combinations(range(chart.dim), degree)}
    return KForm(degree, comps, chart)
