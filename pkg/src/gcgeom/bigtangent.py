"""Sections and endomorphisms of TM ⊕ T*M over a chart.

A section X + α is stored as its coordinate column (X¹…Xⁿ, α₁…αₙ).  An
endomorphism is the full 2n×2n matrix [[A, π], [σ, B]] acting on that column,
so A: T→T, π: T*→T, σ: T→T*, B: T*→T*.  A two-form ω enters a block as the
map X ↦ ι_X ω, whose matrix is the transpose of ω_ij.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import calculus as calc
from .calculus import ChartMismatch, KForm, VectorField
from .expr import Chart, SamplePlan, ScalarField, evaluate_batch


class NotClosedError(ValueError):
    """A form that must be closed is not (the witness point is attached)."""

    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class GeneralizedSection:
    __slots__ = ("vec", "form", "chart")

    def __init__(self, vec: VectorField, form: KForm):
        if not vec.chart.same_as(form.chart):
            raise ChartMismatch("vector and form parts live on different charts")
        if form.degree != 1:
            raise ValueError("form part must be a one-form")
        self.vec = vec
        self.form = form
        self.chart = vec.chart

    @classmethod
    def from_column(cls, col: Sequence, chart: Chart) -> "GeneralizedSection":
        n = chart.dim
        if len(col) != 2 * n:
            raise ValueError(f"need {2 * n} entries, got {len(col)}")
        return cls(VectorField(col[:n], chart), KForm.one_form(col[n:], chart))

    @classmethod
    def of_vector(cls, X: VectorField) -> "GeneralizedSection":
        return cls(X, KForm.zero(1, X.chart))

    @classmethod
    def of_form(cls, a: KForm) -> "GeneralizedSection":
        return cls(VectorField.zero(a.chart), a)

    @classmethod
    def zero(cls, chart: Chart) -> "GeneralizedSection":
        return cls(VectorField.zero(chart), KForm.zero(1, chart))

    @classmethod
    def basis(cls, chart: Chart, j: int) -> "GeneralizedSection":
        """j < n gives ∂_j, j ≥ n gives dx^{j-n}."""
        n = chart.dim
        return cls.from_column([1 if k == j else 0 for k in range(2 * n)], chart)

    def column(self) -> list[ScalarField]:
        return list(self.vec.components) + self.form.components_1()

    def __add__(self, o):
        return GeneralizedSection(self.vec + o.vec, self.form + o.form)

    def __sub__(self, o):
        return GeneralizedSection(self.vec - o.vec, self.form - o.form)

    def __neg__(self):
        return GeneralizedSection(-self.vec, -self.form)

    def scale(self, f) -> "GeneralizedSection":
        return GeneralizedSection(self.vec.scale(f), self.form.scale(f))

    def __rmul__(self, f):
        return self.scale(f)

    def is_zero(self) -> bool:
        return self.vec.is_zero() and self.form.is_zero()

    def evaluate(self, points, memo=None) -> np.ndarray:
        """Shape (len(points), 2n)."""
        return evaluate_batch(self.column(), self.chart, points, memo)

    def __repr__(self):
        return f"GeneralizedSection({self.vec!r}, {self.form!r})"


def _same_chart(*objs):
    c = objs[0].chart
    for o in objs[1:]:
        if not c.same_as(o.chart):
            raise ChartMismatch(f"chart mismatch: {c.name} vs {o.chart.name}")
    return c


def pairing(u: GeneralizedSection, v: GeneralizedSection) -> ScalarField:
    """⟨X+α, Y+β⟩ = ½(β(X) + α(Y))."""
    _same_chart(u, v)
    return (calc.one_form_apply(v.form, u.vec) + calc.one_form_apply(u.form, v.vec)) * 0.5


def _fn(f: ScalarField) -> KForm:
    return KForm.function(f, f.chart)


def _iota(X: VectorField, a: KForm) -> ScalarField:
    return calc.one_form_apply(a, X)


def courant_bracket(u: GeneralizedSection, v: GeneralizedSection) -> GeneralizedSection:
    """[X,Y] + L_X β − L_Y α − ½ d(ι_X β − ι_Y α)."""
    _same_chart(u, v)
    X, a, Y, b = u.vec, u.form, v.vec, v.form
    vec = calc.lie_bracket(X, Y)
    form = calc.lie_derivative(X, b) - calc.lie_derivative(Y, a)
    f = _iota(X, b) - _iota(Y, a)
    if not f.is_zero():
        form = form - calc.exterior_derivative(_fn(f)).scale(0.5)
    return GeneralizedSection(vec, form)


def twisted_d(w: KForm, theta: KForm) -> KForm:
    """d_θ ω = dω − θ∧ω; on functions d_θ f = df − f θ."""
    return calc.exterior_derivative(w) - calc.wedge(theta, w)


def twisted_lie_derivative(X: VectorField, w: KForm, theta: KForm) -> KForm:
    n = w.chart.dim
    parts = []
    if w.degree < n:
        parts.append(calc.interior_product(X, twisted_d(w, theta)))
    if w.degree > 0:
        parts.append(twisted_d(calc.interior_product(X, w), theta))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def check_closed_form(w: KForm, plan: SamplePlan | None = None, what: str = "form") -> None:
    """Raise NotClosedError unless dω vanishes (symbolically or at sample points)."""
    if w.degree >= w.chart.dim:
        return
    dw = calc.exterior_derivative(w)
    if dw.is_zero():
        return
    plan = plan or SamplePlan()
    pts = plan.points(w.chart)
    comps = list(dw.comps.values())
    vals = np.abs(evaluate_batch(comps, w.chart, pts))
    worst = float(vals.max())
    if worst > plan.tolerance:
        k = int(np.unravel_index(np.argmax(vals), vals.shape)[0])
        raise NotClosedError(f"{what} is not closed (|d{what}| = {worst:.3g})",
                             dict(zip(w.chart.variables, pts[k].tolist())), worst)


def derived_courant_bracket(u: GeneralizedSection, v: GeneralizedSection, theta: KForm,
                            plan: SamplePlan | None = None, check: bool = True) -> GeneralizedSection:
    """Courant bracket with every d replaced by d_θ, for a closed one-form θ."""
    _same_chart(u, v, theta)
    if theta.degree != 1:
        raise ValueError("twist must be a one-form")
    if check:
        check_closed_form(theta, plan, "θ")
    if theta.is_zero():
        return courant_bracket(u, v)
    X, a, Y, b = u.vec, u.form, v.vec, v.form
    vec = calc.lie_bracket(X, Y)
    form = twisted_lie_derivative(X, b, theta) - twisted_lie_derivative(Y, a, theta)
    f = _iota(X, b) - _iota(Y, a)
    if not f.is_zero():
        form = form - twisted_d(_fn(f), theta).scale(0.5)
    return GeneralizedSection(vec, form)


class Bracket:
    """A named bracket: the Courant bracket or its θ-twist."""

    def __init__(self, theta: KForm | None = None, name: str | None = None):
        self.theta = theta
        self.name = name or ("courant" if theta is None else "derived")

    def __call__(self, u, v):
        if self.theta is None:
            return courant_bracket(u, v)
        return derived_courant_bracket(u, v, self.theta, check=False)

    def __repr__(self):
        return f"Bracket({self.name})"


COURANT = Bracket()


# ---------------------------------------------------------------------------

class BundleEndomorphism:
    __slots__ = ("m", "chart")

    def __init__(self, matrix, chart: Chart):
        n = chart.dim
        m = calc.as_matrix(matrix, chart)
        if len(m) != 2 * n or any(len(r) != 2 * n for r in m):
            raise ValueError(f"endomorphism must be {2 * n}×{2 * n}")
        self.m = m
        self.chart = chart

    @classmethod
    def from_blocks(cls, A, pi, sigma, B, chart: Chart) -> "BundleEndomorphism":
        n = chart.dim

        def blk(x):
            if x is None or (isinstance(x, (int, float)) and x == 0):
                return calc.zeros(n, n, chart)
            if isinstance(x, (int, float)):
                return calc.mat_scale(calc.identity(n, chart), x)
            return calc.as_matrix(x, chart)

        A, pi, sigma, B = map(blk, (A, pi, sigma, B))
        top = [ra + rp for ra, rp in zip(A, pi)]
        bot = [rs + rb for rs, rb in zip(sigma, B)]
        return cls(top + bot, chart)

    @classmethod
    def identity(cls, chart: Chart) -> "BundleEndomorphism":
        return cls(calc.identity(2 * chart.dim, chart), chart)

    @classmethod
    def zero(cls, chart: Chart) -> "BundleEndomorphism":
        return cls(calc.zeros(2 * chart.dim, 2 * chart.dim, chart), chart)

    def _block(self, r, c):
        n = self.chart.dim
        return [row[c * n:(c + 1) * n] for row in self.m[r * n:(r + 1) * n]]

    @property
    def A(self):
        return self._block(0, 0)

    @property
    def pi(self):
        return self._block(0, 1)

    @property
    def sigma(self):
        return self._block(1, 0)

    @property
    def B(self):
        return self._block(1, 1)

    def __matmul__(self, o: "BundleEndomorphism") -> "BundleEndomorphism":
        _same_chart(self, o)
        return BundleEndomorphism(calc.mat_mul(self.m, o.m, self.chart), self.chart)

    def __add__(self, o):
        _same_chart(self, o)
        return BundleEndomorphism(calc.mat_add(self.m, o.m), self.chart)

    def __sub__(self, o):
        _same_chart(self, o)
        return BundleEndomorphism(calc.mat_sub(self.m, o.m), self.chart)

    def __neg__(self):
        return BundleEndomorphism(calc.mat_scale(self.m, -1), self.chart)

    def scale(self, f) -> "BundleEndomorphism":
        return BundleEndomorphism(calc.mat_scale(self.m, f), self.chart)

    def __call__(self, u: GeneralizedSection) -> GeneralizedSection:
        return apply(self, u)

    def evaluate(self, points, memo=None) -> np.ndarray:
        return calc.evaluate_matrix(self.m, self.chart, points, memo)

    def __repr__(self):
        return "BundleEndomorphism(" + "; ".join(" ".join(str(x) for x in r) for r in self.m) + ")"


def apply(M: BundleEndomorphism, u: GeneralizedSection) -> GeneralizedSection:
    _same_chart(M, u)
    return GeneralizedSection.from_column(calc.mat_vec(M.m, u.column(), M.chart), M.chart)


def compose(*Ms: BundleEndomorphism) -> BundleEndomorphism:
    out = Ms[0]
    for M in Ms[1:]:
        out = out @ M
    return out


def commutator(a: BundleEndomorphism, b: BundleEndomorphism) -> BundleEndomorphism:
    return a @ b - b @ a


def adjoint(M: BundleEndomorphism) -> BundleEndomorphism:
    """Pairing adjoint: [[A, π], [σ, B]]* = [[Bᵀ, πᵀ], [σᵀ, Aᵀ]]."""
    T = calc.transpose
    return BundleEndomorphism.from_blocks(T(M.B), T(M.pi), T(M.sigma), T(M.A), M.chart)


def tensor_endo(a: GeneralizedSection, b: GeneralizedSection) -> BundleEndomorphism:
    """(a⊗b)(u) = 2⟨b, u⟩ a."""
    chart = _same_chart(a, b)
    n = chart.dim
    bc = b.column()
    swapped = bc[n:] + bc[:n]
    return BundleEndomorphism(calc.outer(a.column(), swapped), chart)


def two_form_block(w: KForm) -> list:
    """Matrix of X ↦ ι_X ω."""
    return calc.transpose(w.matrix_2())


def bfield(B: KForm) -> BundleEndomorphism:
    """e^B = [[1, 0], [B, 1]] : X + ξ ↦ X + ξ + ι_X B (no closedness check)."""
    return BundleEndomorphism.from_blocks(1, 0, two_form_block(B), 1, B.chart)


def bfield_transform(obj, B: KForm, plan: SamplePlan | None = None):
    """Conjugate by e^B; sections are pushed forward, records transform componentwise.

    Raises NotClosedError for a non-closed B.
    """
    if B.degree != 2:
        raise ValueError("B-field must be a two-form")
    check_closed_form(B, plan, "B")
    eB, emB = bfield(B), bfield(-B)
    if isinstance(obj, BundleEndomorphism):
        return eB @ obj @ emB
    if isinstance(obj, GeneralizedSection):
        return apply(eB, obj)
    if hasattr(obj, "transformed"):
        return obj.transformed(lambda M: eB @ M @ emB, lambda s: apply(eB, s))
    raise TypeError(f"cannot B-transform {type(obj).__name__}")


def pairing_matrix(n: int) -> np.ndarray:
    """Q with ⟨u, v⟩ = ½ uᵀ Q v."""
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, i], [i, z]])


def _tensor_convention_self_test():
    chart = Chart(("s",), ((0.0, 1.0),), name="selftest")
    ep = GeneralizedSection.from_column([1, 0], chart)
    em = GeneralizedSection.from_column([0, 1], chart)
    phi2 = tensor_endo(ep, em) + tensor_endo(em, ep) - BundleEndomorphism.identity(chart)
    img = apply(phi2, ep)
    assert img.is_zero(), "tensor convention inconsistent with Φ(E±) = 0"
    assert 2 * pairing(ep, em).node.args[0] == 1


_tensor_convention_self_test()
