"""Tensor calculus on a chart: vector fields, k-forms and matrix fields.

Forms are stored on strictly increasing index tuples only; zero components are
dropped.  Derivatives run over the chart's coordinates, never its parameters.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .expr import Chart, SamplePlan, ScalarField, evaluate_batch


class CalculusError(Exception):
    pass


class ChartMismatch(CalculusError, ValueError):
    pass


def _check_chart(*objs):
    c = objs[0].chart
    for o in objs[1:]:
        if not c.same_as(o.chart):
            raise ChartMismatch(f"chart mismatch: {c.name} vs {o.chart.name}")
    return c


def _field(chart, v) -> ScalarField:
    return chart.field(v)


# ---------------------------------------------------------------------------

class VectorField:
    __slots__ = ("components", "chart")

    def __init__(self, components: Sequence, chart: Chart):
        if len(components) != chart.dim:
            raise CalculusError(f"need {chart.dim} components, got {len(components)}")
        self.components = tuple(_field(chart, c) for c in components)
        self.chart = chart

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls([0] * chart.dim, chart)

    @classmethod
    def basis(cls, chart: Chart, coord) -> "VectorField":
        k = chart.index(coord) if isinstance(coord, str) else coord
        return cls([1 if i == k else 0 for i in range(chart.dim)], chart)

    def __getitem__(self, i):
        return self.components[i]

    def __add__(self, o: "VectorField"):
        _check_chart(self, o)
        return VectorField([a + b for a, b in zip(self.components, o.components)], self.chart)

    def __sub__(self, o: "VectorField"):
        _check_chart(self, o)
        return VectorField([a - b for a, b in zip(self.components, o.components)], self.chart)

    def __neg__(self):
        return VectorField([-a for a in self.components], self.chart)

    def scale(self, f) -> "VectorField":
        return VectorField([a * f for a in self.components], self.chart)

    def apply(self, f: ScalarField) -> ScalarField:
        """Directional derivative X(f)."""
        out = self.chart.zero()
        for c, name in zip(self.components, self.chart.coords):
            if not c.is_zero():
                out = out + c * f.diff(name)
        return out

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __repr__(self):
        return "VectorField(" + ", ".join(str(c) for c in self.components) + ")"


class KForm:
    __slots__ = ("degree", "comps", "chart")

    def __init__(self, degree: int, comps: Mapping, chart: Chart):
        if degree < 0 or degree > chart.dim:
            raise CalculusError(f"degree {degree} not allowed on a {chart.dim}-dimensional chart")
        out = {}
        for idx, v in comps.items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise CalculusError(f"index {idx} is not strictly increasing of length {degree}")
            if any(i < 0 or i >= chart.dim for i in idx):
                raise CalculusError(f"index {idx} out of range")
            f = _field(chart, v)
            if not f.is_zero():
                out[idx] = f
        self.degree = degree
        self.comps = out
        self.chart = chart

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, degree: int, chart: Chart) -> "KForm":
        return cls(degree, {}, chart)

    @classmethod
    def function(cls, f, chart: Chart) -> "KForm":
        return cls(0, {(): f}, chart)

    @classmethod
    def one_form(cls, components: Sequence, chart: Chart) -> "KForm":
        if len(components) != chart.dim:
            raise CalculusError(f"need {chart.dim} components, got {len(components)}")
        return cls(1, {(i,): c for i, c in enumerate(components)}, chart)

    @classmethod
    def basis(cls, chart: Chart, *coords) -> "KForm":
        """dx^a ∧ dx^b ∧ ... from coordinate names or indices."""
        idx = [chart.index(c) if isinstance(c, str) else c for c in coords]
        sign, s = _sort_sign(idx)
        if sign == 0:
            return cls.zero(len(idx), chart)
        return cls(len(idx), {tuple(s): sign}, chart)

    @classmethod
    def two_form(cls, matrix: Sequence[Sequence], chart: Chart) -> "KForm":
        """From an antisymmetric matrix ω_ij = ω(∂_i, ∂_j); only i<j is read."""
        n = chart.dim
        return cls(2, {(i, j): matrix[i][j] for i in range(n) for j in range(i + 1, n)}, chart)

    # access -----------------------------------------------------------------
    def component(self, idx) -> ScalarField:
        sign, s = _sort_sign(list(idx))
        if sign == 0:
            return self.chart.zero()
        f = self.comps.get(tuple(s))
        if f is None:
            return self.chart.zero()
        return f if sign > 0 else -f

    def components_1(self) -> list[ScalarField]:
        if self.degree != 1:
            raise CalculusError("not a one-form")
        return [self.component((i,)) for i in range(self.chart.dim)]

    def matrix_2(self) -> list[list[ScalarField]]:
        if self.degree != 2:
            raise CalculusError("not a two-form")
        n = self.chart.dim
        return [[self.component((i, j)) for j in range(n)] for i in range(n)]

    def is_zero(self) -> bool:
        return not self.comps

    def _combine(self, o: "KForm", sign):
        _check_chart(self, o)
        if self.degree != o.degree:
            raise CalculusError("degree mismatch")
        out = dict(self.comps)
        for k, v in o.comps.items():
            v = v if sign > 0 else -v
            out[k] = out[k] + v if k in out else v
        return KForm(self.degree, out, self.chart)

    def __add__(self, o):
        return self._combine(o, 1)

    def __sub__(self, o):
        return self._combine(o, -1)

    def __neg__(self):
        return KForm(self.degree, {k: -v for k, v in self.comps.items()}, self.chart)

    def scale(self, f) -> "KForm":
        return KForm(self.degree, {k: v * f for k, v in self.comps.items()}, self.chart)

    def __call__(self, *vectors: VectorField) -> ScalarField:
        """ω(X₁, …, X_k) via the determinant expansion over stored indices."""
        if len(vectors) != self.degree:
            raise CalculusError(f"{self.degree}-form takes {self.degree} vectors")
        if vectors:
            _check_chart(self, *vectors)
        out = self.chart.zero()
        if self.degree == 0:
            return self.comps.get((), out)
        for idx, f in self.comps.items():
            out = out + f * _det([[v[i] for i in idx] for v in vectors], self.chart)
        return out

    def __repr__(self):
        names = self.chart.coords
        terms = [f"({v})*" + "^".join("d" + names[i] for i in k) for k, v in sorted(self.comps.items())]
        return f"KForm[{self.degree}](" + (" + ".join(terms) or "0") + ")"


def _sort_sign(idx):
    """Sign of the permutation sorting idx (0 if an index repeats)."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, idx
    sign = 1
    a = idx[:]
    for i in range(len(a)):
        for j in range(len(a) - 1 - i):
            if a[j] > a[j + 1]:
                a[j], a[j + 1] = a[j + 1], a[j]
                sign = -sign
    return sign, a


# ---------------------------------------------------------------------------
# operations

def exterior_derivative(w: KForm) -> KForm:
    chart = w.chart
    if w.degree >= chart.dim:
        raise CalculusError("exterior derivative of a top-degree form")
    out: dict = {}
    for idx, f in w.comps.items():
        for j, name in enumerate(chart.coords):
            if j in idx:
                continue
            df = f.diff(name)
            if df.is_zero():
                continue
            sign, s = _sort_sign((j,) + idx)
            key = tuple(s)
            term = df if sign > 0 else -df
            out[key] = out[key] + term if key in out else term
    return KForm(w.degree + 1, out, chart)


d = exterior_derivative


def interior_product(X: VectorField, w: KForm) -> KForm:
    _check_chart(X, w)
    if w.degree == 0:
        raise CalculusError("interior product of a function")
    out: dict = {}
    for idx, f in w.comps.items():
        for p, j in enumerate(idx):
            xj = X[j]
            if xj.is_zero():
                continue
            rest = idx[:p] + idx[p + 1:]
            term = xj * f if p % 2 == 0 else -(xj * f)
            out[rest] = out[rest] + term if rest in out else term
    return KForm(w.degree - 1, out, w.chart)


def wedge(a: KForm, b: KForm) -> KForm:
    _check_chart(a, b)
    k = a.degree + b.degree
    if k > a.chart.dim:
        raise CalculusError("wedge degree exceeds chart dimension")
    out: dict = {}
    for i1, f in a.comps.items():
        for i2, g in b.comps.items():
            sign, s = _sort_sign(i1 + i2)
            if sign == 0:
                continue
            key = tuple(s)
            term = f * g if sign > 0 else -(f * g)
            out[key] = out[key] + term if key in out else term
    return KForm(k, out, a.chart)


def lie_derivative(X: VectorField, w: KForm) -> KForm:
    """Cartan's formula L_X = ι_X d + d ι_X."""
    _check_chart(X, w)
    chart = w.chart
    if w.degree == 0:
        return KForm.function(X.apply(w.comps.get((), chart.zero())), chart)
    parts = []
    if w.degree < chart.dim:
        parts.append(interior_product(X, exterior_derivative(w)))
    parts.append(exterior_derivative(interior_product(X, w)))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    _check_chart(X, Y)
    return VectorField([X.apply(Y[i]) - Y.apply(X[i]) for i in range(X.chart.dim)], X.chart)


def one_form_apply(a: KForm, X: VectorField) -> ScalarField:
    """α(X) for a one-form α."""
    return interior_product(X, a).comps.get((), a.chart.zero())


# ---------------------------------------------------------------------------
# matrix fields

Matrix = list  # list of rows of ScalarFields


def as_matrix(rows, chart: Chart) -> Matrix:
    return [[_field(chart, v) for v in row] for row in rows]


def identity(n: int, chart: Chart) -> Matrix:
    return [[chart.one() if i == j else chart.zero() for j in range(n)] for i in range(n)]


def zeros(r: int, c: int, chart: Chart) -> Matrix:
    z = chart.zero()
    return [[z] * c for _ in range(r)]


def transpose(m: Matrix) -> Matrix:
    return [list(col) for col in zip(*m)] if m else []


def mat_mul(a: Matrix, b: Matrix, chart: Chart) -> Matrix:
    if not a or not b:
        return [[] for _ in a]
    rows, inner, cols = len(a), len(b), len(b[0])
    if len(a[0]) != inner:
        raise CalculusError("matrix shape mismatch")
    out = []
    z = chart.zero()
    for i in range(rows):
        row = []
        ai = a[i]
        for j in range(cols):
            acc = z
            for k in range(inner):
                x, y = ai[k], b[k][j]
                if x.is_zero() or y.is_zero():
                    continue
                acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, f) -> Matrix:
    return [[x * f for x in row] for row in a]


def mat_vec(a: Matrix, v: Sequence[ScalarField], chart: Chart) -> list[ScalarField]:
    out = []
    for row in a:
        acc = chart.zero()
        for x, y in zip(row, v):
            if x.is_zero() or y.is_zero():
                continue
            acc = acc + x * y
        out.append(acc)
    return out


def outer(u: Sequence[ScalarField], v: Sequence[ScalarField]) -> Matrix:
    return [[a * b for b in v] for a in u]


def _det(m, chart: Chart) -> ScalarField:
    """Symbolic determinant by Laplace expansion, memoized on column subsets."""
    n = len(m)
    if n == 0:
        return chart.one()

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple) -> ScalarField:
        if row == n:
            return chart.one()
        acc = chart.zero()
        for p, c in enumerate(cols):
            e = m[row][c]
            if e.is_zero():
                continue
            sub = minor(row + 1, cols[:p] + cols[p + 1:])
            if sub.is_zero():
                continue
            term = e * sub
            acc = acc + term if p % 2 == 0 else acc - term
        return acc

    return minor(0, tuple(range(n)))


def determinant(m: Matrix, chart: Chart) -> ScalarField:
    return _det(m, chart)


def evaluate_matrix(m: Matrix, chart: Chart, points: np.ndarray, memo=None) -> np.ndarray:
    """Shape (len(points), rows, cols) complex array."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    flat = [x for row in m for x in row]
    vals = evaluate_batch(flat, chart, points, memo)
    return vals.reshape(len(np.atleast_2d(points)), rows, cols)


class SingularMatrixError(CalculusError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def invert_matrix_field(m: Matrix, chart: Chart, plan: SamplePlan | None = None) -> Matrix:
    """Symbolic inverse adj(m)/det(m), validated at the plan's sample points."""
    plan = plan or SamplePlan()
    n = len(m)
    if any(len(r) != n for r in m):
        raise CalculusError("matrix must be square")
    det = _det(m, chart)
    pts = plan.points(chart)
    dv = evaluate_batch([det], chart, pts)[:, 0]
    scale = max(1.0, float(np.max(np.abs(evaluate_matrix(m, chart, pts)))))
    k = int(np.argmin(np.abs(dv)))
    if det.is_zero() or abs(dv[k]) < 1e-12 * scale ** n:
        raise SingularMatrixError("determinant vanishes at a sample point",
                                  dict(zip(chart.variables, pts[k].tolist())))
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[m[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = _det(sub, chart)
            cof = cof if (i + j) % 2 == 0 else -cof
            inv[j][i] = cof / det if not cof.is_zero() else chart.zero()
    prod = evaluate_matrix(mat_mul(m, inv, chart), chart, pts)
    err = float(np.max(np.abs(prod - np.eye(n))))
    if err > 1e-9:
        raise SingularMatrixError(f"inverse check failed (residual {err:.3g})")
    return inv


class MetricTensor:
    """Symmetric matrix field; the lower triangle shares the upper's ASTs."""

    def __init__(self, g: Sequence[Sequence], chart: Chart):
        n = chart.dim
        m = as_matrix(g, chart)
        if len(m) != n or any(len(r) != n for r in m):
            raise CalculusError("metric must be n×n")
        self.g = [[m[min(i, j)][max(i, j)] for j in range(n)] for i in range(n)]
        self.chart = chart

    def check_positive(self, plan: SamplePlan) -> float:
        """Smallest eigenvalue over the sample points."""
        vals = evaluate_matrix(self.g, self.chart, plan.points(self.chart))
        return float(np.min(np.linalg.eigvalsh(vals.real)))

    def lower(self, X: VectorField) -> KForm:
        return KForm.one_form(mat_vec(self.g, X.components, self.chart), self.chart)
