import cmath

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gcgeom.expr import (
    Chart,
    EvaluationError,
    ParseError,
    SamplePlan,
    UnknownVariableError,
    differentiate,
    evaluate,
    evaluate_batch,
    parse,
    to_string,
)

XY = Chart(("x", "y"), ((-1.0, 1.0),) * 2, "xy")
XT = Chart(("x", "t"), ((-1.0, 1.0), (0.1, 2.0)), "xt")


def test_sum_of_product_tree():
    n = parse("x + 2*y", XY).node
    assert n.op == "add"
    left, right = n.args
    assert left.op == "var" and left.args == ("x",)
    assert right.op == "mul"
    assert right.args[0].op == "const" and right.args[0].args[0] == 2
    assert right.args[1].args == ("y",)


def test_function_product():
    assert parse("exp(t)*sin(x)", XT).node.op == "mul"


@pytest.mark.parametrize("text, column", [("x + ", 4), ("(x", 2), ("x * * y", 4), ("2 $ x", 2)])
def test_parse_error_columns(text, column):
    with pytest.raises(ParseError) as err:
        parse(text, XY)
    assert err.value.column == column
    assert f"column {column}" in str(err.value)


def test_unknown_variable():
    with pytest.raises(UnknownVariableError, match="'q'"):
        parse("q + x", XY)


def test_exponent_must_be_integer():
    with pytest.raises(ParseError):
        parse("x^y", XY)
    assert evaluate(parse("x^(-2)", XY), (2, 0)) == pytest.approx(0.25)


@pytest.mark.parametrize("text, var, expected, point", [
    ("x^2", "x", "2*x", (1.5, 0)),
    ("x*y", "y", "x", (0.3, -0.7)),
    ("exp(t)", "t", "exp(t)", (0.0, 0.4)),
])
def test_derivatives(text, var, expected, point):
    chart = XT if "t" in (text + var) else XY
    d = differentiate(parse(text, chart), var)
    assert evaluate(d, point) == pytest.approx(evaluate(parse(expected, chart), point))


def test_derivative_prints_simplified():
    assert to_string(differentiate(parse("x^2", XY), "x")) == "2 * x"


def test_evaluation_examples():
    assert evaluate(parse("x + 2*y", XY), (1, 2)) == 5
    assert evaluate(parse("exp(0)", XY), (0, 0)) == 1
    assert evaluate(parse("i*x", XY), (2, 0)) == 2j


def test_division_by_zero_is_reported():
    with pytest.raises(ZeroDivisionError):
        evaluate(parse("1/x", XY), (0, 0.5))
    assert issubclass(EvaluationError, ZeroDivisionError)


def test_sample_plan_is_seeded_and_in_box():
    a, b = SamplePlan(seed=7).points(XT), SamplePlan(seed=7).points(XT)
    assert np.array_equal(a, b)
    assert a.shape == (20, 2)
    assert (a[:, 1] >= 0.1).all() and (a[:, 1] <= 2.0).all()
    assert not np.array_equal(a, SamplePlan(seed=8).points(XT))


def test_batch_matches_pointwise():
    f = parse("sin(x)*cosh(y) - x/(2 + y^2)", XY)
    pts = SamplePlan(count=5).points(XY)
    batch = evaluate_batch([f], XY, pts)[:, 0]
    for p, v in zip(pts, batch):
        assert v == pytest.approx(evaluate(f, p))


# ---------------------------------------------------------------------------
# properties

leaf = st.one_of(st.sampled_from(["x", "y"]), st.integers(0, 9).map(str),
                 st.floats(0.1, 5, allow_nan=False).map(lambda v: f"{v:.3f}"))


def _extend(children):
    binop = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")
    fn = st.tuples(st.sampled_from(["exp", "sin", "cos", "sinh", "cosh"]), children).map(
        lambda t: f"{t[0]}({t[1]} / 3)")
    pw = st.tuples(children, st.integers(1, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    quot = st.tuples(children, children).map(lambda t: f"{t[0]} / (3 + ({t[1]})^2)")
    neg = children.map(lambda c: f"-{c}")
    return st.one_of(binop, fn, pw, quot, neg)


exprs = st.recursive(leaf, _extend, max_leaves=8)
points = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


@settings(max_examples=150, deadline=None)
@given(exprs, points)
def test_print_parse_round_trip(text, p):
    f = parse(text, XY)
    g = parse(to_string(f), XY)
    assert cmath.isclose(evaluate(f, p), evaluate(g, p), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=150, deadline=None)
@given(exprs, points, st.sampled_from(["x", "y"]))
def test_derivative_against_central_difference(text, p, var):
    f = parse(text, XY)
    assume(abs(evaluate(f, p)) < 1e6)
    h = 1e-5
    e = (h, 0.0) if var == "x" else (0.0, h)
    fd = (evaluate(f, (p[0] + e[0], p[1] + e[1])) - evaluate(f, (p[0] - e[0], p[1] - e[1]))) / (2 * h)
    sym = evaluate(differentiate(f, var), p)
    assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym))


@settings(max_examples=100, deadline=None)
@given(exprs, exprs, points)
def test_leibniz_rule(a, b, p):
    f, g = parse(a, XY), parse(b, XY)
    lhs = evaluate(differentiate(f * g, "x"), p)
    rhs = evaluate(differentiate(f, "x") * g + f * differentiate(g, "x"), p)
    assert cmath.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-9)
