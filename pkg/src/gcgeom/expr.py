"""Scalar-field engine: expression trees over chart coordinates.

Expressions are built from complex constants, coordinate variables, the four
arithmetic operations, integer powers and the functions exp, sin, cos, sinh,
cosh.  Nodes are interned, so structurally equal subtrees are the same object;
this keeps derivative caches and batch evaluation cheap when large
endomorphisms are differentiated inside brackets.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh")
RESERVED = set(FUNCTIONS) | {"i"}


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class UnknownVariableError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable {name!r}")
        self.name = name


class EvaluationError(ExprError, ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# nodes

class Node:
    """Interned expression node.  Never construct directly; use ``_mk``."""

    __slots__ = ("op", "args", "_hash", "__weakref__")

    def __init__(self, op, args):
        self.op = op
        self.args = args
        self._hash = hash((op, args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"Node({self.op!r}, {self.args!r})"


_INTERN: dict = {}


def _key_arg(a):
    # complex constants: 0.0 and -0.0 must not collide with distinct nodes
    if isinstance(a, complex):
        return ("c", a.real, a.imag, math.copysign(1, a.real), math.copysign(1, a.imag))
    if isinstance(a, Node):
        return id(a)
    return a


def _mk(op: str, *args) -> Node:
    key = (op,) + tuple(_key_arg(a) for a in args)
    node = _INTERN.get(key)
    if node is None:
        node = Node(op, args)
        _INTERN[key] = node
    return node


def const(value) -> Node:
    return _mk("const", complex(value))


def var(name: str) -> Node:
    return _mk("var", name)


ZERO = const(0)
ONE = const(1)


def is_const(n: Node) -> bool:
    return n.op == "const"


def is_zero(n: Node) -> bool:
    return n.op == "const" and n.args[0] == 0


def is_one(n: Node) -> bool:
    return n.op == "const" and n.args[0] == 1


# folding constructors -------------------------------------------------------

def add(a: Node, b: Node) -> Node:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    if is_const(a) and is_const(b):
        return const(a.args[0] + b.args[0])
    if b.op == "neg":
        return sub(a, b.args[0])
    if a.op == "neg":
        return sub(b, a.args[0])
    return _mk("add", a, b)


def sub(a: Node, b: Node) -> Node:
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    if a is b:
        return ZERO
    if is_const(a) and is_const(b):
        return const(a.args[0] - b.args[0])
    if b.op == "neg":
        return add(a, b.args[0])
    return _mk("sub", a, b)


def neg(a: Node) -> Node:
    if is_const(a):
        return const(-a.args[0])
    if a.op == "neg":
        return a.args[0]
    return _mk("neg", a)


def mul(a: Node, b: Node) -> Node:
    if is_zero(a) or is_zero(b):
        return ZERO
    if is_one(a):
        return b
    if is_one(b):
        return a
    if is_const(a) and is_const(b):
        return const(a.args[0] * b.args[0])
    if is_const(a) and a.args[0] == -1:
        return neg(b)
    if is_const(b) and b.args[0] == -1:
        return neg(a)
    if a.op == "neg":
        return neg(mul(a.args[0], b))
    if b.op == "neg":
        return neg(mul(a, b.args[0]))
    if is_const(b):
        a, b = b, a
    return _mk("mul", a, b)


def div(a: Node, b: Node) -> Node:
    if is_zero(b):
        raise EvaluationError("division by zero")
    if is_zero(a):
        return ZERO
    if is_one(b):
        return a
    if a is b:
        return ONE
    if is_const(a) and is_const(b):
        return const(a.args[0] / b.args[0])
    if is_const(b):
        return mul(const(1 / b.args[0]), a)
    return _mk("div", a, b)


def power(a: Node, k: int) -> Node:
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if is_const(a):
        if a.args[0] == 0 and k < 0:
            raise EvaluationError("division by zero")
        return const(a.args[0] ** k)
    return _mk("pow", a, k)


def func(name: str, a: Node) -> Node:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    if is_zero(a):
        return ONE if name in ("exp", "cos", "cosh") else ZERO
    return _mk("func", name, a)


# raw constructors used by the parser so the tree mirrors the text ------------

def _raw(op, *args) -> Node:
    return _mk(op, *args)


# ---------------------------------------------------------------------------
# derivative

_DERIV: dict = {}


def diff_node(n: Node, x: str) -> Node:
    key = (n, x)
    hit = _DERIV.get(key)
    if hit is not None:
        return hit
    op = n.op
    if op == "const":
        r = ZERO
    elif op == "var":
        r = ONE if n.args[0] == x else ZERO
    elif op == "add":
        r = add(diff_node(n.args[0], x), diff_node(n.args[1], x))
    elif op == "sub":
        r = sub(diff_node(n.args[0], x), diff_node(n.args[1], x))
    elif op == "neg":
        r = neg(diff_node(n.args[0], x))
    elif op == "mul":
        a, b = n.args
        r = add(mul(diff_node(a, x), b), mul(a, diff_node(b, x)))
    elif op == "div":
        a, b = n.args
        da, db = diff_node(a, x), diff_node(b, x)
        if is_zero(db):
            r = div(da, b)
        else:
            r = div(sub(mul(da, b), mul(a, db)), power(b, 2))
    elif op == "pow":
        a, k = n.args
        r = mul(mul(const(k), power(a, k - 1)), diff_node(a, x))
    elif op == "func":
        name, a = n.args
        da = diff_node(a, x)
        if is_zero(da):
            r = ZERO
        else:
            outer = {
                "exp": lambda: n,
                "sin": lambda: func("cos", a),
                "cos": lambda: neg(func("sin", a)),
                "sinh": lambda: func("cosh", a),
                "cosh": lambda: func("sinh", a),
            }[name]()
            r = mul(outer, da)
    else:  # pragma: no cover
        raise ExprError(f"bad node {op}")
    _DERIV[key] = r
    return r


def variables(n: Node) -> set[str]:
    out: set[str] = set()
    stack = [n]
    seen = set()
    while stack:
        m = stack.pop()
        if id(m) in seen:
            continue
        seen.add(id(m))
        if m.op == "var":
            out.add(m.args[0])
        for a in m.args:
            if isinstance(a, Node):
                stack.append(a)
    return out


def substitute(n: Node, values: Mapping[str, Node]) -> Node:
    """Replace variables by nodes, refolding as the tree is rebuilt."""
    memo: dict = {}

    def go(m: Node) -> Node:
        if id(m) in memo:
            return memo[id(m)]
        op = m.op
        if op == "const":
            r = m
        elif op == "var":
            r = values.get(m.args[0], m)
        elif op in ("add", "sub", "mul", "div"):
            f = {"add": add, "sub": sub, "mul": mul, "div": div}[op]
            r = f(go(m.args[0]), go(m.args[1]))
        elif op == "neg":
            r = neg(go(m.args[0]))
        elif op == "pow":
            r = power(go(m.args[0]), m.args[1])
        else:
            r = func(m.args[0], go(m.args[1]))
        memo[id(m)] = r
        return r

    return go(n)


# ---------------------------------------------------------------------------
# evaluation

_NP_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh}


def eval_nodes(nodes: Sequence[Node], env: Mapping[str, np.ndarray], memo: dict | None = None) -> list:
    """Evaluate nodes on a batch of points.

    ``env`` maps variable names to real arrays of a common shape.  Results are
    complex arrays of that shape.  ``memo`` may be shared across calls that use
    the same ``env``.
    """
    if memo is None:
        memo = {}
    shape = np.shape(next(iter(env.values()))) if env else ()

    def go(m: Node):
        r = memo.get(id(m))
        if r is not None:
            return r
        op = m.op
        if op == "const":
            r = np.full(shape, m.args[0], dtype=complex)
        elif op == "var":
            try:
                r = np.asarray(env[m.args[0]], dtype=complex)
            except KeyError:
                raise UnknownVariableError(m.args[0]) from None
        elif op == "add":
            r = go(m.args[0]) + go(m.args[1])
        elif op == "sub":
            r = go(m.args[0]) - go(m.args[1])
        elif op == "neg":
            r = -go(m.args[0])
        elif op == "mul":
            r = go(m.args[0]) * go(m.args[1])
        elif op == "div":
            den = go(m.args[1])
            if np.any(den == 0):
                raise EvaluationError("division by zero")
            r = go(m.args[0]) / den
        elif op == "pow":
            base = go(m.args[0])
            k = m.args[1]
            if k < 0:
                if np.any(base == 0):
                    raise EvaluationError("division by zero")
                r = 1.0 / base ** (-k)
            else:
                r = base ** k
        else:
            r = _NP_FUNCS[m.args[0]](go(m.args[1]))
        memo[id(m)] = r
        return r

    # deep trees: iterative warm-up in post-order avoids recursion limits
    for n in nodes:
        _warm(n, go, memo)
    return [go(n) for n in nodes]


def _warm(root: Node, go, memo):
    stack = [(root, False)]
    while stack:
        m, done = stack.pop()
        if id(m) in memo:
            continue
        if done:
            go(m)
            continue
        stack.append((m, True))
        for a in m.args:
            if isinstance(a, Node) and id(a) not in memo:
                stack.append((a, False))


# ---------------------------------------------------------------------------
# printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_const(c: complex) -> tuple[str, int]:
    re_, im = c.real, c.imag
    if im == 0:
        if re_ < 0 or (re_ == 0 and math.copysign(1, re_) < 0):
            return f"(-{_fmt_real(-re_)})", 5
        return _fmt_real(re_), 5
    ipart = "i" if im == 1 else f"{_fmt_real(abs(im))}*i"
    if re_ == 0:
        return (f"(-{ipart})", 5) if im < 0 else (ipart, 5 if im == 1 else 2)
    sign = "-" if im < 0 else "+"
    return f"({_fmt_real(re_)} {sign} {ipart})", 5


def to_text(n: Node) -> str:
    memo: dict = {}

    def go(m: Node) -> tuple[str, int]:
        hit = memo.get(id(m))
        if hit is not None:
            return hit
        op = m.op
        if op == "const":
            r = _fmt_const(m.args[0])
        elif op == "var":
            r = (m.args[0], 5)
        elif op == "func":
            r = (f"{m.args[0]}({go(m.args[1])[0]})", 5)
        elif op == "neg":
            s, p = go(m.args[0])
            r = (f"-{s}" if p >= 3 else f"-({s})", 3)
        elif op == "pow":
            s, p = go(m.args[0])
            base = s if p >= 5 else f"({s})"
            k = m.args[1]
            r = (f"{base}^{k}" if k >= 0 else f"{base}^(-{-k})", 4)
        else:
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[op]
            prec = _PREC[op]
            ls, lp = go(m.args[0])
            rs, rp = go(m.args[1])
            if lp < prec:
                ls = f"({ls})"
            # right operand of a left-associative operator binds tighter
            if rp < prec or (rp == prec and op in ("sub", "div", "add", "mul")):
                rs = f"({rs})"
            r = (f"{ls} {sym} {rs}", prec)
        memo[id(m)] = r
        return r

    return go(n)[0]


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col]!r}", col)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, allowed: set[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, col = self.take()
        if v != value or kind == "end":
            raise ParseError(f"expected {value!r}", col)

    def parse(self) -> Node:
        n = self.expr()
        kind, v, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", col)
        return n

    def expr(self) -> Node:
        n = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            n = _raw("add" if op == "+" else "sub", n, rhs)
        return n

    def term(self) -> Node:
        n = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            n = _raw("mul" if op == "*" else "div", n, rhs)
        return n

    def factor(self) -> Node:
        kind, v, col = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return _raw("neg", self.factor())
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            k = self.integer()
            base = _raw("pow", base, k)
        return base

    def integer(self) -> int:
        kind, v, col = self.take()
        sign = 1
        paren = False
        if kind == "op" and v == "(":
            paren = True
            kind, v, col = self.take()
        if kind == "op" and v == "-":
            sign = -1
            kind, v, col = self.take()
        if kind != "num" or not v.isdigit():
            raise ParseError("expected integer exponent", col)
        if paren:
            self.expect(")")
        return sign * int(v)

    def base(self) -> Node:
        kind, v, col = self.take()
        if kind == "num":
            return _raw("const", complex(float(v)))
        if kind == "id":
            if v == "i":
                return _raw("const", 1j)
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _raw("func", v, arg)
            if self.allowed is not None and v not in self.allowed:
                raise UnknownVariableError(v)
            return var(v)
        if kind == "op" and v == "(":
            n = self.expr()
            self.expect(")")
            return n
        if kind == "end":
            raise ParseError("unexpected end of input", col)
        raise ParseError(f"unexpected {v!r}", col)


def parse_node(text: str, allowed: Iterable[str] | None = None) -> Node:
    return _Parser(text, set(allowed) if allowed is not None else None).parse()


# ---------------------------------------------------------------------------
# charts, sampling and the user-facing scalar field


@dataclass(frozen=True)
class Chart:
    """A coordinate box standing in for a manifold.

    ``params`` are extra real variables that coefficients may depend on but
    which are not manifold directions; a family of structures on a factor
    indexed by the other factor's coordinate lives on such a chart.
    """

    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    name: str = ""
    excluded: tuple[Node, ...] = ()
    params: tuple[str, ...] = ()
    param_domain: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "domain", tuple(tuple(map(float, b)) for b in self.domain))
        object.__setattr__(self, "param_domain", tuple(tuple(map(float, b)) for b in self.param_domain))
        names = self.coords + self.params
        if len(self.coords) == 0:
            raise ValueError("chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        bad = [c for c in names if c in RESERVED]
        if bad:
            raise ValueError(f"reserved names used as coordinates: {bad}")
        if len(self.domain) != len(self.coords) or len(self.param_domain) != len(self.params):
            raise ValueError("one interval per coordinate required")
        for lo, hi in self.domain + self.param_domain:
            if not hi > lo:
                raise ValueError("sample domain must have positive volume")
        if not self.name:
            object.__setattr__(self, "name", "chart(" + ",".join(names) + ")")
        object.__setattr__(self, "excluded", tuple(
            e.node if isinstance(e, ScalarField) else e for e in self.excluded))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.coords + self.params

    @property
    def box(self) -> tuple[tuple[float, float], ...]:
        return self.domain + self.param_domain

    def index(self, coord: str) -> int:
        try:
            return self.coords.index(coord)
        except ValueError:
            raise UnknownVariableError(coord) from None

    def same_as(self, other: "Chart") -> bool:
        return self.coords == other.coords and self.params == other.params

    def field(self, text) -> "ScalarField":
        if isinstance(text, ScalarField):
            return text
        if isinstance(text, Node):
            return ScalarField(text, self)
        if isinstance(text, (int, float, complex)):
            return ScalarField(const(text), self)
        return parse(text, self)

    def coord(self, name: str) -> "ScalarField":
        if name not in self.variables:
            raise UnknownVariableError(name)
        return ScalarField(var(name), self)

    def zero(self) -> "ScalarField":
        return ScalarField(ZERO, self)

    def one(self) -> "ScalarField":
        return ScalarField(ONE, self)


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 42
    count: int = 20
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("count must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def points(self, chart: Chart) -> np.ndarray:
        """Seeded points in the chart box, avoiding the excluded zero sets.

        Columns follow ``chart.variables`` (coordinates, then parameters).
        """
        rng = np.random.default_rng(self.seed)
        box = np.array(chart.box)
        out = []
        tries = 0
        while len(out) < self.count:
            tries += 1
            if tries > 1000 * self.count:
                raise ExprError("exclusions leave no room to sample")
            p = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(len(box))
            if chart.excluded:
                env = {v: np.array([p[k]]) for k, v in enumerate(chart.variables)}
                vals = eval_nodes(chart.excluded, env)
                if any(abs(v[0]) < 1e-6 for v in vals):
                    continue
            out.append(p)
        return np.array(out)


def env_for(chart: Chart, points: np.ndarray) -> dict[str, np.ndarray]:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != len(chart.variables):
        raise ValueError(f"expected {len(chart.variables)} values per point, got {points.shape[1]}")
    return {v: points[:, k] for k, v in enumerate(chart.variables)}


class ScalarField:
    """Immutable complex-valued expression owned by a chart."""

    __slots__ = ("node", "chart")

    def __init__(self, node: Node, chart: Chart):
        extra = variables(node) - set(chart.variables)
        if extra:
            raise UnknownVariableError(sorted(extra)[0])
        self.node = node
        self.chart = chart

    def _other(self, other) -> Node:
        if isinstance(other, ScalarField):
            if not self.chart.same_as(other.chart):
                raise ValueError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")
            return other.node
        if isinstance(other, Node):
            return other
        return const(other)

    def _wrap(self, node: Node) -> "ScalarField":
        r = object.__new__(ScalarField)
        r.node = node
        r.chart = self.chart
        return r

    def __add__(self, o):
        return self._wrap(add(self.node, self._other(o)))

    def __radd__(self, o):
        return self._wrap(add(self._other(o), self.node))

    def __sub__(self, o):
        return self._wrap(sub(self.node, self._other(o)))

    def __rsub__(self, o):
        return self._wrap(sub(self._other(o), self.node))

    def __mul__(self, o):
        return self._wrap(mul(self.node, self._other(o)))

    def __rmul__(self, o):
        return self._wrap(mul(self._other(o), self.node))

    def __truediv__(self, o):
        return self._wrap(div(self.node, self._other(o)))

    def __rtruediv__(self, o):
        return self._wrap(div(self._other(o), self.node))

    def __neg__(self):
        return self._wrap(neg(self.node))

    def __pow__(self, k: int):
        return self._wrap(power(self.node, k))

    def is_zero(self) -> bool:
        return is_zero(self.node)

    def diff(self, coord: str) -> "ScalarField":
        return differentiate(self, coord)

    def __call__(self, *point) -> complex:
        return evaluate(self, point)

    def __str__(self):
        return to_text(self.node)

    def __repr__(self):
        return f"ScalarField({to_text(self.node)!r}, {self.chart.name})"


def fn(name: str, f: ScalarField) -> ScalarField:
    return f._wrap(func(name, f.node))


def exp(f: ScalarField) -> ScalarField:
    return fn("exp", f)


def parse(text: str, chart: Chart) -> ScalarField:
    return ScalarField(parse_node(text, chart.variables), chart)


def to_string(f: ScalarField) -> str:
    return to_text(f.node)


def differentiate(f: ScalarField, coord: str) -> ScalarField:
    if coord not in f.chart.variables:
        raise UnknownVariableError(coord)
    return f._wrap(diff_node(f.node, coord))


def evaluate(f: ScalarField, point) -> complex:
    """Evaluate at one point, given as a sequence (chart order) or a mapping."""
    chart = f.chart
    if isinstance(point, Mapping):
        missing = [v for v in chart.variables if v not in point]
        if missing:
            raise ValueError(f"missing values for {missing}")
        point = [point[v] for v in chart.variables]
    point = np.asarray(point, dtype=float).reshape(1, -1)
    return complex(eval_nodes([f.node], env_for(chart, point))[0][0])


def evaluate_batch(fields: Sequence[ScalarField], chart: Chart, points: np.ndarray, memo=None) -> np.ndarray:
    """Evaluate many fields at many points: returns shape (len(points), len(fields))."""
    points = np.atleast_2d(points)
    env = env_for(chart, points)
    vals = eval_nodes([f.node if isinstance(f, ScalarField) else f for f in fields], env, memo)
    if not vals:
        return np.zeros((len(points), 0), dtype=complex)
    return np.stack(vals, axis=-1)
