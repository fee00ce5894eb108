"""Reader for ``.gg`` structure files.

A file is a sequence of bracketed sections with ``key = value`` lines::

    [manifold heis]
    coords = x y z
    domain = -1 1, -1 1, -1 1

    [define heis]
    eta = form: -y, 0, 1
    xi = vector: 0, 0, 1

    [structure contact]
    type = contact
    eta = eta
    xi = xi

    [check classify]
    expect.contact = contact

Indented lines continue the previous value.  ``#`` starts a comment.
Matrix payloads separate rows with ``;`` and entries with ``,``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bigtangent import BundleEndomorphism, GeneralizedSection, NotClosedError, bfield_transform
from .calculus import CalculusError, KForm, MetricTensor, VectorField
from .expr import Chart, ExprError, SamplePlan, evaluate_batch, parse
from .products import ProductError, product_chart
from .structures import (
    ClassicalPreconditionError,
    GacmsRecord,
    GacsRecord,
    GacxRecord,
    lift_almost_contact,
    lift_complex,
    lift_contact,
    lift_symplectic,
    metric_lift,
)
from .suite import ProductStructure, UsageError, WarpStructure, Workspace, metric_image, swapped

FLAGS = ("contact", "strong", "normal")
PLAN_KEYS = ("seed", "points", "tol")


class StructureFileError(ValueError):
    """Malformed input, reported with file and line."""

    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source, self.line, self.message = source, line, message


class StructureBuildError(ValueError):
    """A well-formed structure whose classical preconditions fail."""

    def __init__(self, source: str, line: int, name: str, cause: Exception):
        super().__init__(f"{source}:{line}: structure {name}: {cause}")
        self.name = name
        self.cause = cause
        self.witness = getattr(cause, "witness", None)
        self.residual = getattr(cause, "residual", None)


@dataclass
class Section:
    kind: str
    name: str
    line: int
    entries: list[tuple[str, str, int]] = field(default_factory=list)

    def get(self, key, src, required=True):
        for k, v, ln in self.entries:
            if k == key:
                return v, ln
        if required:
            raise StructureFileError(src, self.line, f"[{self.kind} {self.name}] needs '{key}'")
        return None, self.line


_HEADER = re.compile(r"^\[\s*(\w+)(?:\s+([^\]\s]+))?\s*\]$")


def split_sections(text: str, source: str) -> list[Section]:
    sections: list[Section] = []
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and current is not None and current.entries:
            k, v, l0 = current.entries[-1]
            current.entries[-1] = (k, f"{v} {line.strip()}", l0)
            continue
        line = line.strip()
        m = _HEADER.match(line)
        if m:
            kind = m.group(1)
            if kind not in ("manifold", "define", "structure", "check", "plan"):
                raise StructureFileError(source, ln, f"unknown section [{kind}]")
            if kind in ("structure", "check") and not m.group(2):
                raise StructureFileError(source, ln, f"[{kind}] needs a name")
            current = Section(kind, m.group(2) or "", ln)
            sections.append(current)
            continue
        if current is None:
            raise StructureFileError(source, ln, "content before the first section")
        if "=" not in line:
            raise StructureFileError(source, ln, "expected 'key = value'")
        k, v = line.split("=", 1)
        current.entries.append((k.strip(), v.strip(), ln))
    return sections


class _Reader:
    def __init__(self, source: str, plan: SamplePlan | None, plan_overrides: dict):
        self.src = source
        self.plan_in = plan
        self.overrides = plan_overrides
        self.ws: Workspace | None = None

    def err(self, line, msg):
        return StructureFileError(self.src, line, msg)

    # -- manifolds ----------------------------------------------------------
    def interval_list(self, text, line, n):
        parts = [p.split() for p in text.split(",")]
        try:
            boxes = [(float(a), float(b)) for a, b in parts]
        except ValueError:
            raise self.err(line, "intervals are written 'lo hi, lo hi, ...'") from None
        if len(boxes) != n:
            raise self.err(line, f"expected {n} intervals, got {len(boxes)}")
        return tuple(boxes)

    def manifold(self, sec: Section, charts, products):
        if not sec.name:
            raise self.err(sec.line, "[manifold] needs a name")
        prod, ln = sec.get("product", self.src, required=False)
        if prod:
            names = prod.split()
            if len(names) != 2 or any(n not in charts for n in names):
                raise self.err(ln, "product needs two previously declared manifolds")
            try:
                products[sec.name] = product_chart(charts[names[0]], charts[names[1]], sec.name)
            except ProductError as exc:
                raise self.err(ln, str(exc)) from None
            charts[sec.name] = products[sec.name].chart
            return
        coords, ln = sec.get("coords", self.src)
        coords = tuple(coords.split())
        dom, dln = sec.get("domain", self.src)
        domain = self.interval_list(dom, dln, len(coords))
        params, pln = sec.get("params", self.src, required=False)
        params = tuple(params.split()) if params else ()
        pdom = ()
        if params:
            pd, pln = sec.get("param_domain", self.src)
            pdom = self.interval_list(pd, pln, len(params))
        try:
            chart = Chart(coords, domain, sec.name, (), params, pdom)
            exc_text, eln = sec.get("exclude", self.src, required=False)
            if exc_text:
                excluded = tuple(self.expr(e, chart, eln) for e in exc_text.split(","))
                chart = Chart(coords, domain, sec.name, excluded, params, pdom)
        except (ValueError, ExprError) as exc:
            if isinstance(exc, StructureFileError):
                raise
            raise self.err(ln, str(exc)) from None
        charts[sec.name] = chart

    # -- expressions ----------------------------------------------------------
    def expr(self, text, chart, line):
        text = text.strip()
        try:
            return parse(text, chart)
        except ExprError as exc:
            raise self.err(line, f"in '{text}': {exc}") from None

    def row(self, text, chart, line, n=None):
        items = [self.expr(t, chart, line) for t in text.split(",")]
        if n is not None and len(items) != n:
            raise self.err(line, f"expected {n} entries, got {len(items)}")
        return items

    def rows(self, text, chart, line, n):
        rows = [self.row(r, chart, line, n) for r in text.split(";")]
        if len(rows) != n:
            raise self.err(line, f"expected {n} rows, got {len(rows)}")
        return rows

    def definition(self, name, text, chart, line, objects):
        kind, sep, payload = text.partition(":")
        kind = kind.strip()
        if not sep:
            raise self.err(line, "definitions are written 'name = kind: payload'")
        n = chart.dim
        if kind == "scalar":
            return self.expr(payload, chart, line)
        if kind == "vector":
            return VectorField(self.row(payload, chart, line, n), chart)
        if kind == "form":
            return KForm.one_form(self.row(payload, chart, line, n), chart)
        if kind == "form2":
            m = self.rows(payload, chart, line, n)
            self.antisymmetric(m, chart, line)
            return KForm.two_form(m, chart)
        if kind == "matrix":
            return self.rows(payload, chart, line, n)
        if kind == "metric":
            return MetricTensor(self.rows(payload, chart, line, n), chart)
        if kind == "endo":
            return BundleEndomorphism(self.rows(payload, chart, line, 2 * n), chart)
        if kind == "section":
            parts = [p.strip() for p in payload.split(",")]
            if len(parts) != 2:
                raise self.err(line, "section: <vector or 0>, <form or 0>")
            vec = VectorField.zero(chart) if parts[0] == "0" else self.ref(parts[0], objects, VectorField, line)
            form = KForm.zero(1, chart) if parts[1] == "0" else self.ref(parts[1], objects, KForm, line)
            return GeneralizedSection(vec, form)
        raise self.err(line, f"unknown definition kind '{kind}'")

    def antisymmetric(self, m, chart, line):
        fields = [m[i][j] + m[j][i] for i in range(len(m)) for j in range(i, len(m))]
        fields = [f for f in fields if not f.is_zero()]
        if not fields:
            return
        vals = np.abs(evaluate_batch(fields, chart, self.ws.plan.points(chart)))
        if vals.max() > self.ws.plan.tolerance:
            raise self.err(line, "form2 matrix is not antisymmetric")

    def ref(self, name, objects, kind, line):
        if name not in objects:
            raise self.err(line, f"unknown name '{name}'")
        obj = objects[name]
        if kind is not None and not isinstance(obj, kind):
            raise self.err(line, f"'{name}' is not a {getattr(kind, '__name__', kind)}")
        return obj

    # -- structures ---------------------------------------------------------
    def structure(self, sec: Section):
        ws = self.ws
        typ, tln = sec.get("type", self.src)
        obj = ws.objects

        def need(key, kind=None):
            v, ln = sec.get(key, self.src)
            return self.ref(v, obj, kind, ln)

        def struct(key):
            v, ln = sec.get(key, self.src)
            if v not in ws.structures:
                raise self.err(ln, f"unknown structure '{v}'")
            return ws.structures[v]

        def product_of(key_l, key_r):
            left, right = struct(key_l), struct(key_r)
            on, ln = sec.get("on", self.src, required=False)
            if on:
                if on not in ws.products:
                    raise self.err(ln, f"'{on}' is not a product manifold")
                pc = ws.products[on]
                if pc.left.coords != left.chart.coords or pc.right.coords != right.chart.coords:
                    raise self.err(ln, f"'{on}' is not the product of the given factors")
                return left, right, pc
            return left, right, ws.product_for(left.chart, right.chart)

        plan = ws.plan
        try:
            if typ == "almost-contact":
                phi = need("phi", list)
                return lift_almost_contact(phi, need("xi", VectorField), need("eta", KForm),
                                           need("metric", MetricTensor), plan)
            if typ == "contact":
                return lift_contact(need("eta", KForm), need("xi", VectorField), plan)
            if typ == "complex":
                j = need("j", list)
                return lift_complex(j, j[0][0].chart, plan)
            if typ == "symplectic":
                return lift_symplectic(need("omega", KForm), plan)
            if typ == "metric":
                return metric_lift(need("g", MetricTensor), plan)
            if typ == "gacs":
                g = GacsRecord(need("phi", BundleEndomorphism), need("e_plus", GeneralizedSection),
                               need("e_minus", GeneralizedSection))
                if sec.get("metric", self.src, required=False)[0]:
                    return GacmsRecord(g, need("metric", BundleEndomorphism))
                return g
            if typ == "gacx":
                return GacxRecord(need("j", BundleEndomorphism))
            if typ == "tilde":
                s = struct("of")
                if not isinstance(s, GacmsRecord):
                    raise self.err(tln, "tilde needs a metric structure")
                return s.tilde()
            if typ == "swap":
                return swapped(struct("of"))
            if typ == "product":
                return ProductStructure(*product_of("left", "right"))
            if typ == "metric-image":
                p = struct("of")
                if not isinstance(p, ProductStructure):
                    raise self.err(tln, "metric-image needs a product structure")
                return metric_image(p)
            if typ == "warp":
                left, right, pc = product_of("left", "right")
                w = WarpStructure(left, right, pc, plan)
                w.result  # noqa: B018  (fails early on a bad right factor)
                return w
            if typ == "bfield":
                return bfield_transform(struct("of"), need("b", KForm), plan)
        except (ClassicalPreconditionError, NotClosedError, CalculusError) as exc:
            raise StructureBuildError(self.src, sec.line, sec.name, exc) from exc
        except (ProductError, UsageError) as exc:
            raise self.err(sec.line, str(exc)) from None
        raise self.err(tln, f"unknown structure type '{typ}'")

    # -- checks -------------------------------------------------------------
    def check(self, sec: Section) -> dict:
        opts: dict = {}
        expect: dict = {}
        for k, v, ln in sec.entries:
            if k.startswith("expect."):
                flags = v.split()
                bad = [f for f in flags if f not in FLAGS + ("none",)]
                if bad:
                    raise self.err(ln, f"unknown flags {bad}")
                expect[k[len("expect."):]] = {f: f in flags for f in FLAGS}
            elif k == "verdict":
                if v not in ("pass", "fail"):
                    raise self.err(ln, "verdict is pass or fail")
                opts["verdict"] = v == "pass"
            elif k in PLAN_KEYS:
                try:
                    opts[k] = float(v) if k == "tol" else int(v)
                except ValueError:
                    raise self.err(ln, f"bad {k} value '{v}'") from None
                if k in self.overrides:
                    opts[k] = self.overrides[k]
            else:
                opts[k] = v
        if expect:
            opts["expect"] = expect
        return opts

    # -- driver -------------------------------------------------------------
    def read(self, text: str) -> Workspace:
        secs = split_sections(text, self.src)
        base = self.plan_in or SamplePlan()
        vals, line = {}, 1
        for sec in secs:
            if sec.kind == "plan":
                line = sec.line
                for k, v, ln in sec.entries:
                    if k not in PLAN_KEYS:
                        raise self.err(ln, f"unknown plan key '{k}'")
                    try:
                        vals[k] = float(v) if k == "tol" else int(v)
                    except ValueError:
                        raise self.err(ln, f"bad {k} value '{v}'") from None
        vals.update(self.overrides)
        try:
            plan = SamplePlan(vals.get("seed", base.seed), vals.get("points", base.count),
                              vals.get("tol", base.tolerance))
        except ValueError as exc:
            raise self.err(line, str(exc)) from None
        ws = self.ws = Workspace(Path(self.src).stem, plan)
        for sec in secs:
            if sec.kind == "manifold":
                if sec.name in ws.charts:
                    raise self.err(sec.line, f"manifold '{sec.name}' declared twice")
                self.manifold(sec, ws.charts, ws.products)
            elif sec.kind == "define":
                name = sec.name
                if not name:
                    plain = [n for n in ws.charts if n not in ws.products]
                    if len(plain) != 1:
                        raise self.err(sec.line, "[define] must name its manifold")
                    name = plain[0]
                if name not in ws.charts:
                    raise self.err(sec.line, f"unknown manifold '{name}'")
                for k, v, ln in sec.entries:
                    if k in ws.objects:
                        raise self.err(ln, f"'{k}' defined twice")
                    ws.objects[k] = self.definition(k, v, ws.charts[name], ln, ws.objects)
            elif sec.kind == "structure":
                if sec.name in ws.structures:
                    raise self.err(sec.line, f"structure '{sec.name}' defined twice")
                ws.structures[sec.name] = self.structure(sec)
            elif sec.kind == "check":
                if sec.name in ws.checks:
                    raise self.err(sec.line, f"[check {sec.name}] given twice")
                ws.checks[sec.name] = self.check(sec)
        if not ws.charts:
            raise self.err(1, "no [manifold] section")
        return ws


def loads(text: str, source: str = "<string>", plan: SamplePlan | None = None,
          overrides: dict | None = None) -> Workspace:
    """Parse structure-file text into a workspace.

    ``overrides`` holds plan values given on the command line; they win over
    any in the file.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    return _Reader(source, plan, overrides).read(text)


def load(path, plan: SamplePlan | None = None, overrides: dict | None = None) -> Workspace:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StructureFileError(str(path), 0, f"cannot read file: {exc.strerror}") from None
    return loads(text, path.name, plan, overrides)


__all__ = ["StructureBuildError", "StructureFileError", "load", "loads", "split_sections"]
