"""Expression grammar, canonical printer and JSON documents.

Grammar (explicit ``*`` only, no implicit multiplication)::

    expr   := ["+"|"-"] term (("+"|"-") term)*
    term   := factor (("*" factor) | ("/" INT))*
    factor := atom ("^" INT)?
    atom   := INT | "i" | NAME | NAME "_" subscript
            | ("sin"|"cos") "(" NAME ")" | "(" expr ")"

A subscript is a run of axis names, each optionally preceded by a repeat
count: ``u_x1x1x2`` and ``u_2x1x2`` denote the same jet.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .jetalgebra import (
    COORD,
    COS,
    JET,
    SIN,
    Context,
    DiffPoly,
    GaussianRational,
    I_UNIT,
    ONE,
)


class ExprSyntaxError(ValueError):
    """Malformed expression text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class DocumentError(ValueError):
    """Schema or content violation in a JSON document."""


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _line_col(src: str, pos: int) -> tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, src: str, ctx: Context):
        self.src = src
        self.ctx = ctx
        self.toks = self._lex(src)
        self.k = 0

    def _error(self, msg: str, pos: int | None = None):
        if pos is None:
            pos = self.toks[self.k].pos
        raise ExprSyntaxError(msg, *_line_col(self.src, pos))

    def _lex(self, src: str) -> list[_Tok]:
        toks, pos = [], 0
        while pos < len(src):
            m = _TOKEN_RE.match(src, pos)
            if not m:
                raise ExprSyntaxError(f"unexpected character {src[pos]!r}", *_line_col(src, pos))
            kind = m.lastgroup
            if kind != "ws":
                toks.append(_Tok(kind, m.group(), pos))
            pos = m.end()
        toks.append(_Tok("end", "", len(src)))
        return toks

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def _accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def _expect(self, text: str):
        if not self._accept(text):
            self._error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    def parse(self) -> DiffPoly:
        if self.tok.kind == "end":
            self._error("empty expression")
        value = self.expr()
        if self.tok.kind != "end":
            self._error(f"unexpected {self.tok.text!r}")
        return value

    def expr(self) -> DiffPoly:
        negate = False
        if self._accept("-"):
            negate = True
        else:
            self._accept("+")
        value = self.term()
        if negate:
            value = -value
        while True:
            if self._accept("+"):
                value = value + self.term()
            elif self._accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> DiffPoly:
        value = self.factor()
        while True:
            if self._accept("*"):
                value = value * self.factor()
            elif self._accept("/"):
                if self.tok.kind != "int":
                    self._error("division is only allowed by an integer literal")
                d = int(self.tok.text)
                if d == 0:
                    self._error("division by zero")
                self.k += 1
                value = value / d
            else:
                if self.tok.kind in ("int", "name") or (self.tok.kind == "op" and self.tok.text == "("):
                    self._error("implicit multiplication is not allowed; use '*'")
                return value

    def factor(self) -> DiffPoly:
        base = self.atom()
        if self._accept("^"):
            if self.tok.kind != "int":
                self._error("exponent must be a non-negative integer literal")
            n = int(self.tok.text)
            self.k += 1
            base = base ** n
        return base

    def atom(self) -> DiffPoly:
        tok = self.tok
        ctx = self.ctx
        if tok.kind == "int":
            self.k += 1
            return ctx.const(int(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.k += 1
            value = self.expr()
            self._expect(")")
            return value
        if tok.kind != "name":
            self._error(f"unexpected {tok.text or 'end of input'!r}")
        self.k += 1
        text = tok.text
        if text == "i":
            return ctx.const(I_UNIT)
        if text in ("sin", "cos"):
            self._expect("(")
            arg = self.tok
            if arg.kind != "name" or arg.text not in ctx.fields:
                self._error("sin/cos take a single field name", arg.pos)
            self.k += 1
            self._expect(")")
            if arg.text not in ctx.trig_fields:
                self._error(f"field {arg.text!r} is not declared as a trig field", arg.pos)
            return ctx.sin(arg.text) if text == "sin" else ctx.cos(arg.text)
        if "_" in text:
            name, sub = text.split("_", 1)
            if name not in ctx.fields:
                self._error(f"unknown field {name!r}", tok.pos)
            J = self._subscript(sub, tok.pos + len(name) + 1)
            return ctx.jet(name, J)
        if text in ctx.fields:
            return ctx.jet(text)
        if text in ctx.axes:
            return ctx.coord(text)
        self._error(f"unknown name {text!r}", tok.pos)

    def _subscript(self, sub: str, pos: int) -> tuple[int, ...]:
        ctx = self.ctx
        J = [0] * ctx.n_axes
        names = sorted(ctx.axes, key=len, reverse=True)
        k = 0
        while k < len(sub):
            m = re.match(r"\d+", sub[k:])
            count = 1
            if m:
                count = int(m.group())
                if count == 0:
                    self._error("zero repeat count in subscript", pos + k)
                k += m.end()
            for a in names:
                if sub.startswith(a, k):
                    end = k + len(a)
                    # an axis name must not be followed by more digits of a longer name
                    if end < len(sub) and sub[end].isdigit() and a[-1].isdigit():
                        continue
                    J[ctx.axis_index(a)] += count
                    k = end
                    break
            else:
                m2 = re.match(r"[A-Za-z]+\d*", sub[k:])
                bad = m2.group() if m2 else sub[k:]
                self._error(f"unknown axis {bad!r} in subscript", pos + k)
        if not any(J):
            self._error("malformed subscript", pos)
        return tuple(J)


def parse_expr(src: str, ctx: Context) -> DiffPoly:
    """Parse expression text into a normal-form ``DiffPoly``."""
    return _Parser(src, ctx).parse()


# ---------------------------------------------------------------------------
# printing


def _rat(q) -> str:
    return str(q)


def _coef_text(c: GaussianRational) -> tuple[bool, str]:
    """Return (negative, magnitude text) where '' means unit magnitude."""
    re_, im = c.re, c.im
    if not im:
        neg = re_ < 0
        mag = -re_ if neg else re_
        return neg, "" if mag == 1 else _rat(mag)
    if not re_:
        neg = im < 0
        mag = -im if neg else im
        if mag == 1:
            return neg, "i"
        num, den = mag.numerator, mag.denominator
        head = "i" if num == 1 else f"{num}*i"
        return neg, head if den == 1 else f"{head}/{den}"
    imag = f"{_rat(abs(im))}*i" if abs(im) != 1 else "i"
    return False, f"({_rat(re_)} {'-' if im < 0 else '+'} {imag})"


def _gen_text(g, ctx: Context) -> str:
    kind, idx, J = g
    if kind == COORD:
        return ctx.axes[idx]
    if kind == SIN:
        return f"sin({ctx.fields[idx]})"
    if kind == COS:
        return f"cos({ctx.fields[idx]})"
    name = ctx.fields[idx]
    if not any(J):
        return name
    return name + "_" + "".join(ctx.axes[k] * j for k, j in enumerate(J))


def _mono_text(m, ctx: Context) -> str:
    parts = []
    for g, e in m:
        s = _gen_text(g, ctx)
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def print_expr(f: DiffPoly) -> str:
    """Deterministic rendering in descending monomial order; parses back to ``f``."""
    if not f.terms:
        return "0"
    out = []
    for n, (m, c) in enumerate(f.sorted_terms()):
        neg, mag = _coef_text(c)
        body = _mono_text(m, f.ctx)
        if not body:
            text = mag or "1"
        elif not mag:
            text = body
        else:
            text = f"{mag}*{body}"
        if n == 0:
            out.append(f"-{text}" if neg else text)
        else:
            out.append(f" - {text}" if neg else f" + {text}")
    return "".join(out)


# ---------------------------------------------------------------------------
# documents

_CONTEXT_SCHEMA = {
    "type": "object",
    "properties": {
        "axes": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "fields": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "trig_fields": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["axes", "fields"],
    "additionalProperties": False,
}

_BODY_SCHEMAS = {
    "context": _CONTEXT_SCHEMA,
    "lagrangian": {
        "type": "object",
        "properties": {"context": _CONTEXT_SCHEMA, "expr": {"type": "string"}},
        "required": ["context", "expr"],
    },
    "characteristic": {
        "type": "object",
        "properties": {
            "context": _CONTEXT_SCHEMA,
            "components": {"type": "object", "additionalProperties": {"type": "string"}},
            "depth": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
        "required": ["context", "components"],
    },
    "multiform": {
        "type": "object",
        "properties": {
            "context": _CONTEXT_SCHEMA,
            "degree": {"type": "integer", "minimum": 0},
            "coefficients": {"type": "object", "additionalProperties": {"type": "string"}},
        },
        "required": ["context", "degree", "coefficients"],
    },
    "eom": {
        "type": "object",
        "properties": {
            "context": _CONTEXT_SCHEMA,
            "rules": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "field": {"type": "string"},
                        "lead": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "rhs": {"type": "string"},
                    },
                    "required": ["field", "lead", "rhs"],
                    "additionalProperties": False,
                },
            },
            "confluence_order": {"type": "integer", "minimum": 0},
        },
        "required": ["context", "rules"],
    },
}

KINDS = tuple(_BODY_SCHEMAS)


@dataclass
class Document:
    """A decoded document: its kind, context and domain value."""

    kind: str
    context: Context
    value: Any


def _context_body(ctx: Context) -> dict:
    return {"axes": list(ctx.axes), "fields": list(ctx.fields), "trig_fields": list(ctx.trig_fields)}


def _context_from_body(body: dict) -> Context:
    try:
        return Context(tuple(body["axes"]), tuple(body["fields"]), tuple(body.get("trig_fields", ())))
    except ValueError as exc:
        raise DocumentError(f"invalid context: {exc}") from None


def parse_form_key(key: str, ctx: Context) -> tuple[int, ...]:
    """Decode a coefficient key (``"1 2 3"`` or ``"123"``) into 0-based axes."""
    parts = key.split() if any(ch.isspace() for ch in key) else list(key)
    try:
        labels = [int(p) for p in parts]
    except ValueError:
        raise DocumentError(f"malformed coefficient key {key!r}") from None
    if any(not 1 <= a <= ctx.n_axes for a in labels):
        raise DocumentError(f"coefficient key {key!r} names an unknown axis")
    if any(a >= b for a, b in zip(labels, labels[1:])):
        raise DocumentError(f"coefficient key {key!r} is not strictly increasing")
    return tuple(a - 1 for a in labels)


def form_key(labels: tuple[int, ...], ctx: Context) -> str:
    return " ".join(str(a + 1) for a in labels)


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise DocumentError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _expr(text: str, ctx: Context, where: str) -> DiffPoly:
    try:
        return parse_expr(text, ctx)
    except ExprSyntaxError as exc:
        raise DocumentError(f"{where}: {exc}") from None


def decode_document(data: dict, kind: str | None = None) -> Document:
    """Validate a decoded JSON object and build the domain value."""
    if not isinstance(data, dict) or "kind" not in data:
        raise DocumentError("document must be an object with a 'kind' entry")
    doc_kind = data["kind"]
    if doc_kind not in _BODY_SCHEMAS:
        raise DocumentError(f"unknown document kind {doc_kind!r}")
    if kind is not None and doc_kind != kind:
        raise DocumentError(f"expected a {kind} document, found {doc_kind}")
    body = {k: v for k, v in data.items() if k != "kind"}
    try:
        jsonschema.validate(body, _BODY_SCHEMAS[doc_kind])
    except jsonschema.ValidationError as exc:
        raise DocumentError(f"schema violation: {exc.message}") from None

    from .multiform import KForm
    from .eom import EOMRule, EOMSystem
    from .varcalc import Characteristic

    if doc_kind == "context":
        ctx = _context_from_body(body)
        return Document("context", ctx, ctx)
    ctx = _context_from_body(body["context"])
    if doc_kind == "lagrangian":
        return Document(doc_kind, ctx, _expr(body["expr"], ctx, "expr"))
    if doc_kind == "characteristic":
        comps = {}
        for name, text in body["components"].items():
            if name not in ctx.fields:
                raise DocumentError(f"unknown field {name!r} in characteristic")
            comps[name] = _expr(text, ctx, f"component {name}")
        depth = tuple(body["depth"]) if "depth" in body else None
        if depth is not None and len(depth) != ctx.n_axes:
            raise DocumentError("depth must have one entry per axis")
        return Document(doc_kind, ctx, Characteristic.of(ctx, comps, depth=depth))
    if doc_kind == "multiform":
        k = body["degree"]
        coeffs = {}
        for key, text in body["coefficients"].items():
            labels = parse_form_key(key, ctx)
            if len(labels) != k:
                raise DocumentError(f"key {key!r} does not have {k} indices")
            if labels in coeffs:
                raise DocumentError(f"duplicate coefficient for {key!r}")
            coeffs[labels] = _expr(text, ctx, f"coefficient {key}")
        return Document(doc_kind, ctx, KForm(ctx, k, coeffs))
    rules = []
    for n, r in enumerate(body["rules"]):
        if r["field"] not in ctx.fields:
            raise DocumentError(f"rule {n}: unknown field {r['field']!r}")
        if len(r["lead"]) != ctx.n_axes:
            raise DocumentError(f"rule {n}: lead must have one entry per axis")
        try:
            rules.append(EOMRule(ctx.field_index(r["field"]), tuple(r["lead"]), _expr(r["rhs"], ctx, f"rule {n}")))
        except ValueError as exc:
            raise DocumentError(f"rule {n}: {exc}") from None
    try:
        system = EOMSystem(ctx, tuple(rules), body.get("confluence_order"))
    except ValueError as exc:
        raise DocumentError(str(exc)) from None
    return Document(doc_kind, ctx, system)


def encode_document(value) -> dict:
    """Encode a Context, Document or domain value as a JSON-ready object."""
    from .multiform import KForm
    from .eom import EOMSystem
    from .varcalc import Characteristic

    if isinstance(value, Document):
        value = value.value
    if isinstance(value, Context):
        return {"kind": "context", **_context_body(value)}
    if isinstance(value, DiffPoly):
        return {"kind": "lagrangian", "context": _context_body(value.ctx), "expr": print_expr(value)}
    if isinstance(value, Characteristic):
        ctx = value.ctx
        out = {
            "kind": "characteristic",
            "context": _context_body(ctx),
            "components": {ctx.fields[a]: print_expr(c) for a, c in enumerate(value.components)},
        }
        if value.depth is not None:
            out["depth"] = list(value.depth)
        return out
    if isinstance(value, KForm):
        ctx = value.ctx
        return {
            "kind": "multiform",
            "context": _context_body(ctx),
            "degree": value.degree,
            "coefficients": {form_key(k, ctx): print_expr(c) for k, c in sorted(value.coefficients.items())},
        }
    if isinstance(value, EOMSystem):
        ctx = value.ctx
        return {
            "kind": "eom",
            "context": _context_body(ctx),
            "rules": [
                {"field": ctx.fields[r.field], "lead": list(r.lead), "rhs": print_expr(r.rhs)} for r in value.rules
            ],
            "confluence_order": value.confluence_order,
        }
    raise TypeError(f"cannot encode {type(value).__name__}")


def loads_document(text: str, kind: str | None = None) -> Document:
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return decode_document(data, kind)


def dumps_document(value) -> str:
    return json.dumps(encode_document(value), indent=2) + "\n"


def load_document(path, kind: str | None = None) -> Document:
    return loads_document(Path(path).read_text(), kind)


def save_document(path, value) -> None:
    Path(path).write_text(dumps_document(value))
