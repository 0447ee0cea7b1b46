"""Differential polynomials on jet space.

A :class:`DiffPoly` is a finite sum of monomials in jet generators
``u^a_J`` (a dependent field with a derivative multi-index), explicit
coordinates ``x_i`` and, for fields that admit them, ``sin(u)`` and
``cos(u)``.  Coefficients are exact Gaussian rationals.

Generators are plain tuples ``(kind, index, J)`` so they hash and compare
cheaply; monomials are tuples of ``(generator, exponent)`` pairs sorted by
the generator order Coord < Sin < Cos < Jet.  Normal form additionally keeps
every ``cos`` exponent at most one by rewriting ``cos^2 = 1 - sin^2``.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

COORD, SIN, COS, JET = 0, 1, 2, 3
RESERVED_NAMES = frozenset({"i", "sin", "cos"})

MultiIndex = tuple  # tuple[int, ...], one entry per axis
Generator = tuple  # (kind, index, MultiIndex)
Monomial = tuple  # tuple[(Generator, int), ...]

_MPQ_ZERO = mpq(0)


class ContextMismatch(ValueError):
    """Raised when two expressions from different contexts are combined."""


# ---------------------------------------------------------------------------
# coefficients


class GaussianRational:
    """Exact complex rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def _raw(re, im) -> "GaussianRational":
        g = object.__new__(GaussianRational)
        g.re = re
        g.im = im
        return g

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if type(value) is cls:
            return value
        if isinstance(value, complex):
            raise TypeError("floating point complex values are not exact")
        if isinstance(value, float):
            raise TypeError("floating point values are not exact")
        return cls(value, 0)

    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def __add__(self, other):
        if type(other) is not GaussianRational:
            other = GaussianRational.coerce(other)
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not GaussianRational:
            other = GaussianRational.coerce(other)
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        if type(other) is not GaussianRational:
            if isinstance(other, int):
                return GaussianRational._raw(self.re * other, self.im * other)
            other = GaussianRational.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, _MPQ_ZERO)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        c, d = other.re, other.im
        n = c * c + d * d
        if not n:
            raise ZeroDivisionError("division by zero coefficient")
        a, b = self.re, self.im
        return GaussianRational._raw((a * c + b * d) / n, (b * c - a * d) / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"


Coefficient = GaussianRational
ONE = GaussianRational(1)
ZERO = GaussianRational(0)
I_UNIT = GaussianRational(0, 1)


# ---------------------------------------------------------------------------
# multi-indices


def increment(J: MultiIndex, axis: int, r: int = 1) -> MultiIndex:
    """``J i^r``: add ``r`` to the ``axis`` component."""
    lst = list(J)
    lst[axis] += r
    return tuple(lst)


def decrement(J: MultiIndex, axis: int, r: int = 1) -> MultiIndex:
    """``J \\ k^r``; raises ``ValueError`` if a component would go negative."""
    if J[axis] < r:
        raise ValueError(f"cannot lower component {axis} of {J} by {r}")
    lst = list(J)
    lst[axis] -= r
    return tuple(lst)


def mi_add(A: MultiIndex, B: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(A, B))


def mi_sub(A: MultiIndex, B: MultiIndex) -> MultiIndex:
    """Componentwise difference; components may be negative."""
    return tuple(a - b for a, b in zip(A, B))


def mi_le(A: MultiIndex, B: MultiIndex) -> bool:
    return all(a <= b for a, b in zip(A, B))


def unit(n: int, axis: int) -> MultiIndex:
    return tuple(1 if k == axis else 0 for k in range(n))


# ---------------------------------------------------------------------------
# context


@dataclass(frozen=True)
class Context:
    """Names of the independent axes and dependent fields of a computation."""

    axes: tuple[str, ...]
    fields: tuple[str, ...]
    trig_fields: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "trig_fields", tuple(self.trig_fields))
        names = self.axes + self.fields
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in context: {names}")
        for name in names:
            if not name.isidentifier() or "_" in name or keyword.iskeyword(name):
                raise ValueError(f"invalid name {name!r}")
            if name in RESERVED_NAMES:
                raise ValueError(f"{name!r} is reserved")
        if not self.axes:
            raise ValueError("a context needs at least one axis")
        for t in self.trig_fields:
            if t not in self.fields:
                raise ValueError(f"trig field {t!r} is not a field")

    @property
    def n_axes(self) -> int:
        return len(self.axes)

    @property
    def n_fields(self) -> int:
        return len(self.fields)

    def axis_index(self, axis) -> int:
        if isinstance(axis, int):
            if not 0 <= axis < len(self.axes):
                raise ValueError(f"axis index {axis} out of range")
            return axis
        try:
            return self.axes.index(axis)
        except ValueError:
            raise ValueError(f"unknown axis {axis!r}") from None

    def axis_indices(self, axes=None) -> tuple[int, ...]:
        if axes is None:
            return tuple(range(len(self.axes)))
        if isinstance(axes, str):
            axes = [a for a in axes.replace(",", " ").split() if a]
        out = sorted({self.axis_index(a) for a in axes})
        return tuple(out)

    def field_index(self, field) -> int:
        if isinstance(field, int):
            if not 0 <= field < len(self.fields):
                raise ValueError(f"field index {field} out of range")
            return field
        try:
            return self.fields.index(field)
        except ValueError:
            raise ValueError(f"unknown field {field!r}") from None

    def admits_trig(self, field) -> bool:
        return self.fields[self.field_index(field)] in self.trig_fields

    def multi_index(self, *axes) -> MultiIndex:
        """Multi-index counting repeated axis names, e.g. ``("x1", "x1")``."""
        J = [0] * len(self.axes)
        for a in axes:
            J[self.axis_index(a)] += 1
        return tuple(J)

    def zero_index(self) -> MultiIndex:
        return (0,) * len(self.axes)

    # constructors -------------------------------------------------------
    def zero(self) -> "DiffPoly":
        return DiffPoly(self, {})

    def const(self, value) -> "DiffPoly":
        c = GaussianRational.coerce(value)
        return DiffPoly(self, {(): c} if c else {})

    def jet(self, field, J=None) -> "DiffPoly":
        """The jet ``field_J``; ``J`` is a multi-index or a sequence of axis names."""
        a = self.field_index(field)
        if J is None:
            J = self.zero_index()
        elif J and isinstance(next(iter(J)), str):
            J = self.multi_index(*J)
        J = tuple(J)
        if len(J) != len(self.axes) or any(j < 0 for j in J):
            raise ValueError(f"malformed multi-index {J}")
        return DiffPoly(self, {(((JET, a, J), 1),): ONE})

    def coord(self, axis) -> "DiffPoly":
        return DiffPoly(self, {(((COORD, self.axis_index(axis), ()), 1),): ONE})

    def sin(self, field) -> "DiffPoly":
        a = self._trig_index(field)
        return DiffPoly(self, {(((SIN, a, ()), 1),): ONE})

    def cos(self, field) -> "DiffPoly":
        a = self._trig_index(field)
        return DiffPoly(self, {(((COS, a, ()), 1),): ONE})

    def _trig_index(self, field) -> int:
        a = self.field_index(field)
        if self.fields[a] not in self.trig_fields:
            raise ValueError(f"field {self.fields[a]!r} does not admit sin/cos")
        return a

    def parse(self, text: str) -> "DiffPoly":
        from .textio import parse_expr

        return parse_expr(text, self)

    def extend_fields(self, names: Sequence[str]) -> "Context":
        return Context(self.axes, self.fields + tuple(names), self.trig_fields)

    def fresh_field_names(self, count: int, stem: str = "w") -> list[str]:
        """Deterministic field names not yet used in this context."""
        taken = set(self.axes) | set(self.fields)
        out, k = [], 1
        while len(out) < count:
            name = f"{stem}{k}"
            if name not in taken:
                out.append(name)
            k += 1
        return out


# ---------------------------------------------------------------------------
# monomial kernels


@lru_cache(maxsize=None)
def gen_key(g: Generator) -> tuple:
    """Sort key giving Coord < Sin < Cos < Jet, jets by (field, order, x1-first)."""
    kind, idx, J = g
    if kind == JET:
        return (kind, idx, sum(J), tuple(-j for j in J))
    return (kind, idx)


def _sorted_mono(d: Mapping[Generator, int]) -> Monomial:
    return tuple(sorted(((g, e) for g, e in d.items() if e), key=lambda ge: gen_key(ge[0])))


def _trig_reduce(d: dict) -> list[tuple[Monomial, int]]:
    """Rewrite cos powers >= 2 via cos^2 = 1 - sin^2."""
    heavy = [g for g, e in d.items() if g[0] == COS and e >= 2]
    if not heavy:
        return [(_sorted_mono(d), 1)]
    out: list[tuple[dict, int]] = [(dict(d), 1)]
    for g in heavy:
        s = (SIN, g[1], ())
        nxt = []
        for dd, c in out:
            e = dd[g]
            half, rem = divmod(e, 2)
            for k in range(half + 1):
                d2 = dict(dd)
                d2[g] = rem
                d2[s] = d2.get(s, 0) + 2 * k
                nxt.append((d2, c * comb(half, k) * (-1) ** k))
        out = nxt
    acc: dict[Monomial, int] = {}
    for dd, c in out:
        m = _sorted_mono(dd)
        acc[m] = acc.get(m, 0) + c
    return [(m, c) for m, c in acc.items() if c]


@lru_cache(maxsize=1 << 20)
def mono_mul(m1: Monomial, m2: Monomial) -> tuple[tuple[Monomial, int], ...]:
    if not m1:
        return ((m2, 1),)
    if not m2:
        return ((m1, 1),)
    d = dict(m1)
    for g, e in m2:
        d[g] = d.get(g, 0) + e
    return tuple(_trig_reduce(d))


def _mono_without(m: Monomial, pos: int) -> Monomial:
    """Monomial with one power of the factor at ``pos`` removed."""
    g, e = m[pos]
    if e == 1:
        return m[:pos] + m[pos + 1:]
    return m[:pos] + ((g, e - 1),) + m[pos + 1:]


@lru_cache(maxsize=1 << 20)
def mono_total_derivative(m: Monomial, axis: int, n_axes: int) -> tuple[tuple[Monomial, int], ...]:
    acc: dict[Monomial, int] = {}
    for pos, (g, e) in enumerate(m):
        kind, idx, J = g
        rest = _mono_without(m, pos)
        if kind == JET:
            dg = ((((JET, idx, increment(J, axis)), 1),), 1)
            parts = [dg]
        elif kind == COORD:
            if idx != axis:
                continue
            parts = [((), 1)]
        else:
            u_i = ((JET, idx, unit(n_axes, axis)), 1)
            if kind == SIN:
                parts = [(tuple(sorted((((COS, idx, ()), 1), u_i), key=lambda ge: gen_key(ge[0]))), 1)]
            else:
                parts = [(tuple(sorted((((SIN, idx, ()), 1), u_i), key=lambda ge: gen_key(ge[0]))), -1)]
        for dm, dc in parts:
            for pm, pc in mono_mul(rest, dm):
                acc[pm] = acc.get(pm, 0) + e * dc * pc
    return tuple((mm, c) for mm, c in acc.items() if c)


@lru_cache(maxsize=1 << 20)
def mono_partial(m: Monomial, g: Generator) -> tuple[tuple[Monomial, int], ...]:
    """Formal partial derivative of a monomial; zeroth jets see through sin/cos."""
    acc: dict[Monomial, int] = {}
    trig_chain = g[0] == JET and not any(g[2])
    for pos, (h, e) in enumerate(m):
        if h == g:
            rest = _mono_without(m, pos)
            acc[rest] = acc.get(rest, 0) + e
        elif trig_chain and h[1] == g[1] and h[0] in (SIN, COS):
            rest = _mono_without(m, pos)
            if h[0] == SIN:
                factor, sign = (((COS, h[1], ()), 1),), e
            else:
                factor, sign = (((SIN, h[1], ()), 1),), -e
            for pm, pc in mono_mul(rest, factor):
                acc[pm] = acc.get(pm, 0) + sign * pc
    return tuple((mm, c) for mm, c in acc.items() if c)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_weight(m: Monomial, n_axes: int) -> MultiIndex:
    """Per-axis derivative count; coordinates weigh -1 on their axis."""
    w = [0] * n_axes
    for (kind, idx, J), e in m:
        if kind == JET:
            for k, j in enumerate(J):
                w[k] += e * j
        elif kind == COORD:
            w[idx] -= e
    return tuple(w)


def mono_sort_key(m: Monomial) -> tuple:
    """Ascending key that lists monomials in descending graded-lex order."""
    return (-mono_degree(m), tuple((gen_key(g), -e) for g, e in m) + (((9,), 0),))


# ---------------------------------------------------------------------------
# differential polynomials


class DiffPoly:
    """Immutable exact differential polynomial in normal form."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: Context, terms: Mapping[Monomial, GaussianRational]):
        self.ctx = ctx
        self.terms = terms
        self._hash = None

    @classmethod
    def from_terms(cls, ctx: Context, terms: Mapping) -> "DiffPoly":
        """Normalizing constructor from arbitrary ``{monomial: coefficient}`` data."""
        acc: dict = {}
        for m, c in terms.items():
            c = GaussianRational.coerce(c)
            if not c:
                continue
            d: dict = {}
            for g, e in m:
                if e < 0:
                    raise ValueError("negative exponent")
                d[g] = d.get(g, 0) + e
            for mm, k in _trig_reduce(d):
                acc[mm] = acc[mm] + c * k if mm in acc else c * k
        return cls(ctx, {m: c for m, c in acc.items() if c})

    # basic protocol -------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Monomial, GaussianRational]]:
        return iter(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.ctx == other.ctx and self.terms == other.terms
        if isinstance(other, (int, GaussianRational)) or hasattr(other, "denominator"):
            return self == self.ctx.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"DiffPoly({str(self)!r})"

    def __str__(self):
        from .textio import print_expr

        return print_expr(self)

    def sorted_terms(self) -> list[tuple[Monomial, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda mc: mono_sort_key(mc[0]))

    # arithmetic -------------------------------------------------------------
    def _lift(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatch("expressions belong to different contexts")
            return other
        return self.ctx.const(other)

    def __add__(self, other):
        other = self._lift(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            if m in acc:
                s = acc[m] + c
                if s:
                    acc[m] = s
                else:
                    del acc[m]
            else:
                acc[m] = c
        return DiffPoly(self.ctx, acc)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "DiffPoly":
        c = GaussianRational.coerce(c)
        if not c:
            return self.ctx.zero()
        return DiffPoly(self.ctx, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        other = self._lift(other)
        if not self.terms or not other.terms:
            return self.ctx.zero()
        acc: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c12 = c1 * c2
                for m, k in mono_mul(m1, m2):
                    v = c12 if k == 1 else c12 * k
                    if m in acc:
                        acc[m] = acc[m] + v
                    else:
                        acc[m] = v
        return DiffPoly(self.ctx, {m: c for m, c in acc.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, DiffPoly):
            raise TypeError("division by a differential polynomial is not supported")
        return self.scale(ONE / GaussianRational.coerce(other))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = self.ctx.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # structure ----------------------------------------------------------------
    def generators(self) -> set[Generator]:
        return {g for m in self.terms for g, _ in m}

    def jets(self, field=None) -> set[tuple[int, MultiIndex]]:
        """``(field, J)`` pairs of jet generators present."""
        a = None if field is None else self.ctx.field_index(field)
        return {
            (g[1], g[2])
            for m in self.terms
            for g, _ in m
            if g[0] == JET and (a is None or g[1] == a)
        }

    def varied_jets(self, field) -> set[MultiIndex]:
        """Multi-indices J with a nonzero d/du_J; trig factors imply the zeroth jet."""
        a = self.ctx.field_index(field)
        out = set()
        for m in self.terms:
            for (kind, idx, J), _ in m:
                if idx != a:
                    continue
                if kind == JET:
                    out.add(J)
                elif kind in (SIN, COS):
                    out.add(self.ctx.zero_index())
        return out

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def coefficient(self, m: Monomial) -> GaussianRational:
        return self.terms.get(m, ZERO)

    def embed(self, ctx: Context) -> "DiffPoly":
        """Re-tag into a context that extends this one (same axes, field prefix)."""
        if ctx.axes != self.ctx.axes or ctx.fields[: self.ctx.n_fields] != self.ctx.fields:
            raise ContextMismatch("target context does not extend the source context")
        return DiffPoly(ctx, self.terms)

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)


def total_derivative(f: DiffPoly, axis) -> DiffPoly:
    """``D_{x_i} f`` including the chain rule through sin/cos."""
    ctx = f.ctx
    i = ctx.axis_index(axis)
    n = ctx.n_axes
    acc: dict = {}
    for m, c in f.terms.items():
        for dm, k in mono_total_derivative(m, i, n):
            v = c if k == 1 else c * k
            if dm in acc:
                acc[dm] = acc[dm] + v
            else:
                acc[dm] = v
    return DiffPoly(ctx, {m: c for m, c in acc.items() if c})


def total_derivative_multi(f: DiffPoly, J: MultiIndex) -> DiffPoly:
    """``D_J f``; the order in which axes are applied is irrelevant."""
    if any(j < 0 for j in J):
        raise ValueError(f"negative multi-index {J}")
    for i, j in enumerate(J):
        for _ in range(j):
            if not f.terms:
                return f
            f = total_derivative(f, i)
    return f


def partial_jet(f: DiffPoly, g: Generator) -> DiffPoly:
    """Formal partial derivative with respect to a generator."""
    acc: dict = {}
    for m, c in f.terms.items():
        for pm, k in mono_partial(m, g):
            v = c if k == 1 else c * k
            if pm in acc:
                acc[pm] = acc[pm] + v
            else:
                acc[pm] = v
    return DiffPoly(f.ctx, {m: c for m, c in acc.items() if c})


def jet_generator(ctx: Context, field, J: MultiIndex) -> Generator:
    return (JET, ctx.field_index(field), tuple(J))


def max_order(f: DiffPoly) -> int:
    return max((sum(J) for _, J in f.jets()), default=0)


def jet_profile(f: DiffPoly) -> set[tuple[int, MultiIndex]]:
    return f.jets()


def weight_classes(f: DiffPoly) -> dict[MultiIndex, DiffPoly]:
    """Split by per-axis derivative weight; every ``D_i`` maps class W into W + e_i."""
    n = f.ctx.n_axes
    parts: dict = {}
    for m, c in f.terms.items():
        parts.setdefault(mono_weight(m, n), {})[m] = c
    return {w: DiffPoly(f.ctx, t) for w, t in parts.items()}


def dot(a: Iterable[DiffPoly], b: Iterable[DiffPoly], ctx: Context) -> DiffPoly:
    out = ctx.zero()
    for x, y in zip(a, b):
        out = out + x * y
    return out
