"""Lagrangian k-forms: exterior derivative, construction from a symmetry,
closure checks and the multiform Euler-Lagrange equations."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product as iproduct
from typing import Mapping, Sequence

from .divergence import NotADivergence, NotExact, div_decompose, inv_total_derivative
from .eom import EOMRule, EOMSystem, commuting_check, reduce_mod_eom
from .jetalgebra import (
    JET,
    Context,
    ContextMismatch,
    DiffPoly,
    GaussianRational,
    MultiIndex,
    max_order,
    partial_jet,
    total_derivative,
    total_derivative_multi,
)
from .varcalc import Characteristic, VectorDensity, euler, ibp_reduce, variational_derivative

__all__ = [
    "BuildResult",
    "ClosureResult",
    "ELEquation",
    "EOMRule",
    "EOMSystem",
    "KForm",
    "NotASymmetry",
    "build_multiform",
    "closure_check",
    "commuting_check",
    "exterior_derivative",
    "multiform_el_equations",
    "permutation_sign",
    "reduce_mod_eom",
    "transfer_derivatives",
]


class NotASymmetry(ValueError):
    """``Q . E(L)`` is not a total divergence, so ``Q`` is not a variational symmetry."""


def permutation_sign(labels: Sequence[int]) -> int:
    """Sign of the permutation sorting ``labels``; 0 if a label repeats."""
    labels = list(labels)
    if len(set(labels)) != len(labels):
        return 0
    sign = 1
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if labels[i] > labels[j]:
                sign = -sign
    return sign


class KForm:
    """A k-form ``sum L_(i1..ik) dx_i1 ^ ... ^ dx_ik`` over increasing index tuples.

    Index tuples are 0-based axis positions.  :meth:`get` accepts any order and
    applies the antisymmetry sign.
    """

    __slots__ = ("ctx", "degree", "coefficients")

    def __init__(self, ctx: Context, degree: int, coefficients: Mapping | None = None):
        self.ctx = ctx
        self.degree = degree
        coeffs = {}
        for key, value in (coefficients or {}).items():
            labels = tuple(ctx.axis_index(a) for a in key)
            if len(labels) != degree:
                raise ValueError(f"index tuple {key} does not have {degree} entries")
            sign = permutation_sign(labels)
            if sign == 0:
                raise ValueError(f"repeated axis in index tuple {key}")
            if value.ctx != ctx:
                raise ContextMismatch("coefficient from another context")
            canon = tuple(sorted(labels))
            if canon in coeffs:
                raise ValueError(f"index tuple {key} given twice")
            if value:
                coeffs[canon] = value if sign > 0 else -value
        self.coefficients = coeffs

    @classmethod
    def from_labels(cls, ctx: Context, degree: int, coefficients: Mapping[str, DiffPoly]) -> "KForm":
        """Build from 1-based label strings such as ``"341"`` or ``"3 4 1"``."""
        coeffs = {}
        for key, value in coefficients.items():
            parts = key.split() if " " in key else list(key)
            coeffs[tuple(int(p) - 1 for p in parts)] = value
        return cls(ctx, degree, coeffs)

    def get(self, labels: Sequence) -> DiffPoly:
        labels = tuple(self.ctx.axis_index(a) for a in labels)
        sign = permutation_sign(labels)
        if sign == 0:
            return self.ctx.zero()
        c = self.coefficients.get(tuple(sorted(labels)))
        if c is None:
            return self.ctx.zero()
        return c if sign > 0 else -c

    def items(self):
        return sorted(self.coefficients.items())

    def axes_used(self) -> tuple[int, ...]:
        return tuple(sorted({a for key in self.coefficients for a in key}))

    def max_order(self) -> int:
        return max((max_order(c) for c in self.coefficients.values()), default=0)

    def __eq__(self, other):
        return (
            isinstance(other, KForm)
            and self.ctx == other.ctx
            and self.degree == other.degree
            and self.coefficients == other.coefficients
        )

    def __add__(self, other: "KForm") -> "KForm":
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, self.ctx.zero()) + v
        return KForm(self.ctx, self.degree, out)

    def __neg__(self):
        return KForm(self.ctx, self.degree, {k: -v for k, v in self.coefficients.items()})

    def __repr__(self):
        body = ", ".join(
            f"({''.join(str(a + 1) for a in k)}): {v}" for k, v in self.items()
        )
        return f"KForm[{self.degree}]({body})"


# ---------------------------------------------------------------------------
# exterior derivative


def _cyclic_rest(tup: tuple[int, ...], alpha: int) -> tuple[int, ...]:
    """``(i_{a+1} .. i_{k+1} i_1 .. i_{a-1})`` for a 0-based position ``alpha``."""
    return tup[alpha + 1:] + tup[:alpha]


def a_coefficient(L: KForm, tup: tuple[int, ...]) -> DiffPoly:
    """``A^{i1..ik+1} = sum_a (-1)^{k(a+1)} D_{i_a} L_(cyclic complement)``."""
    k = L.degree
    out = L.ctx.zero()
    for pos, i in enumerate(tup):
        c = L.get(_cyclic_rest(tup, pos))
        if not c:
            continue
        term = total_derivative(c, i)
        out = out - term if (k * (pos + 2)) % 2 else out + term
    return out


def exterior_derivative(L: KForm) -> KForm:
    ctx = L.ctx
    coeffs = {}
    for tup in combinations(range(ctx.n_axes), L.degree + 1):
        A = a_coefficient(L, tup)
        if A:
            coeffs[tup] = A
    return KForm(ctx, L.degree + 1, coeffs)


# ---------------------------------------------------------------------------
# construction from a variational symmetry


@dataclass
class BuildResult:
    form: KForm
    P: VectorDensity
    Qtilde: Characteristic
    axes: tuple[int, ...]  # base axes followed by the new axis


def _axes_of(exprs: Sequence[DiffPoly]) -> set[int]:
    out = set()
    for f in exprs:
        for g in f.generators():
            kind, idx, J = g
            if kind == JET:
                out.update(k for k, j in enumerate(J) if j)
            elif kind == 0:
                out.add(idx)
    return out


def assemble_form(ctx: Context, P: VectorDensity, local_axes: Sequence[int]) -> KForm:
    """The p-form with ``L_(i-bar) = (-1)^{ip} P_i`` in the local axis order."""
    local_axes = tuple(local_axes)
    p = len(local_axes) - 1
    coeffs = {}
    for pos, axis in enumerate(local_axes):
        i = pos + 1
        c = P.components[axis]
        if not c:
            continue
        labels = tuple(local_axes[(pos + 1 + t) % (p + 1)] for t in range(p))
        coeffs[labels] = -c if (i * p) % 2 else c
    return KForm(ctx, p, coeffs)


def build_multiform(L: DiffPoly, Q: Characteristic, new_axis, axes=None) -> BuildResult:
    """Lagrangian multiform from ``L`` and a variational symmetry ``Q``.

    ``Q`` is signed so that ``u_new + Q = 0`` is the flow.  The witness ``P``
    satisfies ``Div P = (u_new + Q) . E(L)`` with ``P_new = L`` exactly.  Base
    axes default to those on which ``L`` or ``Q`` depend.
    """
    ctx = L.ctx
    new = ctx.axis_index(new_axis)
    if axes is None:
        base = sorted(_axes_of([L, *Q.components]) - {new})
    else:
        base = list(ctx.axis_indices(axes))
    if new in base:
        raise ValueError("the new axis cannot also be a base axis")
    if not base:
        raise ValueError("no base axes to build on")
    if not Q.is_local():
        raise ValueError("construction needs a local characteristic")
    if new in _axes_of([L, *Q.components]):
        raise ValueError("L and Q must not depend on the new axis")
    E = [euler(L, a, base) for a in range(ctx.n_fields)]
    u_new = Characteristic(
        ctx, tuple(ctx.jet(a, tuple(1 if k == new else 0 for k in range(ctx.n_axes))) for a in range(ctx.n_fields))
    )
    core, B = ibp_reduce(u_new, L, base)
    QE = ctx.zero()
    for q, e in zip(Q.components, E):
        QE = QE + q * e
    try:
        C = div_decompose(QE, base)
    except NotADivergence:
        raise NotASymmetry("Q . E(L) is not a total divergence") from None
    comps = [C.components[k] - B.components[k] for k in range(ctx.n_axes)]
    comps[new] = L
    P = VectorDensity(ctx, comps)
    Qt = Characteristic(ctx, tuple(un + q for un, q in zip(u_new.components, Q.components)))
    target = ctx.zero()
    for q, e in zip(Qt.components, E):
        target = target + q * e
    if not (P.div() - target).is_zero():
        raise AssertionError("internal error: multiform witness failed verification")
    local = tuple(base) + (new,)
    return BuildResult(assemble_form(ctx, P, local), P, Qt, local)


# ---------------------------------------------------------------------------
# closure and Euler-Lagrange equations


@dataclass
class ClosureResult:
    closed: bool
    double_zero: bool
    residuals: list = field(default_factory=list)  # (tuple, "dL" | ("d/du", field, J), expr)


def closure_check(L: KForm, system: EOMSystem, tuples: Sequence[Sequence[int]] | None = None) -> ClosureResult:
    """Reduce every coefficient of ``dL`` and all its jet derivatives modulo ``system``."""
    dL = exterior_derivative(L)
    keys = [tuple(sorted(t)) for t in tuples] if tuples is not None else sorted(
        combinations(range(L.ctx.n_axes), L.degree + 1)
    )
    closed, double = True, True
    residuals = []
    for tup in keys:
        A = dL.coefficients.get(tup)
        if A is None:
            continue
        r = system.reduce(A)
        if r:
            closed = False
            residuals.append((tup, "dL", r))
        for a in range(L.ctx.n_fields):
            for J in sorted(A.varied_jets(a)):
                rr = system.reduce(partial_jet(A, (JET, a, J)))
                if rr:
                    double = False
                    residuals.append((tup, ("d/du", a, J), rr))
    return ClosureResult(closed, closed and double, residuals)


@dataclass
class ELEquation:
    tuple: tuple[int, ...]
    field: int
    I: MultiIndex
    expr: DiffPoly
    criterion: str = "variational"  # or "direct"


def _multi_indices(n: int, max_total: int):
    for J in iproduct(*[range(max_total + 1)] * n):
        if sum(J) <= max_total:
            yield J


def multiform_el_equations(L: KForm, direct: bool = False, axes=None, nonzero_only: bool = False) -> list[ELEquation]:
    """Multiform Euler-Lagrange expressions for every increasing (k+1)-tuple.

    For each tuple, field and multi-index ``I`` with ``|I| <= n + 1`` this is
    ``sum_a (-1)^{a k} dL_(a-bar)/du_{I minus i_a}`` with the restricted
    variational derivative over the remaining axes.  With ``direct`` the
    jet derivatives ``dA/du_I`` of the ``dL`` coefficients are listed as well.
    """
    ctx = L.ctx
    k = L.degree
    n = L.max_order()
    ax = ctx.axis_indices(axes)
    out = []
    for tup in combinations(ax, k + 1):
        A = a_coefficient(L, tup) if direct else None
        for a in range(ctx.n_fields):
            for I in _multi_indices(ctx.n_axes, n + 1):
                expr = ctx.zero()
                for pos, i in enumerate(tup):
                    c = L.get(_cyclic_rest(tup, pos))
                    if not c or I[i] == 0:
                        continue
                    I_less = tuple(v - 1 if t == i else v for t, v in enumerate(I))
                    rest_axes = [t for t in tup if t != i]
                    vd = variational_derivative(c, a, I_less, rest_axes)
                    expr = expr - vd if (k * (pos + 1)) % 2 else expr + vd
                if expr or not nonzero_only:
                    out.append(ELEquation(tup, a, I, expr))
                if direct:
                    d = partial_jet(A, (JET, a, I))
                    if d or not nonzero_only:
                        out.append(ELEquation(tup, a, I, d, "direct"))
    return out


# ---------------------------------------------------------------------------
# moving derivatives between the two factors


def _ibp_boundary(A: DiffPoly, B: DiffPoly, J: MultiIndex) -> VectorDensity:
    """``C`` with ``D_J A * B = (-1)^{|J|} A * D_J B + Div C``."""
    ctx = A.ctx
    comps = [ctx.zero()] * ctx.n_axes
    cur_J = list(J)
    Bcur = B
    sign = 1
    for i in range(ctx.n_axes):
        while cur_J[i] > 0:
            cur_J[i] -= 1
            lower = total_derivative_multi(A, tuple(cur_J))
            piece = lower * Bcur
            comps[i] = comps[i] + piece if sign > 0 else comps[i] - piece
            Bcur = total_derivative(Bcur, i)
            sign = -sign
    return VectorDensity(ctx, comps)


def transfer_derivatives(
    Qt: Characteristic,
    E: Sequence[DiffPoly],
    transfers: Sequence[tuple],
    protected_axes=(),
):
    """Move ``D_{J_k}`` from ``E_k`` onto ``Qt_k``.

    Returns ``(Qt', E', C)`` with ``Qt'_k = (-1)^{|J_k|} D_{J_k} Qt_k / a_k``,
    ``E'_k = a_k D_{J_k}^{-1} E_k`` and ``sum Qt' E' = sum Qt E + Div C``.
    ``C`` is ``None`` when ``Qt`` is non-local.  ``protected_axes`` lists axes
    along which no ``J_k`` may differentiate.
    """
    ctx = Qt.ctx
    protected = set(ctx.axis_indices(protected_axes)) if protected_axes else set()
    if len(transfers) != ctx.n_fields or len(E) != ctx.n_fields:
        raise ValueError("one (a, J) pair and one expression per field expected")
    Qn, En = [], []
    boundary = VectorDensity(ctx) if Qt.is_local() else None
    for a, ((coef, J), Ek) in enumerate(zip(transfers, E)):
        coef = GaussianRational.coerce(coef)
        if not coef:
            raise ValueError("transfer coefficients must be nonzero")
        J = tuple(J)
        if any(J[t] for t in protected):
            raise ValueError(f"multi-index {J} differentiates along a protected axis")
        G = Ek
        for i, j in enumerate(J):
            for _ in range(j):
                try:
                    G = inv_total_derivative(G, i)
                except NotExact:
                    raise NotExact(
                        f"component {ctx.fields[a]} is not a total derivative along {ctx.axes[i]}"
                    ) from None
        dQ = Qt.derivative(a, J) if Qt.depth is None or _dominates(J, Qt.depth) else None
        if dQ is None:
            raise ValueError("non-local characteristic needs J to dominate its depth")
        factor = (GaussianRational(1) / coef) * (-1 if sum(J) % 2 else 1)
        Qn.append(dQ.scale(factor))
        En.append(G.scale(coef))
        if boundary is not None:
            C = _ibp_boundary(Qt.components[a], G, J)
            if sum(J) % 2:
                C = -C
            boundary = boundary + C
    return Qn, En, boundary


def _dominates(J, depth) -> bool:
    return all(j >= d for j, d in zip(J, depth))
