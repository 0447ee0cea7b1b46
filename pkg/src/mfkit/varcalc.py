"""Euler operators, prolongations, Noether currents and Frechet derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .jetalgebra import (
    JET,
    Context,
    ContextMismatch,
    DiffPoly,
    MultiIndex,
    mi_le,
    mi_sub,
    partial_jet,
    total_derivative,
    total_derivative_multi,
)


@dataclass(frozen=True)
class Characteristic:
    """Characteristic ``Q = (Q_1, ..., Q_q)`` of an evolutionary vector field.

    When ``depth`` is set, ``components`` hold ``D_depth Q`` rather than ``Q``
    itself.  Such a characteristic is non-local but can still act on any
    expression whose jets all dominate ``depth``.
    """

    ctx: Context
    components: tuple[DiffPoly, ...]
    depth: MultiIndex | None = None

    def __post_init__(self):
        if len(self.components) != self.ctx.n_fields:
            raise ValueError("a characteristic needs one component per field")
        for c in self.components:
            if c.ctx != self.ctx:
                raise ContextMismatch("characteristic component from another context")
        if self.depth is not None:
            d = tuple(self.depth)
            if len(d) != self.ctx.n_axes or any(j < 0 for j in d):
                raise ValueError(f"malformed depth {d}")
            object.__setattr__(self, "depth", None if not any(d) else d)

    @classmethod
    def of(cls, ctx: Context, components: Mapping | Sequence, depth=None) -> "Characteristic":
        if isinstance(components, Mapping):
            comps = [ctx.zero()] * ctx.n_fields
            for name, value in components.items():
                comps[ctx.field_index(name)] = value if isinstance(value, DiffPoly) else ctx.parse(value)
            components = comps
        else:
            components = [c if isinstance(c, DiffPoly) else ctx.parse(c) for c in components]
        return cls(ctx, tuple(components), depth)

    def __getitem__(self, field) -> DiffPoly:
        return self.components[self.ctx.field_index(field)]

    def is_local(self) -> bool:
        return self.depth is None

    def derivative(self, field: int, J: MultiIndex) -> DiffPoly:
        """``D_J Q_field``; for a non-local characteristic ``J`` must dominate the depth."""
        comp = self.components[field]
        if self.depth is not None:
            if not mi_le(self.depth, J):
                raise ValueError(f"non-local characteristic cannot produce D_{J} Q")
            J = mi_sub(J, self.depth)
        return total_derivative_multi(comp, J)

    def __neg__(self):
        return Characteristic(self.ctx, tuple(-c for c in self.components), self.depth)


@dataclass(frozen=True)
class GeneralizedVectorField:
    """``sum xi_i d/dx_i + sum phi_a d/du^a`` with jet-dependent coefficients."""

    ctx: Context
    xi: tuple[DiffPoly, ...]
    phi: tuple[DiffPoly, ...]


class VectorDensity:
    """A tuple ``(P_1, ..., P_N)`` indexed by axis; missing entries are zero."""

    __slots__ = ("ctx", "components")

    def __init__(self, ctx: Context, components: Mapping | Sequence | None = None):
        comps = [ctx.zero()] * ctx.n_axes
        if isinstance(components, Mapping):
            for axis, value in components.items():
                comps[ctx.axis_index(axis)] = value
        elif components is not None:
            if len(components) != ctx.n_axes:
                raise ValueError("one component per axis expected")
            comps = list(components)
        for c in comps:
            if c.ctx != ctx:
                raise ContextMismatch("vector density component from another context")
        self.ctx = ctx
        self.components = tuple(comps)

    def __getitem__(self, axis) -> DiffPoly:
        return self.components[self.ctx.axis_index(axis)]

    def replace(self, axis, value: DiffPoly) -> "VectorDensity":
        comps = list(self.components)
        comps[self.ctx.axis_index(axis)] = value
        return VectorDensity(self.ctx, comps)

    def div(self) -> DiffPoly:
        out = self.ctx.zero()
        for i, c in enumerate(self.components):
            if c:
                out = out + total_derivative(c, i)
        return out

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.components) if c)

    def __add__(self, other: "VectorDensity"):
        return VectorDensity(self.ctx, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorDensity"):
        return VectorDensity(self.ctx, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorDensity(self.ctx, [-a for a in self.components])

    def __eq__(self, other):
        return isinstance(other, VectorDensity) and self.components == other.components

    def __repr__(self):
        return "VectorDensity(" + ", ".join(str(c) for c in self.components) + ")"


def _zero_jet(ctx: Context, a: int):
    return (JET, a, ctx.zero_index())


def variational_derivative(L: DiffPoly, field, I: MultiIndex | None = None, axes=None) -> DiffPoly:
    """Restricted variational derivative ``sum_J (-D)_J dL/du_{IJ}``, J over ``axes``.

    Zero whenever a component of ``I`` is negative.
    """
    ctx = L.ctx
    a = ctx.field_index(field)
    ax = set(ctx.axis_indices(axes))
    if I is None:
        I = ctx.zero_index()
    I = tuple(I)
    if any(j < 0 for j in I):
        return ctx.zero()
    off = [k for k in range(ctx.n_axes) if k not in ax]
    out = ctx.zero()
    for K in sorted(L.varied_jets(a)):
        if not mi_le(I, K):
            continue
        J = mi_sub(K, I)
        if any(J[k] for k in off):
            continue
        term = total_derivative_multi(partial_jet(L, (JET, a, K)), J)
        out = out - term if sum(J) % 2 else out + term
    return out


def euler(L: DiffPoly, field, axes=None) -> DiffPoly:
    """Euler operator ``E_field(L)``; jets along axes outside ``axes`` are parameters."""
    return variational_derivative(L, field, None, axes)


def euler_vector(L: DiffPoly, axes=None) -> tuple[DiffPoly, ...]:
    return tuple(euler(L, a, axes) for a in range(L.ctx.n_fields))


def prolong_apply(Q: Characteristic, f: DiffPoly, modulo_divergence: bool = False) -> DiffPoly:
    """``pr v_Q (f) = sum_{a,J} D_J Q_a * df/du^a_J``.

    For a non-local ``Q`` (``depth`` set) a jet ``u_J`` with ``J`` not above the
    depth can only be handled up to a total divergence: if ``df/du_J = D_depth W``
    for a local ``W``, the term is replaced by ``(-1)^|depth| D_J(D_depth Q) * W``,
    which differs from it by a total derivative.  This is done only when
    ``modulo_divergence`` is true; the result is then a local representative
    of ``pr v_Q (f)`` modulo divergences, suitable for Euler-operator tests.
    """
    if Q.ctx != f.ctx:
        raise ContextMismatch("characteristic and expression contexts differ")
    ctx = f.ctx
    out = ctx.zero()
    for a in range(ctx.n_fields):
        if not Q.components[a]:
            continue
        for J in sorted(f.varied_jets(a)):
            W = partial_jet(f, (JET, a, J))
            if Q.depth is None or mi_le(Q.depth, J):
                out = out + Q.derivative(a, J) * W
                continue
            if not modulo_divergence:
                raise ValueError(
                    "non-local characteristic cannot act on a jet below its depth; "
                    "pass modulo_divergence=True for a representative modulo divergences"
                )
            from .divergence import inv_total_derivative

            for k, d in enumerate(Q.depth):
                for _ in range(d):
                    W = inv_total_derivative(W, k)
            term = total_derivative_multi(Q.components[a], J) * W
            out = out - term if sum(Q.depth) % 2 else out + term
    return out


def evolutionary_representative(v: GeneralizedVectorField) -> Characteristic:
    """``Q_a = phi_a - sum_i xi_i u^a_{x_i}``."""
    ctx = v.ctx
    comps = []
    for a in range(ctx.n_fields):
        q = v.phi[a]
        for i, xi in enumerate(v.xi):
            if xi:
                q = q - xi * ctx.jet(a, tuple(1 if k == i else 0 for k in range(ctx.n_axes)))
        comps.append(q)
    return Characteristic(ctx, tuple(comps))


def ibp_reduce(Q: Characteristic, L: DiffPoly, axes=None) -> tuple[DiffPoly, VectorDensity]:
    """Split ``pr v_Q(L) = core + Div(boundary)`` by repeated integration by parts.

    Each term ``D_J Q_a * W`` is peeled along the lowest axis of ``axes`` that
    ``J`` involves: ``D_{Ji} Q * W = D_i(D_J Q * W) - D_J Q * D_i W``.  When all
    jets of ``L`` lie along ``axes`` the core is ``Q . E(L)``.
    """
    ctx = L.ctx
    ax = ctx.axis_indices(axes)
    axset = set(ax)
    pending: dict[tuple[int, MultiIndex], DiffPoly] = {}
    for a in range(ctx.n_fields):
        if not Q.components[a]:
            continue
        for J in L.varied_jets(a):
            pending[(a, J)] = partial_jet(L, (JET, a, J))
    boundary = [ctx.zero()] * ctx.n_axes
    core = ctx.zero()
    while pending:
        key = max(pending, key=lambda aj: (sum(aj[1][k] for k in axset), aj[0], aj[1]))
        a, J = key
        W = pending.pop(key)
        if not W:
            continue
        peel = next((i for i in ax if J[i] > 0), None)
        if peel is None:
            core = core + Q.derivative(a, J) * W
            continue
        lower = tuple(j - 1 if k == peel else j for k, j in enumerate(J))
        boundary[peel] = boundary[peel] + Q.derivative(a, lower) * W
        dW = total_derivative(W, peel)
        pending[(a, lower)] = pending.get((a, lower), ctx.zero()) - dW
    return core, VectorDensity(ctx, boundary)


@dataclass
class SymmetryResult:
    is_symmetry: bool
    certificate: VectorDensity | None = None
    status: str = "ok"  # "ok", "not-symmetry", "basis-exhausted", "skipped", "nonlocal"
    residual: tuple[DiffPoly, ...] = ()


def symmetry_check(Q: Characteristic, L: DiffPoly, axes=None, certificate: bool = True) -> SymmetryResult:
    """Decide whether ``v_Q`` is a variational symmetry of ``L``.

    The verdict comes from Euler annihilation of ``pr v_Q(L)``; a witness ``B``
    with ``Div B = pr v_Q(L)`` is searched for separately.
    """
    from .divergence import BasisExhausted, div_decompose, null_lagrangian_residuals

    F = prolong_apply(Q, L, modulo_divergence=not Q.is_local())
    residual = null_lagrangian_residuals(F, axes)
    if residual:
        return SymmetryResult(False, None, "not-symmetry", tuple(residual))
    if not Q.is_local():
        return SymmetryResult(True, None, "nonlocal")
    if not certificate:
        return SymmetryResult(True, None, "skipped")
    try:
        B = div_decompose(F, axes)
    except BasisExhausted:
        return SymmetryResult(True, None, "basis-exhausted")
    return SymmetryResult(True, B, "ok")


def _as_polys(ctx: Context, R) -> tuple[DiffPoly, ...]:
    if isinstance(R, Characteristic):
        return R.components
    return tuple(R)


def frechet(F: Sequence[DiffPoly], R) -> list[DiffPoly]:
    """Frechet derivative ``D_F(R)_k = sum_{a,J} dF_k/du^a_J * D_J R_a``."""
    out = []
    for Fk in F:
        ctx = Fk.ctx
        Rs = _as_polys(ctx, R)
        acc = ctx.zero()
        for a, Ra in enumerate(Rs):
            if not Ra:
                continue
            for J in sorted(Fk.varied_jets(a)):
                acc = acc + partial_jet(Fk, (JET, a, J)) * total_derivative_multi(Ra, J)
        out.append(acc)
    return out


def frechet_adjoint(F: Sequence[DiffPoly], R) -> list[DiffPoly]:
    """Adjoint ``D_F^*(R)_a = sum_{k,J} (-D)_J (dF_k/du^a_J * R_k)``."""
    F = list(F)
    if not F:
        return []
    ctx = F[0].ctx
    Rs = _as_polys(ctx, R)
    out = []
    for a in range(ctx.n_fields):
        acc = ctx.zero()
        for Fk, Rk in zip(F, Rs):
            if not Rk:
                continue
            for J in sorted(Fk.varied_jets(a)):
                term = total_derivative_multi(partial_jet(Fk, (JET, a, J)) * Rk, J)
                acc = acc - term if sum(J) % 2 else acc + term
        out.append(acc)
    return out


def helmholtz_check(F: Sequence[DiffPoly]) -> bool:
    """True iff the Frechet derivative of ``F`` is self-adjoint.

    ``F`` must have one entry per field.  Fresh placeholder fields are appended
    to the context to play the role of the arbitrary argument ``R``.
    """
    F = list(F)
    ctx = F[0].ctx
    if len(F) != ctx.n_fields:
        raise ValueError("Helmholtz check needs one expression per field")
    names = ctx.fresh_field_names(ctx.n_fields, stem="w")
    big = ctx.extend_fields(names)
    Fe = [f.embed(big) for f in F] + [big.zero()] * len(names)
    R = [big.jet(n) for n in names] + [big.zero()] * len(names)
    lhs = frechet(Fe[: ctx.n_fields], R)
    rhs = frechet_adjoint(Fe[: ctx.n_fields], R)
    return all((x - y).is_zero() for x, y in zip(lhs, rhs[: ctx.n_fields]))
