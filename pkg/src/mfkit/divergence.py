"""Total-divergence membership tests and exact divergence witnesses.

Witnesses are found by undetermined coefficients.  Because ``D_i`` raises the
per-axis derivative weight of every monomial by exactly ``e_i``, the linear
system splits into one small block per weight class of ``F``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable

from .jetalgebra import (
    COORD,
    COS,
    JET,
    SIN,
    Context,
    DiffPoly,
    GaussianRational,
    MultiIndex,
    _sorted_mono,
    max_order,
    mono_sort_key,
    mono_total_derivative,
    mono_weight,
    total_derivative,
)
from .linsolve import solve_sparse
from .varcalc import VectorDensity, variational_derivative


class NotADivergence(ValueError):
    """The expression is not a total divergence over the requested axes."""


class BasisExhausted(RuntimeError):
    """A divergence exists but no witness was found within the search bounds."""


class NotExact(ValueError):
    """The expression is not a total derivative along the requested axis."""


# ---------------------------------------------------------------------------
# membership


def _off_axis_profiles(F: DiffPoly, axes: tuple[int, ...]) -> dict[int, set[MultiIndex]]:
    """Per field, the off-axis parts of the jets in ``F`` (zero on ``axes``)."""
    n = F.ctx.n_axes
    out: dict[int, set[MultiIndex]] = {}
    for a in range(F.ctx.n_fields):
        parts = set()
        for J in F.varied_jets(a):
            parts.add(tuple(0 if k in axes else J[k] for k in range(n)))
        if parts:
            out[a] = parts
    return out


def null_lagrangian_residuals(F: DiffPoly, axes=None) -> list[DiffPoly]:
    """Nonzero restricted Euler images of ``F``; empty iff ``F`` is a divergence.

    Jets that differ along axes outside ``axes`` behave as separate fields, so
    one variational derivative is taken per off-axis part.
    """
    ax = F.ctx.axis_indices(axes)
    out = []
    for a, parts in sorted(_off_axis_profiles(F, ax).items()):
        for K in sorted(parts):
            e = variational_derivative(F, a, K, ax)
            if e:
                out.append(e)
    return out


def is_null_lagrangian(F: DiffPoly, axes=None) -> bool:
    return not null_lagrangian_residuals(F, axes)


def verify_divergence(P: VectorDensity, F: DiffPoly) -> bool:
    return (P.div() - F).is_zero()


# ---------------------------------------------------------------------------
# candidate bases


@dataclass(frozen=True)
class DecompositionBasis:
    """Bounds for candidate monomials of a witness."""

    axes: tuple[int, ...]
    order_bound: int
    degree_bound: int
    fields: tuple[int, ...]
    trig_fields: tuple[int, ...]
    trig_bound: int
    coords: tuple[int, ...]


def _signature(m, off: tuple[int, ...]) -> tuple:
    """Multiset of (field, off-axis part) over jets with a nonzero off-axis part."""
    sig = []
    for (kind, idx, J), e in m:
        if kind == JET:
            K = tuple(J[k] for k in off)
            if any(K):
                sig.extend([(idx, K)] * e)
    return tuple(sorted(sig))


def _compositions(target: tuple[int, ...], parts: list, max_count: int, start: int = 0):
    """Multisets of ``parts`` (``(label, vector)``) summing exactly to ``target``."""
    if not any(target):
        yield ()
        return
    if max_count == 0:
        return
    for k in range(start, len(parts)):
        label, vec = parts[k]
        if all(v <= t for v, t in zip(vec, target)):
            rest = tuple(t - v for t, v in zip(target, vec))
            for tail in _compositions(rest, parts, max_count - 1, k):
                yield ((label, vec),) + tail


def _bounded_vectors(limit: tuple[int, ...], max_total: int):
    """All vectors ``0 <= J <= limit`` with ``|J| <= max_total``."""
    ranges = [range(min(l, max_total) + 1) for l in limit]
    for J in iproduct(*ranges):
        if sum(J) <= max_total:
            yield J


def _zeroth_factors(basis: DecompositionBasis, budget: int, n_axes: int):
    """Products of undifferentiated fields and sin/cos factors, as generator dicts."""
    zero = (0,) * n_axes
    items = [((JET, a, zero), None) for a in basis.fields]
    for a in basis.trig_fields:
        items.append(((SIN, a, ()), "trig"))
        items.append(((COS, a, ()), "cos"))

    def rec(k, left, trig_left, acc):
        if k == len(items):
            yield dict(acc)
            return
        g, tag = items[k]
        cap = left if tag is None else min(left, trig_left)
        if tag == "cos":
            cap = min(cap, 1)
        for e in range(cap + 1):
            if e:
                acc[g] = e
            yield from rec(k + 1, left - e, trig_left - (e if tag else 0), acc)
        acc.pop(g, None)

    yield from rec(0, budget, basis.trig_bound, {})


def _candidates(ctx: Context, basis: DecompositionBasis, V: MultiIndex, signatures: set) -> list:
    n = ctx.n_axes
    on = basis.axes
    off = tuple(k for k in range(n) if k not in on)
    b, d = basis.order_bound, basis.degree_bound
    out = set()
    # coordinates lower the degree under D_i, so they sit outside the degree budget
    coord_ranges = [range(d + 2) for _ in basis.coords]
    for cexp in iproduct(*coord_ranges):
        if sum(cexp) > d + 1:
            continue
        T = list(V)
        for k, e in zip(basis.coords, cexp):
            T[k] += e
        if any(t < 0 for t in T):
            continue
        T_off = tuple(T[k] for k in off)
        T_on = tuple(T[k] for k in on)
        for sig in signatures:
            tot = [0] * len(off)
            for _, K in sig:
                tot = [x + y for x, y in zip(tot, K)]
            if tuple(tot) != T_off:
                continue
            slots_budget = d - len(sig)
            if slots_budget < 0:
                continue
            # on-axis parts attached to the signature slots
            slot_choices = []
            for a, K in sig:
                room = b - sum(K)
                if room < 0:
                    break
                slot_choices.append([(a, K, J) for J in _bounded_vectors(T_on, room)])
            else:
                for slots in iproduct(*slot_choices):
                    rem = list(T_on)
                    for _, _, J in slots:
                        rem = [r - j for r, j in zip(rem, J)]
                    if any(r < 0 for r in rem):
                        continue
                    parts = []
                    for a in basis.fields:
                        for J in _bounded_vectors(tuple(rem), b):
                            if any(J):
                                parts.append((a, J))
                    parts.sort(key=lambda p: (p[0], sum(p[1]), p[1]))
                    for free in _compositions(tuple(rem), parts, slots_budget):
                        gens: dict = {}
                        for (k, e) in zip(basis.coords, cexp):
                            if e:
                                gens[(COORD, k, ())] = e
                        for a, K, J in slots:
                            full = [0] * n
                            for k, v in zip(off, K):
                                full[k] = v
                            for k, v in zip(on, J):
                                full[k] = v
                            g = (JET, a, tuple(full))
                            gens[g] = gens.get(g, 0) + 1
                        for a, J in free:
                            full = [0] * n
                            for k, v in zip(on, J):
                                full[k] = v
                            g = (JET, a, tuple(full))
                            gens[g] = gens.get(g, 0) + 1
                        left = slots_budget - len(free)
                        for z in _zeroth_factors(basis, left, n):
                            g2 = dict(gens)
                            for g, e in z.items():
                                g2[g] = g2.get(g, 0) + e
                            out.add(_sorted_mono(g2))
    return sorted(out, key=_preference)


def _preference(m) -> tuple:
    """Pivot preference: few coordinates, low order, then low degree, then monomial order."""
    order = max((sum(g[2]) for g, _ in m if g[0] == JET), default=0)
    n_coords = sum(e for g, e in m if g[0] == COORD)
    return (n_coords, order, -mono_sort_key(m)[0], mono_sort_key(m))


# ---------------------------------------------------------------------------
# decomposition


def _cap_override() -> int | None:
    raw = os.environ.get("MF_MAX_ORDER")
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"MF_MAX_ORDER must be an integer, got {raw!r}") from None


def _order_schedule(m: int, cap: int | None) -> list[int]:
    steps = [max(m - 1, 0), m, m + 1]
    if cap is not None:
        steps = [s for s in steps if s <= cap] or [cap]
        if cap > steps[-1]:
            steps.extend(range(steps[-1] + 1, cap + 1))
    out = []
    for s in steps:
        if s >= 0 and s not in out:
            out.append(s)
    return out


def _trig_count(m) -> int:
    return sum(e for (kind, _, _), e in m if kind in (SIN, COS))


def _solve_class(ctx, Fw: DiffPoly, W, basis: DecompositionBasis, signatures, needed_coords):
    n = ctx.n_axes
    columns = []
    derivs: dict = {}
    for i in basis.axes:
        V = tuple(w - (1 if k == i else 0) for k, w in enumerate(W))
        b = basis
        if i in needed_coords and i not in basis.coords:
            b = DecompositionBasis(
                basis.axes, basis.order_bound, basis.degree_bound, basis.fields,
                basis.trig_fields, basis.trig_bound, tuple(sorted(basis.coords + (i,))),
            )
        for m in _candidates(ctx, b, V, signatures):
            dm = mono_total_derivative(m, i, n)
            if not dm:
                continue
            col = (i, m)
            columns.append(col)
            derivs[col] = dm
    rows: dict = {}
    for col, dm in derivs.items():
        for mm, c in dm:
            rows.setdefault(mm, {})[col] = c
    eqs = []
    for mm in set(rows) | set(Fw.terms):
        eqs.append((rows.get(mm, {}), Fw.terms.get(mm, GaussianRational(0))))
    sol = solve_sparse(eqs, columns)
    if sol is None:
        return None
    comps: list[dict] = [dict() for _ in range(n)]
    for (i, m), v in sol.items():
        comps[i][m] = v
    return comps


def div_decompose(F: DiffPoly, axes=None, *, allow_coords: bool = False, max_order_cap: int | None = None) -> VectorDensity:
    """Return ``P`` (zero off ``axes``) with ``Div P = F`` exactly.

    Raises ``NotADivergence`` when ``F`` has a nonzero restricted Euler image
    and ``BasisExhausted`` when the escalating candidate search fails.
    """
    ctx = F.ctx
    ax = ctx.axis_indices(axes)
    if not is_null_lagrangian(F, ax):
        raise NotADivergence("expression has a nonzero Euler image")
    n = ctx.n_axes
    if not F:
        return VectorDensity(ctx)
    off = tuple(k for k in range(n) if k not in ax)
    cap = max_order_cap if max_order_cap is not None else _cap_override()
    schedule = _order_schedule(max_order(F), cap)
    fields = tuple(sorted({g[1] for g in F.generators() if g[0] != COORD}))
    trig = tuple(sorted({g[1] for g in F.generators() if g[0] in (SIN, COS)}))
    trig_bound = max((_trig_count(m) for m in F.terms), default=0)
    coords = set(g[1] for g in F.generators() if g[0] == COORD)
    if allow_coords:
        coords |= set(ax)
    coords = tuple(sorted(coords))
    degree = F.degree()

    classes: dict = {}
    for m, c in F.terms.items():
        classes.setdefault(mono_weight(m, n), {})[m] = c
    result: list[dict] = [dict() for _ in range(n)]
    for W in sorted(classes):
        Fw = DiffPoly(ctx, classes[W])
        signatures = {_signature(m, off) for m in Fw.terms}
        needed = set(ax) if not any(W[i] for i in ax) else set()
        comps = None
        for bound in schedule:
            basis = DecompositionBasis(ax, bound, degree, fields, trig, trig_bound, coords)
            comps = _solve_class(ctx, Fw, W, basis, signatures, needed)
            if comps is not None:
                break
        if comps is None:
            raise BasisExhausted(
                f"no witness for weight class {W} with order bounds {schedule}"
            )
        for i in range(n):
            for m, v in comps[i].items():
                result[i][m] = result[i].get(m, GaussianRational(0)) + v
    P = VectorDensity(ctx, [DiffPoly.from_terms(ctx, r) for r in result])
    if not verify_divergence(P, F):
        raise AssertionError("internal error: divergence witness failed verification")
    return P


def inv_total_derivative(F: DiffPoly, axis) -> DiffPoly:
    """``G`` with ``D_axis G = F``; raises ``NotExact`` otherwise."""
    ctx = F.ctx
    i = ctx.axis_index(axis)
    try:
        P = div_decompose(F, [i])
    except NotADivergence:
        raise NotExact(f"expression is not a total {ctx.axes[i]}-derivative") from None
    G = P.components[i]
    if not (total_derivative(G, i) - F).is_zero():
        raise AssertionError("internal error: antiderivative failed verification")
    return G


def align_gauge(P: VectorDensity, a, b, target: DiffPoly) -> VectorDensity:
    """Shift ``P`` by the divergence-free pair ``(-D_b H, +D_a H)`` on axes ``a, b``.

    ``H`` solves ``D_b H = P_a - target``; afterwards ``P_a = target`` while
    ``Div P`` and every other component are unchanged.
    """
    ctx = P.ctx
    ia, ib = ctx.axis_index(a), ctx.axis_index(b)
    H = inv_total_derivative(P.components[ia] - target, ib)
    out = P.replace(ia, P.components[ia] - total_derivative(H, ib))
    return out.replace(ib, out.components[ib] + total_derivative(H, ia))


def divergence_of(components: Iterable[DiffPoly], ctx: Context) -> DiffPoly:
    return VectorDensity(ctx, list(components)).div()
