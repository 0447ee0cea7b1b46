"""Randomized identities: each suite runs at least 100 examples."""

from __future__ import annotations

from itertools import combinations, product

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mfkit.divergence import div_decompose, inv_total_derivative, verify_divergence
from mfkit.jetalgebra import JET, Context, partial_jet, total_derivative
from mfkit.multiform import KForm, exterior_derivative
from mfkit.textio import dumps_document, loads_document, parse_expr, print_expr
from mfkit.varcalc import (
    Characteristic,
    VectorDensity,
    euler,
    euler_vector,
    frechet_adjoint,
    helmholtz_check,
    ibp_reduce,
    prolong_apply,
    variational_derivative,
)
from strategies import CONTEXTS, CTX2, context_and_polys, multi_indices, polys

PROPS = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
CTX4 = Context(("x1", "x2", "x3", "x4"), ("u",))


def _dot(ctx, a, b):
    out = ctx.zero()
    for x, y in zip(a, b):
        out = out + x * y
    return out


# ---------------------------------------------------------------------------
# variational calculus


@PROPS
@given(context_and_polys(1), st.data())
def test_euler_annihilates_total_divergences(cp, data):
    ctx, f = cp
    i = data.draw(st.integers(0, ctx.n_axes - 1))
    g = total_derivative(f, i)
    for a in ctx.fields:
        assert euler(g, a).is_zero()


@PROPS
@given(st.sampled_from(CONTEXTS).flatmap(lambda c: st.tuples(st.just(c), polys(c), st.lists(polys(c, max_terms=2), min_size=c.n_fields, max_size=c.n_fields))))
def test_ibp_reduce_exactness(args):
    ctx, L, comps = args
    Q = Characteristic(ctx, tuple(comps))
    core, boundary = ibp_reduce(Q, L)
    assert (prolong_apply(Q, L) - core - boundary.div()).is_zero()
    assert (core - _dot(ctx, comps, euler_vector(L))).is_zero()


@PROPS
@given(context_and_polys(1))
def test_helmholtz_self_adjointness_of_euler(cp):
    ctx, L = cp
    assert helmholtz_check(list(euler_vector(L)))


@PROPS
@given(st.sampled_from(CONTEXTS).flatmap(
    lambda c: st.tuples(
        st.just(c),
        st.lists(polys(c, max_terms=2), min_size=c.n_fields, max_size=c.n_fields),
        st.lists(polys(c, max_terms=2), min_size=c.n_fields, max_size=c.n_fields),
    )
))
def test_frechet_identity(args):
    ctx, P, Q = args
    lhs = euler_vector(_dot(ctx, P, Q))
    rhs = [x + y for x, y in zip(frechet_adjoint(P, Q), frechet_adjoint(Q, P))]
    assert all((x - y).is_zero() for x, y in zip(lhs, rhs))


@st.composite
def _lemma_case(draw):
    ctx = draw(st.sampled_from([c for c in CONTEXTS if c.n_axes == 3]))
    L = draw(polys(ctx))
    k = draw(st.integers(1, 2))
    axes = draw(st.sampled_from(list(combinations(range(3), k))))
    return ctx, L, axes


@PROPS
@given(_lemma_case())
def test_partial_derivative_from_restricted_variational_derivatives(case):
    ctx, L, axes = case
    for field in range(ctx.n_fields):
        for I in product(range(4), repeat=3):
            if sum(I) > 3:
                continue
            rhs = ctx.zero()
            for bits in product((0, 1), repeat=len(axes)):
                J = [0, 0, 0]
                for ax, b in zip(axes, bits):
                    J[ax] = b
                IJ = tuple(x + y for x, y in zip(I, J))
                term = variational_derivative(L, field, IJ, axes)
                for ax, b in zip(axes, bits):
                    if b:
                        term = total_derivative(term, ax)
                rhs = rhs + term
            assert (partial_jet(L, (JET, field, I)) - rhs).is_zero()


# ---------------------------------------------------------------------------
# jet algebra


@PROPS
@given(context_and_polys(1), st.data())
def test_total_derivatives_commute(cp, data):
    ctx, f = cp
    i = data.draw(st.integers(0, ctx.n_axes - 1))
    j = data.draw(st.integers(0, ctx.n_axes - 1))
    assert total_derivative(total_derivative(f, i), j) == total_derivative(total_derivative(f, j), i)


@PROPS
@given(context_and_polys(2), st.data())
def test_leibniz_rule(cp, data):
    ctx, f, g = cp
    i = data.draw(st.integers(0, ctx.n_axes - 1))
    assert total_derivative(f * g, i) == total_derivative(f, i) * g + f * total_derivative(g, i)


@PROPS
@given(context_and_polys(1))
def test_normal_form_idempotent(cp):
    ctx, f = cp
    assert (f - f).is_zero()
    assert f * 1 == f
    assert f + ctx.zero() == f


@PROPS
@given(context_and_polys(1), st.data())
def test_partial_total_commutation(cp, data):
    ctx, f = cp
    i = data.draw(st.integers(0, ctx.n_axes - 1))
    a = data.draw(st.integers(0, ctx.n_fields - 1))
    J = data.draw(multi_indices(ctx.n_axes))
    lhs = partial_jet(total_derivative(f, i), (JET, a, J))
    rhs = total_derivative(partial_jet(f, (JET, a, J)), i)
    if J[i] > 0:
        lower = tuple(j - 1 if k == i else j for k, j in enumerate(J))
        rhs = rhs + partial_jet(f, (JET, a, lower))
    assert lhs == rhs


# ---------------------------------------------------------------------------
# exterior derivative


@st.composite
def _kforms(draw):
    ctx = draw(st.sampled_from([CONTEXTS[1], CTX4]))
    k = draw(st.integers(1, 2))
    keys = list(combinations(range(ctx.n_axes), k))
    chosen = draw(st.lists(st.sampled_from(keys), min_size=1, max_size=len(keys), unique=True))
    return KForm(ctx, k, {key: draw(polys(ctx, max_terms=2)) for key in chosen})


@PROPS
@given(_kforms())
def test_d_squared_vanishes(form):
    dd = exterior_derivative(exterior_derivative(form))
    assert all(c.is_zero() for _, c in dd.items())


# ---------------------------------------------------------------------------
# divergences


@PROPS
@given(st.sampled_from(CONTEXTS).flatmap(
    lambda c: st.tuples(st.just(c), st.lists(polys(c, max_terms=2), min_size=c.n_axes, max_size=c.n_axes))
))
def test_div_decompose_round_trip(args):
    ctx, G = args
    F = VectorDensity(ctx, G).div()
    P = div_decompose(F)
    assert verify_divergence(P, F)
    assert (P.div() - F).is_zero()


@PROPS
@given(st.sampled_from(CONTEXTS).flatmap(lambda c: st.tuples(st.just(c), polys(c), st.integers(0, c.n_axes - 1))))
def test_inverse_total_derivative_round_trip(args):
    ctx, G, axis = args
    F = total_derivative(G, axis)
    H = inv_total_derivative(F, axis)
    assert total_derivative(H, axis) == F


# ---------------------------------------------------------------------------
# text


@settings(max_examples=200, deadline=None)
@given(context_and_polys(1))
def test_parse_print_round_trip(cp):
    ctx, f = cp
    text = print_expr(f)
    g = parse_expr(text, ctx)
    assert g == f
    assert print_expr(g) == text


@PROPS
@given(_kforms())
def test_multiform_document_round_trip(form):
    doc = loads_document(dumps_document(form), "multiform")
    assert doc.value == form


def test_trig_identity_normalizes():
    f = CTX2.parse("sin(u)^2 + cos(u)^2 - 1")
    assert f.is_zero()
