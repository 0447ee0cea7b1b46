import pytest

from mfkit.jetalgebra import (
    COS,
    JET,
    SIN,
    Context,
    ContextMismatch,
    GaussianRational,
    max_order,
    partial_jet,
    total_derivative,
    total_derivative_multi,
)

CTX = Context(("x1", "x2"), ("u",), ("u",))
CTX_UV = Context(("x1", "x2", "x3"), ("u", "v"))


def P(text, ctx=CTX):
    return ctx.parse(text)


class TestCoefficients:
    def test_gaussian_arithmetic(self):
        a = GaussianRational(1, 2)
        b = GaussianRational("1/3", -1)
        assert a * b == GaussianRational("7/3", "-1/3")
        assert (a / a) == GaussianRational(1)
        assert a.conjugate() == GaussianRational(1, -2)

    def test_exact_rationals(self):
        third = GaussianRational("1/3")
        assert third + third + third == GaussianRational(1)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            GaussianRational(1) / GaussianRational(0)


class TestRing:
    def test_additive_inverse(self):
        u = CTX.jet("u")
        assert (u + (-u)).is_zero()

    def test_square(self):
        ux = CTX.jet("u", ("x1",))
        assert ux * ux == P("u_x1^2")

    def test_cos_squared_rewritten(self):
        c = CTX.cos("u")
        assert c * c == P("1 - sin(u)^2")

    def test_context_mismatch(self):
        with pytest.raises(ContextMismatch):
            CTX.jet("u") + CTX_UV.jet("u")

    def test_power_and_scalar(self):
        f = P("u + u_x1")
        assert f**2 == P("u^2 + 2*u*u_x1 + u_x1^2")
        assert f * 3 == P("3*u + 3*u_x1")
        assert f**0 == CTX.const(1)

    def test_cos_only_for_trig_fields(self):
        with pytest.raises(ValueError):
            CTX_UV.cos("u")


class TestTotalDerivative:
    def test_jet(self):
        assert total_derivative(P("u"), "x1") == P("u_x1")

    def test_leibniz(self):
        assert total_derivative(P("u*u_x2"), "x1") == P("u_x1*u_x2 + u*u_x1x2")

    def test_chain_rule_trig(self):
        assert total_derivative(P("sin(u)"), "x1") == P("cos(u)*u_x1")
        assert total_derivative(P("cos(u)"), "x2") == P("-sin(u)*u_x2")

    def test_coordinates(self):
        assert total_derivative(P("x1*u"), "x1") == P("u + x1*u_x1")
        assert total_derivative(P("x2"), "x1").is_zero()

    def test_multi(self):
        assert total_derivative_multi(P("u"), (1, 1)) == P("u_x1x2")
        f = P("u^2*u_x2")
        assert total_derivative_multi(f, (0, 0)) == f
        assert total_derivative_multi(P("u^2"), (2, 0)) == P("2*u_x1^2 + 2*u*u_x1x1")


class TestPartialJet:
    def test_square(self):
        assert partial_jet(P("u_x1^2"), (JET, 0, (1, 0))) == P("2*u_x1")

    def test_product(self):
        assert partial_jet(P("u*u_x1x2"), (JET, 0, (1, 1))) == P("u")

    def test_trig_through_zeroth_jet(self):
        assert partial_jet(P("-cos(u)"), (JET, 0, (0, 0))) == P("sin(u)")
        assert partial_jet(P("u*sin(u)"), (JET, 0, (0, 0))) == P("sin(u) + u*cos(u)")

    def test_trig_generators_directly(self):
        f = P("sin(u)^2*cos(u)")
        assert partial_jet(f, (SIN, 0, ())) == P("2*sin(u)*cos(u)")
        assert partial_jet(f, (COS, 0, ())) == P("sin(u)^2")


class TestOrder:
    @pytest.mark.parametrize(
        "text,ctx,order",
        [("u_x1x1x1", CTX, 3), ("cos(u)", CTX, 0), ("1/2*u_x1x1*v_x1x3", CTX_UV, 2), ("7", CTX, 0)],
    )
    def test_max_order(self, text, ctx, order):
        assert max_order(P(text, ctx)) == order

    def test_degree_counts_trig(self):
        assert P("sin(u)*u_x1^2").degree() == 3


class TestContext:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            Context(("x1", "x1"), ("u",))
        with pytest.raises(ValueError):
            Context(("x1",), ("u", "u"))

    def test_reserved_names(self):
        with pytest.raises(ValueError):
            Context(("x1",), ("i",))

    def test_trig_subset(self):
        with pytest.raises(ValueError):
            Context(("x1",), ("u",), ("v",))

    def test_extend_fields(self):
        big = CTX.extend_fields(["w"])
        assert big.fields == ("u", "w")
        assert P("u_x1").embed(big) == big.parse("u_x1")

    def test_equality_is_structural(self):
        assert P("u_x2*u_x1") == P("u_x1*u_x2")
        assert hash(P("u_x2*u_x1")) == hash(P("u_x1*u_x2"))
