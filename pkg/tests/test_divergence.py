import pytest

from mfkit.corpus import SG, SG_CONTEXT
from mfkit.divergence import (
    BasisExhausted,
    NotADivergence,
    NotExact,
    align_gauge,
    div_decompose,
    divergence_of,
    inv_total_derivative,
    is_null_lagrangian,
    verify_divergence,
)
from mfkit.jetalgebra import Context, total_derivative
from mfkit.varcalc import VectorDensity

C2 = Context(("x1", "x2"), ("u",))
C1 = Context(("x1",), ("u",))
p = C2.parse
s = SG_CONTEXT.parse


class TestNullLagrangian:
    def test_constructed_divergence(self):
        assert is_null_lagrangian(p("u_x1*u_x2 + u*u_x1x2"))

    def test_square(self):
        assert not is_null_lagrangian(p("u_x1^2"))

    def test_sg_product(self):
        assert is_null_lagrangian(s(SG["product"]))

    def test_restricted_axes(self):
        # D_x2(u_x1) is a divergence in (x1, x2) but not along x1 alone
        F = p("u_x1x2*u_x1")
        assert is_null_lagrangian(F, "x1,x2")
        assert not is_null_lagrangian(F, "x1")


class TestVerify:
    def test_simple(self):
        assert verify_divergence(VectorDensity(C2, [p("u*u_x2"), C2.zero()]), p("u_x1*u_x2 + u*u_x1x2"))

    def test_zero_against_u(self):
        assert not verify_divergence(VectorDensity(C2), p("u"))

    def test_printed_sg_witness(self):
        P = VectorDensity(SG_CONTEXT, [s(SG["L23"]), s(SG["L31"]), s(SG["L12"])])
        assert verify_divergence(P, s(SG["product"]))


class TestDecompose:
    def test_constructed(self):
        F = p("u_x1*u_x2 + u*u_x1x2")
        P = div_decompose(F)
        assert P.div() == F

    def test_one_axis(self):
        P = div_decompose(C1.parse("u_x1*u"))
        assert P["x1"] == C1.parse("1/2*u^2")

    def test_constant_needs_coordinates(self):
        P = div_decompose(C1.parse("1"))
        assert P["x1"] == C1.parse("x1")

    def test_sg_product(self):
        F = s(SG["product"])
        P = div_decompose(F)
        assert verify_divergence(P, F)
        # P_3 agrees with L12 modulo a null Lagrangian in (x1, x2)
        assert is_null_lagrangian(P["x3"] - s(SG["L12"]), "x1,x2")

    def test_gauge_insensitivity(self):
        F = s(SG["product"])
        P1 = div_decompose(F)
        P2 = div_decompose(F, max_order_cap=4)
        assert verify_divergence(P1, F) and verify_divergence(P2, F)
        assert (P1 - P2).div().is_zero()

    def test_not_a_divergence(self):
        with pytest.raises(NotADivergence):
            div_decompose(p("u_x1^2"))

    def test_exhausted_is_distinct(self):
        # the divergence of a second-order witness cannot be found with order-0 candidates
        F = total_derivative(p("u_x1x1*u_x2x2"), "x1")
        with pytest.raises(BasisExhausted):
            div_decompose(F, max_order_cap=0)

    def test_env_cap(self, monkeypatch):
        F = total_derivative(p("u_x1x1*u_x2x2"), "x1")
        monkeypatch.setenv("MF_MAX_ORDER", "0")
        with pytest.raises(BasisExhausted):
            div_decompose(F)
        monkeypatch.setenv("MF_MAX_ORDER", "")
        assert div_decompose(F).div() == F

    def test_trig(self):
        C = Context(("x1", "x2"), ("u",), ("u",))
        F = total_derivative(C.parse("sin(u)*u_x2"), "x1") + total_derivative(C.parse("cos(u)"), "x2")
        assert div_decompose(F).div() == F

    def test_coordinates_kept_when_present(self):
        F = total_derivative(p("x1*u_x2"), "x1")
        assert div_decompose(F).div() == F


class TestInverse:
    def test_simple(self):
        assert inv_total_derivative(p("u_x1"), "x1") == p("u")

    def test_product(self):
        assert inv_total_derivative(p("u_x1*u_x2 + u*u_x1x2"), "x1") == p("u*u_x2")

    def test_not_exact(self):
        with pytest.raises(NotExact):
            inv_total_derivative(p("u_x2"), "x1")

    def test_sine_not_exact(self):
        with pytest.raises(NotExact):
            inv_total_derivative(s("sin(u)"), "x1")


class TestGauge:
    def test_align(self):
        P = VectorDensity(C2, [p("u*u_x2"), C2.zero()])
        target = p("-u*u_x1")
        # P_2 - target = u*u_x1 = D_1(u^2/2), so the shift is possible
        Q = align_gauge(P, "x2", "x1", target)
        assert Q["x2"] == target
        assert Q.div() == P.div()

    def test_align_not_exact(self):
        P = VectorDensity(C2, [C2.zero(), p("u")])
        with pytest.raises(NotExact):
            align_gauge(P, "x2", "x1", C2.zero())

    def test_divergence_of(self):
        assert divergence_of([p("u"), p("u")], C2) == p("u_x1 + u_x2")
