import json

import pytest

from mfkit.corpus import KP, KP_CONTEXT, SG_CONTEXT
from mfkit.eom import EOMRule, EOMSystem
from mfkit.jetalgebra import Context, GaussianRational
from mfkit.multiform import KForm
from mfkit.textio import (
    DocumentError,
    ExprSyntaxError,
    dumps_document,
    load_document,
    loads_document,
    parse_expr,
    parse_form_key,
    print_expr,
    save_document,
)
from mfkit.varcalc import Characteristic

SG = Context(("x1", "x2", "x3"), ("u",), ("u",))
AK = Context(("x1", "x2", "x3"), ("q", "r"))


class TestParse:
    def test_sg_density(self):
        L = parse_expr("1/2*u_x1*u_x2 - cos(u)", SG)
        assert len(L) == 2
        assert print_expr(L) == "1/2*u_x1*u_x2 - cos(u)"

    def test_gaussian_coefficient(self):
        f = parse_expr("i/2*q_x1*r_x1", AK)
        ((_, c),) = f.sorted_terms()
        assert c == GaussianRational(0, "1/2")

    def test_unknown_axis(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("u_x9", SG)

    def test_unknown_name(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("w + u", SG)

    def test_syntax_error_position(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("u_x1 *\n  + u", SG)
        assert info.value.line == 2
        assert info.value.column == 3

    def test_implicit_multiplication_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("2 u", SG)

    def test_counted_subscripts(self):
        assert parse_expr("u_3x1x2", SG) == parse_expr("u_x1x1x1x2", SG)

    def test_trig_needs_trig_field(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("sin(q)", AK)

    def test_parenthesized_power(self):
        assert parse_expr("(u + 1)^2", SG) == parse_expr("u^2 + 2*u + 1", SG)


class TestPrint:
    def test_zero(self):
        assert print_expr(SG.zero()) == "0"

    def test_canonical_order(self):
        assert print_expr(parse_expr("u_x2*u_x1", SG)) == "u_x1*u_x2"

    def test_euler_output(self):
        from mfkit.varcalc import euler

        L = parse_expr("1/2*u_x1*u_x2 - cos(u)", SG)
        assert print_expr(euler(L, "u", "x1,x2")) == "sin(u) - u_x1x2"

    def test_complex_coefficients(self):
        f = parse_expr("(1 + 2*i)*q - i*r", AK)
        assert parse_expr(print_expr(f), AK) == f


def _sg_form():
    p = SG.parse
    return KForm(SG, 2, {(0, 1): p("1/2*u_x1*u_x2 - cos(u)"), (1, 2): p("u_x1x1*u_x1x2"), (0, 2): p("1/8*u_x1^4")})


class TestDocuments:
    def test_multiform_round_trip(self, tmp_path):
        form = _sg_form()
        path = tmp_path / "sg.json"
        save_document(path, form)
        doc = load_document(path, "multiform")
        assert doc.kind == "multiform"
        assert doc.context == SG
        assert doc.value == form

    def test_non_increasing_key_rejected(self):
        body = json.loads(dumps_document(_sg_form()))
        body["coefficients"]["2 1"] = "u"
        with pytest.raises(DocumentError):
            loads_document(json.dumps(body))

    def test_compact_key(self):
        assert parse_form_key("123", KP_CONTEXT) == (0, 1, 2)
        with pytest.raises(DocumentError):
            parse_form_key("21", KP_CONTEXT)

    def test_duplicate_key_rejected(self):
        text = (
            '{"kind": "multiform", "context": {"axes": ["x1", "x2"], "fields": ["u"]},'
            ' "degree": 1, "coefficients": {"1": "u", "1": "u_x1"}}'
        )
        with pytest.raises(DocumentError):
            loads_document(text)

    def test_schema_violation(self):
        with pytest.raises(DocumentError):
            loads_document('{"kind": "lagrangian", "context": {"axes": ["x1"], "fields": ["u"]}}')
        with pytest.raises(DocumentError):
            loads_document('{"kind": "nonsense"}')

    def test_bad_expression_reports_location(self):
        text = '{"kind": "lagrangian", "context": {"axes": ["x1"], "fields": ["u"]}, "expr": "u_x1 +"}'
        with pytest.raises(DocumentError, match="expr"):
            loads_document(text)

    def test_kp_cyclic_labels_normalized(self):
        p = KP_CONTEXT.parse
        form = KForm.from_labels(
            KP_CONTEXT, 3, {"123": p(KP["L123"]), "234": p(KP["L234"]), "341": p(KP["L341"]), "412": p(KP["L412"])}
        )
        body = json.loads(dumps_document(form))
        assert sorted(body["coefficients"]) == ["1 2 3", "1 2 4", "1 3 4", "2 3 4"]
        # (341) and (412) are even permutations of (134) and (124)
        assert body["coefficients"]["1 3 4"] == print_expr(p(KP["L341"]))
        assert body["coefficients"]["1 2 4"] == print_expr(p(KP["L412"]))
        assert loads_document(json.dumps(body)).value == form

    def test_characteristic_round_trip(self):
        Q = Characteristic.of(KP_CONTEXT, [KP["Q_x1"]], depth=(1, 0, 0, 0))
        back = loads_document(dumps_document(Q), "characteristic").value
        assert back == Q
        assert back.depth == (1, 0, 0, 0)

    def test_eom_round_trip(self):
        rules = (
            EOMRule(0, (1, 1, 0), SG_CONTEXT.parse("sin(u)")),
            EOMRule(0, (0, 0, 1), SG_CONTEXT.parse("u_3x1 + 1/2*u_x1^3")),
        )
        system = EOMSystem(SG_CONTEXT, rules, confluence_order=5)
        back = loads_document(dumps_document(system), "eom").value
        assert back.rules == system.rules
        assert back.confluence_order == 5

    def test_context_and_lagrangian(self):
        doc = loads_document(
            '{"kind": "lagrangian", "context": {"axes": ["x1", "x2"], "fields": ["u"], "trig_fields": ["u"]},'
            ' "expr": "1/2*u_x1*u_x2 - cos(u)"}'
        )
        assert print_expr(doc.value) == "1/2*u_x1*u_x2 - cos(u)"
        ctx_doc = loads_document(dumps_document(doc.context))
        assert ctx_doc.kind == "context"
        assert ctx_doc.value == doc.context

    def test_wrong_kind_requested(self):
        with pytest.raises(DocumentError):
            loads_document(dumps_document(_sg_form()), "eom")
