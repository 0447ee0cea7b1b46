"""Command-line front end: ``mfkit <command> ...``.

Exit codes: 0 success or true verdict, 1 false verdict, 2 input error,
3 divergence witness search exhausted.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import corpus
from .divergence import BasisExhausted, NotADivergence, NotExact, div_decompose, inv_total_derivative
from .eom import EOMSystem, NonTerminating
from .jetalgebra import Context, DiffPoly, total_derivative
from .multiform import (
    KForm,
    build_multiform,
    closure_check,
    exterior_derivative,
    multiform_el_equations,
)
from .textio import (
    Document,
    DocumentError,
    ExprSyntaxError,
    dumps_document,
    form_key,
    load_document,
    parse_expr,
    print_expr,
)
from .varcalc import Characteristic, euler, helmholtz_check, symmetry_check

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3

# Noether's correspondence needs the equations of motion to have maximal rank;
# nothing here checks that.
RANK_ASSUMPTION = "maximal rank of the Euler-Lagrange system is assumed, not verified"


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# context handling

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?")
_AXIS = re.compile(r"\d*([A-Za-z]+\d*)")


def infer_context(texts, extra_axes=()) -> Context:
    """Guess a context from expression text.

    Names with a subscript, or inside ``sin``/``cos``, are fields; subscript
    pieces and bare names of the form ``x<n>`` are axes.  Numbered axes are
    filled in contiguously from ``x1``.
    """
    fields, trig, axes = [], set(), set(extra_axes)
    for text in texts:
        for m in re.finditer(r"\b(sin|cos)\s*\(\s*([A-Za-z][A-Za-z0-9]*)\s*\)", text):
            trig.add(m.group(2))
        for m in _IDENT.finditer(text):
            tok = m.group()
            start = m.start()
            if start > 0 and (text[start - 1].isalnum() or text[start - 1] == "_"):
                continue
            name, _, sub = tok.partition("_")
            if name in ("sin", "cos", "i"):
                continue
            if sub:
                for piece in re.findall(r"\d*([A-Za-z]+\d*)", sub):
                    axes.add(piece)
                if name not in fields:
                    fields.append(name)
            elif re.fullmatch(r"x\d+", name):
                axes.add(name)
            elif name not in fields:
                fields.append(name)
    for t in trig:
        if t not in fields:
            fields.append(t)
    numbered = sorted(int(a[1:]) for a in axes if re.fullmatch(r"x\d+", a))
    other = sorted(a for a in axes if not re.fullmatch(r"x\d+", a))
    axis_names = [f"x{k}" for k in range(1, (numbered[-1] if numbered else 0) + 1)] + other
    if not axis_names:
        axis_names = ["x1"]
    fields = sorted(fields)
    trig_fields = tuple(sorted(f for f in fields if f in trig))
    try:
        return Context(tuple(axis_names), tuple(fields), trig_fields)
    except ValueError as exc:
        raise InputError(f"cannot infer a context: {exc}") from None


def _split_list(value: str | None) -> list[str]:
    if not value:
        return []
    return [v for v in re.split(r"[,\s]+", value) if v]


def _load(path, kind=None) -> Document:
    try:
        return load_document(path, kind)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _is_document(arg: str) -> bool:
    return arg.endswith(".json") and Path(arg).is_file()


def _context(args, texts, extra_axes=()) -> Context:
    if getattr(args, "context", None):
        return _load(args.context, "context").value
    axes = list(extra_axes) + _split_list(getattr(args, "axes", None))
    return infer_context(texts, axes)


def _parse(text: str, ctx: Context) -> DiffPoly:
    return parse_expr(text, ctx)


# ---------------------------------------------------------------------------
# output


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)
    if getattr(args, "out", None) and "document" in payload:
        Path(args.out).write_text(payload["document"])


# ---------------------------------------------------------------------------
# commands


def cmd_euler(args) -> int:
    ctx = _context(args, [args.expr])
    L = _parse(args.expr, ctx)
    fields = [args.field] if args.field else list(ctx.fields)
    axes = _split_list(args.axes) or None
    results = {f: euler(L, f, axes) for f in fields}
    text = "\n".join(print_expr(e) if len(results) == 1 else f"{f}: {print_expr(e)}" for f, e in results.items())
    _emit(args, {"command": "euler", "result": {f: print_expr(e) for f, e in results.items()}}, text)
    return EXIT_OK


def cmd_totald(args) -> int:
    axes = _split_list(args.axes)
    if not axes:
        raise InputError("totald needs --axes (axes may repeat, e.g. x1,x1,x2)")
    ctx = _context(args, [args.expr])
    f = _parse(args.expr, ctx)
    for a in axes:
        f = total_derivative(f, a)
    _emit(args, {"command": "totald", "result": print_expr(f)}, print_expr(f))
    return EXIT_OK


def _characteristic_arg(values, ctx: Context) -> Characteristic:
    if len(values) == 1 and _is_document(values[0]):
        doc = _load(values[0], "characteristic")
        if doc.context != ctx:
            raise InputError("characteristic document has a different context")
        return doc.value
    comps = {}
    for k, v in enumerate(values):
        if "=" in v:
            name, _, expr = v.partition("=")
            comps[name.strip()] = expr
        else:
            if k >= ctx.n_fields:
                raise InputError("more characteristic components than fields")
            comps[ctx.fields[k]] = v
    for name in comps:
        if name not in ctx.fields:
            raise InputError(f"unknown field {name!r} in characteristic")
    return Characteristic.of(ctx, comps)


def _strip_names(values):
    return [v.partition("=")[2] if "=" in v and not _is_document(v) else v for v in values]


def _lagrangian_and_context(args, others=(), extra_axes=()):
    """The Lagrangian (expression or document) and its context."""
    if _is_document(args.lagrangian):
        doc = _load(args.lagrangian, "lagrangian")
        return doc.value, doc.context
    texts = [args.lagrangian] + [t for t in _strip_names(others) if not _is_document(t)]
    ctx = _context(args, texts, extra_axes)
    return _parse(args.lagrangian, ctx), ctx


def cmd_symcheck(args) -> int:
    L, ctx = _lagrangian_and_context(args, args.characteristic)
    Q = _characteristic_arg(args.characteristic, ctx)
    axes = _split_list(args.axes) or None
    res = symmetry_check(Q, L, axes)
    payload = {
        "command": "symcheck",
        "is_symmetry": res.is_symmetry,
        "status": res.status,
        "assumptions": [RANK_ASSUMPTION],
    }
    lines = [f"symmetry: {'true' if res.is_symmetry else 'false'} ({res.status})"]
    if res.certificate is not None:
        comps = [print_expr(c) for c in res.certificate.components]
        payload["certificate"] = comps
        lines.append("certificate: (" + ", ".join(comps) + ")")
    if res.residual:
        payload["residual"] = [print_expr(r) for r in res.residual]
        lines.append("euler residual: " + "; ".join(payload["residual"]))
    lines.append(f"assumption: {RANK_ASSUMPTION}")
    _emit(args, payload, "\n".join(lines))
    if not res.is_symmetry:
        return EXIT_FALSE
    return EXIT_EXHAUSTED if res.status == "basis-exhausted" else EXIT_OK


def cmd_divdecomp(args) -> int:
    ctx = _context(args, [args.expr])
    F = _parse(args.expr, ctx)
    axes = ctx.axis_indices(_split_list(args.axes) or None)
    P = div_decompose(F, axes, allow_coords=args.coords)
    comps = [print_expr(P.components[i]) for i in axes]
    text = "(" + ", ".join(comps) + ")"
    _emit(args, {"command": "divdecomp", "axes": [ctx.axes[i] for i in axes], "result": comps}, text)
    return EXIT_OK


def cmd_invd(args) -> int:
    axis = args.axis or (_split_list(args.axes)[0] if args.axes else None)
    if axis is None:
        raise InputError("invd needs --axis")
    ctx = _context(args, [args.expr], [axis])
    G = inv_total_derivative(_parse(args.expr, ctx), axis)
    _emit(args, {"command": "invd", "result": print_expr(G)}, print_expr(G))
    return EXIT_OK


def cmd_helmholtz(args) -> int:
    ctx = _context(args, args.exprs)
    F = [_parse(t, ctx) for t in args.exprs]
    if len(F) != ctx.n_fields:
        raise InputError(f"helmholtz needs one expression per field ({', '.join(ctx.fields)})")
    ok = helmholtz_check(F)
    _emit(args, {"command": "helmholtz", "self_adjoint": ok}, "true" if ok else "false")
    return EXIT_OK if ok else EXIT_FALSE


def _load_eom(path, ctx: Context) -> EOMSystem:
    doc = _load(path, "eom")
    if doc.context != ctx:
        raise InputError("EOM document has a different context")
    return doc.value


def cmd_reduce(args) -> int:
    if not args.eom:
        raise InputError("reduce needs --eom FILE")
    doc = _load(args.eom, "eom")
    system: EOMSystem = doc.value
    r = system.reduce(_parse(args.expr, doc.context))
    _emit(args, {"command": "reduce", "result": print_expr(r)}, print_expr(r))
    return EXIT_OK


def _form_text(form: KForm) -> list[tuple[str, str]]:
    return [(form_key(k, form.ctx), print_expr(v)) for k, v in form.items()]


def cmd_multiform(args) -> int:
    if args.action == "build":
        L, ctx = _lagrangian_and_context(args, args.characteristic, [args.new_axis])
        Q = _characteristic_arg(args.characteristic, ctx)
        axes = _split_list(args.axes) or None
        res = build_multiform(L, Q, args.new_axis, axes)
        doc = dumps_document(res.form)
        payload = {
            "command": "multiform build",
            "P": [print_expr(res.P.components[i]) for i in res.axes],
            "coefficients": dict(_form_text(res.form)),
            "document": doc,
        }
        if args.out:
            Path(args.out).write_text(doc)
            text = f"wrote {args.out}"
        else:
            text = doc.rstrip()
        if args.json:
            print(json.dumps(payload, indent=2))
        else:
            print(text)
        return EXIT_OK
    doc = _load(args.file, "multiform")
    form: KForm = doc.value
    if args.action == "d":
        dL = exterior_derivative(form)
        items = _form_text(dL)
        text = "\n".join(f"({k}): {v}" for k, v in items) or "0"
        _emit(args, {"command": "multiform d", "coefficients": dict(items)}, text)
        return EXIT_OK
    if not args.eom:
        raise InputError("multiform check needs --eom FILE")
    system = _load_eom(args.eom, doc.context)
    ctx = doc.context
    commuting = system.critical_residuals()
    closure = closure_check(form, system)
    residuals = []
    for tup, what, expr in closure.residuals:
        label = "dL" if what == "dL" else "d/d" + print_expr(ctx.jet(what[1], what[2]))
        residuals.append({"tuple": form_key(tup, ctx), "check": label, "residual": print_expr(expr)})
    for e in multiform_el_equations(form, direct=args.direct):
        r = system.reduce(e.expr)
        if r:
            residuals.append(
                {
                    "tuple": form_key(e.tuple, ctx),
                    "check": f"EL[{e.criterion}] " + print_expr(ctx.jet(e.field, e.I)),
                    "residual": print_expr(r),
                }
            )
    ok = closure.closed and closure.double_zero and not residuals and not commuting
    payload = {
        "command": "multiform check",
        "commuting": not commuting,
        "confluence_order": system.confluence_order,
        "closed": closure.closed,
        "double_zero": closure.double_zero,
        "residuals": residuals,
        "status": "pass" if ok else "fail",
    }
    lines = [
        f"commuting: {'true' if not commuting else 'false'} (checked up to order {system.confluence_order})",
        f"closed: {'true' if closure.closed else 'false'}",
        f"double_zero: {'true' if closure.double_zero else 'false'}",
    ]
    for r in residuals:
        lines.append(f"residual ({r['tuple']}) {r['check']}: {r['residual']}")
    if ok:
        lines.append("all residuals 0")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FALSE


def cmd_corpus(args) -> int:
    names = list(corpus.CASES) if args.case == "all" else [args.case]
    for n in names:
        if n not in corpus.CASES:
            raise InputError(f"unknown corpus case {n!r}; choose from {', '.join(corpus.CASES)} or all")
    reports = [corpus.run_case(n) for n in names]
    if args.json:
        print(corpus.reports_json(reports))
    else:
        print("\n".join(r.render() for r in reports))
    return max(r.exit_code() for r in reports)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--context", metavar="FILE", help="context document (otherwise inferred)")
    common.add_argument("--axes", metavar="LIST", help="comma-separated axis names")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", metavar="FILE", help="write the resulting document here")

    parser = argparse.ArgumentParser(prog="mfkit", description="Exact variational calculus and Lagrangian multiforms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("euler", parents=[common], help="Euler operator")
    p.add_argument("expr")
    p.add_argument("--field")
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("totald", parents=[common], help="total derivative along --axes in turn")
    p.add_argument("expr")
    p.set_defaults(func=cmd_totald)

    p = sub.add_parser("symcheck", parents=[common], help="variational symmetry test")
    p.add_argument("lagrangian", help="expression or lagrangian document")
    p.add_argument("characteristic", nargs="+", help="components (field=expr) or a characteristic document")
    p.set_defaults(func=cmd_symcheck)

    p = sub.add_parser("divdecomp", parents=[common], help="divergence witness")
    p.add_argument("expr")
    p.add_argument("--coords", action="store_true", help="allow explicit coordinates in the witness")
    p.set_defaults(func=cmd_divdecomp)

    p = sub.add_parser("invd", parents=[common], help="inverse total derivative")
    p.add_argument("expr")
    p.add_argument("--axis")
    p.set_defaults(func=cmd_invd)

    p = sub.add_parser("helmholtz", parents=[common], help="self-adjointness of the Frechet derivative")
    p.add_argument("exprs", nargs="+")
    p.set_defaults(func=cmd_helmholtz)

    p = sub.add_parser("reduce", parents=[common], help="normal form modulo equations of motion")
    p.add_argument("expr")
    p.add_argument("--eom", metavar="FILE")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("multiform", help="build, differentiate or check a multiform")
    msub = p.add_subparsers(dest="action", required=True)
    b = msub.add_parser("build", parents=[common])
    b.add_argument("lagrangian")
    b.add_argument("characteristic", nargs="+")
    b.add_argument("--new-axis", required=True)
    b.set_defaults(func=cmd_multiform)
    d = msub.add_parser("d", parents=[common])
    d.add_argument("file")
    d.set_defaults(func=cmd_multiform)
    c = msub.add_parser("check", parents=[common])
    c.add_argument("file")
    c.add_argument("--eom", metavar="FILE")
    c.add_argument("--direct", action="store_true", help="also list the direct jet-derivative criterion")
    c.set_defaults(func=cmd_multiform)

    p = sub.add_parser("corpus", help="bundled reference systems")
    csub = p.add_subparsers(dest="action", required=True)
    r = csub.add_parser("run")
    r.add_argument("case", help="sg, akns3, akns4, kp, zero-demo or all")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except BasisExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (NotADivergence, NotExact) as exc:
        print(f"false: {exc}", file=sys.stderr)
        return EXIT_FALSE
    except (InputError, ExprSyntaxError, DocumentError, NonTerminating, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
