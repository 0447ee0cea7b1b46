"""Equations of motion as an oriented rewrite system on jets."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

from .jetalgebra import (
    JET,
    ONE,
    Context,
    ContextMismatch,
    DiffPoly,
    MultiIndex,
    mi_le,
    mi_sub,
    total_derivative,
    total_derivative_multi,
)


class NonTerminating(RuntimeError):
    """The rewrite system loops back to a jet it is still reducing."""


@dataclass(frozen=True)
class EOMRule:
    """``u^field_lead -> rhs``; every jet ``u^field_J`` with ``J >= lead`` is rewritten."""

    field: int
    lead: MultiIndex
    rhs: DiffPoly

    def __post_init__(self):
        ctx = self.rhs.ctx
        lead = tuple(self.lead)
        object.__setattr__(self, "lead", lead)
        a = ctx.field_index(self.field)
        object.__setattr__(self, "field", a)
        if len(lead) != ctx.n_axes or any(j < 0 for j in lead):
            raise ValueError(f"malformed lead multi-index {lead}")
        if not any(lead) and ctx.admits_trig(a):
            raise ValueError("a field with sin/cos generators cannot have an undifferentiated lead")
        for J in self.rhs.varied_jets(a):
            if mi_le(lead, J):
                raise ValueError("rule right-hand side contains a jet the rule itself rewrites")

    def matches(self, a: int, J: MultiIndex) -> bool:
        return a == self.field and mi_le(self.lead, J)

    def describe(self, ctx: Context) -> str:
        return f"{ctx.fields[self.field]}{_subscript(ctx, self.lead)} -> {self.rhs}"


def _subscript(ctx: Context, J: MultiIndex) -> str:
    if not any(J):
        return ""
    parts = []
    for name, j in zip(ctx.axes, J):
        if j == 1:
            parts.append(name)
        elif j > 1:
            parts.append(f"{j}{name}")
    return "_" + "".join(parts)


@dataclass
class EOMSystem:
    """A list of rewrite rules with memoized jet normal forms.

    ``confluence_order`` bounds the jets examined by :meth:`commuting_check`;
    by default it is the highest lead order plus two, raised if needed to
    cover the least common multiple of any two leads of the same field.
    """

    ctx: Context
    rules: tuple[EOMRule, ...]
    confluence_order: int | None = None
    _jet_nf: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _mono_nf: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _busy: set = field(default_factory=set, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.rules = tuple(self.rules)
        seen = set()
        for r in self.rules:
            if r.rhs.ctx != self.ctx:
                raise ContextMismatch("rule from another context")
            key = (r.field, r.lead)
            if key in seen:
                raise ValueError(f"duplicate lead {self.ctx.fields[r.field]}{_subscript(self.ctx, r.lead)}")
            seen.add(key)
        if self.confluence_order is None:
            order = max((sum(r.lead) for r in self.rules), default=0) + 2
            for r1 in self.rules:
                for r2 in self.rules:
                    if r1.field == r2.field:
                        order = max(order, sum(max(x, y) for x, y in zip(r1.lead, r2.lead)))
            self.confluence_order = order

    # reduction ------------------------------------------------------------
    def rule_for(self, a: int, J: MultiIndex) -> EOMRule | None:
        for r in self.rules:
            if r.matches(a, J):
                return r
        return None

    def jet_normal_form(self, a: int, J: MultiIndex) -> DiffPoly | None:
        """Normal form of ``u^a_J`` or ``None`` when the jet is irreducible."""
        key = (a, J)
        if key in self._jet_nf:
            return self._jet_nf[key]
        r = self.rule_for(a, J)
        if r is None:
            self._jet_nf[key] = None
            return None
        if key in self._busy:
            raise NonTerminating(f"rewriting {self.ctx.fields[a]}{_subscript(self.ctx, J)} loops")
        self._busy.add(key)
        try:
            if J == r.lead:
                out = self.reduce(r.rhs)
            else:
                # step down along the first axis that keeps the jet above the lead
                k = next(k for k in range(len(J)) if J[k] > r.lead[k])
                lower = tuple(j - 1 if i == k else j for i, j in enumerate(J))
                out = self.reduce(total_derivative(self.jet_normal_form(a, lower), k))
        finally:
            self._busy.discard(key)
        self._jet_nf[key] = out
        return out

    def _reduce_mono(self, m) -> DiffPoly | None:
        if m in self._mono_nf:
            return self._mono_nf[m]
        out = None
        rest = []
        for g, e in m:
            nf = self.jet_normal_form(g[1], g[2]) if g[0] == JET else None
            if nf is None:
                rest.append((g, e))
                continue
            out = nf**e if out is None else out * nf**e
        if out is not None:
            out = out * DiffPoly(self.ctx, {tuple(rest): ONE})
        self._mono_nf[m] = out
        return out

    def reduce(self, f: DiffPoly) -> DiffPoly:
        """Rewrite every reducible jet until none is left."""
        if f.ctx != self.ctx:
            raise ContextMismatch("expression and rule system contexts differ")
        acc: dict = {}
        for m, c in f.terms.items():
            nf = self._reduce_mono(m)
            if nf is None:
                acc[m] = acc[m] + c if m in acc else c
                continue
            for mm, cc in nf.terms.items():
                v = cc * c
                acc[mm] = acc[mm] + v if mm in acc else v
        return DiffPoly(self.ctx, {m: c for m, c in acc.items() if c})

    def is_reduced(self, f: DiffPoly) -> bool:
        return all(self.rule_for(a, J) is None for a, J in f.jets())

    # confluence -----------------------------------------------------------
    def critical_residuals(self) -> list[tuple[EOMRule, MultiIndex, DiffPoly]]:
        """Jets where applying a rule directly disagrees with the normal form.

        Every jet dominating a lead, up to ``confluence_order``, is rewritten
        by differentiating that rule directly and compared with the memoized
        normal form.  This covers the padded least common multiples of every
        pair of leads as well as derivative-path ambiguities of a single rule.
        """
        out = []
        n = self.ctx.n_axes
        for r in self.rules:
            budget = self.confluence_order - sum(r.lead)
            if budget < 0:
                continue
            for M in iproduct(*[range(budget + 1)] * n):
                if sum(M) > budget:
                    continue
                J = tuple(x + y for x, y in zip(r.lead, M))
                if not any(M) and self.rule_for(r.field, J) is r:
                    continue
                direct = self.reduce(total_derivative_multi(r.rhs, mi_sub(J, r.lead)))
                nf = self.jet_normal_form(r.field, J)
                diff = direct - nf
                if diff:
                    out.append((r, J, diff))
        return out

    def commuting_check(self) -> bool:
        return not self.critical_residuals()


def reduce_mod_eom(f: DiffPoly, system: EOMSystem) -> DiffPoly:
    return system.reduce(f)


def commuting_check(system: EOMSystem) -> bool:
    return system.commuting_check()
