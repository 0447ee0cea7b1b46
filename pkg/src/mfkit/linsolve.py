"""Sparse fraction-free Gauss-Jordan elimination over the integers.

Rows hold integer coefficients and a Gaussian-rational right-hand side.  The
right-hand side is cleared of denominators and carried as two extra integer
columns, so every row operation stays in ``Z``; rows are divided by their
content after each update to keep entries small.
"""

from __future__ import annotations

from math import gcd, lcm
from typing import Hashable, Iterable, Sequence

from .jetalgebra import GaussianRational

_RE, _IM = "__re__", "__im__"


def _normalize(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    return row


def solve_sparse(
    equations: Iterable[tuple[dict, GaussianRational]],
    columns: Sequence[Hashable],
) -> dict | None:
    """Solve ``sum_c a_rc x_c = b_r`` exactly.

    ``columns`` fixes the pivot preference: earlier columns become pivots
    first.  Free columns are set to zero, so the result is a basic solution.
    Returns ``{column: value}`` for the nonzero unknowns, or ``None`` when the
    system is inconsistent.
    """
    rows: list[dict] = []
    for coeffs, b in equations:
        b = GaussianRational.coerce(b)
        scale = lcm(int(b.re.denominator), int(b.im.denominator))
        row = {c: int(v) * scale for c, v in coeffs.items() if v}
        re_, im = int(b.re * scale), int(b.im * scale)
        if re_:
            row[_RE] = re_
        if im:
            row[_IM] = im
        if row:
            rows.append(_normalize(row))

    col_rows: dict = {}
    for r, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(r)

    pivot_of: dict = {}
    used: set[int] = set()
    for col in columns:
        cands = [r for r in col_rows.get(col, ()) if r not in used]
        if not cands:
            continue
        pr = min(cands, key=lambda r: (len(rows[r]), r))
        prow = rows[pr]
        p = prow[col]
        used.add(pr)
        pivot_of[col] = pr
        for r in list(col_rows.get(col, ())):
            if r == pr:
                continue
            row = rows[r]
            a = row[col]
            g = gcd(p, a)
            mp, ma = p // g, a // g
            new = {k: v * mp for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - ma * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            new = _normalize(new)
            for k in row:
                if k not in new:
                    col_rows[k].discard(r)
            for k in new:
                if k not in row:
                    col_rows.setdefault(k, set()).add(r)
            rows[r] = new

    for r, row in enumerate(rows):
        if r in used:
            continue
        if any(k not in (_RE, _IM) for k in row):
            continue
        if row.get(_RE) or row.get(_IM):
            return None

    solution = {}
    for col, r in pivot_of.items():
        row = rows[r]
        p = row[col]
        val = GaussianRational(row.get(_RE, 0), row.get(_IM, 0)) / p
        if val:
            solution[col] = val
    return solution
