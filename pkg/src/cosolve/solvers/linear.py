"""Exact feasibility of linear systems by Fourier-Motzkin elimination."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from ..terms import App, Num, Term, Var

ROW_CAP = 2000


def linear_form(t: Term) -> Optional[tuple]:
    """``(coeffs, const)`` with ``t = sum coeffs[v]*v + const``, or ``None`` if non-linear."""
    if isinstance(t, Num):
        return {}, t.value
    if isinstance(t, Var):
        return {t: Fraction(1)}, Fraction(0)
    if not isinstance(t, App):
        return None
    args = [linear_form(a) for a in t.args]
    if any(a is None for a in args):
        return None
    op = t.symbol
    if op == "neg":
        (c, k), = args
        return _scale(c, k, Fraction(-1))
    (ca, ka), (cb, kb) = args
    if op in ("+", "-"):
        sign = 1 if op == "+" else -1
        out = dict(ca)
        for v, q in cb.items():
            out[v] = out.get(v, 0) + sign * q
        return {v: q for v, q in out.items() if q}, ka + sign * kb
    if op == "*":
        if not ca:
            return _scale(cb, kb, ka)
        if not cb:
            return _scale(ca, ka, kb)
        return None
    if op == "/":
        if cb or kb == 0:
            return None
        return _scale(ca, ka, 1 / kb)
    return None


def _scale(c: dict, k: Fraction, q: Fraction) -> tuple:
    return {v: x * q for v, x in c.items() if x * q}, k * q


def rows_of(rel: str, lhs: Term, rhs: Term) -> Optional[list]:
    """Rows ``(coeffs, bound, strict)`` meaning ``sum coeffs*v < bound`` (or ``<=``)."""
    lf, rf = linear_form(lhs), linear_form(rhs)
    if lf is None or rf is None:
        return None
    coeffs = dict(lf[0])
    for v, q in rf[0].items():
        coeffs[v] = coeffs.get(v, 0) - q
    coeffs = {v: q for v, q in coeffs.items() if q}
    bound = rf[1] - lf[1]
    if rel == "=":
        neg = {v: -q for v, q in coeffs.items()}
        return [(coeffs, bound, False), (neg, -bound, False)]
    if rel in ("<=", "<"):
        return [(coeffs, bound, rel == "<")]
    if rel in (">=", ">"):
        return [({v: -q for v, q in coeffs.items()}, -bound, rel == ">")]
    return None


def _normal(row: tuple) -> tuple:
    """Scale so the first coefficient has magnitude one; used to drop duplicates."""
    coeffs, bound, strict = row
    if not coeffs:
        return row
    first = min(coeffs, key=lambda v: v.id)
    s = abs(coeffs[first])
    return {v: q / s for v, q in coeffs.items()}, bound / s, strict


def _tightest(rows: Iterable[tuple]) -> dict:
    """Keep one row per coefficient vector: the one with the smallest bound."""
    best: dict = {}
    for row in rows:
        row = _normal(row)
        key = frozenset(row[0].items())
        old = best.get(key)
        if old is None or row[1] < old[1] or (row[1] == old[1] and row[2] and not old[2]):
            best[key] = row
    return best


def feasible(rows: Iterable[tuple], cap: int = ROW_CAP) -> Optional[bool]:
    """Decide ``exists x. all rows``; ``None`` if elimination grows past ``cap`` rows."""
    rows = list(_tightest(rows).values())
    work = 0
    while True:
        for coeffs, bound, strict in rows:
            if not coeffs and (bound < 0 or (strict and bound == 0)):
                return False
        rows = [r for r in rows if r[0]]
        if not rows:
            return True
        # eliminate the variable that creates the fewest combinations
        counts: dict = {}
        for coeffs, _, _ in rows:
            for v, q in coeffs.items():
                pos, neg = counts.get(v, (0, 0))
                counts[v] = (pos + (q > 0), neg + (q < 0))
        x = min(counts, key=lambda v: (counts[v][0] * counts[v][1] - sum(counts[v]), v.id))
        pos = [r for r in rows if r[0].get(x, 0) > 0]
        neg = [r for r in rows if r[0].get(x, 0) < 0]
        work += len(pos) * len(neg)
        if work > 10 * cap:
            return None
        out = [r for r in rows if x not in r[0]]
        for pc, pb, ps in pos:
            for nc, nb, ns in neg:
                a, b = pc[x], -nc[x]
                coeffs = {}
                for v in set(pc) | set(nc):
                    q = pc.get(v, 0) / a + nc.get(v, 0) / b
                    if q and v != x:
                        coeffs[v] = q
                out.append((coeffs, pb / a + nb / b, ps or ns))
        rows = list(_tightest(out).values())
        if len(rows) > cap:
            return None
