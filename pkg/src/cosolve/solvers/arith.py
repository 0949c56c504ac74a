"""Exact rational arithmetic solver.

Relations are kept verbatim; every variable also carries an interval that
is narrowed by forward/backward propagation over the expression trees
(HC4-revise) until a fixpoint or the revision cap is reached.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from ..constraints import TRUE_DC, ConfigurationError, Constraint, Disjunction, Domain, Fresh, TellResult, eq
from ..terms import ARITH_OPS, App, Num, Term, Var, format_term
from .interval import FULL, INF, Interval
from .linear import feasible, rows_of

SWEEP_CAP = 1000
LINEAR_VAR_CAP = 10  # beyond this, elimination is skipped and narrowing alone decides

_SWAP = {">=": "<=", ">": "<"}


class _Empty(Exception):
    pass


@dataclass(frozen=True)
class ArithStore:
    relations: tuple = ()
    intervals: Mapping = field(default_factory=dict)

    def interval(self, v: Var) -> Interval:
        return self.intervals.get(v, FULL)

    @property
    def determined(self) -> dict:
        return {v: iv.lo for v, iv in self.intervals.items() if iv.is_point}

    def variables(self) -> frozenset:
        # every variable of a stored relation has an interval entry
        return frozenset(self.intervals)

    def lines(self) -> list:
        out = [str(r) for r in self.relations]
        for v in sorted(self.intervals, key=lambda v: (str(v), v.id)):
            iv = self.intervals[v]
            if not iv.is_full:
                out.append(f"{v} in {iv}")
        return out or ["true"]

    def __hash__(self) -> int:
        return hash((self.relations, frozenset(self.intervals.items())))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ArithStore)
            and self.relations == other.relations
            and dict(self.intervals) == dict(other.intervals)
        )


def check_expression(t: Term) -> None:
    if isinstance(t, (Var, Num)):
        return
    if isinstance(t, App) and t.symbol in ARITH_OPS:
        for a in t.args:
            check_expression(a)
        return
    raise ConfigurationError(f"not an arithmetic expression: {format_term(t)}")


def normalize(c: Constraint) -> Constraint:
    if c.rel in _SWAP:
        return Constraint(c.tag, _SWAP[c.rel], (c.args[1], c.args[0]))
    return c


# ---------------------------------------------------------------------------
# HC4-revise


def _forward(t: Term, env: dict) -> tuple:
    """Evaluate ``t`` over intervals; returns ``(interval, child nodes)``."""
    if isinstance(t, Var):
        return env.get(t, FULL), ()
    if isinstance(t, Num):
        return Interval.point(t.value), ()
    kids = tuple(_forward(a, env) for a in t.args)
    ivs = [k[0] for k in kids]
    if any(iv.is_empty for iv in ivs):
        raise _Empty
    op = t.symbol
    if op == "+":
        iv = ivs[0] + ivs[1]
    elif op == "-":
        iv = ivs[0] - ivs[1]
    elif op == "*":
        iv = ivs[0] * ivs[1]
    elif op == "/":
        iv = ivs[0] / ivs[1]
    elif op == "neg":
        iv = -ivs[0]
    else:  # pragma: no cover - guarded by check_expression
        raise ConfigurationError(op)
    if iv.is_empty:
        raise _Empty
    return iv, kids


def _quotient(r: Interval, d: Interval) -> Interval:
    """Enclosure of ``{x : x * y in r for some y in d}``."""
    if d.has_zero() and r.has_zero():
        return FULL
    return r / d


def _backward(t: Term, node: tuple, target: Interval, env: dict, changed: set) -> None:
    iv = node[0] & target
    if iv.is_empty:
        raise _Empty
    if isinstance(t, Var):
        old = env.get(t, FULL)
        new = old & iv
        if new.is_empty:
            raise _Empty
        if new != old:
            env[t] = new
            changed.add(t)
        return
    if isinstance(t, Num):
        return
    op = t.symbol
    kids = node[1]
    if op == "neg":
        _backward(t.args[0], kids[0], -iv, env, changed)
        return
    a, b = kids[0][0], kids[1][0]
    if op == "+":
        ta, tb = iv - b, iv - a
    elif op == "-":
        ta, tb = iv + b, a - iv
    elif op == "*":
        ta, tb = _quotient(iv, b), _quotient(iv, a)
    else:  # "/": a = iv * b, and b = a / iv when iv excludes 0
        ta = iv * b
        tb = FULL if iv.has_zero() else a / iv
    if ta.is_empty or tb.is_empty:
        raise _Empty
    _backward(t.args[0], kids[0], ta, env, changed)
    _backward(t.args[1], kids[1], tb, env, changed)


def revise(c: Constraint, env: dict) -> set:
    """One HC4 pass over ``c``; returns the variables whose interval shrank."""
    lhs, rhs = c.args
    ln = _forward(lhs, env)
    rn = _forward(rhs, env)
    L, R = ln[0], rn[0]
    if c.rel == "=":
        lt = rt = L & R
    elif c.rel == "<=":
        lt = Interval(-INF, R.hi, True, R.hi_open)
        rt = Interval(L.lo, INF, L.lo_open, True)
    elif c.rel == "<":
        lt = Interval(-INF, R.hi, True, True)
        rt = Interval(L.lo, INF, True, True)
    else:
        raise ConfigurationError(f"unsupported arithmetic relation: {c}")
    changed: set = set()
    _backward(lhs, ln, lt, env, changed)
    _backward(rhs, rn, rt, env, changed)
    return changed


def propagate(relations: tuple, env: dict, queue: list, cap: int) -> Optional[bool]:
    """Run revisions to a fixpoint. Returns False on failure, None when the cap is hit."""
    watch: dict = {}
    for r in relations:
        for v in r.vars():
            watch.setdefault(v, []).append(r)
    pending = list(dict.fromkeys(queue))
    queued = set(pending)
    budget = cap * max(1, len(relations))
    while pending:
        if budget <= 0:
            return None
        budget -= 1
        r = pending.pop(0)
        queued.discard(r)
        try:
            changed = revise(r, env)
        except _Empty:
            return False
        for v in changed:
            for r2 in watch.get(v, ()):
                if r2 not in queued:
                    pending.append(r2)
                    queued.add(r2)
    return True


def tell_a(c: Constraint, store: ArithStore, cap: int = SWEEP_CAP) -> TellResult:
    if c.tag is not Domain.ARITH or c.rel not in ("=", "<=", "<", ">=", ">"):
        raise ConfigurationError(f"not an arithmetic constraint: {c}")
    for a in c.args:
        check_expression(a)
    c = normalize(c)
    if c in store.relations:
        return TellResult.ok(store)
    relations = store.relations + (c,)
    env = dict(store.intervals)
    for v in sorted(c.vars(), key=lambda v: v.id):
        env.setdefault(v, FULL)
    status = propagate(relations, env, [c], cap)
    if status is False:
        return TellResult.fail(store)
    if status is None:
        return TellResult.ok(store, Disjunction.conj([c]))
    if linear_check(relations, env, c) is False:
        return TellResult.fail(store)
    return TellResult.ok(ArithStore(relations, env))


def _component(relations: tuple, seed: frozenset, limit: int) -> Optional[list]:
    """Relations connected to ``seed`` through shared variables; ``None`` past ``limit`` variables."""
    by_var: dict = {}
    for r in relations:
        for v in r.vars():
            by_var.setdefault(v, []).append(r)
    seen_vars, todo = set(seed), list(seed)
    comp: dict = {}
    while todo:
        v = todo.pop()
        for r in by_var.get(v, ()):
            if r in comp:
                continue
            comp[r] = None
            for w in r.vars():
                if w not in seen_vars:
                    seen_vars.add(w)
                    todo.append(w)
                    if len(seen_vars) > limit:
                        return None
    return list(comp)


@lru_cache(maxsize=4096)
def _rows(c: Constraint):
    rr = rows_of(c.rel, *c.args)
    return None if rr is None else tuple(rr)


def linear_check(relations: tuple, env: dict, c: Constraint) -> Optional[bool]:
    """Exact feasibility of the linear relations connected to ``c`` plus the current bounds.

    Interval narrowing alone cannot refute every infeasible linear system.
    Returns ``None`` when there is nothing to decide or elimination is too large.
    """
    comp = _component(relations, c.vars(), LINEAR_VAR_CAP)
    if comp is None:
        return None
    rows = []
    vs: set = set()
    for r in comp:
        rr = _rows(r)
        if rr is not None:
            rows.extend(rr)
            vs |= r.vars()
    if not any(len(coeffs) > 1 for coeffs, _, _ in rows):
        return None
    for v in vs:
        iv = env.get(v, FULL)
        if iv.lo != -INF:
            rows.append(({v: Fraction(-1)}, -iv.lo, iv.lo_open))
        if iv.hi != INF:
            rows.append(({v: Fraction(1)}, iv.hi, iv.hi_open))
    return feasible(rows)


# ---------------------------------------------------------------------------
# projection


def _fd_bounds(v: Var, iv: Interval) -> list:
    out = []
    if iv.lo != -INF:
        lo = math.floor(iv.lo) + 1 if iv.lo_open else math.ceil(iv.lo)
        out.append(Constraint(Domain.FD, "<=", (Num(lo), v)))
    if iv.hi != INF:
        hi = math.ceil(iv.hi) - 1 if iv.hi_open else math.floor(iv.hi)
        out.append(Constraint(Domain.FD, "<=", (v, Num(hi))))
    return out


def proj_a(vs: Iterable[Var], store: ArithStore, target: Domain) -> Disjunction:
    out = []
    for v in sorted(set(vs), key=lambda v: (str(v), v.id)):
        if v not in store.intervals:
            continue
        iv = store.intervals[v]
        if iv.is_point and (target is not Domain.FD or iv.lo.denominator == 1):
            out.append(eq(target, v, Num(iv.lo)))
        elif target is Domain.FD:
            out.extend(_fd_bounds(v, iv))
    return Disjunction.conj(out) if out else TRUE_DC


def satisfiable_point(store: ArithStore, values: Mapping) -> bool:
    """Exact check of every stored relation at a full assignment."""
    return all(holds(r, values) for r in store.relations)


def evaluate(t: Term, values: Mapping) -> Optional[Fraction]:
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        return Fraction(values[t])
    xs = [evaluate(a, values) for a in t.args]
    if any(x is None for x in xs):
        return None
    op = t.symbol
    if op == "+":
        return xs[0] + xs[1]
    if op == "-":
        return xs[0] - xs[1]
    if op == "*":
        return xs[0] * xs[1]
    if op == "/":
        return None if xs[1] == 0 else xs[0] / xs[1]
    return -xs[0]


def holds(c: Constraint, values: Mapping) -> bool:
    a, b = (evaluate(t, values) for t in c.args)
    if a is None or b is None:
        return False
    return {"=": a == b, "<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[c.rel]


class ArithSolver:
    tag = Domain.ARITH

    def __init__(self, cap: int = SWEEP_CAP) -> None:
        self.cap = cap

    def empty_store(self) -> ArithStore:
        return ArithStore()

    def variables(self, store: ArithStore) -> frozenset:
        return store.variables()

    def tell(self, c: Constraint, store: ArithStore, fresh: Fresh) -> TellResult:
        return tell_a(c, store, self.cap)

    def project(self, vs: Iterable[Var], store: ArithStore, target: Domain, strong: bool = False) -> Disjunction:
        return proj_a(vs, store, target)

