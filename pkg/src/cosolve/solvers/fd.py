"""The finite-domain solver over integer variables.

The store keeps an explicit sorted value tuple per alias class, so an
equality between two variables is remembered rather than just pruned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from ..constraints import TRUE_DC, ConfigurationError, Constraint, Disjunction, Domain, Fresh, TellResult, eq
from ..terms import Num, Term, Var

DEFAULT_STRONG_CAP = 10_000

_FLIP = {"<=": ">=", "<": ">", ">=": "<=", ">": "<"}


@dataclass(frozen=True)
class FDStore:
    """Domains keyed by alias representative plus the alias forest."""

    domains: Mapping = field(default_factory=dict)  # representative -> tuple of ints
    parent: Mapping = field(default_factory=dict)  # var -> var, only for non-representatives

    def find(self, v: Var) -> Var:
        while v in self.parent:
            v = self.parent[v]
        return v

    def domain(self, v: Var) -> Optional[tuple]:
        return self.domains.get(self.find(v))

    def variables(self) -> frozenset:
        out = set(self.domains)
        for a, b in self.parent.items():
            out.add(a)
            out.add(b)
        return frozenset(out)

    def domain_vars(self) -> frozenset:
        return frozenset(v for v in self.variables() if self.domain(v) is not None)

    def lines(self) -> list:
        out = []
        for v in sorted(self.variables(), key=lambda v: (str(v), v.id)):
            d = self.domain(v)
            rep = self.find(v)
            if d is not None:
                out.append(f"{v} in {format_domain(d)}")
            elif rep != v:
                out.append(f"{v} = {rep}")
        return out or ["true"]

    def __hash__(self) -> int:
        return hash((frozenset(self.domains.items()), frozenset(self.parent.items())))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FDStore)
            and dict(self.domains) == dict(other.domains)
            and dict(self.parent) == dict(other.parent)
        )


def format_domain(d: tuple) -> str:
    if len(d) > 4 and d[-1] - d[0] + 1 == len(d):
        return f"{{{d[0]}..{d[-1]}}}"
    return "{" + ", ".join(str(x) for x in d) + "}"


def _int_of(t: Term) -> int:
    if not (isinstance(t, Num) and t.is_integer):
        raise ConfigurationError(f"finite-domain constants must be integers, got {t}")
    return int(t.value)


def _restrict(store: FDStore, v: Var, values) -> Optional[FDStore]:
    """Intersect the domain of ``v`` with ``values``; ``None`` when it empties."""
    rep = store.find(v)
    old = store.domains.get(rep)
    new = tuple(sorted(set(values) if old is None else set(old).intersection(values)))
    if not new:
        return None
    if new == old:
        return store
    domains = dict(store.domains)
    domains[rep] = new
    return FDStore(domains, store.parent)


def _alias(store: FDStore, x: Var, y: Var) -> Optional[FDStore]:
    rx, ry = store.find(x), store.find(y)
    if rx == ry:
        return store
    keep, drop = (rx, ry) if rx.id < ry.id else (ry, rx)
    dk, dd = store.domains.get(keep), store.domains.get(drop)
    domains = dict(store.domains)
    domains.pop(drop, None)
    if dd is not None:
        merged = dd if dk is None else tuple(sorted(set(dk) & set(dd)))
        if not merged:
            return None
        domains[keep] = merged
    parent = dict(store.parent)
    parent[drop] = keep
    return FDStore(domains, parent)


def tell_fd(c: Constraint, store: FDStore) -> TellResult:
    if c.tag is not Domain.FD:
        raise ConfigurationError(f"not a finite-domain constraint: {c}")
    if c.rel == "in":
        x = c.args[0]
        if not isinstance(x, Var):
            raise ConfigurationError(f"membership needs a variable: {c}")
        new = _restrict(store, x, [_int_of(a) for a in c.args[1:]])
        return TellResult.fail(store) if new is None else TellResult.ok(new)
    if c.rel not in ("=", "<=", "<", ">=", ">"):
        raise ConfigurationError(f"unsupported finite-domain relation: {c}")
    lhs, rhs = c.args
    rel = c.rel
    for t in (lhs, rhs):
        if not isinstance(t, (Var, Num)):
            raise ConfigurationError(f"finite-domain arguments must be variables or integers: {c}")
    if isinstance(lhs, Num) and isinstance(rhs, Num):
        a, b = _int_of(lhs), _int_of(rhs)
        holds = {"=": a == b, "<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[rel]
        return TellResult.ok(store) if holds else TellResult.fail(store)
    if isinstance(lhs, Var) and isinstance(rhs, Var):
        if rel == "=":
            new = _alias(store, lhs, rhs)
            return TellResult.fail(store) if new is None else TellResult.ok(new)
        if store.find(lhs) == store.find(rhs):
            return TellResult.ok(store) if rel in ("<=", ">=") else TellResult.fail(store)
        return _tell_var_order(c, store)
    if isinstance(lhs, Num):
        lhs, rhs, rel = rhs, lhs, _FLIP.get(rel, rel)
    x, n = lhs, _int_of(rhs)
    dom = store.domain(x)
    if rel == "=":
        new = _restrict(store, x, [n])
        return TellResult.fail(store) if new is None else TellResult.ok(new)
    if dom is None:
        # an unbounded variable cannot be pruned yet
        return TellResult.ok(store, Disjunction.conj([c]))
    test = {"<=": lambda v: v <= n, "<": lambda v: v < n, ">=": lambda v: v >= n, ">": lambda v: v > n}[rel]
    new = _restrict(store, x, [v for v in dom if test(v)])
    return TellResult.fail(store) if new is None else TellResult.ok(new)


def _tell_var_order(c: Constraint, store: FDStore) -> TellResult:
    """Bounds pruning for ``X rel Y``; the constraint stays as residue unless entailed."""
    x, y = c.args
    rel = c.rel
    if rel in (">=", ">"):
        x, y, rel = y, x, _FLIP[rel]
    dx, dy = store.domain(x), store.domain(y)
    if dx is None or dy is None:
        return TellResult.ok(store, Disjunction.conj([c]))
    strict = rel == "<"
    nx = [v for v in dx if (v < dy[-1] if strict else v <= dy[-1])]
    ny = [v for v in dy if (v > dx[0] if strict else v >= dx[0])]
    new = _restrict(store, x, nx)
    new = new and _restrict(new, y, ny)
    if new is None:
        return TellResult.fail(store)
    dx, dy = new.domain(x), new.domain(y)
    if (dx[-1] < dy[0]) if strict else (dx[-1] <= dy[0]):
        return TellResult.ok(new)
    return TellResult.ok(new, Disjunction.conj([c]))


def _shared(vs: Iterable[Var], store: FDStore) -> list:
    return sorted((v for v in set(vs) if store.domain(v) is not None), key=lambda v: (str(v), v.id))


def proj_fd_weak(vs: Iterable[Var], store: FDStore, target: Domain) -> Disjunction:
    """Bounds for every shared variable, or an equality for a singleton."""
    out = []
    for v in _shared(vs, store):
        d = store.domain(v)
        if len(d) == 1:
            out.append(eq(target, v, Num(d[0])))
        elif target not in (Domain.FL, Domain.LP):
            out.append(Constraint(target, "<=", (Num(d[0]), v)))
            out.append(Constraint(target, "<=", (v, Num(d[-1]))))
    return Disjunction.conj(out) if out else TRUE_DC


def strong_size(vs: Iterable[Var], store: FDStore) -> int:
    size = 1
    for v in _strong_vars(vs, store):
        size *= len(store.domain(v))
    return size


def _strong_vars(vs: Iterable[Var], store: FDStore) -> list:
    seen, out = set(), []
    for v in _shared(vs, store):
        rep = store.find(v)
        if rep in seen or len(store.domain(v)) < 2:
            continue
        seen.add(rep)
        out.append(v)
    return out


def proj_fd_strong(
    vs: Iterable[Var], store: FDStore, target: Domain, cap: int = DEFAULT_STRONG_CAP
) -> Disjunction:
    """Enumerate the value combinations of the shared non-singleton variables.

    Returns ``true`` when the product exceeds ``cap``; the caller treats that
    as a refused, purely advisory projection.
    """
    vs = list(vs)
    strong = _strong_vars(vs, store)
    if not strong or strong_size(vs, store) > cap:
        return TRUE_DC
    doms = [store.domain(v) for v in strong]
    return Disjunction.of(
        [eq(target, v, Num(x)) for v, x in zip(strong, combo)] for combo in itertools.product(*doms)
    )


class FDSolver:
    tag = Domain.FD

    def __init__(self, strong_cap: int = DEFAULT_STRONG_CAP) -> None:
        self.strong_cap = strong_cap

    def empty_store(self) -> FDStore:
        return FDStore()

    def variables(self, store: FDStore) -> frozenset:
        return store.variables()

    def tell(self, c: Constraint, store: FDStore, fresh: Fresh) -> TellResult:
        return tell_fd(c, store)

    def project(self, vs: Iterable[Var], store: FDStore, target: Domain, strong: bool = False) -> Disjunction:
        if strong:
            return proj_fd_strong(vs, store, target, self.strong_cap)
        return proj_fd_weak(vs, store, target)
