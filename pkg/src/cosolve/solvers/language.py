"""Shared pieces of the two language solvers: substitution stores and projection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..constraints import TRUE_DC, Constraint, Disjunction, Domain, TellResult, eq
from ..terms import Num, Substitution, Term, Var, format_term, ordered_vars


@dataclass(frozen=True)
class SubstStore:
    """A store that is nothing but an idempotent substitution."""

    subst: Substitution = Substitution()

    def variables(self) -> frozenset:
        return self.subst.domain() | self.subst.range_vars()

    def lines(self) -> list:
        return [f"{v} = {format_term(t)}" for v, t in self.subst.sorted_items()] or ["true"]


def tell_binding(y: Var, t: Term, store: SubstStore) -> TellResult:
    """Add ``y = t`` by parallel composition; fail when it does not unify."""
    new = store.subst.parallel(Substitution({y: t}))
    if new is None:
        return TellResult.fail(store)
    return TellResult.ok(SubstStore(new) if new != store.subst else store)


def _retag_binding(v: Var, t: Term, target: Domain):
    if target in (Domain.FL, Domain.LP):
        return eq(target, v, t)
    if isinstance(t, Var):
        return eq(target, v, t)
    if isinstance(t, Num):
        if target is Domain.FD and not t.is_integer:
            # an integer variable cannot take this value
            return Constraint(Domain.FD, "<", (v, v))
        return eq(target, v, t)
    return None  # constructor terms have no numeric meaning


def project_substitution(vs: Iterable[Var], store: SubstStore, target: Domain) -> Disjunction:
    """The restriction of the store to ``vs``, as equalities of ``target``."""
    out = []
    for v in sorted(vs, key=lambda v: (str(v), v.id)):
        t = store.subst.get(v)
        if t is None:
            continue
        c = _retag_binding(v, t, target)
        if c is not None:
            out.append(c)
    return Disjunction.conj(out) if out else TRUE_DC


def unifier_equations(tag: Domain, sigma: Substitution, first: Iterable[Var] = ()) -> list:
    """A unifier as equality constraints; ``first`` fixes a preferred order."""
    order = [v for v in first if v in sigma]
    order += [v for v in sigma if v not in order]
    return [eq(tag, v, sigma[v]) for v in order]


def pattern_order(*terms: Term) -> list:
    return ordered_vars(*terms)
