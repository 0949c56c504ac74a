"""The functional-logic language solver: narrowing with constraint gathering."""
from __future__ import annotations

from typing import Iterable

from ..constraints import (
    ConfigurationError,
    Constraint,
    Disjunction,
    Domain,
    Fresh,
    TellResult,
    eq,
    substitute,
)
from ..frontend import Program
from ..terms import App, Substitution, Var, contains_defined_function, rename, unify
from .language import SubstStore, pattern_order, project_substitution, tell_binding, unifier_equations


class FLSolver:
    tag = Domain.FL

    def __init__(self, program: Program) -> None:
        self.program = program
        self.sig = program.signature

    def empty_store(self) -> SubstStore:
        return SubstStore()

    def variables(self, store: SubstStore) -> frozenset:
        return store.variables()

    def tell(self, c: Constraint, store: SubstStore, fresh: Fresh) -> TellResult:
        if c.tag is not Domain.FL or c.rel != "=" or not isinstance(c.args[0], Var):
            raise ConfigurationError(f"not a flattened functional-logic equality: {c}")
        y, t = c.args
        t_hat = store.subst.apply(t)
        found, f = contains_defined_function(t_hat, self.sig)
        if not found:
            return tell_binding(y, t_hat, store)
        if not (isinstance(t_hat, App) and t_hat.symbol == f) or any(
            contains_defined_function(a, self.sig)[0] for a in t_hat.args
        ):
            raise ConfigurationError(f"constraint is not maximally flattened: {c}")
        disjuncts = []
        for rule in self.program.rules_for(f):
            ren = fresh.rename_apart(sorted(rule.variables(), key=lambda v: v.id))
            lhs = rename(rule.lhs, ren)
            sigma = unify(t_hat, lhs)
            if sigma is None:
                continue
            rhs = sigma.apply(rename(rule.rhs, ren))
            ren_subst = Substitution(ren)
            guard = [substitute(substitute(g, ren_subst), sigma) for g in rule.guard]
            disjuncts.append(
                unifier_equations(Domain.FL, sigma, pattern_order(lhs, t_hat)) + [eq(Domain.FL, y, rhs)] + guard
            )
        if not disjuncts:
            # no matching rule: the value is undefined, so the constraint suspends
            return TellResult.ok(store, Disjunction.conj([c]))
        return TellResult.ok(store, Disjunction.of(disjuncts))

    def project(self, vs: Iterable[Var], store: SubstStore, target: Domain, strong: bool = False) -> Disjunction:
        return project_substitution(vs, store, target)


def tell_fl(c: Constraint, store: SubstStore, program: Program, fresh: Fresh) -> TellResult:
    return FLSolver(program).tell(c, store, fresh)


def proj_fl(vs: Iterable[Var], store: SubstStore, target: Domain) -> Disjunction:
    return project_substitution(vs, store, target)
