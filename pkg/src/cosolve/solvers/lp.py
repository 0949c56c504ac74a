"""The logic language solver: resolution with constraint gathering."""
from __future__ import annotations

from typing import Iterable

from ..constraints import ConfigurationError, Constraint, Disjunction, Domain, Fresh, TellResult, substitute
from ..frontend import Program
from ..terms import App, Substitution, Var, contains_defined_function, rename, unify
from .language import SubstStore, pattern_order, project_substitution, tell_binding, unifier_equations


class LPSolver:
    tag = Domain.LP

    def __init__(self, program: Program) -> None:
        self.program = program
        self.sig = program.signature

    def empty_store(self) -> SubstStore:
        return SubstStore()

    def variables(self, store: SubstStore) -> frozenset:
        return store.variables()

    def tell(self, c: Constraint, store: SubstStore, fresh: Fresh) -> TellResult:
        if c.tag is not Domain.LP:
            raise ConfigurationError(f"not a logic constraint: {c}")
        if c.rel == "=":
            y, t = c.args
            if not isinstance(y, Var):
                raise ConfigurationError(f"logic equality needs a variable on the left: {c}")
            t_hat = store.subst.apply(t)
            if contains_defined_function(t_hat, self.sig)[0]:
                raise ConfigurationError(f"defined function in logic equality: {c}")
            return tell_binding(y, t_hat, store)
        goal = store.subst.apply(App(c.rel, c.args))
        disjuncts = []
        for clause in self.program.clauses_for(c.rel, len(c.args)):
            ren = fresh.rename_apart(sorted(clause.variables(), key=lambda v: v.id))
            head = rename(clause.head, ren)
            sigma = unify(goal, head)
            if sigma is None:
                continue
            ren_subst = Substitution(ren)
            body = [substitute(substitute(b, ren_subst), sigma) for b in clause.body]
            disjuncts.append(unifier_equations(Domain.LP, sigma, pattern_order(goal, head)) + body)
        if not disjuncts:
            # an undefined predicate fails
            return TellResult.fail(store)
        return TellResult.ok(store, Disjunction.of(disjuncts))

    def project(self, vs: Iterable[Var], store: SubstStore, target: Domain, strong: bool = False) -> Disjunction:
        return project_substitution(vs, store, target)


def tell_l(c: Constraint, store: SubstStore, program: Program, fresh: Fresh) -> TellResult:
    return LPSolver(program).tell(c, store, fresh)


def proj_l(vs: Iterable[Var], store: SubstStore, target: Domain) -> Disjunction:
    return project_substitution(vs, store, target)
