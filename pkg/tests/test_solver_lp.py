import pytest
from oracles import sld_answers

from cosolve.constraints import ConfigurationError, Constraint, Domain, Fresh, eq
from cosolve.frontend import parse_goal_full, parse_program
from cosolve.solvers.language import SubstStore
from cosolve.solvers.lp import LPSolver, proj_l
from cosolve.terms import App, Num, Substitution, Var, format_term

X, Y = Var(1, "X"), Var(2, "Y")
a, b = App("a"), App("b")


def tell_goal(program, text, store=None):
    g = parse_goal_full(text, program)
    return g, LPSolver(program).tell(g.constraints[0], store or SubstStore(), Fresh(g.next_var_id))


def test_two_facts_give_two_disjuncts():
    prog = parse_program("data t = a | b. p(a). p(b).")
    g, r = tell_goal(prog, "p(X)")
    assert r.success
    assert [[str(c) for c in d] for d in r.residue.disjuncts] == [["X =l a"], ["X =l b"]]
    # the same answers as an independent SLD derivation
    assert {(format_term(d[0].args[1]),) for d in r.residue.disjuncts} == {
        tuple(format_term(t) for t in ans) for ans in sld_answers(prog, list(g.constraints), 3)
    }


def test_undefined_predicate_fails():
    prog = parse_program("data t = a. p(a).")
    r = LPSolver(prog).tell(Constraint(Domain.LP, "q", (X,)), SubstStore(), Fresh(10))
    assert not r.success and r.residue.is_false


def test_equality_clash_fails():
    prog = parse_program("data t = a | b. p(a).")
    store = SubstStore(Substitution({X: b}))
    r = LPSolver(prog).tell(eq(Domain.LP, X, a), store, Fresh(10))
    assert not r.success and r.store is store


def test_body_order_is_preserved():
    prog = parse_program("data t = a | b. p(a). q(X) :- p(X), X =l a.")
    _, r = tell_goal(prog, "q(Y)")
    (d,) = r.residue.disjuncts
    assert [c.rel for c in d] == ["=", "p", "="]
    assert [c.tag for c in d] == [Domain.LP] * 3


def test_clause_order_sets_disjunct_order():
    prog = parse_program("data t = a | b | c. p(c). p(a). p(b).")
    _, r = tell_goal(prog, "p(X)")
    assert [format_term(d[0].args[1]) for d in r.residue.disjuncts] == ["c", "a", "b"]


def test_foreign_constraints_in_body_keep_their_tags():
    prog = parse_program("data t = a. r(X, Y) :- X in {1..3}, Y =a X + 1.")
    _, r = tell_goal(prog, "r(A, B)")
    (d,) = r.residue.disjuncts
    assert [c.tag for c in d if c.rel != "="][:1] == [Domain.FD]
    assert Domain.ARITH in [c.tag for c in d]


def test_store_substitution_is_applied_before_resolution():
    prog = parse_program("data t = a | b. p(a). p(b).")
    store = SubstStore(Substitution({X: b}))
    r = LPSolver(prog).tell(Constraint(Domain.LP, "p", (X,)), store, Fresh(10))
    assert r.success and len(r.residue) == 1


def test_malformed_equality_is_rejected():
    prog = parse_program("data t = a. p(a).")
    with pytest.raises(ConfigurationError):
        LPSolver(prog).tell(Constraint(Domain.LP, "=", (a, X)), SubstStore(), Fresh(10))


def test_projection():
    store = SubstStore(Substitution({X: Num(3)}))
    assert [str(c) for c in proj_l({X}, store, Domain.FD).disjuncts[0]] == ["X =fd 3"]
    assert proj_l({X}, SubstStore(), Domain.FD).is_true
    assert proj_l({Y}, SubstStore(Substitution({X: a})), Domain.FD).is_true
