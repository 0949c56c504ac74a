import itertools
from dataclasses import replace

import pytest
from conftest import load
from oracles import a_holds, a_store_holds, fd_holds, fd_store_holds, resolve, sld_answers, subst_store_holds

from cosolve.constraints import ConfigurationError, Constraint, Domain, member
from cosolve.engine import (
    BUDGET_EXHAUSTED,
    SUSPENDED_RESIDUE,
    Engine,
    Status,
    Strategy,
    count_propagated_disjuncts,
    solve,
)
from cosolve.frontend import format_constraint, parse_goal_full, parse_program
from cosolve.solvers.fd import FDStore
from cosolve.solvers.language import SubstStore
from cosolve.terms import App, Num, Substitution, Var

RESTRICTED = "rc(par(RA,RB)) =fl 200, RA =fl simple(A), RB =fl simple(B)"
EXPECTED = [
    "{A = 300, B = 600, RA = simple(300), RB = simple(600)}",
    "{A = 600, B = 300, RA = simple(600), RB = simple(300)}",
]
X, Y, Z = Var(1, "X"), Var(2, "Y"), Var(3, "Z")


def A(rel, a, b):
    wrap = lambda t: Num(t) if isinstance(t, int) else t  # noqa: E731
    return Constraint(Domain.ARITH, rel, (wrap(a), wrap(b)))


def texts(outcome):
    return [str(s) for s in outcome.solutions]


# -- single steps --------------------------------------------------------------------


def test_arith_propagation_stores_relation(resistors):
    eng = Engine(resistors)
    rel = A("=", App("+", (App("/", (Num(1), X)), App("/", (Num(1), Y)))), App("/", (Num(1), Z)))
    (succ,) = eng.propagate_step(eng.initial([rel], 10))
    assert succ.pool == ()
    assert succ.stores[Domain.ARITH].relations == (rel,)


def test_three_rules_split_into_three_configurations(resistors):
    g = parse_goal_full("X =fl rc(RA)", resistors)
    eng = Engine(resistors)
    succ = eng.propagate_step(eng.initial(g.constraints, g.next_var_id))
    assert len(succ) == 3
    assert len({s.branch for s in succ}) == 3


def test_failing_propagation_discards_branch(resistors):
    eng = Engine(resistors)
    cfg = eng.initial([A("=", X, 300), A("=", Y, 600), A(">", Y, 600)], 10)
    cfg = eng.propagate_step(cfg)[0]
    cfg = eng.propagate_step(cfg)[0]
    assert eng.propagate_step(cfg) == []


def test_unknown_domain_is_configuration_error(resistors):
    eng = Engine(resistors, registry={})
    with pytest.raises(ConfigurationError):
        eng.propagate_step(eng.initial([A("=", X, 1)], 10))


def _with_stores(eng, fd=None, arith=(), fl=None):
    cfg = eng.initial(list(arith), 100)
    while cfg.pool:
        (cfg,) = eng.propagate_step(cfg)
    stores = dict(cfg.stores)
    if fd is not None:
        stores[Domain.FD] = fd
    if fl is not None:
        stores[Domain.FL] = fl
    return replace(cfg, stores=stores)


def test_weak_projection_fd_to_arith(resistors):
    eng = Engine(resistors)
    fd = FDStore({X: tuple(range(300, 3001, 300))})
    cfg = _with_stores(eng, fd=fd, arith=[A("<=", X, Y)])
    nxt = eng.weak_round(cfg)
    assert [format_constraint(c) for c in nxt.pool] == ["300 <=a X", "X <=a 3000"]
    assert nxt.stores == cfg.stores
    # the same projection is not emitted twice
    assert eng.weak_round(replace(nxt, pool=())) is None


def test_strong_projection_gives_four_configurations(resistors):
    eng = Engine(resistors)
    fd = FDStore({X: (300, 600), Y: (300, 600)})
    cfg = _with_stores(eng, fd=fd, arith=[A("<=", X, Y)])
    succ = eng.strong_round(cfg)
    assert len(succ) == 4
    assert {tuple(format_constraint(c) for c in s.pool) for s in succ} == {
        (f"X =a {a}", f"Y =a {b}") for a in (300, 600) for b in (300, 600)
    }


def test_projection_fl_to_arith(resistors):
    eng = Engine(resistors)
    fl = SubstStore(Substitution({Z: Num(200)}))
    cfg = _with_stores(eng, fl=fl, arith=[A("<=", Z, 1000)])
    nxt = eng.weak_round(cfg)
    assert "Z =a 200" in [format_constraint(c) for c in nxt.pool]


# -- whole runs -------------------------------------------------------------------------


def test_restricted_resistor_goal(resistors):
    o = solve(resistors, RESTRICTED)
    assert o.status is Status.SOLUTIONS and o.complete
    assert texts(o) == EXPECTED


@pytest.mark.parametrize("schedule,count", [("weak-first", 4), ("strong-late", 4), ("strong-early", 100)])
def test_strong_disjunct_counts(resistors, schedule, count):
    o = solve(resistors, RESTRICTED, Strategy(projection=schedule), trace=True)
    assert count_propagated_disjuncts(o.trace) == count == o.strong_disjuncts
    assert texts(o) == EXPECTED


def test_no_fd_variables_means_no_strong_disjuncts(add_program):
    o = solve(add_program, "add(s(0), s(s(0))) =fl R", trace=True)
    assert count_propagated_disjuncts(o.trace) == 0


@pytest.mark.parametrize("search", ["dfs", "bfs"])
def test_search_order_does_not_change_answers(resistors, search):
    assert texts(solve(resistors, RESTRICTED, Strategy(search=search))) == EXPECTED


def test_add_goal_has_both_decompositions(add_program):
    o = solve(add_program, "add(s(A),B) =fl s(s(0))")
    assert texts(o) == ["{A = 0, B = s(0)}", "{A = s(0), B = 0}"]


def test_ground_add(add_program):
    assert texts(solve(add_program, "add(s(0),s(s(0))) =fl R")) == ["{R = s(s(s(0)))}"]


def test_innermost_example():
    assert texts(solve(load("innermost.cfl"), "f(g(X)) =fl a")) == ["{X = a}"]


def test_nonterminating_program_exhausts_budget():
    o = solve(load("fg_loop.cfl"), "Z =fl g(0)", Strategy(max_steps=500))
    assert o.status is Status.UNKNOWN and o.reason == BUDGET_EXHAUSTED
    assert o.steps == 500


def test_permanent_suspension_is_unknown():
    prog = parse_program("data t = a | b. g(a) -> a.")
    o = solve(prog, "Y =fl g(b)")
    assert o.status is Status.UNKNOWN and o.reason == SUSPENDED_RESIDUE


def test_suspended_constraint_wakes(resistors):
    o = solve(resistors, "X <=fd 5, X in {1..9}", trace=True)
    assert [e.action for e in o.trace if e.action in ("SUSPEND", "WAKE")] == ["SUSPEND", "WAKE"]
    assert texts(o) == ["{} where X in {1..5}"]


def test_empty_goal_has_one_empty_solution(resistors):
    o = solve(resistors, "")
    assert o.status is Status.SOLUTIONS and texts(o) == ["{}"]


def test_unsatisfiable(resistors):
    o = solve(resistors, "rc(par(RA,RB)) =fl 1, RA =fl simple(A), RB =fl simple(B)")
    assert o.status is Status.UNSATISFIABLE


def test_budgets_must_be_positive():
    with pytest.raises(ConfigurationError):
        Strategy(max_steps=0)


def test_branch_budget_stops_search(resistors):
    o = solve(resistors, RESTRICTED, Strategy(projection="strong-early", max_branches=10))
    assert o.status is Status.UNKNOWN and o.reason == BUDGET_EXHAUSTED


def test_strong_budget_refuses_large_projection(resistors):
    o = solve(resistors, RESTRICTED, Strategy(projection="strong-early", max_strong_disjuncts=50), trace=True)
    assert count_propagated_disjuncts(o.trace) == 4
    assert texts(o) == EXPECTED


def test_trace_actions(resistors):
    o = solve(resistors, RESTRICTED, trace=True)
    actions = {e.action.split()[0] for e in o.trace}
    assert {"TELL", "PROJ", "SPLIT", "FAIL", "SOLUTION"} <= actions
    assert [e.step for e in o.trace] == sorted(e.step for e in o.trace)


def test_deterministic(resistors):
    a = solve(resistors, RESTRICTED, trace=True)
    b = solve(resistors, RESTRICTED, trace=True)
    assert [str(e) for e in a.trace] == [str(e) for e in b.trace]


# -- split preservation, checked semantically ---------------------------------------------

LOGIC = """
data t = a | b | c.
p(a). p(b).
q(a, b). q(b, c). q(c, c).
r(X, Y) :- p(X), q(X, Y).
"""


def _config_vars(cfg):
    vs = set()
    for c in cfg.pool + cfg.suspended:
        vs |= c.vars()
    lp = cfg.stores[Domain.LP].subst
    vs |= set(lp.domain()) | set(lp.range_vars())
    vs |= set(cfg.stores[Domain.FD].variables()) | set(cfg.stores[Domain.ARITH].variables())
    return sorted(vs, key=lambda v: v.id)


def _holds(c, env, program):
    if c.is_false():
        return False
    if c.tag is Domain.FD:
        return fd_holds(c, env)
    if c.tag is Domain.ARITH:
        return a_holds(c, env)
    if c.rel == "=":
        return resolve(c.args[0], env) == resolve(c.args[1], env)
    atom = App(c.rel, tuple(resolve(t, env) for t in c.args))
    return bool(sld_answers(program, [atom], 6))


def _config_solutions(cfg, user, universe, program):
    vs = _config_vars(cfg)
    out = set()
    for combo in itertools.product(universe, repeat=len(vs)):
        env = dict(zip(vs, combo))
        if not all(_holds(c, env, program) for c in cfg.pool + cfg.suspended):
            continue
        if not subst_store_holds(dict(cfg.stores[Domain.LP].subst.items()), env):
            continue
        if not (fd_store_holds(cfg.stores[Domain.FD], env) and a_store_holds(cfg.stores[Domain.ARITH], env)):
            continue
        out.add(tuple(env.get(v) for v in user))
    return out


def _check_splits(program, goal, universe):
    g = parse_goal_full(goal, program)
    eng = Engine(program)
    frontier = [eng.initial(g.constraints, g.next_var_id)]
    checked = 0
    while frontier:
        cfg = frontier.pop()
        succ = eng.step(cfg)
        if succ is None:
            continue
        before = _config_solutions(cfg, g.variables, universe, program)
        after = set().union(*(_config_solutions(s, g.variables, universe, program) for s in succ)) if succ else set()
        assert before == after, [format_constraint(c) for c in cfg.pool]
        checked += 1
        frontier.extend(succ)
    return checked


@pytest.mark.parametrize("goal", ["r(X, Y)", "p(X), q(X, Y)", "r(X, Y), p(Y)"])
def test_split_preserves_logic_solutions(goal):
    prog = parse_program(LOGIC)
    assert _check_splits(prog, goal, [App("a"), App("b"), App("c")]) > 0


@pytest.mark.parametrize("goal", ["X in {1..3}, Y in {1..3}, X + Y =a 4", "X in {0..2}, Y in {0..2}, X < Y, Y <= 1 + X"])
def test_split_preserves_numeric_solutions(goal):
    prog = parse_program("data t = a.")
    assert _check_splits(prog, goal, list(range(0, 4))) > 0


def test_member_constraint_helper():
    assert format_constraint(member(X, [1, 2])) == "X in {1, 2}"
