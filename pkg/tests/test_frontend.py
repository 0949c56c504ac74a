import itertools
import re

import pytest
from conftest import load
from oracles import Undefined, fl_eval, fl_holds, nat

from cosolve.constraints import Domain, Fresh
from cosolve.frontend import (
    ParseError,
    format_constraint,
    format_program,
    parse_goal,
    parse_goal_full,
    parse_program,
)
from cosolve.terms import App, Var, contains_defined_function, format_term

MIXED = """
data nat = z | s(nat).
data list = nil | cons(num, list).
data t = a | b.

add(z, Y) -> Y.
add(s(X), Y) -> s(add(X, Y)).
len(nil) -> 0.
len(cons(X, L)) -> 1 + len(L).
p(a).
p(b).
q(X) :- p(X), X =l a.
r(X, Y) :- X in {1..3}, Y =a X + 1.
"""


def strs(cs):
    return [format_constraint(c) for c in cs]


def canonical(text_items):
    """Rename variables by first occurrence so alpha-equivalent items compare equal."""
    out = []
    for item in text_items:
        names = {}

        def sub(m):
            return names.setdefault(m.group(0), f"V{len(names)}")

        out.append(re.sub(r"\b[A-Z_][A-Za-z0-9_']*", sub, item))
    return out


def test_add_rules_parse_in_source_order(add_program):
    rules = add_program.fl_rules
    assert [format_term(r.lhs) for r in rules] == ["add(0, Y)", "add(s(X), Y)"]
    assert format_term(rules[0].rhs) == "Y"


def test_rc_par_rule_guard(resistors):
    par = resistors.rules_for("rc")[2]
    assert format_term(par.lhs) == "rc(par(R1, R2))"
    assert canonical(strs(par.guard)) == canonical(["1/X + 1/Y =a 1/Z", "X =fl rc(R1)", "Y =fl rc(R2)"])
    assert [c.tag for c in par.guard] == [Domain.ARITH, Domain.FL, Domain.FL]


def test_simple_rule_has_membership_guard(resistors):
    simple = resistors.rules_for("rc")[0]
    (c,) = simple.guard
    assert c.tag is Domain.FD and c.rel == "in"
    assert [int(a.value) for a in c.args[1:]] == list(range(300, 3001, 300))


def test_defined_function_in_pattern_is_rejected():
    with pytest.raises(ParseError, match="defined function in pattern"):
        parse_program("data t = a.\nf(g(X) ) -> a.\ng(a) -> a.")


def test_nonlinear_pattern_is_rejected():
    with pytest.raises(ParseError, match="non-linear pattern"):
        parse_program("data t = a. f(X, X) -> a.")


def test_unknown_symbol_is_rejected_with_location():
    with pytest.raises(ParseError) as e:
        parse_program("data t = a.\nf(X) -> b.")
    assert "unknown symbol" in str(e.value)
    assert (e.value.line, e.value.col) == (2, 9)


def test_syntax_error_location():
    with pytest.raises(ParseError) as e:
        parse_program("data t = a.\nf(X) -> a")
    assert e.value.line == 2


def test_unbound_rhs_variable_is_rejected():
    with pytest.raises(ParseError, match="not bound"):
        parse_program("data t = a. f(X) -> Y.")


def test_extra_variables_bound_by_guard_are_allowed(resistors):
    seq = resistors.rules_for("rc")[1]
    assert isinstance(seq.rhs, Var)


def test_flatten_arith_with_calls(resistors):
    cs = parse_goal("1/rc(R1) + 1/rc(R2) =a 1/Z", resistors)
    assert canonical(strs(cs)) == canonical(["_1 =fl rc(R1)", "_2 =fl rc(R2)", "1/_1 + 1/_2 =a 1/Z"])
    assert all(v.aux for c in cs[:2] for v in [c.args[0]])


def test_flatten_fl_goal_splits_into_two(resistors):
    g = parse_goal_full("rc(par(RA,RB)) =fl 200", resistors)
    assert canonical(strs(g.constraints)) == canonical(["_1 =fl rc(par(RA, RB))", "_1 =fl 200"])
    assert [v.name for v in g.variables] == ["RA", "RB"]


def test_homogeneous_constraint_is_unchanged(add_program):
    assert strs(parse_goal("X =fl 0", add_program)) == ["X =fl 0"]


def test_add_goal_flattening(add_program):
    cs = parse_goal("add(s(A),B) =fl s(s(0))", add_program)
    assert canonical(strs(cs)) == canonical(["_1 =fl add(s(A), B)", "_1 =fl s(s(0))"])


def test_empty_goal():
    assert parse_goal("", load("add.cfl")) == []


def test_goal_syntax_error():
    with pytest.raises(ParseError):
        parse_goal("add(A =fl", load("add.cfl"))


def test_rhs_with_nested_calls_is_flattened_leftmost_innermost():
    prog = parse_program(MIXED)
    (rule,) = [r for r in prog.fl_rules if format_term(r.lhs) == "add(s(X), Y)"]
    assert canonical([str(rule)]) == canonical(["add(s(X), Y) -> s(_1) where _1 =fl add(X, Y)."])
    cs = parse_goal("add(add(X,Y),Z) =fl s(W)", prog)
    assert canonical(strs(cs)) == canonical(["_1 =fl add(X, Y)", "_2 =fl add(_1, Z)", "_2 =fl s(W)"])


def test_arith_rhs_is_flattened():
    prog = parse_program(MIXED)
    rule = prog.rules_for("len")[1]
    assert canonical([str(rule)]) == canonical(["len(cons(X, L)) -> _1 where _2 =fl len(L), _1 =a 1 + _2."])


def test_tag_inference_for_untagged_relations():
    prog = parse_program(MIXED)
    cs = parse_goal("X in {1..4}, X <= 3, Y = s(z)", prog)
    assert [c.tag for c in cs] == [Domain.FD, Domain.ARITH, Domain.FL]


def test_logic_clauses_parse():
    prog = parse_program(MIXED)
    q = prog.clauses_for("q", 1)[0]
    assert [c.tag for c in q.body] == [Domain.LP, Domain.LP]
    r = prog.clauses_for("r", 2)[0]
    assert [c.tag for c in r.body] == [Domain.FD, Domain.ARITH]
    assert len(prog.clauses_for("p", 1)) == 2


@pytest.mark.parametrize("name", ["resistors.cfl", "add.cfl", "innermost.cfl", "fg_loop.cfl"])
def test_round_trip_is_alpha_equivalent(name):
    prog = load(name)
    again = parse_program(format_program(prog))
    assert canonical([str(r) for r in again.fl_rules]) == canonical([str(r) for r in prog.fl_rules])
    assert again.signature == prog.signature


def test_round_trip_mixed_program():
    prog = parse_program(MIXED)
    again = parse_program(format_program(prog))
    for field in ("fl_rules", "lp_clauses"):
        a = [str(x) for x in getattr(prog, field)]
        b = [str(x) for x in getattr(again, field)]
        assert canonical(a) == canonical(b)


def test_stored_guards_have_one_outermost_defined_function():
    for prog in (load("resistors.cfl"), load("fg_loop.cfl"), parse_program(MIXED)):
        sig = prog.signature
        for rule in prog.fl_rules:
            for c in rule.guard:
                if c.tag is not Domain.FL:
                    for a in c.args:
                        assert not contains_defined_function(a, sig)[0]
                    continue
                lhs, rhs = c.args
                assert isinstance(lhs, Var)
                found, f = contains_defined_function(rhs, sig)
                if found:
                    assert rhs.symbol == f
                    assert not any(contains_defined_function(a, sig)[0] for a in rhs.args)
            found, f = contains_defined_function(rule.rhs, sig)
            if found:
                assert rule.rhs.symbol == f
                assert not any(contains_defined_function(a, sig)[0] for a in rule.rhs.args)


# -- flattening soundness over a bounded universe --------------------------------

NAT = """
data nat = 0 | s(nat).
add(0, Y) -> Y.
add(s(X), Y) -> s(add(X, Y)).
dbl(X) -> add(X, X).
"""

HYBRID_GOALS = [
    "add(add(X, Y), Z) =fl s(s(0))",
    "add(X, dbl(Y)) =fl s(s(s(0)))",
    "s(s(add(X, X))) =fl dbl(s(Y))",
    "dbl(add(X, Y)) =fl add(Y, s(s(0)))",
]


@pytest.mark.parametrize("goal", HYBRID_GOALS)
def test_flattening_preserves_solutions(goal):
    prog = parse_program(NAT)
    g = parse_goal_full(goal, prog)
    universe = [nat(k) for k in range(4)]
    wide = [nat(k) for k in range(12)]
    lhs_text, rhs_text = goal.split("=fl")
    user = list(g.variables)
    by_name = {v.name: v for v in user}

    def evaluate(text, env):
        return fl_eval(_term(text, by_name), prog, env, [10_000])

    before, after = set(), set()
    for combo in itertools.product(universe, repeat=len(user)):
        env = dict(zip(user, combo))
        try:
            ok = evaluate(lhs_text, env) == evaluate(rhs_text, env)
        except Undefined:
            ok = False
        if ok:
            before.add(combo)
        if fl_holds(g.constraints, prog, env, wide):
            after.add(combo)
    assert before == after
    assert before, "goal should have at least one solution in the universe"


def _term(text, by_name):
    """Independent reader for the unflattened nat terms above."""
    toks = re.findall(r"[A-Za-z_0-9]+|[(),]", text)
    pos = [0]

    def parse():
        tok = toks[pos[0]]
        pos[0] += 1
        if tok[0].isupper():
            return by_name[tok]
        args = []
        if pos[0] < len(toks) and toks[pos[0]] == "(":
            pos[0] += 1
            args.append(parse())
            while toks[pos[0]] == ",":
                pos[0] += 1
                args.append(parse())
            pos[0] += 1
        return App(tok, tuple(args))

    return parse()


def test_fresh_variables_follow_program_ids(add_program):
    g = parse_goal_full("add(A, B) =fl C", add_program)
    ids = [v.id for c in g.constraints for v in c.vars()]
    assert min(ids) >= add_program.next_var_id
    assert g.next_var_id > max(ids)
    fresh = Fresh(g.next_var_id)
    assert fresh.var("W").name == f"W_{g.next_var_id}"
