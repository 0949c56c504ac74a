"""Program and goal parsing, rule validation, sort inference and flattening.

Concrete syntax (statements end with ``.``, ``%`` starts a comment)::

    data nat = 0 | s(nat).
    add(0, X) -> X.
    add(s(X), Y) -> s(add(X, Y)).
    rc(simple(X)) -> X where X in {300, 600, ..., 3000}.
    p(a).
    q(X) :- p(X), X =l a.

Relations: ``=fl``, ``=l``, ``=a``, ``=fd``, bare ``=`` (functional-logic in
rules and goals, logic in clause bodies, arithmetic when either side holds an
arithmetic operator), ``<=``, ``<``, ``>=``, ``>`` (arithmetic unless suffixed
with ``fd``) and ``X in {...}``. A suffix must touch the operator: ``X =a 3``
is arithmetic, ``X = a`` binds ``X`` to the constant ``a``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .constraints import FALSE, Constraint, Domain, Fresh
from .terms import (
    ARITH_OPS,
    NUM_SORT,
    App,
    Num,
    OpDecl,
    Signature,
    Term,
    Var,
    format_term,
    iter_vars,
    rename,
    term_vars,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Program model


@dataclass(frozen=True)
class FLRule:
    lhs: App
    rhs: Term
    guard: tuple = ()
    line: int = field(default=0, compare=False)

    def variables(self) -> frozenset:
        out = set(term_vars(self.lhs, self.rhs))
        for c in self.guard:
            out |= c.vars()
        return frozenset(out)

    def __str__(self) -> str:
        s = f"{format_term(self.lhs)} -> {format_term(self.rhs)}"
        if self.guard:
            s += " where " + ", ".join(format_constraint(c) for c in self.guard)
        return s + "."


@dataclass(frozen=True)
class LPClause:
    head: App
    body: tuple = ()
    line: int = field(default=0, compare=False)

    def variables(self) -> frozenset:
        out = set(term_vars(self.head))
        for c in self.body:
            out |= c.vars()
        return frozenset(out)

    def __str__(self) -> str:
        s = format_term(self.head)
        if self.body:
            s += " :- " + ", ".join(format_constraint(c) for c in self.body)
        return s + "."


@dataclass(frozen=True)
class Program:
    signature: Signature
    fl_rules: tuple = ()
    lp_clauses: tuple = ()
    data: tuple = ()  # (sort, ((constructor, arg sorts), ...)) in source order
    next_var_id: int = 1

    def rules_for(self, name: str) -> list:
        return [r for r in self.fl_rules if r.lhs.symbol == name]

    def clauses_for(self, name: str, arity: int) -> list:
        return [c for c in self.lp_clauses if c.head.symbol == name and len(c.head.args) == arity]


EMPTY_PROGRAM = Program(Signature())


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|%[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<var>[A-Z_][A-Za-z0-9_']*)
  | (?P<ident>[a-z][A-Za-z0-9_']*)
  | (?P<rel>(?:=|<=|>=|<|>)(?:fl|fd|l|a)(?![A-Za-z0-9_']))
  | (?P<op>->|:-|\.\.\.|\.\.|<=|>=|[=<>+\-*/(),.{}|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Raw syntax trees (symbols not yet classified)


@dataclass
class RSym:
    name: str
    args: list
    tok: Token
    numeral: bool = False


@dataclass
class RVar:
    name: str
    tok: Token


@dataclass
class RCons:
    kind: str  # "rel", "in", "atom"
    tok: Token
    rel: str = ""
    suffix: Optional[str] = None
    lhs: object = None
    rhs: object = None
    values: tuple = ()


_ARITH_NAMES = {"+": "+", "-": "-", "*": "*", "/": "/"}


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text or kind
            raise self.error(f"expected {want!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    # statements

    def statements(self) -> list:
        out = []
        while self.tok.kind != "eof":
            out.append(self.statement())
        return out

    def statement(self):
        if self.tok.kind == "ident" and self.tok.text == "data" and self.toks[self.i + 1].kind == "ident":
            return self.data_decl()
        start = self.tok
        head = self.expr()
        if self.at("->"):
            self.take("->")
            rhs = self.expr()
            guard = []
            if self.tok.kind == "ident" and self.tok.text == "where":
                self.take()
                guard = self.constraint_list()
            self.take(".")
            return ("rule", start, head, rhs, guard)
        body = []
        if self.at(":-"):
            self.take(":-")
            body = self.constraint_list()
        self.take(".")
        return ("clause", start, head, body)

    def data_decl(self):
        start = self.take("data")
        sort = self.take(kind="ident").text
        self.take("=")
        alts = []
        while True:
            tok = self.tok
            if tok.kind not in ("ident", "num"):
                raise self.error("expected constructor name")
            self.i += 1
            arg_sorts = []
            if self.at("("):
                self.take("(")
                arg_sorts.append(self.take(kind="ident").text)
                while self.at(","):
                    self.take(",")
                    arg_sorts.append(self.take(kind="ident").text)
                self.take(")")
            alts.append((tok.text, tuple(arg_sorts), tok))
            if not self.at("|"):
                break
            self.take("|")
        self.take(".")
        return ("data", start, sort, alts)

    def constraint_list(self) -> list:
        items = [self.constraint()]
        while self.at(","):
            self.take(",")
            items.append(self.constraint())
        return items

    def constraint(self) -> RCons:
        tok = self.tok
        lhs = self.expr()
        t = self.tok
        if t.kind == "rel":
            self.i += 1
            m = re.match(r"(=|<=|>=|<|>)(fl|fd|l|a)", t.text)
            return RCons("rel", tok, m.group(1), m.group(2), lhs, self.expr())
        if t.kind == "op" and t.text in ("=", "<=", ">=", "<", ">"):
            self.i += 1
            return RCons("rel", tok, t.text, None, lhs, self.expr())
        if t.kind == "ident" and t.text == "in":
            self.i += 1
            return RCons("in", tok, lhs=lhs, values=self.int_set())
        return RCons("atom", tok, lhs=lhs)

    def int_set(self) -> tuple:
        self.take("{")
        nums = [self.int_lit()]
        if self.at(".."):
            self.take("..")
            hi = self.int_lit()
            self.take("}")
            return tuple(range(nums[0], hi + 1))
        while self.at(","):
            self.take(",")
            if self.at("..."):
                tok = self.take("...")
                self.take(",")
                last = self.int_lit()
                if len(nums) < 2 or nums[1] == nums[0]:
                    raise self.error("'...' needs two leading values fixing the step", tok)
                step = nums[1] - nums[0]
                if (last - nums[-1]) % step:
                    raise self.error("last value does not continue the progression", tok)
                nums.extend(range(nums[-1] + step, last + (1 if step > 0 else -1), step))
                break
            nums.append(self.int_lit())
        self.take("}")
        return tuple(sorted(set(nums)))

    def int_lit(self) -> int:
        neg = False
        if self.at("-"):
            self.take("-")
            neg = True
        tok = self.take(kind="num")
        if "." in tok.text:
            raise self.error("finite domains hold integers", tok)
        return -int(tok.text) if neg else int(tok.text)

    # expressions: precedence climbing over + - * /

    def expr(self):
        left = self.term_expr()
        while self.tok.kind == "op" and self.tok.text in "+-" and len(self.tok.text) == 1:
            op = self.take()
            left = RSym(op.text, [left, self.term_expr()], op)
        return left

    def term_expr(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.take()
            left = RSym(op.text, [left, self.unary()], op)
        return left

    def unary(self):
        if self.at("-"):
            op = self.take("-")
            return RSym("neg", [self.unary()], op)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return RSym(t.text, [], t, numeral=True)
        if t.kind == "var":
            self.i += 1
            return RVar(t.text, t)
        if t.kind == "ident":
            self.i += 1
            args = []
            if self.at("("):
                self.take("(")
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.take(",")
                        args.append(self.expr())
                self.take(")")
            return RSym(t.text, args, t)
        if self.at("("):
            self.take("(")
            e = self.expr()
            self.take(")")
            return e
        raise self.error(f"unexpected {t.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# Sort inference


class _Sorts:
    """Union-find over sort keys; concrete sorts are plain strings."""

    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, k):
        while self.parent.get(k, k) != k:
            k = self.parent[k]
        return k

    def unify(self, a, b, tok: Optional[Token] = None) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if isinstance(ra, str) and isinstance(rb, str):
            raise ParseError(f"sort mismatch: {ra} vs {rb}", tok.line if tok else 0, tok.col if tok else 0)
        if isinstance(ra, str):
            ra, rb = rb, ra
        self.parent[ra] = rb

    def resolve(self, k) -> Optional[str]:
        r = self.find(k)
        return r if isinstance(r, str) else None


# ---------------------------------------------------------------------------
# Building typed terms and flattening


def _fold(t: Term) -> Term:
    """Fold arithmetic over literals into a single rational literal."""
    if isinstance(t, App) and t.symbol in ARITH_OPS and all(isinstance(a, Num) for a in t.args):
        vals = [a.value for a in t.args]
        if t.symbol == "neg":
            return Num(-vals[0])
        a, b = vals
        if t.symbol == "+":
            return Num(a + b)
        if t.symbol == "-":
            return Num(a - b)
        if t.symbol == "*":
            return Num(a * b)
        if b != 0:
            return Num(a / b)
    return t


def _has_arith(t: Term) -> bool:
    return isinstance(t, App) and (t.symbol in ARITH_OPS or any(_has_arith(a) for a in t.args))


class _Builder:
    """Turns raw syntax into typed terms, checks sorts and flattens."""

    def __init__(self, sig: Signature, fresh: Fresh, sorts: _Sorts, data_order=()) -> None:
        self.sig = sig
        self.fresh = fresh
        self.sorts = sorts
        self.scope: dict = {}

    # -- terms

    def term(self, r, arith: bool = False) -> Term:
        if isinstance(r, RVar):
            if r.name == "_":
                return self.fresh.var("")
            v = self.scope.get(r.name)
            if v is None:
                v = Var(self.fresh.next_id, r.name)
                self.fresh.next_id += 1
                self.scope[r.name] = v
            return v
        name, tok = r.name, r.tok
        if r.numeral and (arith or not self.sig.is_constructor(name)):
            return Num(Fraction(name))
        if name in _ARITH_NAMES or name == "neg":
            return _fold(App(name, tuple(self.term(a, True) for a in r.args)))
        decl = self.sig.constructors.get(name) or self.sig.functions.get(name)
        if decl is None:
            if self.sig.is_predicate(name):
                raise ParseError(f"predicate {name!r} used as a term", tok.line, tok.col)
            raise ParseError(f"unknown symbol {name!r}", tok.line, tok.col)
        if decl.arity != len(r.args):
            raise ParseError(f"{name} expects {decl.arity} arguments, got {len(r.args)}", tok.line, tok.col)
        return App(name, tuple(self.term(a) for a in r.args))

    def sort_of(self, t: Term, tok: Token):
        s = self.sorts
        if isinstance(t, Var):
            return ("var", t.id)
        if isinstance(t, Num):
            return NUM_SORT
        if t.symbol in ARITH_OPS:
            for a in t.args:
                s.unify(self.sort_of(a, tok), NUM_SORT, tok)
            return NUM_SORT
        if self.sig.is_constructor(t.symbol):
            decl = self.sig.constructors[t.symbol]
            for a, srt in zip(t.args, decl.arg_sorts):
                s.unify(self.sort_of(a, tok), srt, tok)
            return decl.result_sort
        for i, a in enumerate(t.args):
            s.unify(self.sort_of(a, tok), ("farg", t.symbol, i), tok)
        return ("fres", t.symbol)

    def atom_sorts(self, atom: App, tok: Token) -> None:
        for i, a in enumerate(atom.args):
            self.sorts.unify(self.sort_of(a, tok), ("parg", atom.symbol, i), tok)

    # -- constraints (typed, possibly hybrid)

    def constraint(self, rc: RCons, default_eq: Domain) -> Constraint:
        tok = rc.tok
        if rc.kind == "atom":
            r = rc.lhs
            if isinstance(r, RSym) and not r.numeral and r.name in ("true", "false") and not r.args:
                return Constraint(None, r.name, ())
            if not isinstance(r, RSym) or not self.sig.is_predicate(r.name):
                what = r.name if isinstance(r, RSym) else r.name
                if isinstance(r, RSym) and not self.sig.is_function(r.name) and not self.sig.is_constructor(r.name):
                    raise ParseError(f"unknown symbol {what!r}", tok.line, tok.col)
                raise ParseError(f"expected a constraint, found term {what!r}", tok.line, tok.col)
            decl = self.sig.predicates[r.name]
            if decl.arity != len(r.args):
                raise ParseError(f"{r.name} expects {decl.arity} arguments, got {len(r.args)}", tok.line, tok.col)
            atom = App(r.name, tuple(self.term(a) for a in r.args))
            self.atom_sorts(atom, tok)
            return Constraint(Domain.LP, r.name, atom.args)
        if rc.kind == "in":
            x = self.term(rc.lhs, True)
            self.sorts.unify(self.sort_of(x, tok), NUM_SORT, tok)
            return Constraint(Domain.FD, "in", (x,) + tuple(Num(v) for v in rc.values))
        tag = {"fl": Domain.FL, "l": Domain.LP, "a": Domain.ARITH, "fd": Domain.FD}.get(rc.suffix)
        numeric = tag in (Domain.ARITH, Domain.FD) or rc.rel != "="
        lhs = self.term(rc.lhs, numeric)
        rhs = self.term(rc.rhs, numeric)
        if tag is None:
            if rc.rel != "=" or _has_arith(lhs) or _has_arith(rhs):
                tag = Domain.ARITH
            else:
                tag = default_eq
        if tag in (Domain.ARITH, Domain.FD):
            self.sorts.unify(self.sort_of(lhs, tok), NUM_SORT, tok)
            self.sorts.unify(self.sort_of(rhs, tok), NUM_SORT, tok)
        else:
            if rc.rel != "=":
                raise ParseError(f"{rc.rel} is not a {tag.name} relation", tok.line, tok.col)
            self.sorts.unify(self.sort_of(lhs, tok), self.sort_of(rhs, tok), tok)
        return Constraint(tag, rc.rel, (lhs, rhs))


class Flattener:
    """Splits hybrid constraints into homogeneous ones with auxiliary variables.

    Extraction is leftmost-innermost, and extracted producers precede the
    constraint that consumes them.
    """

    def __init__(self, sig: Signature, fresh: Fresh, sorts: Optional[_Sorts] = None) -> None:
        self.sig = sig
        self.fresh = fresh
        self.sorts = sorts

    def _aux(self, sort_key=None) -> Var:
        sort = self.sorts.resolve(sort_key) if (self.sorts and sort_key is not None) else None
        if isinstance(sort_key, str):
            sort = sort_key
        return self.fresh.var("", sort)

    def _is_call(self, t: Term) -> bool:
        return isinstance(t, App) and self.sig.is_function(t.symbol)

    def _is_arith(self, t: Term) -> bool:
        return isinstance(t, App) and t.symbol in ARITH_OPS

    def cterm(self, t: Term, out: list) -> Term:
        """Constructor-term position: every call and arithmetic op is extracted."""
        if isinstance(t, (Var, Num)):
            return t
        if self._is_arith(t):
            v = self._aux(NUM_SORT)
            out.append(Constraint(Domain.ARITH, "=", (v, self.arith(t, out))))
            return v
        args = tuple(self.cterm(a, out) for a in t.args)
        if self.sig.is_function(t.symbol):
            v = self._aux(("fres", t.symbol))
            out.append(Constraint(Domain.FL, "=", (v, App(t.symbol, args))))
            return v
        return App(t.symbol, args)

    def call(self, t: Term, out: list) -> Term:
        """Right-hand side of an FL equality: one outermost call is allowed."""
        if self._is_call(t):
            return App(t.symbol, tuple(self.cterm(a, out) for a in t.args))
        return self.cterm(t, out)

    def arith(self, t: Term, out: list) -> Term:
        if isinstance(t, (Var, Num)):
            return t
        if self._is_arith(t):
            return _fold(App(t.symbol, tuple(self.arith(a, out) for a in t.args)))
        if self._is_call(t):
            return self.cterm(t, out)
        raise ParseError(f"constructor term {format_term(t)} in arithmetic context")

    def _var_of(self, t: Term, out: list) -> Term:
        t = self.arith(t, out)
        if isinstance(t, (Var, Num)):
            return t
        v = self._aux(NUM_SORT)
        out.append(Constraint(Domain.ARITH, "=", (v, t)))
        return v

    def flatten(self, c: Constraint) -> list:
        out: list = []
        if c.tag is None:
            return [] if c.rel == "true" else [FALSE]
        if c.tag is Domain.LP and c.rel != "=":
            args = tuple(self.cterm(a, out) for a in c.args)
            out.append(Constraint(Domain.LP, c.rel, args))
            return out
        if c.tag is Domain.FD:
            if c.rel == "in":
                x = self._var_of(c.args[0], out)
                out.append(Constraint(Domain.FD, "in", (x,) + c.args[1:]))
            else:
                lhs = self._var_of(c.args[0], out)
                rhs = self._var_of(c.args[1], out)
                for side in (lhs, rhs):
                    if isinstance(side, Num) and not side.is_integer:
                        raise ParseError(f"finite-domain constant {format_term(side)} is not an integer")
                out.append(Constraint(Domain.FD, c.rel, (lhs, rhs)))
            return out
        if c.tag is Domain.ARITH:
            lhs = self.arith(c.args[0], out)
            rhs = self.arith(c.args[1], out)
            out.append(Constraint(Domain.ARITH, c.rel, (lhs, rhs)))
            return out
        # FL or LP equality
        tag = c.tag
        lhs, rhs = c.args
        if not isinstance(lhs, Var) and isinstance(rhs, Var):
            lhs, rhs = rhs, lhs
        if isinstance(lhs, Var):
            if self._is_arith(rhs):
                out.append(Constraint(Domain.ARITH, "=", (lhs, self.arith(rhs, out))))
            elif tag is Domain.FL:
                out.append(Constraint(tag, "=", (lhs, self.call(rhs, out))))
            else:
                out.append(Constraint(tag, "=", (lhs, self.cterm(rhs, out))))
            return out
        if not (self._is_call(lhs) or self._is_arith(lhs)) and (self._is_call(rhs) or self._is_arith(rhs)):
            lhs, rhs = rhs, lhs
        if self._is_call(lhs) or self._is_arith(lhs):
            y = self.cterm(lhs, out)
            if tag is Domain.FL:
                out.append(Constraint(tag, "=", (y, self.call(rhs, out))))
            else:
                out.append(Constraint(tag, "=", (y, self.cterm(rhs, out))))
            return out
        left = self.cterm(lhs, out)
        right = self.cterm(rhs, out)
        v = self._aux()
        out.append(Constraint(tag, "=", (v, left)))
        out.append(Constraint(tag, "=", (v, right)))
        return out

    def flatten_all(self, cs: Iterable[Constraint]) -> list:
        out = []
        for c in cs:
            out.extend(self.flatten(c))
        return out


def flatten_constraint(c: Constraint, sig: Signature, fresh: Fresh) -> list:
    """Flatten one (possibly hybrid) constraint into homogeneous constraints."""
    return Flattener(sig, fresh).flatten(c)


# ---------------------------------------------------------------------------
# Entry points


def _validate_pattern(t: Term, sig: Signature, seen: set, tok: Token) -> None:
    if isinstance(t, Var):
        if t in seen:
            raise ParseError(f"non-linear pattern: {t} occurs twice", tok.line, tok.col)
        seen.add(t)
    elif isinstance(t, App):
        if sig.is_function(t.symbol):
            raise ParseError(f"defined function in pattern: {t.symbol}", tok.line, tok.col)
        if t.symbol in ARITH_OPS:
            raise ParseError("arithmetic in pattern", tok.line, tok.col)
        for a in t.args:
            _validate_pattern(a, sig, seen, tok)


def _with_sorts(t, sorts: _Sorts):
    """Rebuild variables so each carries its inferred sort."""
    mapping = {v: Var(v.id, v.name, sorts.resolve(("var", v.id)), v.aux) for v in iter_vars(t)}
    return rename(t, mapping)


def _sorted_constraint(c: Constraint, sorts: _Sorts) -> Constraint:
    return Constraint(c.tag, c.rel, tuple(_with_sorts(a, sorts) for a in c.args))


def parse_program(text: str) -> Program:
    """Parse a program text into rules, clauses and a signature."""
    stmts = _Parser(text).statements()
    constructors: dict = {}
    data = []
    sorts_declared = {NUM_SORT}
    for st in stmts:
        if st[0] == "data":
            sorts_declared.add(st[2])
    for st in stmts:
        if st[0] != "data":
            continue
        _, tok, sort, alts = st
        for name, arg_sorts, ctok in alts:
            if name in constructors:
                raise ParseError(f"constructor {name!r} declared twice", ctok.line, ctok.col)
            for s in arg_sorts:
                if s not in sorts_declared:
                    raise ParseError(f"unknown sort {s!r}", ctok.line, ctok.col)
            constructors[name] = OpDecl(name, arg_sorts, sort)
        data.append((sort, tuple((n, a) for n, a, _ in alts)))

    functions: dict = {}
    predicates: dict = {}
    for st in stmts:
        if st[0] == "data":
            continue
        head = st[2]
        if not isinstance(head, RSym) or head.numeral or head.name in _ARITH_NAMES or head.name == "neg":
            tok = head.tok
            raise ParseError("rule head must be a function or predicate application", tok.line, tok.col)
        table, other = (functions, predicates) if st[0] == "rule" else (predicates, functions)
        if head.name in constructors:
            tok = head.tok
            if st[0] == "rule":
                raise ParseError(f"constructor {head.name!r} cannot head a rule", tok.line, tok.col)
            raise ParseError(f"constructor {head.name!r} cannot head a clause", tok.line, tok.col)
        if head.name in other:
            tok = head.tok
            raise ParseError(f"{head.name!r} used as both function and predicate", tok.line, tok.col)
        prev = table.get(head.name)
        if prev is not None and prev.arity != len(head.args):
            tok = head.tok
            raise ParseError(f"{head.name} defined with different arities", tok.line, tok.col)
        table[head.name] = OpDecl(head.name, (None,) * len(head.args))

    sig = Signature(frozenset(sorts_declared), constructors, functions, predicates)
    sorts = _Sorts()
    fresh = Fresh(1)
    typed = []
    for st in stmts:
        if st[0] == "data":
            continue
        b = _Builder(sig, fresh, sorts)
        if st[0] == "rule":
            _, tok, rhead, rrhs, rguard = st
            lhs = b.term(rhead)
            rhs = b.term(rrhs)
            _validate_pattern_args(lhs, sig, rhead.tok)
            guard = [b.constraint(g, Domain.FL) for g in rguard]
            bound = term_vars(lhs).union(*(c.vars() for c in guard))
            loose = term_vars(rhs) - bound
            if loose:
                names = ", ".join(sorted(str(v) for v in loose))
                raise ParseError(f"right-hand side variables not bound by head or guard: {names}", tok.line, tok.col)
            sorts.unify(b.sort_of(lhs, tok), b.sort_of(rhs, tok), tok)
            typed.append(("rule", tok, lhs, rhs, guard))
        else:
            _, tok, rhead, rbody = st
            head = App(rhead.name, tuple(b.term(a) for a in rhead.args))
            b.atom_sorts(head, tok)
            body = [b.constraint(g, Domain.LP) for g in rbody]
            typed.append(("clause", tok, head, body))

    # resolve inferred signatures
    functions = {
        f: OpDecl(f, tuple(sorts.resolve(("farg", f, i)) for i in range(d.arity)), sorts.resolve(("fres", f)))
        for f, d in functions.items()
    }
    predicates = {
        p: OpDecl(p, tuple(sorts.resolve(("parg", p, i)) for i in range(d.arity)))
        for p, d in predicates.items()
    }
    sig = Signature(frozenset(sorts_declared), constructors, functions, predicates)
    flat = Flattener(sig, fresh, sorts)
    fl_rules, lp_clauses = [], []
    for st in typed:
        if st[0] == "rule":
            _, tok, lhs, rhs, guard = st
            out: list = []
            guard_flat = flat.flatten_all(guard)
            rhs_flat = flat.call(rhs, out)
            lhs = _with_sorts(lhs, sorts)
            rhs_flat = _with_sorts(rhs_flat, sorts)
            cs = tuple(_sorted_constraint(c, sorts) for c in guard_flat + out)
            fl_rules.append(FLRule(lhs, rhs_flat, cs, tok.line))
        else:
            _, tok, head, body = st
            body_flat = flat.flatten_all(body)
            lp_clauses.append(
                LPClause(_with_sorts(head, sorts), tuple(_sorted_constraint(c, sorts) for c in body_flat), tok.line)
            )
    return Program(sig, tuple(fl_rules), tuple(lp_clauses), tuple(data), fresh.next_id)


def _validate_pattern_args(lhs: Term, sig: Signature, tok: Token) -> None:
    if not isinstance(lhs, App) or not sig.is_function(lhs.symbol):
        raise ParseError("rule head must apply a defined function", tok.line, tok.col)
    seen: set = set()
    for a in lhs.args:
        _validate_pattern(a, sig, seen, tok)


@dataclass(frozen=True)
class Goal:
    constraints: tuple
    variables: tuple  # user variables in order of appearance
    next_var_id: int


def parse_goal_full(text: str, program: Program) -> Goal:
    p = _Parser(text)
    raw = [] if p.tok.kind == "eof" else p.constraint_list()
    if p.at("."):
        p.take(".")
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after goal")
    sorts = _Sorts()
    fresh = Fresh(program.next_var_id)
    b = _Builder(program.signature, fresh, sorts)
    _unify_known_sorts(b, p.tok, program.signature)
    typed = [b.constraint(rc, Domain.FL) for rc in raw]
    user_vars = tuple(b.scope.values())
    flat = Flattener(program.signature, fresh, sorts).flatten_all(typed)
    flat = [_sorted_constraint(c, sorts) for c in flat]
    user_vars = tuple(_with_sorts(v, sorts) for v in user_vars)
    return Goal(tuple(flat), user_vars, fresh.next_id)


def _unify_known_sorts(b: _Builder, tok: Token, sig: Signature) -> None:
    # tie function/predicate argument keys to the program's inferred sorts
    for key_kind, table in (("farg", sig.functions), ("parg", sig.predicates)):
        for name, decl in table.items():
            for i, s in enumerate(decl.arg_sorts):
                if s is not None:
                    b.sorts.unify((key_kind, name, i), s, tok)
    for name, decl in sig.functions.items():
        if decl.result_sort is not None:
            b.sorts.unify(("fres", name), decl.result_sort, tok)


def parse_goal(text: str, program: Program) -> list:
    """Parse and flatten a goal into the initial constraint pool."""
    return list(parse_goal_full(text, program).constraints)


# ---------------------------------------------------------------------------
# Pretty printing


def format_constraint(c: Constraint) -> str:
    if c.tag is None:
        return c.rel
    if c.rel == "in":
        vals = ", ".join(format_term(a) for a in c.args[1:])
        return f"{format_term(c.args[0])} in {{{vals}}}"
    if c.tag is Domain.LP and c.rel != "=":
        return format_term(App(c.rel, c.args))
    lhs, rhs = c.args
    return f"{format_term(lhs)} {c.rel}{c.tag.value} {format_term(rhs)}"


def format_program(program: Program) -> str:
    lines = []
    for sort, alts in program.data:
        parts = [f"{n}({', '.join(a)})" if a else n for n, a in alts]
        lines.append(f"data {sort} = {' | '.join(parts)}.")
    lines.extend(str(r) for r in program.fl_rules)
    lines.extend(str(c) for c in program.lp_clauses)
    return "\n".join(lines) + "\n"
