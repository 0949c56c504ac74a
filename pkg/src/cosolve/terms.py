"""Terms, signatures, substitutions and unification.

Everything exchanged between the solvers is built from these values. All of
them are immutable, so configurations can share them freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

NUM_SORT = "num"

# Symbols with arithmetic meaning. They never name constructors or functions.
ARITH_OPS = frozenset({"+", "-", "*", "/", "neg"})


@dataclass(frozen=True)
class Var:
    """A logic variable. Identity is the integer id; the name is for display."""

    id: int
    name: str = field(default="", compare=False)
    sort: Optional[str] = field(default=None, compare=False)
    aux: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return self.name or f"_{self.id}"

    def __repr__(self) -> str:
        return f"Var({self.name or '_'}#{self.id})"


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Num:
    """An exact rational literal. Integers are rationals with denominator 1."""

    value: Fraction

    def __init__(self, value) -> None:
        object.__setattr__(self, "value", Fraction(value))

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, App, Num]


def const(name: str) -> App:
    return App(name, ())


def is_ground(t: Term) -> bool:
    return not any(True for _ in iter_vars(t))


def iter_vars(t: Term) -> Iterator[Var]:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            yield s
        elif isinstance(s, App):
            stack.extend(reversed(s.args))


def term_vars(*terms: Term) -> frozenset:
    out = set()
    for t in terms:
        out.update(iter_vars(t))
    return frozenset(out)


def ordered_vars(*terms: Term) -> list:
    """Variables in left-to-right first-occurrence order."""
    seen: dict = {}
    for t in terms:
        for v in iter_vars(t):
            seen.setdefault(v, None)
    return list(seen)


def symbols(t: Term) -> Iterator[str]:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            yield s.symbol
            stack.extend(s.args)


def term_depth(t: Term) -> int:
    if isinstance(t, App) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


def _fmt_num(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3}


def format_term(t: Term, parent: int = 0) -> str:
    if isinstance(t, Var):
        return str(t)
    if isinstance(t, Num):
        s = _fmt_num(t.value)
        if (t.value < 0 or t.value.denominator != 1) and parent > 0:
            return f"({s})"
        return s
    if t.symbol in ARITH_OPS and len(t.args) == (1 if t.symbol == "neg" else 2):
        prec = _PREC[t.symbol]
        if t.symbol == "neg":
            s = "-" + format_term(t.args[0], prec)
        else:
            left = format_term(t.args[0], prec)
            # right operand of - and / needs parentheses at equal precedence
            right = format_term(t.args[1], prec + (t.symbol in "-/"))
            s = f"{left} {t.symbol} {right}" if prec == 1 else f"{left}{t.symbol}{right}"
        return f"({s})" if prec < parent or (parent and prec == parent and t.symbol == "neg") else s
    if not t.args:
        return t.symbol
    return f"{t.symbol}({', '.join(format_term(a) for a in t.args)})"


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class OpDecl:
    name: str
    arg_sorts: tuple
    result_sort: Optional[str] = None

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class Signature:
    """Sorts plus constructor, defined-function and predicate declarations.

    Argument sorts of defined functions and predicates may be ``None`` when
    nothing pins them down.
    """

    sorts: frozenset = frozenset({NUM_SORT})
    constructors: Mapping = field(default_factory=dict)
    functions: Mapping = field(default_factory=dict)
    predicates: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        clash = set(self.constructors) & set(self.functions)
        if clash:
            raise ValueError(f"symbols both constructor and defined function: {sorted(clash)}")

    def is_constructor(self, name: str) -> bool:
        return name in self.constructors

    def is_function(self, name: str) -> bool:
        return name in self.functions

    def is_predicate(self, name: str) -> bool:
        return name in self.predicates or name in ("true", "false")


def contains_defined_function(t: Term, sig: Signature) -> tuple:
    """Return ``(found, symbol)`` for the outermost defined function in ``t``.

    Outermost means the first one met in a breadth-first walk from the root.
    """
    frontier = [t]
    while frontier:
        nxt = []
        for s in frontier:
            if isinstance(s, App):
                if sig.is_function(s.symbol):
                    return True, s.symbol
                nxt.extend(s.args)
        frontier = nxt
    return False, None


def is_constructor_term(t: Term, sig: Signature) -> bool:
    return not contains_defined_function(t, sig)[0]


# ---------------------------------------------------------------------------
# Substitutions


class Substitution:
    """A finite map from variables to terms, written as equations ``x = t``.

    Trivial bindings ``x = x`` are dropped on construction.
    """

    __slots__ = ("_map", "_hash", "_range")

    def __init__(self, bindings: Union[Mapping, Iterable, None] = None) -> None:
        items = bindings.items() if isinstance(bindings, Mapping) else (bindings or ())
        self._map = {v: t for v, t in items if t != v}
        self._hash = None
        self._range = None

    def __getitem__(self, v: Var) -> Term:
        return self._map[v]

    def get(self, v: Var, default=None):
        return self._map.get(v, default)

    def __contains__(self, v) -> bool:
        return v in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    def items(self):
        return self._map.items()

    def domain(self) -> frozenset:
        return frozenset(self._map)

    def range_vars(self) -> frozenset:
        if self._range is None:
            self._range = term_vars(*self._map.values())
        return self._range

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{v} = {format_term(t)}" for v, t in self.sorted_items()) + "}"

    def sorted_items(self) -> list:
        return sorted(self._map.items(), key=lambda kv: (str(kv[0]), kv[0].id))

    def apply(self, t: Term) -> Term:
        if not self._map:
            return t
        return _apply(self._map, t)

    __call__ = apply

    def restrict(self, vs: Iterable[Var]) -> "Substitution":
        return Substitution({v: self._map[v] for v in vs if v in self._map})

    def compose(self, inner: "Substitution") -> "Substitution":
        """``self ∘ inner``: apply ``inner`` first, then ``self``."""
        out = {v: self.apply(t) for v, t in inner.items()}
        for v, t in self._map.items():
            if v not in inner:
                out[v] = t
        return Substitution(out)

    def is_idempotent(self) -> bool:
        dom = self._map.keys()
        return not any(v in dom for t in self._map.values() for v in iter_vars(t))

    def parallel(self, other: "Substitution") -> Optional["Substitution"]:
        """Parallel composition: the mgu of both equation sets, or None."""
        try:
            return Unifier(self).extend(other.items()).result()
        except UnificationError:
            return None

    def equations(self) -> list:
        return self.sorted_items()


def _apply(m: Mapping, t: Term) -> Term:
    if isinstance(t, Var):
        return m.get(t, t)
    if isinstance(t, App) and t.args:
        args = tuple(_apply(m, a) for a in t.args)
        if args != t.args:
            return App(t.symbol, args)
    return t


def apply(s: Substitution, t: Term) -> Term:
    return s.apply(t)


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    return outer.compose(inner)


# ---------------------------------------------------------------------------
# Unification


class UnificationError(Exception):
    """Raised internally when no unifier exists.

    ``reason`` is ``"clash"`` for a symbol mismatch and ``"occurs"`` for an
    occurs-check violation.
    """

    def __init__(self, reason: str, left: Term, right: Term) -> None:
        super().__init__(f"{reason}: {format_term(left)} vs {format_term(right)}")
        self.reason = reason
        self.left = left
        self.right = right


class Unifier:
    """Incremental most-general-unifier construction.

    The binding map is kept idempotent after every step. Variable-variable
    ties bind the later-created variable (higher id) to the earlier one.
    """

    def __init__(self, start: Optional[Substitution] = None) -> None:
        self.bindings: dict = dict(start.items()) if start else {}

    def walk(self, t: Term) -> Term:
        return _apply(self.bindings, t)

    def extend(self, pairs: Iterable) -> "Unifier":
        for a, b in pairs:
            self.unify(a, b)
        return self

    def unify(self, a: Term, b: Term) -> None:
        stack = [(self.walk(a), self.walk(b))]
        while stack:
            s, t = stack.pop()
            if s == t:
                continue
            if isinstance(s, Var) and isinstance(t, Var):
                if s.id > t.id:
                    self._bind(s, t)
                else:
                    self._bind(t, s)
            elif isinstance(s, Var):
                self._bind(s, t)
            elif isinstance(t, Var):
                self._bind(t, s)
            elif isinstance(s, App) and isinstance(t, App):
                if s.symbol != t.symbol or len(s.args) != len(t.args):
                    raise UnificationError("clash", s, t)
                for x, y in zip(reversed(s.args), reversed(t.args)):
                    stack.append((x, y))
            else:
                # Num vs Num with different values, or Num vs App
                raise UnificationError("clash", s, t)
            # later pairs must see the new binding
            stack = [(self.walk(x), self.walk(y)) for x, y in stack]

    def _bind(self, v: Var, t: Term) -> None:
        if any(u == v for u in iter_vars(t)):
            raise UnificationError("occurs", v, t)
        single = {v: t}
        for k, r in list(self.bindings.items()):
            self.bindings[k] = _apply(single, r)
        self.bindings[v] = t

    def result(self) -> Substitution:
        return Substitution(self.bindings)


def mgu(pairs: Iterable) -> Substitution:
    """Most general unifier of a set of equations. Raises UnificationError."""
    return Unifier().extend(pairs).result()


def unify(t1: Term, t2: Term) -> Optional[Substitution]:
    try:
        return mgu([(t1, t2)])
    except UnificationError:
        return None


def unify_explain(t1: Term, t2: Term) -> tuple:
    """Like :func:`unify` but also reports why unification failed."""
    try:
        return mgu([(t1, t2)]), None
    except UnificationError as exc:
        return None, exc.reason


def parallel_compose(s1: Substitution, s2: Substitution) -> Optional[Substitution]:
    return s1.parallel(s2)


def rename(t: Term, mapping: Mapping) -> Term:
    return _apply(mapping, t)
