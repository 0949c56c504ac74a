"""Basic constraints, disjunctive residues and the tell result record."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable

from .terms import Num, Term, Var, format_term, term_vars


class Domain(enum.Enum):
    FL = "fl"
    LP = "l"
    FD = "fd"
    ARITH = "a"

    def __str__(self) -> str:
        return self.name


class ConfigurationError(Exception):
    """A constraint reached a solver it cannot belong to (not a failure)."""


@dataclass(frozen=True)
class Constraint:
    """A homogeneous basic constraint.

    ``rel`` is ``"="`` for equalities, a comparison (``"<="``, ``"<"``,
    ``">="``, ``">"``), ``"in"`` for FD membership (``args = (X, n1, n2,
    ...)``), a predicate name for LP atoms, or ``"false"``.
    """

    tag: Any  # Domain, or None for the distinguished ``false``
    rel: str
    args: tuple = ()

    def vars(self) -> frozenset:
        vs = self.__dict__.get("_vars")
        if vs is None:
            vs = term_vars(*self.args)
            object.__setattr__(self, "_vars", vs)
        return vs

    def is_false(self) -> bool:
        return self.rel == "false"

    def __str__(self) -> str:
        if self.rel == "false":
            return "false"
        if self.rel == "in":
            vals = ", ".join(format_term(a) for a in self.args[1:])
            return f"{format_term(self.args[0])} in {{{vals}}}"
        if self.tag is Domain.LP and self.rel not in COMPARISONS:
            inner = ", ".join(format_term(a) for a in self.args)
            return f"{self.rel}({inner})" if self.args else self.rel
        lhs, rhs = self.args
        return f"{format_term(lhs)} {self.rel}{self.tag.value} {format_term(rhs)}"


COMPARISONS = frozenset({"=", "<=", "<", ">=", ">"})

FALSE = Constraint(None, "false", ())


def eq(tag: Domain, lhs: Term, rhs: Term) -> Constraint:
    return Constraint(tag, "=", (lhs, rhs))


def member(v: Term, values: Iterable[int]) -> Constraint:
    return Constraint(Domain.FD, "in", (v,) + tuple(Num(x) for x in sorted(set(values))))


def substitute(c: Constraint, subst) -> Constraint:
    if not c.args:
        return c
    args = tuple(subst.apply(a) for a in c.args)
    return c if args == c.args else Constraint(c.tag, c.rel, args)


def retag(c: Constraint, tag: Domain) -> Constraint:
    return Constraint(tag, c.rel, c.args)


@dataclass(frozen=True)
class Disjunction:
    """A disjunction of conjunctions of basic constraints.

    A single disjunct is a plain conjunction; ``((),)`` is ``true`` and
    ``((FALSE,),)`` is ``false``.
    """

    disjuncts: tuple

    def __post_init__(self) -> None:
        if not self.disjuncts:
            raise ValueError("a disjunction needs at least one disjunct")

    @classmethod
    def conj(cls, constraints: Iterable[Constraint]) -> "Disjunction":
        return cls((tuple(constraints),))

    @classmethod
    def of(cls, disjuncts: Iterable[Iterable[Constraint]]) -> "Disjunction":
        return cls(tuple(tuple(d) for d in disjuncts))

    @property
    def is_true(self) -> bool:
        return self.disjuncts == ((),)

    @property
    def is_false(self) -> bool:
        return all(any(c.is_false() for c in d) for d in self.disjuncts)

    def __len__(self) -> int:
        return len(self.disjuncts)

    def __str__(self) -> str:
        if self.is_true:
            return "true"
        parts = []
        for d in self.disjuncts:
            body = " ∧ ".join(str(c) for c in d) or "true"
            parts.append(f"({body})" if len(self.disjuncts) > 1 and len(d) > 1 else body)
        return " ∨ ".join(parts)


TRUE_DC = Disjunction(((),))
FALSE_DC = Disjunction(((FALSE,),))


@dataclass(frozen=True)
class TellResult:
    success: bool
    store: Any
    residue: Disjunction

    @classmethod
    def fail(cls, store) -> "TellResult":
        return cls(False, store, FALSE_DC)

    @classmethod
    def ok(cls, store, residue: Disjunction = TRUE_DC) -> "TellResult":
        return cls(True, store, residue)


class Fresh:
    """Monotone source of fresh variables.

    The engine seeds one from a configuration's counter before each step and
    reads ``next_id`` back afterwards.
    """

    def __init__(self, next_id: int) -> None:
        self.next_id = next_id

    def var(self, base: str = "", sort=None) -> Var:
        v = Var(self.next_id, f"{base}_{self.next_id}", sort, True)
        self.next_id += 1
        return v

    def rename_apart(self, variables: Iterable[Var]) -> dict:
        return {v: self.var(v.name.split("_")[0], v.sort) for v in variables}
