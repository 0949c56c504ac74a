"""The meta solver: a constraint pool, one store per solver, and a search
over configurations driven by propagation (tell) and projection (proj).
"""
from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .constraints import ConfigurationError, Constraint, Domain, Fresh
from .frontend import Goal, Program, format_constraint, parse_goal_full
from .solvers import ArithSolver, ArithStore, FDSolver, FDStore, FLSolver, LPSolver, SubstStore
from .solvers.fd import format_domain, strong_size
from .terms import Num, Substitution, Term, Var, format_term, ordered_vars, term_vars

DOMAINS = (Domain.FL, Domain.LP, Domain.FD, Domain.ARITH)
DEFAULT_PRIORITY = (Domain.FL, Domain.LP, Domain.ARITH, Domain.FD)

# weak projection rounds: language stores first, then arithmetic into FD and back
PROJECTION_PAIRS = (
    (Domain.FL, Domain.LP),
    (Domain.FL, Domain.FD),
    (Domain.FL, Domain.ARITH),
    (Domain.LP, Domain.FL),
    (Domain.LP, Domain.FD),
    (Domain.LP, Domain.ARITH),
    (Domain.ARITH, Domain.FD),
    (Domain.ARITH, Domain.FL),
    (Domain.ARITH, Domain.LP),
    (Domain.FD, Domain.ARITH),
    (Domain.FD, Domain.FL),
    (Domain.FD, Domain.LP),
)
STRONG_TARGETS = (Domain.ARITH, Domain.FL, Domain.LP)

DEFAULT_BUDGET = 10_000


class Search(str, enum.Enum):
    DFS = "dfs"
    BFS = "bfs"


class Schedule(str, enum.Enum):
    WEAK_FIRST = "weak-first"
    STRONG_EARLY = "strong-early"
    STRONG_LATE = "strong-late"


@dataclass(frozen=True)
class Strategy:
    search: Search = Search.DFS
    projection: Schedule = Schedule.WEAK_FIRST
    max_steps: int = DEFAULT_BUDGET
    max_branches: int = DEFAULT_BUDGET
    max_strong_disjuncts: int = DEFAULT_BUDGET
    priority: tuple = DEFAULT_PRIORITY  # empty means plain FIFO

    def __post_init__(self) -> None:
        object.__setattr__(self, "search", Search(self.search))
        object.__setattr__(self, "projection", Schedule(self.projection))
        for name in ("max_steps", "max_branches", "max_strong_disjuncts"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name.replace('_', '-')} must be positive")


class Status(str, enum.Enum):
    SOLUTIONS = "SOLUTIONS"
    UNSATISFIABLE = "UNSATISFIABLE"
    UNKNOWN = "UNKNOWN"


BUDGET_EXHAUSTED = "budget-exhausted"
SUSPENDED_RESIDUE = "suspended-residue"


@dataclass(frozen=True)
class TraceEvent:
    step: int
    branch: int
    action: str
    text: str = ""
    delta: tuple = ()
    strong: int = 0  # number of disjuncts put into the pool by a strong projection

    def __str__(self) -> str:
        s = f"{self.step:>5} b{self.branch:<4} {self.action:<14} {self.text}"
        if self.delta:
            s += "  | " + "; ".join(self.delta)
        return s.rstrip()


@dataclass(frozen=True)
class Configuration:
    pool: tuple
    stores: Mapping
    suspended: tuple = ()
    emitted: frozenset = frozenset()
    next_id: int = 1
    branch: int = 0


@dataclass(frozen=True)
class Solution:
    bindings: tuple  # (name, Term) sorted by name
    stores: tuple = ()  # (domain, ((name, text), ...)) per store, user variables only
    residual: tuple = ()  # remaining domain or interval facts on user variables

    def binding_map(self) -> dict:
        return dict(self.bindings)

    def __str__(self) -> str:
        parts = [f"{n} = {format_term(t)}" for n, t in self.bindings]
        s = "{" + ", ".join(parts) + "}"
        if self.residual:
            s += " where " + ", ".join(self.residual)
        return s


@dataclass(frozen=True)
class Outcome:
    status: Status
    solutions: tuple = ()
    reason: Optional[str] = None
    steps: int = 0
    branches: int = 1
    strong_disjuncts: int = 0
    trace: tuple = ()
    elapsed: float = 0.0

    @property
    def complete(self) -> bool:
        return self.reason is None


class _Stop(Exception):
    pass


def default_registry(program: Program, strategy: Strategy) -> dict:
    return {
        Domain.FL: FLSolver(program),
        Domain.LP: LPSolver(program),
        Domain.FD: FDSolver(strategy.max_strong_disjuncts),
        Domain.ARITH: ArithSolver(),
    }


def _key(v: Var):
    return (str(v), v.id)


def changed_vars(old, new) -> frozenset:
    """Variables whose information differs between two stores of one solver."""
    if old is new:
        return frozenset()
    if isinstance(old, SubstStore):
        a, b = old.subst, new.subst
        return frozenset(v for v in a.domain() | b.domain() if a.get(v) != b.get(v))
    if isinstance(old, FDStore):
        vs = old.variables() | new.variables()
        return frozenset(v for v in vs if old.domain(v) != new.domain(v) or old.find(v) != new.find(v))
    if isinstance(old, ArithStore):
        out = {v for v in old.variables() | new.variables() if old.interval(v) != new.interval(v)}
        for r in new.relations[len(old.relations):]:
            out |= r.vars()
        return frozenset(out)
    return frozenset()


def _store_lines(store) -> list:
    return list(store.lines()) if hasattr(store, "lines") else [str(store)]


def _delta(old, new) -> tuple:
    if old is new:
        return ()
    before = set(_store_lines(old))
    return tuple(line for line in _store_lines(new) if line not in before and line != "true")


class Engine:
    """Explores the configuration tree for one program under one strategy."""

    def __init__(
        self,
        program: Program,
        strategy: Strategy = Strategy(),
        registry: Optional[Mapping] = None,
        trace: bool = False,
        on_event: Optional[Callable[[TraceEvent], None]] = None,
    ) -> None:
        self.program = program
        self.strategy = strategy
        self.registry = dict(registry) if registry is not None else default_registry(program, strategy)
        self.tracing = trace or on_event is not None
        self.on_event = on_event
        self.events: list = []
        self.steps = 0
        self.branches = 1
        self.strong_disjuncts = 0

    # -- helpers ----------------------------------------------------------

    def _emit(self, branch: int, action: str, text: str = "", delta: tuple = (), strong: int = 0) -> None:
        if not self.tracing:
            return
        ev = TraceEvent(self.steps, branch, action, text, delta, strong)
        self.events.append(ev)
        if self.on_event is not None:
            self.on_event(ev)

    def solver(self, tag) -> object:
        if tag not in self.registry:
            raise ConfigurationError(f"no solver registered for domain {tag}")
        return self.registry[tag]

    def initial(self, constraints: Sequence[Constraint], next_id: int) -> Configuration:
        stores = {d: s.empty_store() for d, s in self.registry.items()}
        return Configuration(tuple(constraints), stores, next_id=next_id)

    def choose(self, pool: tuple) -> int:
        if any(c.is_false() for c in pool):
            return next(i for i, c in enumerate(pool) if c.is_false())
        for tag in self.strategy.priority:
            for i, c in enumerate(pool):
                if c.tag is tag:
                    return i
        return 0

    def _split(self, cfg: Configuration, pools: list) -> list:
        """Successor configurations, one per pool; new branch ids after the first."""
        if len(pools) == 1:
            return [replace(cfg, pool=pools[0])]
        out = []
        for p in pools:
            if self.branches >= self.strategy.max_branches:
                raise _Stop
            out.append(replace(cfg, pool=p, branch=self.branches))
            self.branches += 1
        return out

    # -- propagation ------------------------------------------------------

    def propagate_step(self, cfg: Configuration, index: Optional[int] = None) -> list:
        """Tell one pool constraint to its solver. Returns the successors (empty on failure)."""
        if index is None:
            index = self.choose(cfg.pool)
        c = cfg.pool[index]
        rest = cfg.pool[:index] + cfg.pool[index + 1:]
        if c.is_false():
            self._emit(cfg.branch, "FAIL", "false")
            return []
        solver = self.solver(c.tag)
        old = cfg.stores[c.tag]
        fresh = Fresh(cfg.next_id)
        result = solver.tell(c, old, fresh)
        label = f"TELL {c.tag}"
        if not result.success:
            self._emit(cfg.branch, label, format_constraint(c))
            self._emit(cfg.branch, "FAIL", format_constraint(c))
            return []
        new = result.store
        stores = cfg.stores
        suspended = cfg.suspended
        if new != old:
            stores = dict(cfg.stores)
            stores[c.tag] = new
        else:
            new = old
        self._emit(cfg.branch, label, format_constraint(c), _delta(old, new) if self.tracing else ())
        cfg = replace(cfg, stores=stores, next_id=fresh.next_id)
        pool = rest
        if new is not old:
            touched = changed_vars(old, new) | c.vars()
            woken = [s for s in suspended if s.vars() & touched]
            if woken:
                suspended = tuple(s for s in suspended if s not in woken)
                for s in woken:
                    self._emit(cfg.branch, "WAKE", format_constraint(s))
                pool = pool + tuple(woken)
        residue = result.residue
        if residue.disjuncts == ((c,),):
            self._emit(cfg.branch, "SUSPEND", format_constraint(c))
            if c not in suspended:
                suspended = suspended + (c,)
            return [replace(cfg, pool=pool, suspended=suspended)]
        cfg = replace(cfg, suspended=suspended)
        if residue.is_true:
            return [replace(cfg, pool=pool)]
        if len(residue) > 1:
            self._emit(cfg.branch, f"SPLIT {len(residue)}", str(residue))
        return self._split(cfg, [pool + tuple(d) for d in residue.disjuncts])

    # -- projection -------------------------------------------------------

    def _shared(self, cfg: Configuration, src, tgt) -> frozenset:
        return self.solver(src).variables(cfg.stores[src]) & self.solver(tgt).variables(cfg.stores[tgt])

    def weak_round(self, cfg: Configuration) -> Optional[Configuration]:
        """One weak projection round over all solver pairs. ``None`` if nothing new."""
        added = []
        emitted = set(cfg.emitted)
        for src, tgt in PROJECTION_PAIRS:
            if src not in self.registry or tgt not in self.registry:
                continue
            shared = self._shared(cfg, src, tgt)
            if not shared:
                continue
            d = self.solver(src).project(shared, cfg.stores[src], tgt, False)
            if d.is_true:
                continue
            if len(d) != 1:
                raise ConfigurationError(f"weak projection {src}->{tgt} returned a disjunction")
            fresh_cs = []
            for c in d.disjuncts[0]:
                key = (src, tgt, c)
                if key in emitted:
                    continue
                emitted.add(key)
                fresh_cs.append(c)
            if fresh_cs:
                self._emit(cfg.branch, f"PROJ {src}->{tgt}", ", ".join(format_constraint(c) for c in fresh_cs))
                added.extend(fresh_cs)
        if not added:
            return None
        return replace(cfg, pool=cfg.pool + tuple(added), emitted=frozenset(emitted))

    def strong_round(self, cfg: Configuration) -> Optional[list]:
        """Strong finite-domain projection; ``None`` if it has nothing to add."""
        if Domain.FD not in self.registry:
            return None
        fd = self.solver(Domain.FD)
        store = cfg.stores[Domain.FD]
        # one split per store version: after it the chosen values reach the
        # other targets through weak projection
        version = (Domain.FD, "strong", store)
        if version in cfg.emitted:
            return None
        for tgt in STRONG_TARGETS:
            if tgt not in self.registry:
                continue
            shared = self._shared(cfg, Domain.FD, tgt)
            if not shared:
                continue
            size = strong_size(shared, store) if isinstance(store, FDStore) else 0
            if size > self.strategy.max_strong_disjuncts:
                self._emit(cfg.branch, f"PROJ FD->{tgt}", f"strong projection refused ({size} disjuncts)")
                continue
            d = fd.project(shared, store, tgt, True)
            if d.is_true:
                continue
            key = (Domain.FD, tgt, d)
            if key in cfg.emitted:
                continue
            if self.strong_disjuncts + len(d) > self.strategy.max_strong_disjuncts:
                raise _Stop
            self.strong_disjuncts += len(d)
            self._emit(cfg.branch, f"PROJ FD->{tgt}", f"strong, {len(d)} disjuncts", strong=len(d))
            if len(d) > 1:
                self._emit(cfg.branch, f"SPLIT {len(d)}", str(d))
            cfg = replace(cfg, emitted=cfg.emitted | {key, version})
            return self._split(cfg, [cfg.pool + tuple(dj) for dj in d.disjuncts])
        return None

    def project_step(self, cfg: Configuration) -> Optional[list]:
        """Projection at an empty pool; ``None`` means the configuration is quiescent."""
        if self.strategy.projection is Schedule.STRONG_EARLY:
            out = self.strong_round(cfg)
            if out is not None:
                return out
        nxt = self.weak_round(cfg)
        if nxt is not None:
            return [nxt]
        return self.strong_round(cfg)

    # -- search -----------------------------------------------------------

    def step(self, cfg: Configuration) -> Optional[list]:
        if cfg.pool:
            return self.propagate_step(cfg)
        return self.project_step(cfg)

    def run(self, constraints: Sequence[Constraint], user_vars: Sequence[Var], next_id: int) -> Outcome:
        start = time.perf_counter()
        frontier = deque([self.initial(constraints, next_id)])
        dfs = self.strategy.search is Search.DFS
        found: dict = {}
        exhausted = False
        suspended_leaf = False
        try:
            while frontier:
                cfg = frontier.pop() if dfs else frontier.popleft()
                if self.steps >= self.strategy.max_steps:
                    frontier.append(cfg)
                    raise _Stop
                self.steps += 1
                succ = self.step(cfg)
                if succ is None:
                    if cfg.suspended:
                        suspended_leaf = True
                        self._emit(cfg.branch, "SUSPENDED", ", ".join(format_constraint(c) for c in cfg.suspended))
                        continue
                    sol = extract_solution(cfg, user_vars)
                    self._emit(cfg.branch, "SOLUTION", str(sol))
                    found.setdefault(str(sol), sol)
                    continue
                if dfs:
                    frontier.extend(reversed(succ))
                else:
                    frontier.extend(succ)
        except _Stop:
            exhausted = True
            self._emit(-1 if not frontier else frontier[-1].branch, "BUDGET", "search stopped")
        solutions = tuple(found[k] for k in sorted(found))
        if solutions:
            status = Status.SOLUTIONS
            reason = BUDGET_EXHAUSTED if exhausted else (SUSPENDED_RESIDUE if suspended_leaf else None)
        elif exhausted:
            status, reason = Status.UNKNOWN, BUDGET_EXHAUSTED
        elif suspended_leaf:
            status, reason = Status.UNKNOWN, SUSPENDED_RESIDUE
        else:
            status, reason = Status.UNSATISFIABLE, None
        return Outcome(
            status,
            solutions,
            reason,
            self.steps,
            self.branches,
            self.strong_disjuncts,
            tuple(self.events),
            time.perf_counter() - start,
        )


# ---------------------------------------------------------------------------
# solution extraction


def _numeric_values(cfg: Configuration) -> dict:
    values = {}
    fd = cfg.stores.get(Domain.FD)
    if isinstance(fd, FDStore):
        for v in fd.variables():
            d = fd.domain(v)
            if d is not None and len(d) == 1:
                values[v] = Num(d[0])
    ar = cfg.stores.get(Domain.ARITH)
    if isinstance(ar, ArithStore):
        for v, q in ar.determined.items():
            values.setdefault(v, Num(q))
    return values


def _resolve(v: Var, cfg: Configuration) -> Term:
    for tag in (Domain.FL, Domain.LP):
        st = cfg.stores.get(tag)
        if isinstance(st, SubstStore) and v in st.subst:
            return st.subst[v]
    return v


def extract_solution(cfg: Configuration, user_vars: Iterable[Var]) -> Solution:
    values = _numeric_values(cfg)
    numeric = Substitution(values)
    user_vars = [v for v in user_vars if not v.aux]
    bindings = []
    for v in user_vars:
        t = numeric.apply(_resolve(v, cfg))
        if t != v:
            bindings.append((str(v), t))
    bindings.sort(key=lambda b: b[0])

    per_store = []
    for tag in DOMAINS:
        st = cfg.stores.get(tag)
        if st is None:
            continue
        items = []
        for v in user_vars:
            if isinstance(st, SubstStore) and v in st.subst:
                items.append((str(v), format_term(st.subst[v])))
            elif isinstance(st, FDStore) and st.domain(v) is not None:
                d = st.domain(v)
                items.append((str(v), str(d[0]) if len(d) == 1 else f"in {format_domain(d)}"))
            elif isinstance(st, ArithStore) and v in st.intervals and not st.intervals[v].is_full:
                items.append((str(v), f"in {st.intervals[v]}" if not st.intervals[v].is_point else str(st.intervals[v])))
        if items:
            per_store.append((tag, tuple(sorted(items))))

    # open facts about variables that still occur in the answer
    open_vars = {v for v in user_vars if v not in values}
    for _, t in bindings:
        open_vars |= {w for w in term_vars(t) if w not in values}
    residual = []
    fd = cfg.stores.get(Domain.FD)
    ar = cfg.stores.get(Domain.ARITH)
    for v in sorted(open_vars, key=_key):
        if isinstance(fd, FDStore) and fd.domain(v) is not None:
            residual.append(f"{v} in {format_domain(fd.domain(v))}")
        elif isinstance(ar, ArithStore) and v in ar.intervals and not ar.intervals[v].is_full:
            residual.append(f"{v} in {ar.intervals[v]}")
    return Solution(tuple(bindings), tuple(per_store), tuple(residual))


# ---------------------------------------------------------------------------
# entry points


def solve(
    program: Program,
    goal,
    strategy: Strategy = Strategy(),
    trace: bool = False,
    on_event: Optional[Callable[[TraceEvent], None]] = None,
    registry: Optional[Mapping] = None,
) -> Outcome:
    """Run the meta solver on a goal given as text, a parsed ``Goal`` or flattened constraints."""
    if isinstance(goal, str):
        goal = parse_goal_full(goal, program)
    if isinstance(goal, Goal):
        constraints, user_vars, next_id = goal.constraints, goal.variables, goal.next_var_id
    else:
        constraints = tuple(goal)
        user_vars = _user_vars(constraints)
        next_id = max([program.next_var_id] + [v.id + 1 for c in constraints for v in c.vars()])
    engine = Engine(program, strategy, registry, trace, on_event)
    return engine.run(constraints, user_vars, next_id)


def _user_vars(constraints: Iterable[Constraint]) -> tuple:
    seen = {}
    for c in constraints:
        for a in c.args:
            for v in ordered_vars(a):
                if not v.aux:
                    seen.setdefault(v, None)
    return tuple(seen)


def count_propagated_disjuncts(trace: Iterable[TraceEvent]) -> int:
    return sum(ev.strong for ev in trace)


__all__ = [
    "BUDGET_EXHAUSTED",
    "Configuration",
    "Engine",
    "Outcome",
    "SUSPENDED_RESIDUE",
    "Schedule",
    "Search",
    "Solution",
    "Status",
    "Strategy",
    "TraceEvent",
    "count_propagated_disjuncts",
    "extract_solution",
    "solve",
]
