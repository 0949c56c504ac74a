"""Command-line front end: ``cosolve PROGRAM --goal GOAL [options]``.

Exit codes: 0 solutions, 1 unsatisfiable, 2 unknown, 3 parse or
configuration error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence, TextIO

from .constraints import ConfigurationError
from .engine import Outcome, Schedule, Search, Status, Strategy, solve
from .frontend import ParseError, parse_goal_full, parse_program
from .terms import format_term

EXIT_CODES = {Status.SOLUTIONS: 0, Status.UNSATISFIABLE: 1, Status.UNKNOWN: 2}
EXIT_ERROR = 3


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cosolve", description="Solve a goal against a functional-logic program.")
    p.add_argument("program", help="program file (UTF-8)")
    p.add_argument("--goal", default="", help="goal constraints, comma separated; '-' reads stdin (default: empty goal)")
    p.add_argument("--search", choices=[s.value for s in Search], default=Search.DFS.value)
    p.add_argument("--projection", choices=[s.value for s in Schedule], default=Schedule.WEAK_FIRST.value)
    p.add_argument("--max-steps", type=_positive, default=10_000)
    p.add_argument("--max-branches", type=_positive, default=10_000)
    p.add_argument("--max-strong-disjuncts", type=_positive, default=10_000)
    p.add_argument("--trace", action="store_true", help="write a step trace to stderr")
    p.add_argument("--format", choices=["human", "structured"], default="human")
    return p


def render_human(outcome: Outcome) -> str:
    lines = [str(s) for s in outcome.solutions]
    if outcome.status is Status.UNSATISFIABLE:
        lines.append("no solutions")
    elif outcome.status is Status.UNKNOWN:
        lines.append(f"unknown ({outcome.reason})")
    elif outcome.reason:
        lines.append(f"% incomplete: {outcome.reason}")
    return "\n".join(lines) + "\n"


def render_structured(outcome: Outcome) -> str:
    lines = [
        f"status={outcome.status.value}",
        f"reason={outcome.reason or ''}",
        f"solutions={len(outcome.solutions)}",
        f"steps={outcome.steps}",
        f"branches={outcome.branches}",
        f"strong_disjuncts={outcome.strong_disjuncts}",
    ]
    for i, sol in enumerate(outcome.solutions, 1):
        for name, term in sol.bindings:
            lines.append(f"solution[{i}].{name}={format_term(term)}")
        for j, fact in enumerate(sol.residual, 1):
            lines.append(f"solution[{i}].residual[{j}]={fact}")
    return "\n".join(lines) + "\n"


def parse_summary(text: str) -> dict:
    """Read structured output back into plain values."""
    out: dict = {"solutions": []}
    count = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        if key.startswith("solution["):
            idx = int(key[len("solution["):key.index("]")])
            field_ = key[key.index("].") + 2:]
            sol = out["solutions"][idx - 1]
            if field_.startswith("residual["):
                sol.setdefault("residual", []).append(value)
            else:
                sol["bindings"][field_] = value
        elif key == "solutions":
            count = int(value)
            out["solutions"] = [{"bindings": {}} for _ in range(count)]
        elif key in ("steps", "branches", "strong_disjuncts"):
            out[key] = int(value)
        else:
            out[key] = value or None
    return out


def run(
    argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None, stdin: TextIO = None
) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    goal_text = (stdin or sys.stdin).read() if args.goal == "-" else args.goal
    try:
        with open(args.program, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as e:
        print(f"{args.program}: error: {e.strerror or e}", file=stderr)
        return EXIT_ERROR
    try:
        program = parse_program(source)
    except ParseError as e:
        print(f"{args.program}:{e.line}:{e.col}: error: {e.message}", file=stderr)
        return EXIT_ERROR
    try:
        goal = parse_goal_full(goal_text, program)
    except ParseError as e:
        print(f"goal:{e.line}:{e.col}: error: {e.message}", file=stderr)
        return EXIT_ERROR
    strategy = Strategy(
        search=args.search,
        projection=args.projection,
        max_steps=args.max_steps,
        max_branches=args.max_branches,
        max_strong_disjuncts=args.max_strong_disjuncts,
    )
    on_event = (lambda ev: print(str(ev), file=stderr)) if args.trace else None
    try:
        outcome = solve(program, goal, strategy, on_event=on_event)
    except ConfigurationError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_ERROR
    render = render_structured if args.format == "structured" else render_human
    stdout.write(render(outcome))
    return EXIT_CODES[outcome.status]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
