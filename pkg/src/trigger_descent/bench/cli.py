"""``bench`` command line: suite runs, GEE multi-start runs, audits, traces.

Exit codes: 0 success, 1 I/O or schema failure (or a failed audit), 2 invalid
specification.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from ..baselines import LineSearchConfig
from ..lipschitz_step import solve_novel
from ..oracle import gradient_relative_error
from ..problems import builtin_suite, fieller_problem, load_gee_csv, wedderburn_problem
from ..problems.data import ParseError
from ..trace import verify_descent
from .experiments import (
    ALGORITHMS,
    GEE_MAX_OUTER,
    SUITE_MAX_OUTER,
    SchemaError,
    SpecError,
    format_csv,
    gee_spec,
    read_csv,
    run_experiment,
    starts_digest,
    suite_spec,
)
from .report import format_summary, summarize

EXIT_OK, EXIT_IO, EXIT_SPEC = 0, 1, 2
GEE_PROBLEMS = ("wedderburn", "fieller")
# FD audit tolerances: analytic problems vs quadrature objectives
SUITE_TOL, GEE_TOL = 1e-5, 1e-4


def all_problems(data=None) -> dict:
    problems = {p.name: p for p in builtin_suite()}
    problems["wedderburn"] = wedderburn_problem(data if data is not None and data.kind == "wedderburn" else None)
    problems["fieller"] = fieller_problem(data if data is not None and data.kind == "fieller" else None)
    return problems


def audit_points(problem, count: int, seed: int) -> np.ndarray:
    lo, hi = problem.audit_box
    return np.random.default_rng(seed).uniform(lo, hi, size=(count, problem.dimension))


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _algorithms(raw: str) -> tuple:
    names = tuple(a.strip() for a in raw.split(",") if a.strip())
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown or not names:
        raise SpecError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
    return names


def _line_search(args) -> LineSearchConfig:
    try:
        return LineSearchConfig(
            c1=args.c1, c2=args.c2, backtrack_factor=args.backtrack, alpha_init=args.alpha_init
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def cmd_suite(args) -> int:
    spec = suite_spec(_algorithms(args.algorithms), args.eps, args.max_outer, _line_search(args))
    rows = run_experiment(spec)
    _emit(format_csv(rows, starts_digest(spec.starts)), args.out)
    return EXIT_OK


def cmd_gee(args) -> int:
    data = load_gee_csv(args.data) if args.data else None
    if data is not None and data.kind != args.problem:
        raise SpecError(f"--data holds {data.kind} data but --problem is {args.problem}")
    spec = gee_spec(
        args.problem,
        args.trials,
        args.seed,
        _algorithms(args.algorithms),
        args.eps,
        args.max_outer,
        _line_search(args),
        data,
    )
    rows = run_experiment(spec)
    _emit(format_csv(rows, starts_digest(spec.starts)), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    problems = all_problems()
    names = list(problems) if args.problem == "all" else [args.problem]
    for name in names:
        if name not in problems:
            raise SpecError(f"unknown problem {name!r}")
    failed = False
    lines = ["problem,points,max_relative_error,tolerance,result"]
    for name in names:
        problem = problems[name]
        tol = GEE_TOL if name in GEE_PROBLEMS else SUITE_TOL
        worst = max(gradient_relative_error(problem, x) for x in audit_points(problem, args.points, args.seed))
        ok = worst <= tol
        failed |= not ok
        lines.append(f"{name},{args.points},{worst:.3e},{tol:g},{'pass' if ok else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_IO if failed else EXIT_OK


def cmd_trace(args) -> int:
    if args.algo != "novel":
        raise SpecError("traces are recorded for the framework method only (--algo novel)")
    problems = all_problems()
    if args.problem not in problems:
        raise SpecError(f"unknown problem {args.problem!r}")
    problem = problems[args.problem]
    result = solve_novel(problem, eps=args.eps, max_outer=args.max_outer, w=args.w)
    if args.out == "-":
        result.trace.write_jsonl(sys.stdout)
    else:
        with open(args.out, "w") as fh:
            result.trace.write_jsonl(fh)
    report = verify_descent(result.trace, args.w)
    print(
        f"{problem.name}: {result.status.value} after {result.outer_iterations} outer iterations; "
        f"descent checks {report.summary()}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_summarize(args) -> int:
    with open(args.csv_in) as fh:
        rows, _ = read_csv(fh.read())
    _emit(format_summary(summarize(rows)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, max_outer):
        p.add_argument("--eps", type=float, default=1e-5, help="gradient-norm tolerance")
        p.add_argument("--max-outer", type=int, default=max_outer, help="outer iteration limit")
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")

    def solvers(p):
        p.add_argument("--algorithms", default=",".join(ALGORITHMS))
        p.add_argument("--c1", type=float, default=1e-4, help="sufficient-decrease constant")
        p.add_argument("--c2", type=float, default=0.9, help="curvature constant (Wolfe)")
        p.add_argument("--backtrack", type=float, default=0.5, help="backtracking factor")
        p.add_argument("--alpha-init", type=float, default=1.0, help="initial line-search step")

    p = sub.add_parser("suite", help="run the builtin test suite")
    common(p, SUITE_MAX_OUTER)
    solvers(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("gee", help="multi-start runs on a GEE problem")
    common(p, GEE_MAX_OUTER)
    solvers(p)
    p.add_argument("--problem", required=True, choices=GEE_PROBLEMS)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data", help="dataset CSV (defaults to the seeded synthetic data)")
    p.set_defaults(func=cmd_gee)

    p = sub.add_parser("check", help="finite-difference gradient audit")
    p.add_argument("--problem", default="all")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trace", help="export a run trace as JSON lines")
    common(p, SUITE_MAX_OUTER)
    p.add_argument("--problem", required=True)
    p.add_argument("--algo", default="novel")
    p.add_argument("--w", type=int, default=10, help="nonmonotone window length")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("summarize", help="aggregate a results CSV")
    p.add_argument("csv_in")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (SpecError, ValueError) as exc:
        if isinstance(exc, (SchemaError, ParseError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"invalid specification: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
