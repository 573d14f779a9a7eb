"""Multi-start experiments: run every algorithm from the same start points."""
from __future__ import annotations

import csv
import hashlib
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Optional, Sequence

import numpy as np

from ..baselines import LineSearchConfig, gd_armijo, gd_wolfe
from ..lipschitz_step import solve_novel
from ..oracle import Problem
from ..problems import builtin_suite, fieller_problem, wedderburn_problem
from ..problems.gee import WEDDERBURN_DIM
from .report import categorize_terminal

CSV_HEADER = (
    "problem,algorithm,trial,status,objective_evals,gradient_evals,"
    "inner_oracle_evals,total_evals,wall_time_s,terminal_grad_norm,category"
)
THREADS_ENV = "TRIGGER_DESCENT_THREADS"
GEE_MAX_OUTER = 1000
SUITE_MAX_OUTER = 20_000
ALGORITHMS = ("novel", "gd_armijo", "gd_wolfe")


class SpecError(ValueError):
    """Invalid experiment specification (exit code 2)."""


class SchemaError(ValueError):
    """A results CSV does not match the expected schema (exit code 1)."""


@dataclass(frozen=True)
class ResultRow:
    problem: str
    algorithm: str
    trial: int
    status: str
    objective_evals: int
    gradient_evals: int
    inner_oracle_evals: int
    total_evals: int
    wall_time_s: float
    terminal_grad_norm: float
    category: str

    def csv_cells(self) -> list[str]:
        return [
            self.problem,
            self.algorithm,
            str(self.trial),
            self.status,
            str(self.objective_evals),
            str(self.gradient_evals),
            str(self.inner_oracle_evals),
            str(self.total_evals),
            f"{self.wall_time_s:.6f}",
            repr(float(self.terminal_grad_norm)),
            self.category,
        ]


COLUMNS = tuple(f.name for f in fields(ResultRow))
assert ",".join(COLUMNS) == CSV_HEADER


@dataclass(frozen=True)
class ExperimentSpec:
    problems: tuple
    algorithms: tuple
    starts: tuple  # one array of start points per problem
    eps: float = 1e-5
    max_outer: int = SUITE_MAX_OUTER
    line_search: LineSearchConfig = LineSearchConfig()
    categorize: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise SpecError("no algorithms selected")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise SpecError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
        if not self.eps > 0:
            raise SpecError("eps must be positive")
        if self.max_outer < 1:
            raise SpecError("max_outer must be positive")
        if len(self.starts) != len(self.problems):
            raise SpecError("need one start list per problem")


def solver_for(algorithm: str, eps: float, max_outer: int, line_search: LineSearchConfig) -> Callable:
    if algorithm == "novel":
        return lambda p, x: solve_novel(p, x, eps=eps, max_outer=max_outer, record_trace=False)
    if algorithm == "gd_armijo":
        return lambda p, x: gd_armijo(p, x, line_search, eps=eps, max_outer=max_outer)
    if algorithm == "gd_wolfe":
        return lambda p, x: gd_wolfe(p, x, line_search, eps=eps, max_outer=max_outer)
    raise SpecError(f"unknown algorithm {algorithm!r}")


def generate_starts(kind: str, trials: int, seed: int) -> np.ndarray:
    """Random start points: Wedderburn in [-1, 1]^20 with coordinates 0 and 10
    pinned to zero, Fieller uniform in [0, 1]."""
    if trials < 1:
        raise SpecError("trials must be positive")
    rng = np.random.default_rng(seed)
    if kind == "wedderburn":
        starts = rng.uniform(-1.0, 1.0, size=(trials, WEDDERBURN_DIM))
        starts[:, 0] = 0.0
        starts[:, 10] = 0.0
        return starts
    if kind == "fieller":
        return rng.uniform(0.0, 1.0, size=(trials, 1))
    raise SpecError(f"unknown GEE problem {kind!r}")


def starts_digest(starts: Sequence[np.ndarray]) -> str:
    h = hashlib.sha256()
    for block in starts:
        h.update(np.ascontiguousarray(block, dtype="<f8").tobytes())
    return h.hexdigest()


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise SpecError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise SpecError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _run_one(spec: ExperimentSpec, problem: Problem, algorithm: str, trial: int, start) -> ResultRow:
    result = solver_for(algorithm, spec.eps, spec.max_outer, spec.line_search)(problem, start)
    c = result.counters
    category = (
        categorize_terminal(result.terminal_point[0], result.status) if spec.categorize else "n/a"
    )
    return ResultRow(
        problem=problem.name,
        algorithm=algorithm,
        trial=trial,
        status=result.status.value,
        objective_evals=c.objective_evals,
        gradient_evals=c.gradient_evals,
        inner_oracle_evals=c.inner_oracle_evals,
        total_evals=c.total_evals,
        wall_time_s=result.wall_time,
        terminal_grad_norm=result.terminal_grad_norm,
        category=category,
    )


def run_experiment(spec: ExperimentSpec, threads: Optional[int] = None) -> list[ResultRow]:
    """One row per (problem, algorithm, trial), sorted on that key."""
    jobs = [
        (problem, algorithm, trial, start)
        for problem, starts in zip(spec.problems, spec.starts)
        for algorithm in spec.algorithms
        for trial, start in enumerate(starts)
    ]
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda job: _run_one(spec, *job), jobs))
    else:
        rows = [_run_one(spec, *job) for job in jobs]
    return sorted(rows, key=lambda r: (r.problem, r.algorithm, r.trial))


def suite_spec(
    algorithms=ALGORITHMS,
    eps: float = 1e-5,
    max_outer: int = SUITE_MAX_OUTER,
    line_search: LineSearchConfig = LineSearchConfig(),
    problems=None,
) -> ExperimentSpec:
    problems = tuple(builtin_suite() if problems is None else problems)
    return ExperimentSpec(
        problems=problems,
        algorithms=tuple(algorithms),
        starts=tuple(np.atleast_2d(p.start()) for p in problems),
        eps=eps,
        max_outer=max_outer,
        line_search=line_search,
    )


def gee_spec(
    kind: str,
    trials: int,
    seed: int,
    algorithms=ALGORITHMS,
    eps: float = 1e-5,
    max_outer: int = GEE_MAX_OUTER,
    line_search: LineSearchConfig = LineSearchConfig(),
    data=None,
) -> ExperimentSpec:
    starts = generate_starts(kind, trials, seed)
    problem = wedderburn_problem(data) if kind == "wedderburn" else fieller_problem(data)
    return ExperimentSpec(
        problems=(problem,),
        algorithms=tuple(algorithms),
        starts=(starts,),
        eps=eps,
        max_outer=max_outer,
        line_search=line_search,
        categorize=kind == "fieller",
    )


def format_csv(rows: Sequence[ResultRow], digest: Optional[str] = None) -> str:
    buf = io.StringIO()
    if digest is not None:
        buf.write(f"# starts_sha256={digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row.csv_cells())
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[ResultRow], Optional[str]]:
    """Parse a results CSV, returning rows and the start-list digest if present."""
    digest = None
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key == "starts_sha256":
                digest = val
            continue
        if line.strip():
            body.append(line)
    if not body:
        raise SchemaError("empty file: no header row")
    reader = csv.reader(body)
    header = next(reader)
    missing = [c for c in COLUMNS if c not in header]
    extra = [c for c in header if c not in COLUMNS]
    if missing or extra:
        raise SchemaError(f"column mismatch: missing={missing} unexpected={extra}")
    index = {c: header.index(c) for c in COLUMNS}
    types = {f.name: f.type for f in fields(ResultRow)}
    rows = []
    for lineno, cells in enumerate(reader, start=2):
        if len(cells) != len(header):
            raise SchemaError(f"row {lineno}: expected {len(header)} cells, got {len(cells)}")
        values = {}
        for col in COLUMNS:
            raw = cells[index[col]]
            kind = types[col]
            try:
                values[col] = int(raw) if kind == "int" else float(raw) if kind == "float" else raw
            except ValueError:
                raise SchemaError(f"row {lineno}: column {col!r} has bad value {raw!r}") from None
        row = ResultRow(**values)
        if row.total_evals != row.objective_evals + row.gradient_evals:
            raise SchemaError(f"row {lineno}: total_evals != objective_evals + gradient_evals")
        rows.append(row)
    return rows, digest

