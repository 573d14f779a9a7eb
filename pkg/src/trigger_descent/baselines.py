"""Steepest descent with classic line searches, for comparison runs.

Both solvers go through the same counted oracles as the framework so their
evaluation totals are directly comparable.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .framework import RunResult, Status
from .oracle import CachedGradient, EvalCounters, OracleFailure, Problem, eval_gradient, eval_objective


class LineSearchFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class LineSearchConfig:
    c1: float = 1e-4
    c2: float = 0.9
    backtrack_factor: float = 0.5
    alpha_init: float = 1.0
    max_ls_iters: int = 100
    alpha_max: float = 1e10  # bracketing stops growing the trial step here

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError("need 0 < c1 < c2 < 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.alpha_init > 0:
            raise ValueError("alpha_init must be positive")
        if int(self.max_ls_iters) != self.max_ls_iters or self.max_ls_iters < 1:
            raise ValueError("max_ls_iters must be a positive integer")
        if self.alpha_max < self.alpha_init:
            raise ValueError("alpha_max must be at least alpha_init")


@dataclass(frozen=True)
class StepRecord:
    """One accepted step along ``d = -grad``: enough to re-check the conditions."""

    f0: float
    slope0: float
    alpha: float
    f_new: float
    slope_new: float = float("nan")


def _trial_objective(problem, point, counters) -> float:
    # an overflowing trial point just fails the decrease test
    try:
        return eval_objective(problem, point, counters)
    except OracleFailure:
        return math.inf


def _armijo_search(problem, theta, f0, grad, slope0, cfg, counters):
    alpha = cfg.alpha_init
    for _ in range(cfg.max_ls_iters):
        point = theta - alpha * grad
        f_new = _trial_objective(problem, point, counters)
        if f_new <= f0 + cfg.c1 * alpha * slope0:
            return alpha, point, f_new
        alpha *= cfg.backtrack_factor
    raise LineSearchFailure(f"no sufficient decrease after {cfg.max_ls_iters} trials")


class _Line:
    """``phi(a) = F(theta + a d)`` with counted, cached evaluations."""

    def __init__(self, problem, theta, direction, counters, cache):
        self.problem = problem
        self.theta = theta
        self.direction = direction
        self.counters = counters
        self.cache = cache
        self.trials = 0
        self.points = {}

    def point(self, a):
        if a not in self.points:
            self.points[a] = self.theta + a * self.direction
        return self.points[a]

    def value(self, a) -> float:
        self.trials += 1
        return _trial_objective(self.problem, self.point(a), self.counters)

    def slope(self, a) -> float:
        grad, _ = eval_gradient(self.problem, self.point(a), self.counters, self.cache)
        return float(grad @ self.direction)


def _interpolate(lo, f_lo, d_lo, hi, f_hi) -> float:
    """Minimizer of the quadratic through (lo, f_lo, d_lo) and (hi, f_hi), safeguarded."""
    width = hi - lo
    denom = 2.0 * (f_hi - f_lo - d_lo * width)
    a = lo - d_lo * width * width / denom if denom > 0 and math.isfinite(denom) else math.nan
    left, right = sorted((lo + 0.1 * width, lo + 0.9 * width))
    if not (math.isfinite(a) and left <= a <= right):
        a = lo + 0.5 * width
    return a


def _wolfe_search(line: _Line, f0, slope0, cfg: LineSearchConfig):
    """Strong Wolfe bracketing followed by zoom; returns ``(alpha, f, slope)``."""

    def armijo_fails(a, f):
        return f > f0 + cfg.c1 * a * slope0

    def curvature_holds(d):
        return abs(d) <= -cfg.c2 * slope0

    def zoom(lo, f_lo, d_lo, hi, f_hi):
        while line.trials < cfg.max_ls_iters:
            a = _interpolate(lo, f_lo, d_lo, hi, f_hi)
            f = line.value(a)
            if armijo_fails(a, f) or f >= f_lo:
                hi, f_hi = a, f
                continue
            d = line.slope(a)
            if curvature_holds(d):
                return a, f, d
            if d * (hi - lo) >= 0:
                hi, f_hi = lo, f_lo
            lo, f_lo, d_lo = a, f, d
        raise LineSearchFailure(f"zoom did not finish within {cfg.max_ls_iters} trials")

    prev, f_prev, d_prev = 0.0, f0, slope0
    a = cfg.alpha_init
    while line.trials < cfg.max_ls_iters:
        f = line.value(a)
        if armijo_fails(a, f) or (prev > 0 and f >= f_prev):
            return zoom(prev, f_prev, d_prev, a, f)
        d = line.slope(a)
        if curvature_holds(d):
            return a, f, d
        if d >= 0:
            return zoom(a, f, d, prev, f_prev)
        if a >= cfg.alpha_max:
            break
        prev, f_prev, d_prev = a, f, d
        a = min(a / cfg.backtrack_factor, cfg.alpha_max)
    raise LineSearchFailure(f"bracketing did not finish within {cfg.max_ls_iters} trials")


def _descent_loop(problem, theta0, step, eps, max_outer, record_steps):
    counters = EvalCounters()
    cache = CachedGradient()
    steps = []
    start = time.perf_counter()
    theta = np.array(theta0, dtype=float, copy=True)
    gnorm = float("nan")
    k = 0
    status, message = Status.FAILED, ""
    try:
        f = eval_objective(problem, theta, counters)
        grad, gnorm = eval_gradient(problem, theta, counters, cache)
        while True:
            if gnorm <= eps:
                status = Status.STATIONARY_EXACT if (gnorm == 0.0 and k > 0) else Status.CONVERGED_GRADIENT
                break
            if k >= max_outer:
                status = Status.MAX_OUTER_ITERATIONS
                break
            slope0 = -gnorm * gnorm
            alpha, point, f_new = step(theta, f, grad, slope0, counters, cache)
            grad_new, gnorm = eval_gradient(problem, point, counters, cache)
            if record_steps:
                steps.append(StepRecord(f, slope0, alpha, f_new, float(-(grad_new @ grad))))
            theta, f, grad = point, f_new, grad_new
            k += 1
    except (OracleFailure, LineSearchFailure) as exc:
        status, message = Status.FAILED, str(exc)
    return RunResult(
        status=status,
        terminal_point=np.array(theta, copy=True),
        terminal_grad_norm=gnorm,
        counters=counters,
        wall_time=time.perf_counter() - start,
        outer_iterations=k,
        message=message,
        min_grad_norm=gnorm,
        extra={"steps": steps} if record_steps else {},
    )


def gd_armijo(
    problem: Problem,
    theta0=None,
    config: Optional[LineSearchConfig] = None,
    eps: float = 1e-5,
    max_outer: int = 20_000,
    record_steps: bool = False,
) -> RunResult:
    """Gradient descent with backtracking until ``F(theta - a g) <= F(theta) - c1 a |g|^2``."""
    cfg = config or LineSearchConfig()
    theta0 = problem.start() if theta0 is None else theta0

    def step(theta, f, grad, slope0, counters, cache):
        return _armijo_search(problem, theta, f, grad, slope0, cfg, counters)

    return _descent_loop(problem, theta0, step, eps, max_outer, record_steps)


def gd_wolfe(
    problem: Problem,
    theta0=None,
    config: Optional[LineSearchConfig] = None,
    eps: float = 1e-5,
    max_outer: int = 20_000,
    record_steps: bool = False,
) -> RunResult:
    """Gradient descent with a strong Wolfe line search (bracket, then zoom)."""
    cfg = config or LineSearchConfig()
    theta0 = problem.start() if theta0 is None else theta0

    def step(theta, f, grad, slope0, counters, cache):
        line = _Line(problem, theta, -grad, counters, cache)
        alpha, f_new, _ = _wolfe_search(line, f, slope0, cfg)
        return alpha, line.point(alpha), f_new

    return _descent_loop(problem, theta0, step, eps, max_outer, record_steps)
