"""Objective/gradient oracles with exact call accounting.

Every solver in the package talks to a :class:`Problem` only through
:func:`eval_objective` and :func:`eval_gradient`, so the counters on a run
are the authoritative evaluation counts reported by the benchmark.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class OracleFailure(RuntimeError):
    """An oracle returned a non-finite value (or broke a declared bound)."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = np.array(point, dtype=float, copy=True)


@dataclass(frozen=True)
class Problem:
    """An unconstrained problem ``min F(theta)`` over R^n.

    ``inner_cost`` optionally reports how many estimating-function calls one
    objective evaluation at ``theta`` makes internally (quadrature objectives).
    """

    name: str
    dimension: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    x0: Optional[np.ndarray] = None
    known_minimizer: Optional[np.ndarray] = None
    lower_bound: Optional[float] = None
    inner_cost: Optional[Callable[[np.ndarray], int]] = None
    # box used to draw random audit points: (low, high) per coordinate
    audit_box: tuple = (-2.0, 2.0)
    bounded_iterates: bool = True

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")

    def start(self) -> np.ndarray:
        if self.x0 is None:
            raise ValueError(f"problem {self.name!r} has no standard start")
        return np.array(self.x0, dtype=float, copy=True)


@dataclass
class EvalCounters:
    objective_evals: int = 0
    gradient_evals: int = 0
    inner_oracle_evals: int = 0

    @property
    def total_evals(self) -> int:
        return self.objective_evals + self.gradient_evals

    def reset(self) -> None:
        self.objective_evals = 0
        self.gradient_evals = 0
        self.inner_oracle_evals = 0


@dataclass
class CachedGradient:
    """Single-entry gradient cache keyed on the exact bytes of the point."""

    point: Optional[np.ndarray] = None
    value: Optional[np.ndarray] = None
    norm: float = float("nan")
    _key: bytes = field(default=b"", repr=False)

    def matches(self, theta: np.ndarray) -> bool:
        return self.point is not None and self._key == theta.tobytes()

    def store(self, theta: np.ndarray, value: np.ndarray, norm: float) -> None:
        self.point = theta.copy()
        self.value = value
        self.norm = norm
        self._key = self.point.tobytes()


def _as_point(problem: Problem, theta) -> np.ndarray:
    theta = np.ascontiguousarray(theta, dtype=float)
    if theta.shape != (problem.dimension,):
        raise ValueError(
            f"{problem.name}: expected point of shape ({problem.dimension},), got {theta.shape}"
        )
    return theta


def eval_objective(problem: Problem, theta, counters: EvalCounters) -> float:
    theta = _as_point(problem, theta)
    counters.objective_evals += 1
    if problem.inner_cost is not None:
        counters.inner_oracle_evals += int(problem.inner_cost(theta))
    value = float(problem.objective(theta))
    if not np.isfinite(value):
        raise OracleFailure(f"{problem.name}: non-finite objective {value}", theta)
    lb = problem.lower_bound
    if lb is not None and value < lb - 1e-9 * max(1.0, abs(lb)):
        raise OracleFailure(f"{problem.name}: objective {value} below declared bound {lb}", theta)
    return value


def eval_gradient(
    problem: Problem,
    theta,
    counters: EvalCounters,
    cache: Optional[CachedGradient] = None,
) -> tuple[np.ndarray, float]:
    """Return ``(gradient, norm)``; a cache hit costs no gradient evaluation."""
    theta = _as_point(problem, theta)
    if cache is not None and cache.matches(theta):
        return cache.value, cache.norm
    counters.gradient_evals += 1
    value = np.asarray(problem.gradient(theta), dtype=float)
    if value.shape != (problem.dimension,):
        raise OracleFailure(f"{problem.name}: gradient has shape {value.shape}", theta)
    if not np.all(np.isfinite(value)):
        raise OracleFailure(f"{problem.name}: non-finite gradient", theta)
    norm = float(np.linalg.norm(value))
    if cache is not None:
        cache.store(theta, value, norm)
    return value, norm


def finite_difference_gradient(problem: Problem, theta, h: float) -> np.ndarray:
    """Central-difference gradient; uses a scratch counter, never the run's."""
    if h <= 0:
        raise ValueError("h must be positive")
    theta = _as_point(problem, theta)
    scratch = EvalCounters()
    out = np.empty(problem.dimension)
    step = np.zeros(problem.dimension)
    for i in range(problem.dimension):
        step[i] = h
        f_plus = eval_objective(problem, theta + step, scratch)
        f_minus = eval_objective(problem, theta - step, scratch)
        out[i] = (f_plus - f_minus) / (2.0 * h)
        step[i] = 0.0
    return out


def gradient_relative_error(problem: Problem, theta, h: Optional[float] = None) -> float:
    """Norm-wise relative error between finite differences and the analytic gradient."""
    theta = _as_point(problem, theta)
    if h is None:
        h = 1e-6 * max(1.0, float(np.linalg.norm(theta)))
    fd = finite_difference_gradient(problem, theta, h)
    exact = np.asarray(problem.gradient(theta), dtype=float)
    scale = max(float(np.linalg.norm(exact)), 1e-12)
    return float(np.linalg.norm(fd - exact)) / scale
