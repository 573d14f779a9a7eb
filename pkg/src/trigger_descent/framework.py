"""Trigger-event gradient framework with a nonmonotone Armijo acceptance test.

The outer loop anchors an iterate ``theta``; the inner loop takes ordinary
gradient-related steps ``psi <- psi + delta * alpha * gamma`` without ever
touching the objective, until one of the triggering events fires:

* the inner iterate drifts further than ``tau_iter_exit`` from ``theta``,
* its gradient norm leaves ``(tau_gra_low, tau_gra_upp)``,
* the inner counter reaches ``tau_iter_max``.

Only then is the objective evaluated (once) and the triggering point accepted
or rejected against the max of the last ``w`` accepted objective values.
Rejection shrinks the global scaling ``delta``; acceptance keeps or grows it.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .oracle import CachedGradient, EvalCounters, OracleFailure, Problem, eval_gradient, eval_objective
from .trace import OuterRecord, RunTrace


class PolicyFailure(RuntimeError):
    """A step policy produced a non-finite direction or step size."""


class Status(str, enum.Enum):
    CONVERGED_GRADIENT = "ConvergedGradient"
    STATIONARY_EXACT = "StationaryExact"
    MAX_OUTER_ITERATIONS = "MaxOuterIterations"
    FAILED = "Failed"

    @property
    def successful(self) -> bool:
        return self in (Status.CONVERGED_GRADIENT, Status.STATIONARY_EXACT)


class TriggerReason(str, enum.Enum):
    NONE = "None"
    DISTANCE = "Distance"
    GRADIENT_LOW = "GradientLow"
    GRADIENT_HIGH = "GradientHigh"
    MAX_INNER = "MaxInner"


class Branch(str, enum.Enum):
    """Outcome of an outer iteration, decided after the trigger fired."""

    REJECTED = "Rejected"
    LOW_GRADIENT = "LowGradient"  # accepted, delta unchanged
    HIGH_GRADIENT = "HighGradient"  # accepted, delta grown
    NORMAL = "Normal"  # accepted, delta grown


@dataclass(frozen=True)
class FrameworkConfig:
    sigma_low: float = 0.5
    sigma_upp: float = 1.5
    delta_cap: Optional[float] = None
    w: int = 10
    rho: float = 1e-4
    eps: float = 1e-5
    max_outer: int = 20_000
    delta0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.sigma_low < 1.0:
            raise ValueError("sigma_low must lie in (0, 1)")
        if self.sigma_upp < 1.0:
            raise ValueError("sigma_upp must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if int(self.w) != self.w or self.w < 1:
            raise ValueError("w must be a positive integer")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be positive")
        if self.delta0 <= 0:
            raise ValueError("delta0 must be positive")
        if self.delta_cap is not None and self.delta_cap <= 0:
            raise ValueError("delta_cap must be positive")


@dataclass(frozen=True)
class TriggerThresholds:
    iter_exit: float
    iter_max: int
    gra_low: float
    gra_upp: float

    # global cap on the inner-iteration limit
    ITER_MAX_CAP = 1_000_000

    def __post_init__(self):
        if self.iter_exit < 0:
            raise ValueError("iter_exit must be nonnegative")
        if not 1 <= self.iter_max <= self.ITER_MAX_CAP:
            raise ValueError("iter_max out of range")
        if not 0 < self.gra_low < self.gra_upp:
            raise ValueError("need 0 < gra_low < gra_upp")

    def brackets(self, grad_norm: float) -> bool:
        return self.gra_low < grad_norm < self.gra_upp


@dataclass
class ObjectiveWindow:
    """Objective values at the ``w`` most recent distinct accepted iterates."""

    values: list

    @property
    def tau_obj(self) -> float:
        return max(self.values)


def update_window(window: ObjectiveWindow, accepted_value: float, w: int) -> ObjectiveWindow:
    values = (list(window.values) + [float(accepted_value)])[-w:]
    return ObjectiveWindow(values)


@dataclass
class InnerContext:
    """What a step policy may look at; contains no objective information."""

    k: int
    j: int
    theta: np.ndarray
    thresholds: TriggerThresholds
    last_outer_accepted: bool
    prev_point: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    grad_norm: float = float("nan")


class StepPolicy(Protocol):
    """Direction/step-size routine.

    Contract (not enforced at runtime): on bounded regions the direction
    satisfies ``grad @ gamma <= -g_lo * |grad|^2`` and
    ``|gamma| <= g_hi * |grad|``, and the step size lies in
    ``[alpha_lo, alpha_hi]`` with ``alpha_lo > 0``. Policies never call the
    objective.
    """

    def direction(self, psi: np.ndarray, grad: np.ndarray, ctx: InnerContext) -> np.ndarray: ...

    def size(self, psi: np.ndarray, grad: np.ndarray, ctx: InnerContext) -> float: ...

    def on_outcome(self, accepted: bool) -> None: ...


class ThresholdPolicy(Protocol):
    def initial(self, theta: np.ndarray, grad_norm: float) -> TriggerThresholds: ...

    def select(
        self,
        theta: np.ndarray,
        grad_norm: float,
        previous: TriggerThresholds,
        branch: Branch,
    ) -> TriggerThresholds: ...


class NegativeGradientConstantStep:
    """``gamma = -grad`` with a fixed step size; the simplest valid policy."""

    def __init__(self, alpha: float = 1.0):
        self.alpha = float(alpha)

    def direction(self, psi, grad, ctx):
        return -grad

    def size(self, psi, grad, ctx):
        return self.alpha

    def on_outcome(self, accepted):
        pass


class RelativeThresholdPolicy:
    """Gradient interval ``(c_low |g|, c_upp |g|)`` recentred at every new iterate."""

    def __init__(self, iter_exit: float = 10.0, iter_max: int = 100, low: float = 0.5, upp: float = 2.0):
        if not 0 < low < 1 < upp:
            raise ValueError("need 0 < low < 1 < upp")
        self.iter_exit = iter_exit
        self.iter_max = iter_max
        self.low = low
        self.upp = upp

    def initial(self, theta, grad_norm):
        return TriggerThresholds(self.iter_exit, self.iter_max, self.low * grad_norm, self.upp * grad_norm)

    def select(self, theta, grad_norm, previous, branch):
        if branch is Branch.REJECTED:
            return previous
        return self.initial(theta, grad_norm)


@dataclass
class OuterState:
    k: int
    theta: np.ndarray
    grad_theta: np.ndarray
    grad_norm: float
    delta: float
    thresholds: TriggerThresholds
    window: ObjectiveWindow
    last_outer_accepted: bool = True
    first_inner_dir_derivative: float = float("nan")
    first_inner_step: float = float("nan")


@dataclass
class RunResult:
    status: Status
    terminal_point: np.ndarray
    terminal_grad_norm: float
    counters: EvalCounters
    wall_time: float
    trace: Optional[RunTrace] = None
    outer_iterations: int = 0
    message: str = ""
    # terminal grad norm tracked over all accepted iterates (framework only)
    min_grad_norm: float = float("nan")
    extra: dict = field(default_factory=dict)


def check_trigger(
    psi: np.ndarray,
    theta: np.ndarray,
    grad_norm_psi: float,
    j: int,
    th: TriggerThresholds,
) -> TriggerReason:
    """First satisfied triggering event, in the order Distance, GradientLow,
    GradientHigh, MaxInner."""
    if float(np.linalg.norm(psi - theta)) > th.iter_exit:
        return TriggerReason.DISTANCE
    if grad_norm_psi <= th.gra_low:
        return TriggerReason.GRADIENT_LOW
    if grad_norm_psi >= th.gra_upp:
        return TriggerReason.GRADIENT_HIGH
    if j == th.iter_max:
        return TriggerReason.MAX_INNER
    return TriggerReason.NONE


def armijo_reject(
    F_psi: float,
    window: ObjectiveWindow,
    rho: float,
    delta: float,
    alpha0: float,
    dir_deriv0: float,
) -> bool:
    """True iff ``F_psi >= tau_obj + rho * delta * alpha0 * dir_deriv0`` (boundary rejects)."""
    return F_psi >= window.tau_obj + rho * delta * alpha0 * dir_deriv0


def classify_acceptance(grad_norm_psi: float, th: TriggerThresholds) -> Branch:
    if grad_norm_psi <= th.gra_low:
        return Branch.LOW_GRADIENT
    if grad_norm_psi >= th.gra_upp:
        return Branch.HIGH_GRADIENT
    return Branch.NORMAL


def apply_outcome(
    state: OuterState,
    branch: Branch,
    config: FrameworkConfig,
    threshold_policy: ThresholdPolicy,
    psi: Optional[np.ndarray] = None,
    grad_psi: Optional[np.ndarray] = None,
    grad_norm_psi: float = float("nan"),
    F_psi: float = float("nan"),
) -> OuterState:
    """Three-way update of the outer state (reject / accept-keep / accept-grow)."""
    if branch is Branch.REJECTED:
        return OuterState(
            k=state.k + 1,
            theta=state.theta,
            grad_theta=state.grad_theta,
            grad_norm=state.grad_norm,
            delta=config.sigma_low * state.delta,
            thresholds=threshold_policy.select(state.theta, state.grad_norm, state.thresholds, branch),
            window=state.window,
            last_outer_accepted=False,
        )
    if branch is Branch.LOW_GRADIENT:
        delta = state.delta
    else:
        delta = config.sigma_upp * state.delta
        if config.delta_cap is not None:
            delta = min(delta, config.delta_cap)
    thresholds = state.thresholds
    if grad_norm_psi > 0.0:
        thresholds = threshold_policy.select(psi, grad_norm_psi, state.thresholds, branch)
    return OuterState(
        k=state.k + 1,
        theta=psi,
        grad_theta=grad_psi,
        grad_norm=grad_norm_psi,
        delta=delta,
        thresholds=thresholds,
        window=update_window(state.window, F_psi, config.w),
        last_outer_accepted=True,
    )


def run(
    problem: Problem,
    theta0,
    policy: StepPolicy,
    threshold_policy: ThresholdPolicy,
    config: FrameworkConfig,
    record_trace: bool = True,
) -> RunResult:
    """Run the framework from ``theta0`` until ``|grad| <= eps`` or ``max_outer``."""
    counters = EvalCounters()
    cache = CachedGradient()
    trace = RunTrace(F_theta0=float("nan"))
    start = time.perf_counter()
    theta = np.array(theta0, dtype=float, copy=True)
    grad_norm = float("nan")
    min_grad = float("inf")
    status = Status.FAILED
    message = ""
    k = 0
    try:
        F0 = eval_objective(problem, theta, counters)
        trace.F_theta0 = F0
        grad, grad_norm = eval_gradient(problem, theta, counters, cache)
        min_grad = grad_norm
        state = OuterState(
            k=0,
            theta=theta,
            grad_theta=grad,
            grad_norm=grad_norm,
            delta=config.delta0,
            thresholds=None,
            window=ObjectiveWindow([F0]),
        )
        if grad_norm > config.eps:
            state.thresholds = threshold_policy.initial(theta, grad_norm)
        while True:
            theta, grad_norm = state.theta, state.grad_norm
            k = state.k
            if grad_norm <= config.eps:
                status = Status.STATIONARY_EXACT if (grad_norm == 0.0 and k > 0) else Status.CONVERGED_GRADIENT
                break
            if k >= config.max_outer:
                status = Status.MAX_OUTER_ITERATIONS
                break
            state = _outer_iteration(problem, state, policy, threshold_policy, config, counters, cache, trace, record_trace)
            min_grad = min(min_grad, state.grad_norm)
        theta, grad_norm = state.theta, state.grad_norm
    except (OracleFailure, PolicyFailure) as exc:
        status = Status.FAILED
        message = str(exc)
    wall = time.perf_counter() - start
    return RunResult(
        status=status,
        terminal_point=np.array(theta, copy=True),
        terminal_grad_norm=grad_norm,
        counters=counters,
        wall_time=wall,
        trace=trace if record_trace else None,
        outer_iterations=k,
        message=message,
        min_grad_norm=min_grad,
    )


def _outer_iteration(problem, state, policy, threshold_policy, config, counters, cache, trace, record_trace):
    theta = state.theta
    th = state.thresholds
    psi, grad_psi, gnorm_psi = theta, state.grad_theta, state.grad_norm
    prev_psi = prev_grad = None
    j = 0
    while True:
        ctx = InnerContext(
            k=state.k,
            j=j,
            theta=theta,
            thresholds=th,
            last_outer_accepted=state.last_outer_accepted,
            prev_point=prev_psi,
            prev_grad=prev_grad,
            grad_norm=gnorm_psi,
        )
        gamma = np.asarray(policy.direction(psi, grad_psi, ctx), dtype=float)
        alpha = float(policy.size(psi, grad_psi, ctx))
        if not (math.isfinite(alpha) and np.all(np.isfinite(gamma))):
            raise PolicyFailure(f"non-finite step at k={state.k}, j={j}")
        if j == 0:
            state.first_inner_step = alpha
            state.first_inner_dir_derivative = float(state.grad_theta @ gamma)
        reason = check_trigger(psi, theta, gnorm_psi, j, th)
        if reason is not TriggerReason.NONE:
            break
        prev_psi, prev_grad = psi, grad_psi
        psi = psi + state.delta * alpha * gamma
        j += 1
        grad_psi, gnorm_psi = eval_gradient(problem, psi, counters, cache)

    F_psi = eval_objective(problem, psi, counters)
    tau_before = state.window.tau_obj
    rejected = armijo_reject(
        F_psi, state.window, config.rho, state.delta, state.first_inner_step, state.first_inner_dir_derivative
    )
    branch = Branch.REJECTED if rejected else classify_acceptance(gnorm_psi, th)
    policy.on_outcome(not rejected)
    new_state = apply_outcome(state, branch, config, threshold_policy, psi, grad_psi, gnorm_psi, F_psi)
    if record_trace:
        trace.records.append(
            OuterRecord(
                k=state.k,
                accepted=not rejected,
                trigger_reason=reason.value,
                branch=branch.value,
                j_trigger=j,
                theta_after=new_state.theta,
                F_trigger=F_psi,
                grad_norm_after=new_state.grad_norm,
                delta_after=new_state.delta,
                tau_obj_before=tau_before,
                tau_obj_after=new_state.window.tau_obj,
            )
        )
    return new_state
