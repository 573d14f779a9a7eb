"""Local-Lipschitz step size instance of the framework.

Negative gradient directions with step size

    alpha = min(tau_low^2 / (g^3 + g^2 L/2 + floor), 1 / (g + L/2 + floor)) + floor

where ``g`` is the gradient norm at the inner iterate and ``L`` a secant
estimate of the local Lipschitz rank.  After an accepted outer iterate the
estimate is taken fresh from the last secant pair (aggressive); after a
rejection it may only grow within the inner loop (conservative).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .framework import Branch, FrameworkConfig, InnerContext, TriggerThresholds


@dataclass(frozen=True)
class NovelConfig:
    w: int = 10
    rho: float = 1e-4
    sigma_low: float = 0.5
    sigma_upp: float = 1.5
    delta_cap: float = 1.0
    iter_exit: float = 10.0
    iter_max: int = 100
    floor: float = 1e-16
    grad_low_factor: float = 1.0 / math.sqrt(2.0)
    grad_upp_factor: float = math.sqrt(20.0)
    half: float = 0.5
    initial_lipschitz: float = 1.0


NOVEL = NovelConfig()


def novel_step_size(grad_norm: float, tau_gra_low: float, lipschitz: float, cfg: NovelConfig = NOVEL) -> float:
    g = grad_norm
    first = tau_gra_low**2 / (g**3 + cfg.half * g**2 * lipschitz + cfg.floor)
    second = 1.0 / (g + cfg.half * lipschitz + cfg.floor)
    return min(first, second) + cfg.floor


def secant_ratio(point, prev_point, grad, prev_grad) -> Optional[float]:
    """``|grad - prev_grad| / |point - prev_point|``, or None for a zero step."""
    step = float(np.linalg.norm(point - prev_point))
    if step == 0.0:
        return None
    return float(np.linalg.norm(grad - prev_grad)) / step


@dataclass
class LipschitzEstimate:
    value: float = 1.0
    prev_point: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    last_outer_accepted: bool = True


def update_lipschitz(
    state: LipschitzEstimate,
    j: int,
    k: int,
    point: np.ndarray,
    prev_point: Optional[np.ndarray],
    grad: np.ndarray,
    prev_grad: Optional[np.ndarray],
    initial: float = 1.0,
) -> float:
    """Advance the estimate for inner step ``j`` of outer iteration ``k``.

    A zero secant step keeps the previous value.
    """
    if j == 0:
        if k == 0:
            state.value = initial
        # k > 0: carry the value from the end of the previous inner loop
    else:
        ratio = secant_ratio(point, prev_point, grad, prev_grad)
        if ratio is not None:
            if state.last_outer_accepted:
                state.value = ratio
            else:
                state.value = max(ratio, state.value)
    state.prev_point, state.prev_grad = point, grad
    return state.value


def novel_gradient_thresholds(grad_norm: float, cfg: NovelConfig = NOVEL) -> tuple[float, float]:
    assert grad_norm > 0.0, "gradient thresholds need a nonzero gradient"
    low = grad_norm * cfg.grad_low_factor
    return low, cfg.grad_upp_factor * low


class NovelStepPolicy:
    """Negative gradient direction, Lipschitz-adaptive step size."""

    def __init__(self, cfg: NovelConfig = NOVEL):
        self.cfg = cfg
        self.estimate = LipschitzEstimate(value=cfg.initial_lipschitz)
        self.history: list = []  # (k, j, L_hat) when recording is on
        self.record = False

    def direction(self, psi, grad, ctx):
        return -grad

    def size(self, psi, grad, ctx: InnerContext):
        self.estimate.last_outer_accepted = ctx.last_outer_accepted
        lhat = update_lipschitz(
            self.estimate, ctx.j, ctx.k, psi, ctx.prev_point, grad, ctx.prev_grad, self.cfg.initial_lipschitz
        )
        if self.record:
            self.history.append((ctx.k, ctx.j, lhat, ctx.last_outer_accepted))
        return novel_step_size(ctx.grad_norm, ctx.thresholds.gra_low, lhat, self.cfg)

    def on_outcome(self, accepted):
        pass


class NovelThresholdPolicy:
    """Fixed distance/iteration triggers; gradient interval reset only when the
    accepted gradient left the old interval."""

    def __init__(self, cfg: NovelConfig = NOVEL):
        self.cfg = cfg

    def _make(self, grad_norm):
        low, upp = novel_gradient_thresholds(grad_norm, self.cfg)
        return TriggerThresholds(self.cfg.iter_exit, self.cfg.iter_max, low, upp)

    def initial(self, theta, grad_norm):
        return self._make(grad_norm)

    def select(self, theta, grad_norm, previous, branch):
        if branch in (Branch.LOW_GRADIENT, Branch.HIGH_GRADIENT):
            return self._make(grad_norm)
        return previous


def novel_threshold_policy(
    branch: Branch, grad_norm: float, previous: TriggerThresholds, cfg: NovelConfig = NOVEL
) -> TriggerThresholds:
    return NovelThresholdPolicy(cfg).select(None, grad_norm, previous, branch)


def make_novel_solver(
    eps: float = 1e-5, max_outer: int = 20_000, cfg: NovelConfig = NOVEL, **overrides
) -> tuple[NovelStepPolicy, NovelThresholdPolicy, FrameworkConfig]:
    """Fresh (stateful) policy objects plus the matching framework config.

    ``overrides`` replace fields of ``cfg`` (e.g. ``w=3`` for window sweeps).
    """
    if overrides:
        cfg = replace(cfg, **overrides)
    config = FrameworkConfig(
        sigma_low=cfg.sigma_low,
        sigma_upp=cfg.sigma_upp,
        delta_cap=cfg.delta_cap,
        w=cfg.w,
        rho=cfg.rho,
        eps=eps,
        max_outer=max_outer,
        delta0=1.0,
    )
    return NovelStepPolicy(cfg), NovelThresholdPolicy(cfg), config


def solve_novel(problem, theta0=None, eps: float = 1e-5, max_outer: int = 20_000, record_trace=True, **overrides):
    """Convenience wrapper: run the novel method on ``problem``."""
    from .framework import run

    policy, th_policy, config = make_novel_solver(eps=eps, max_outer=max_outer, **overrides)
    if theta0 is None:
        theta0 = problem.start()
    return run(problem, theta0, policy, th_policy, config, record_trace=record_trace)
