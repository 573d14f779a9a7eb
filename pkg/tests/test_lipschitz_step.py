import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigger_descent.framework import (
    Branch,
    InnerContext,
    ObjectiveWindow,
    OuterState,
    TriggerThresholds,
    apply_outcome,
    run,
)
from trigger_descent.lipschitz_step import (
    NOVEL,
    LipschitzEstimate,
    NovelStepPolicy,
    make_novel_solver,
    novel_gradient_thresholds,
    novel_step_size,
    novel_threshold_policy,
    solve_novel,
    update_lipschitz,
)
from trigger_descent.problems import builtin_suite
from trigger_descent.problems.suite import rosenbrock

from conftest import quadratic


class TestStepSize:
    def test_unit_example(self):
        # (1/sqrt 2)^2 rounds to 0.5 + 1 ulp, so compare at rounding level
        alpha = novel_step_size(1.0, 1.0 / math.sqrt(2.0), 1.0)
        assert alpha == pytest.approx(1.0 / 3.0 + 1e-16, rel=1e-15)

    def test_upper_extreme(self):
        assert novel_step_size(0.0, 1.0, 0.0) == 1e16 + 1e-16

    @given(
        st.floats(0, 1e12, allow_nan=False),
        st.floats(1e-12, 1e12, allow_nan=False),
        st.floats(0, 1e12, allow_nan=False),
    )
    def test_bounds(self, g, low, lhat):
        alpha = novel_step_size(g, low, lhat)
        assert 1e-16 <= alpha <= 1e16 + 1e-16


class TestLipschitzUpdate:
    def test_initial_value(self):
        state = LipschitzEstimate(value=7.0)
        assert update_lipschitz(state, 0, 0, np.zeros(1), None, np.zeros(1), None) == 1.0

    def test_carry_at_start_of_inner_loop(self):
        state = LipschitzEstimate(value=7.0)
        assert update_lipschitz(state, 0, 3, np.zeros(1), None, np.zeros(1), None) == 7.0

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
    def test_identity_hessian_ratio_is_one(self, a, b):
        a, b = np.array(a), np.array(b)
        if np.array_equal(a, b):
            return
        state = LipschitzEstimate(value=5.0, last_outer_accepted=True)
        assert update_lipschitz(state, 1, 1, a, b, a, b) == pytest.approx(1.0)

    def test_conservative_keeps_max(self):
        state = LipschitzEstimate(value=5.0, last_outer_accepted=False)
        assert update_lipschitz(state, 1, 1, np.array([1.0]), np.zeros(1), np.array([2.0]), np.zeros(1)) == 5.0

    def test_aggressive_takes_fresh_ratio(self):
        state = LipschitzEstimate(value=5.0, last_outer_accepted=True)
        assert update_lipschitz(state, 1, 1, np.array([1.0]), np.zeros(1), np.array([2.0]), np.zeros(1)) == 2.0

    def test_zero_step_keeps_previous(self):
        state = LipschitzEstimate(value=5.0, last_outer_accepted=True)
        assert update_lipschitz(state, 2, 1, np.ones(1), np.ones(1), np.ones(1), np.zeros(1)) == 5.0

    @pytest.mark.parametrize("c", [0.5, 3.0, 40.0])
    def test_scaled_quadratic_estimate_is_exact(self, c):
        policy, th, cfg = make_novel_solver()
        policy.record = True
        run(quadratic(1, scale=c, x0=[2.0]), np.array([2.0]), policy, th, cfg)
        aggressive = [lhat for (k, j, lhat, acc) in policy.history if j > 0 and acc]
        assert aggressive and aggressive[0] == pytest.approx(c, rel=1e-12)


class TestThresholds:
    def test_sqrt_two(self):
        low, upp = novel_gradient_thresholds(math.sqrt(2.0))
        assert low == pytest.approx(1.0) and upp == pytest.approx(math.sqrt(20.0))

    def test_upper_is_sqrt_ten_times_norm(self):
        assert novel_gradient_thresholds(1.0)[1] == pytest.approx(math.sqrt(10.0))

    @given(st.floats(1e-12, 1e12))
    def test_ratio_and_bracket(self, g):
        low, upp = novel_gradient_thresholds(g)
        assert upp / low == pytest.approx(math.sqrt(20.0))
        assert low < g < upp

    def test_zero_norm_guarded(self):
        with pytest.raises(AssertionError):
            novel_gradient_thresholds(0.0)

    def test_reset_on_gradient_exit(self):
        prev = TriggerThresholds(10.0, 100, 1.0, 2.0)
        for branch in (Branch.LOW_GRADIENT, Branch.HIGH_GRADIENT):
            new = novel_threshold_policy(branch, 4.0, prev)
            assert (new.gra_low, new.gra_upp) == novel_gradient_thresholds(4.0)
            assert (new.iter_exit, new.iter_max) == (10.0, 100)

    @pytest.mark.parametrize("branch", [Branch.NORMAL, Branch.REJECTED])
    def test_kept_otherwise(self, branch):
        prev = TriggerThresholds(10.0, 100, 1.0, 2.0)
        assert novel_threshold_policy(branch, 4.0, prev) is prev


class TestSolver:
    def test_config_constants(self):
        _, _, cfg = make_novel_solver()
        assert (cfg.w, cfg.rho, cfg.sigma_low, cfg.sigma_upp, cfg.delta_cap) == (10, 1e-4, 0.5, 1.5, 1.0)
        assert (NOVEL.iter_exit, NOVEL.iter_max, NOVEL.floor) == (10.0, 100, 1e-16)

    def test_direction_is_negative_gradient(self):
        ctx = InnerContext(0, 0, np.zeros(2), TriggerThresholds(10, 100, 1, 2), True, grad_norm=2.0)
        np.testing.assert_array_equal(NovelStepPolicy().direction(np.zeros(2), np.array([2.0, 0.0]), ctx), [-2.0, 0.0])

    def test_two_rejections_quarter_delta(self):
        _, th, cfg = make_novel_solver()
        state = OuterState(
            k=0,
            theta=np.zeros(1),
            grad_theta=np.ones(1),
            grad_norm=1.0,
            delta=1.0,
            thresholds=th.initial(np.zeros(1), 1.0),
            window=ObjectiveWindow([1.0]),
        )
        for _ in range(2):
            state = apply_outcome(state, Branch.REJECTED, cfg, th)
        assert state.delta == 0.25

    def test_monotone_conservatism(self):
        policy, th, cfg = make_novel_solver()
        policy.record = True
        run(rosenbrock(2), rosenbrock(2).start(), policy, th, cfg)
        by_loop = {}
        for k, j, lhat, acc in policy.history:
            if not acc and j > 0:
                by_loop.setdefault(k, []).append(lhat)
        assert by_loop, "expected at least one inner loop after a rejection"
        for values in by_loop.values():
            assert all(b >= a for a, b in zip(values, values[1:]))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 5), st.floats(0.1, 100), st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_steps_are_negative_gradient(n, scale, start):
    seen = []

    class Spy(NovelStepPolicy):
        def direction(self, psi, grad, ctx):
            gamma = super().direction(psi, grad, ctx)
            seen.append((grad, gamma))
            return gamma

    _, th, cfg = make_novel_solver()
    run(quadratic(n, scale), np.array(start[:n]), Spy(), th, cfg)
    for grad, gamma in seen:
        assert float(grad @ gamma) == -float(grad @ grad)
        assert np.linalg.norm(gamma) == np.linalg.norm(grad)


@pytest.mark.parametrize("problem", [p for p in builtin_suite() if p.bounded_iterates], ids=lambda p: p.name)
def test_min_gradient_drops_below_tolerance(problem):
    res = solve_novel(problem, record_trace=False)
    assert res.min_grad_norm <= 1e-5
