"""End-to-end acceptance checks, one test per criterion.

Each test records a short detail string; the terminal summary prints one
pass/fail line per criterion.
"""
import time

import numpy as np
import pytest

from trigger_descent.bench.cli import GEE_TOL, SUITE_TOL, all_problems, audit_points, main
from trigger_descent.bench.experiments import gee_spec, run_experiment
from trigger_descent.framework import Status
from trigger_descent.lipschitz_step import novel_step_size, solve_novel
from trigger_descent.oracle import Problem, gradient_relative_error
from trigger_descent.problems import builtin_suite, wedderburn_objective
from trigger_descent.problems.suite import rosenbrock, sphere
from trigger_descent.trace import distinct_indices, g_sequence, l_of_k, o_of_k, o_sequence, verify_descent

from conftest import (
    TOY_ELL,
    TOY_G_SEQ,
    TOY_L,
    TOY_O,
    TOY_O_SEQ,
    TOY_W,
    strip_wall_time,
)


def gradient_logged(problem):
    """Copy of ``problem`` whose gradient records the bit pattern of every query point."""
    seen = []

    def g(x):
        seen.append(np.asarray(x, dtype=float).tobytes())
        return problem.gradient(x)

    clone = Problem(
        problem.name, problem.dimension, problem.objective, g, problem.x0,
        problem.known_minimizer, problem.lower_bound, problem.inner_cost,
    )
    return clone, seen


def median_successful(rows, algorithm, metric="objective_evals"):
    values = [getattr(r, metric) for r in rows if r.algorithm == algorithm and Status(r.status).successful]
    return float(np.median(values)) if values else float("inf")


@pytest.mark.criterion(1, "step-size bounds")
def test_step_size_bounds(record_property):
    rng = np.random.default_rng(0)
    triples = 10.0 ** rng.uniform(-12, 12, size=(10_000, 3))
    start = time.perf_counter()
    alphas = np.array([novel_step_size(g, low, lhat) for g, low, lhat in triples])
    elapsed = time.perf_counter() - start
    record_property("detail", f"min {alphas.min():.3e}, max {alphas.max():.3e}, {elapsed:.2f}s")
    assert np.all(alphas >= 1e-16) and np.all(alphas <= 1e16 + 1e-16)
    assert elapsed < 1.0


@pytest.mark.criterion(2, "evaluation economy")
def test_evaluation_economy(record_property):
    start = time.perf_counter()
    audited = 0
    for problem in builtin_suite():
        clone, seen = gradient_logged(problem)
        res = solve_novel(clone, record_trace=False)
        assert res.counters.objective_evals == res.outer_iterations + 1, problem.name
        assert res.counters.gradient_evals == len(seen), problem.name
        assert len(set(seen)) == len(seen), f"duplicate gradient point on {problem.name}"
        audited += len(seen)
    elapsed = time.perf_counter() - start
    record_property("detail", f"{audited} gradient calls audited, {elapsed:.2f}s")
    assert elapsed < 10.0


@pytest.mark.criterion(3, "descent theory on traces")
def test_descent_theory(record_property):
    start = time.perf_counter()
    runs = [(p, 10) for p in builtin_suite()]
    runs += [(p, w) for p in (sphere(10), rosenbrock(2)) for w in (1, 3, 10)]
    failures = []
    for problem, w in runs:
        report = verify_descent(solve_novel(problem, w=w).trace, w)
        if not report.passed:
            failures.append(f"{problem.name}/w={w}: {report.summary()}")
    elapsed = time.perf_counter() - start
    record_property("detail", f"{len(runs)} runs, {len(failures)} failing, {elapsed:.2f}s")
    assert not failures, failures
    assert elapsed < 30.0


@pytest.mark.criterion(4, "toy trace sequences")
def test_toy_sequences(toy_trace, record_property):
    record_property("detail", "ell, L, O, o, g rows")
    assert distinct_indices(toy_trace) == TOY_ELL
    assert l_of_k(toy_trace) == TOY_L
    assert o_of_k(toy_trace, TOY_W) == TOY_O
    assert o_sequence(toy_trace, TOY_W) == TOY_O_SEQ
    assert g_sequence(toy_trace, TOY_W) == TOY_G_SEQ


@pytest.mark.criterion(5, "convergence on the builtin suite")
def test_suite_convergence(record_property):
    start = time.perf_counter()
    worst, unconverged = 0, []
    for problem in builtin_suite():
        res = solve_novel(problem, eps=1e-5, max_outer=20_000, record_trace=False)
        worst = max(worst, res.outer_iterations)
        if not (res.status.successful and res.terminal_grad_norm <= 1e-5):
            unconverged.append(problem.name)
    elapsed = time.perf_counter() - start
    record_property("detail", f"max {worst} outer iterations, {elapsed:.2f}s")
    assert not unconverged, unconverged
    assert elapsed < 60.0


@pytest.mark.criterion(6, "gradient audits")
def test_gradient_audits(record_property):
    start = time.perf_counter()
    worst = {}
    for name, problem in all_problems().items():
        worst[name] = max(gradient_relative_error(problem, x) for x in audit_points(problem, 20, 0))
    elapsed = time.perf_counter() - start
    record_property("detail", f"{len(worst)} problems, worst {max(worst.values()):.1e}, {elapsed:.2f}s")
    for name, err in worst.items():
        assert err <= (GEE_TOL if name in ("wedderburn", "fieller") else SUITE_TOL), name
    assert elapsed < 30.0


@pytest.mark.criterion(7, "Fieller reliability")
def test_fieller_reliability(record_property):
    start = time.perf_counter()
    rows = run_experiment(gee_spec("fieller", 100, 0))
    elapsed = time.perf_counter() - start
    counts = {a: sum(r.category == "minimizer" for r in rows if r.algorithm == a) for a in ("novel", "gd_armijo", "gd_wolfe")}
    record_property("detail", f"minimizer counts {counts}, {elapsed:.1f}s")
    assert counts["novel"] == 100
    assert counts["novel"] >= counts["gd_armijo"] and counts["novel"] >= counts["gd_wolfe"]
    assert elapsed < 120.0


@pytest.mark.criterion(8, "Wedderburn economy")
def test_wedderburn_economy(record_property):
    start = time.perf_counter()
    rows = run_experiment(gee_spec("wedderburn", 100, 0))
    elapsed = time.perf_counter() - start
    medians = {a: median_successful(rows, a) for a in ("novel", "gd_armijo", "gd_wolfe")}
    record_property("detail", f"median objective evals {medians}, {elapsed:.1f}s")
    assert medians["novel"] < medians["gd_armijo"] and medians["novel"] < medians["gd_wolfe"]
    assert elapsed < 600.0


@pytest.mark.criterion(9, "path independence")
def test_path_independence(wedderburn_data, record_property):
    rng = np.random.default_rng(9)
    ref1, ref2 = rng.uniform(-1, 1, size=(2, 20))
    gaps = []
    for _ in range(5):
        a, b = rng.uniform(-1, 1, size=(2, 20))
        d1 = wedderburn_objective(a, wedderburn_data, ref1) - wedderburn_objective(b, wedderburn_data, ref1)
        d2 = wedderburn_objective(a, wedderburn_data, ref2) - wedderburn_objective(b, wedderburn_data, ref2)
        gaps.append(abs(d1 - d2))
    record_property("detail", f"max gap {max(gaps):.1e}")
    assert max(gaps) <= 1e-6


@pytest.mark.criterion(10, "determinism of bench gee")
def test_determinism(tmp_path, record_property):
    outputs = []
    for problem, trials in (("wedderburn", 5), ("fieller", 10)):
        texts = []
        for i in range(2):
            path = tmp_path / f"{problem}{i}.csv"
            assert main(["gee", "--problem", problem, "--trials", str(trials), "--seed", "3", "--out", str(path)]) == 0
            texts.append(strip_wall_time(path.read_text()))
        outputs.append(texts)
    record_property("detail", "wedderburn and fieller CSVs compared")
    for a, b in outputs:
        assert a == b
