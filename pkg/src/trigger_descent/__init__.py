"""Trigger-event gradient methods with objective-economical acceptance tests."""
from .baselines import LineSearchConfig, gd_armijo, gd_wolfe
from .framework import FrameworkConfig, RunResult, Status, run
from .lipschitz_step import make_novel_solver, solve_novel
from .oracle import EvalCounters, OracleFailure, Problem
from .trace import RunTrace, verify_descent

__version__ = "0.1.0"
