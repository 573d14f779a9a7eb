"""Aggregation of result rows: relative changes, quartiles, terminal categories."""
from __future__ import annotations

import csv
import io
from collections import defaultdict

import numpy as np

from ..framework import Status

MINIMIZER_INTERVAL = (4.9, 5.0)
MAXIMIZER_INTERVAL = (-0.21, -0.2)
CATEGORIES = ("minimizer", "maximizer", "neither")
REFERENCE_ALGORITHM = "novel"
SUMMARY_HEADER = ("section", "problem", "algorithm", "metric", "value")
EVAL_METRICS = ("objective_evals", "gradient_evals", "total_evals", "wall_time_s")


def relative_change(e_ours: float, e_other: float) -> float:
    """``(e_other - e_ours) / max(e_other, e_ours, 1)``; positive when ours used fewer."""
    if e_ours < 0 or e_other < 0:
        raise ValueError("evaluation counts must be nonnegative")
    return (e_other - e_ours) / max(e_other, e_ours, 1)


def categorize_terminal(
    theta_t: float,
    status,
    min_interval=MINIMIZER_INTERVAL,
    max_interval=MAXIMIZER_INTERVAL,
) -> str:
    for lo, hi in (min_interval, max_interval):
        if not lo <= hi:
            raise ValueError(f"bad interval ({lo}, {hi})")
    if not Status(status).successful:
        return "neither"
    if min_interval[0] <= theta_t <= min_interval[1]:
        return "minimizer"
    if max_interval[0] <= theta_t <= max_interval[1]:
        return "maximizer"
    return "neither"


def _successful(row) -> bool:
    return Status(row.status).successful


def summarize(rows) -> list[tuple]:
    """Long-format summary rows ``(section, problem, algorithm, metric, value)``.

    Sections:

    * ``evals`` -- median and quartiles of each count over successful trials,
      plus success counts, per (problem, algorithm);
    * ``relative_change`` -- median relative change of each count against the
      novel method, over trials where every algorithm succeeded;
    * ``categories`` -- terminal category counts where categories were recorded.
    """
    out = []
    by_pa = defaultdict(list)
    by_pt = defaultdict(dict)
    for r in rows:
        by_pa[(r.problem, r.algorithm)].append(r)
        by_pt[(r.problem, r.trial)][r.algorithm] = r
    algorithms = sorted({r.algorithm for r in rows})

    for (problem, algorithm), group in sorted(by_pa.items()):
        ok = [r for r in group if _successful(r)]
        out.append(("evals", problem, algorithm, "trials", len(group)))
        out.append(("evals", problem, algorithm, "successful", len(ok)))
        for metric in EVAL_METRICS:
            if not ok:
                continue
            q1, med, q3 = np.percentile([getattr(r, metric) for r in ok], [25, 50, 75])
            out.append(("evals", problem, algorithm, f"{metric}_q1", float(q1)))
            out.append(("evals", problem, algorithm, f"{metric}_median", float(med)))
            out.append(("evals", problem, algorithm, f"{metric}_q3", float(q3)))

    if REFERENCE_ALGORITHM in algorithms:
        changes = defaultdict(list)
        for (problem, _trial), per_algo in sorted(by_pt.items()):
            if set(per_algo) != set(algorithms) or not all(_successful(r) for r in per_algo.values()):
                continue
            ours = per_algo[REFERENCE_ALGORITHM]
            for algorithm, other in per_algo.items():
                if algorithm == REFERENCE_ALGORITHM:
                    continue
                for metric in ("objective_evals", "gradient_evals", "total_evals"):
                    changes[(problem, algorithm, metric)].append(
                        relative_change(getattr(ours, metric), getattr(other, metric))
                    )
        for (problem, algorithm, metric), values in sorted(changes.items()):
            out.append(("relative_change", problem, algorithm, metric, float(np.median(values))))

    for (problem, algorithm), group in sorted(by_pa.items()):
        cats = [r.category for r in group if r.category != "n/a"]
        if not cats:
            continue
        for cat in CATEGORIES:
            out.append(("categories", problem, algorithm, cat, cats.count(cat)))
    return out


def format_summary(summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for section, problem, algorithm, metric, value in summary:
        writer.writerow([section, problem, algorithm, metric, repr(value) if isinstance(value, float) else value])
    return buf.getvalue()
