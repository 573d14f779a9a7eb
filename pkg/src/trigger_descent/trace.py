"""Run traces and the bookkeeping sequences used by the convergence theory.

A :class:`RunTrace` holds one :class:`OuterRecord` per outer iteration of the
framework. From it we rebuild

* ``ell``   -- outer indices at which the iterate changed (``ell[0] = 0``),
* ``L(k)``  -- index into ``ell`` of the most recent distinct iterate,
* ``O(k)``  -- index into ``ell`` of the iterate whose objective is the
  current nonmonotone threshold,
* ``o_s`` and ``g_u`` -- the threshold-decrease and gradient subsequences,

and check the descent guarantees against the recorded values.  All functions
are pure and add no oracle calls.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class OuterRecord:
    k: int
    accepted: bool
    trigger_reason: str
    branch: str
    j_trigger: int
    theta_after: np.ndarray
    F_trigger: float
    grad_norm_after: float
    delta_after: float
    tau_obj_before: float
    tau_obj_after: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "accepted": self.accepted,
            "trigger_reason": self.trigger_reason,
            "branch": self.branch,
            "j_trigger": self.j_trigger,
            "theta_after": [float(v) for v in np.atleast_1d(self.theta_after)],
            "F_trigger": self.F_trigger,
            "grad_norm_after": self.grad_norm_after,
            "delta_after": self.delta_after,
            "tau_obj_before": self.tau_obj_before,
            "tau_obj_after": self.tau_obj_after,
        }


@dataclass
class RunTrace:
    F_theta0: float
    records: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def write_jsonl(self, fh) -> None:
        fh.write(json.dumps({"F_theta0": self.F_theta0}) + "\n")
        for rec in self.records:
            fh.write(json.dumps(rec.to_json()) + "\n")

    @classmethod
    def read_jsonl(cls, fh) -> "RunTrace":
        lines = [ln for ln in fh if ln.strip()]
        head = json.loads(lines[0])
        trace = cls(F_theta0=float(head["F_theta0"]))
        for ln in lines[1:]:
            d = json.loads(ln)
            d["theta_after"] = np.asarray(d["theta_after"], dtype=float)
            trace.records.append(OuterRecord(**d))
        return trace


def distinct_indices(trace: RunTrace) -> list[int]:
    """``ell_0 = 0`` followed by ``k + 1`` for every accepted record ``k``."""
    return [0] + [rec.k + 1 for rec in trace.records if rec.accepted]


def l_of_k(trace: RunTrace) -> list[int]:
    """``L(k)`` for ``k = 0..len(trace)`` (one entry per outer iterate)."""
    out = [0]
    t = 0
    for rec in trace.records:
        if rec.accepted:
            t += 1
        out.append(t)
    return out


def accepted_values(trace: RunTrace) -> list[float]:
    """``F(theta_{ell_t})`` for every ``t``."""
    return [trace.F_theta0] + [rec.F_trigger for rec in trace.records if rec.accepted]


def thresholds(trace: RunTrace, w: int) -> list[float]:
    """Nonmonotone threshold ``tau_obj^k`` recomputed from the accepted values."""
    vals = accepted_values(trace)
    return [max(vals[max(t - w + 1, 0) : t + 1]) for t in l_of_k(trace)]


def o_of_k(trace: RunTrace, w: int) -> list[int]:
    """``O(k) = max{s <= L(k) : F(theta_{ell_s}) = tau_obj^k}``."""
    vals = accepted_values(trace)
    out = []
    for t in l_of_k(trace):
        lo = max(t - w + 1, 0)
        window = vals[lo : t + 1]
        top = max(window)
        # last position attaining the max inside the window
        out.append(lo + len(window) - 1 - window[::-1].index(top))
    return out


def o_sequence(trace: RunTrace, w: int) -> list[int]:
    """``o_0 = 0``, ``o_s = O(ell_{o_{s-1} + w})``; truncated at the trace end."""
    ell = distinct_indices(trace)
    big_o = o_of_k(trace, w)
    seq = [0]
    while seq[-1] + w < len(ell):
        seq.append(big_o[ell[seq[-1] + w]])
    return seq


def g_sequence(trace: RunTrace, w: int) -> list[int]:
    """``g_0 = 0``, ``g_u = min{o_s >= g_{u-1} + w}``; truncated when none exists."""
    os_ = o_sequence(trace, w)
    seq = [0]
    while True:
        nxt = [o for o in os_ if o >= seq[-1] + w]
        if not nxt:
            return seq
        seq.append(min(nxt))


@dataclass
class DescentReport:
    """Pass/fail per clause; each clause maps to the offending indices."""

    failures: dict

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def clause_passed(self, name: str) -> bool:
        return not self.failures[name]

    def summary(self) -> str:
        return ", ".join(
            f"{name}={'ok' if not bad else 'FAIL@' + str(bad[:5])}" for name, bad in self.failures.items()
        )


def verify_descent(trace: RunTrace, w: int) -> DescentReport:
    """Check the objective-decrease guarantees on a finite trace.

    Clauses:

    * ``a`` -- ``F(theta_{ell_{o_s}})`` strictly decreasing in ``s`` (offending ``s``).
    * ``b`` -- ``F(theta_k) <= F(theta_{ell_{o_s}})`` for ``k`` in
      ``[ell_{o_s}, ell_{o_{s+1}}]`` (offending ``k``).
    * ``c`` -- the threshold only drops at an acceptance from an iterate with
      ``O(k) = L(k) - w + 1`` (offending ``k``).
    * ``d`` -- the threshold is unchanged across rejections (offending ``k``).
    * ``consistency`` -- live thresholds equal the recomputed ones (offending ``k``).
    """
    ell = distinct_indices(trace)
    big_l = l_of_k(trace)
    big_o = o_of_k(trace, w)
    vals = accepted_values(trace)
    os_ = o_sequence(trace, w)
    f_at = [vals[t] for t in big_l]

    bad_a = [s for s in range(1, len(os_)) if not vals[os_[s]] < vals[os_[s - 1]]]

    bad_b = []
    for s in range(len(os_) - 1):
        ref = vals[os_[s]]
        for k in range(ell[os_[s]], ell[os_[s + 1]] + 1):
            if f_at[k] > ref:
                bad_b.append(k)

    live = [rec.tau_obj_before for rec in trace.records]
    if trace.records:
        live.append(trace.records[-1].tau_obj_after)
    else:
        live.append(trace.F_theta0)

    bad_c, bad_d = [], []
    for rec in trace.records:
        k = rec.k
        if live[k + 1] < live[k]:
            if not (rec.accepted and big_o[k] == big_l[k] - w + 1):
                bad_c.append(k)
        if not rec.accepted and live[k + 1] != live[k]:
            bad_d.append(k)

    recomputed = thresholds(trace, w)
    bad_cons = [k for k, (a, b) in enumerate(zip(live, recomputed)) if a != b]

    return DescentReport(
        failures={"a": bad_a, "b": bad_b, "c": bad_c, "d": bad_d, "consistency": bad_cons}
    )


def trace_from_pattern(
    F_theta0: float,
    accepted_F: Iterable[Optional[float]],
    w: int,
    rejected_F: float = float("inf"),
) -> RunTrace:
    """Build a synthetic trace: ``None`` marks a rejection, a float an acceptance.

    Live thresholds are filled in with the sliding-window rule so the result is
    internally consistent; handy for fixtures and property tests.
    """
    trace = RunTrace(F_theta0=F_theta0)
    window = [F_theta0]
    t = 0
    for k, value in enumerate(accepted_F):
        before = max(window)
        if value is None:
            accepted = False
            f_trig = rejected_F
        else:
            accepted = True
            f_trig = float(value)
            t += 1
            window = (window + [f_trig])[-w:]
        trace.records.append(
            OuterRecord(
                k=k,
                accepted=accepted,
                trigger_reason="Distance",
                branch="Normal" if accepted else "Rejected",
                j_trigger=1,
                theta_after=np.array([float(t)]),
                F_trigger=f_trig,
                grad_norm_after=1.0,
                delta_after=1.0,
                tau_obj_before=before,
                tau_obj_after=max(window),
            )
        )
    return trace
