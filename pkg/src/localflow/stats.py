"""Run statistics, work accounting, and locality audits.

Work units, counted identically by the compiled kernels and the
reference drivers:

* +1 per adjacency entry examined while building a round's unit flow
  (including entries skipped because the edge was already claimed),
* +1 per nonzero flow entry applied during the weight update,
* +2 per touched vertex/pair (one multiplicative update for each of the
  paired weights),
* +1 per adjacency entry examined by the sweep that extracts a cut
  certificate.

The audit verifies, after every weight update, three facts the solver's
locality argument rests on (violations are recorded, never raised):

* potential-floor: an active index must have accumulated at least
  ln(n)/alpha of absolute relative excess,
* excess-mass: per commodity, sum_v |cumulative excess(v)| * deg(v)
  can grow by at most |b_j|_1 per round,
* active-volume: per commodity, the active set's volume stays below
  T * |b_j|_1 * alpha / ln(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["AuditViolation", "RunStats", "audit_iteration", "work_bound",
           "report", "AUDIT_RTOL", "AUDIT_ATOL"]

AUDIT_RTOL = 1e-9
AUDIT_ATOL = 1e-12

# Violation kinds, matching the codes used by the compiled kernels.
KIND_BY_CODE = {1: "potential-floor", 2: "active-volume", 3: "excess-mass"}


@dataclass(frozen=True)
class AuditViolation:
    kind: str
    iteration: int
    vertex: Optional[int]
    commodity: Optional[int]
    measured: float
    bound: float


@dataclass
class RunStats:
    """Everything observable about one solve."""

    kind: str                     # "single" or "multi"
    n: int
    m: int
    k: int
    eps: float
    alpha: float
    threshold: float
    iterations_planned: int
    iterations_executed: int
    terminated: bool
    b_l0: int                     # total support across commodities
    b_l1: float                   # total l1 mass across commodities
    scans: int = 0
    weight_updates: int = 0
    flow_entries: int = 0
    touched: int = 0
    sweep_scans: int = 0
    audit_enabled: bool = False
    audit_violation_count: int = 0
    audit_first_violation: Optional[AuditViolation] = None
    series: Optional[dict] = field(default=None, repr=False)

    @property
    def work(self) -> int:
        return self.scans + self.weight_updates + self.flow_entries + self.sweep_scans

    @property
    def work_bound(self) -> float:
        return work_bound(self.iterations_planned, self.b_l0, self.b_l1,
                          self.alpha, self.n)

    @property
    def fitted_constant(self) -> float:
        """Observed work divided by the locality bound T*|b|_0 + T^2*|b|_1*alpha/ln n."""
        bound = self.work_bound
        return self.work / bound if bound > 0 else 0.0


def work_bound(iterations: int, b_l0: int, b_l1: float, alpha: float,
               n: int) -> float:
    """The locality budget the audit and benchmarks measure against."""
    lnn = math.log(max(n, 2))
    return iterations * b_l0 + iterations * iterations * b_l1 * alpha / lnn


def audit_iteration(state) -> list[AuditViolation]:
    """Run the three audit checks against a solver state, post-update.

    ``state`` is a single- or multi-commodity solver state exposing
    ``_audit_args()``; the returned list is empty when every invariant
    holds.  A deliberately corrupted state (say, a weight pushed above
    the threshold by hand) shows up as a potential-floor violation.
    """
    (n, alpha, iterations, iteration, entries, volumes, b_l1s) = state._audit_args()
    out: list[AuditViolation] = []
    lnn = math.log(max(n, 2))
    phi_bound = lnn / alpha
    need = phi_bound * (1.0 - AUDIT_RTOL) - AUDIT_ATOL
    k = len(b_l1s)
    rsums = [0.0] * k
    for (v, j, cum_r, deg, active) in entries:
        rsums[j] += abs(cum_r) * deg
        if active and abs(cum_r) < need:
            out.append(AuditViolation("potential-floor", iteration, v, j,
                                      abs(cum_r), phi_bound))
    for j in range(k):
        limit = iteration * b_l1s[j] * (1.0 + AUDIT_RTOL) + AUDIT_ATOL
        if rsums[j] > limit:
            out.append(AuditViolation("excess-mass", iteration, None, j,
                                      rsums[j], limit))
        vol_limit = (iterations * b_l1s[j] * alpha / lnn) * (1.0 + AUDIT_RTOL) \
            + AUDIT_ATOL
        if volumes[j] > vol_limit:
            out.append(AuditViolation("active-volume", iteration, None, j,
                                      volumes[j], vol_limit))
    return out


def _series_to_lists(series: Optional[dict]) -> Optional[dict]:
    if series is None:
        return None
    out = {}
    for name, arr in series.items():
        a = np.asarray(arr)
        out[name] = [float(x) for x in a] if a.dtype.kind == "f" \
            else [int(x) for x in a]
    return out


def report(stats: RunStats, include_series: bool = True) -> dict:
    """Machine-readable summary of a run (JSON-serializable)."""
    first = stats.audit_first_violation
    doc = {
        "kind": stats.kind,
        "n": stats.n,
        "m": stats.m,
        "k": stats.k,
        "eps": stats.eps,
        "alpha": stats.alpha,
        "threshold": stats.threshold,
        "iterations_planned": stats.iterations_planned,
        "iterations_executed": stats.iterations_executed,
        "terminated": stats.terminated,
        "b_l0": stats.b_l0,
        "b_l1": stats.b_l1,
        "totals": {
            "work": stats.work,
            "scans": stats.scans,
            "weight_updates": stats.weight_updates,
            "flow_entries": stats.flow_entries,
            "sweep_scans": stats.sweep_scans,
            "touched": stats.touched,
        },
        "work_bound": stats.work_bound,
        "fitted_constant": stats.fitted_constant,
        "audit": {
            "enabled": stats.audit_enabled,
            "violations": stats.audit_violation_count,
            "first": None if first is None else {
                "kind": first.kind,
                "iteration": first.iteration,
                "vertex": first.vertex,
                "commodity": first.commodity,
                "measured": first.measured,
                "bound": first.bound,
            },
        },
    }
    if include_series:
        doc["series"] = _series_to_lists(stats.series)
    return doc
