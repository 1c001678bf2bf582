"""Multiplicative-weights engine tolerant of approximate (rounded) weights.

The engine maintains one positive weight per index, all starting at 1.
Each iteration an adversary/provider reports gains g with |g|_inf <= 2
that must satisfy <g, w~> <= 0 against the *rounded* weight vector w~
(weights below a threshold read as 0).  Weights then move by
``w <- w * (1 + alpha * g)``.  Run long enough (see
:func:`compute_iterations`), every index's average gain is at most
``5 * alpha``.

Weights are stored as logarithms: a weight can shrink by a constant
factor for hundreds of thousands of iterations, far past the range of
double precision, while staying positive and comparable.  All threshold
comparisons happen in the log domain, so the rounding rule
``w~ = w if w >= threshold else 0`` is evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional

__all__ = ["MwuParams", "MwuContractViolation", "WeightLedger", "RoundedWeights",
           "MwuReport", "compute_iterations", "round_weights",
           "check_gain_contract", "run_mwu", "GAIN_CAP", "CONTRACT_RTOL"]

# Hard cap on per-index gains; keeps every update factor in [1/2, 3/2]
# for alpha <= 1/4.
GAIN_CAP = 2.0
# Relative tolerance for the half-space condition <g, w~> <= 0.
CONTRACT_RTOL = 1e-9
# Slack applied to the gain cap to absorb float noise in callers.
GAIN_CAP_SLACK = 1e-9


class MwuContractViolation(RuntimeError):
    """A gain vector broke the engine's contract; carries the iteration."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class MwuParams:
    """Parameters for one engine run.

    alpha: step size in (0, 1/4].
    index_count: size of the index universe |J| (touched or not).
    threshold: weights below this round to 0 in the approximate view.
    approx_bound: promised bound on |w - w~|_inf, used to size the run.
    iterations: number of rounds T.
    """

    alpha: float
    index_count: int
    threshold: float
    approx_bound: float
    iterations: int

    def __post_init__(self):
        if not (0.0 < self.alpha <= 0.25):
            raise ValueError(f"alpha must lie in (0, 1/4], got {self.alpha}")
        if self.index_count < 1:
            raise ValueError(f"index_count must be >= 1, got {self.index_count}")
        if not (self.threshold >= 0.0 and math.isfinite(self.threshold)):
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if self.approx_bound < 0.0:
            raise ValueError(f"approx_bound must be >= 0, got {self.approx_bound}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


def compute_iterations(alpha: float, index_count: int, approx_bound: float) -> int:
    """Smallest T with alpha^2 T >= ln(index_count * (1 + 1.5 T max(approx_bound, 1))).

    That horizon makes the total-weight growth argument close: after T
    rounds every per-index average gain is at most 5 * alpha.
    """
    if not (0.0 < alpha <= 0.25):
        raise ValueError(f"alpha must lie in (0, 1/4], got {alpha}")
    if index_count < 1:
        raise ValueError(f"index_count must be >= 1, got {index_count}")
    if approx_bound < 0.0:
        raise ValueError(f"approx_bound must be >= 0, got {approx_bound}")
    beta = 1.5 * max(approx_bound, 1.0)
    aa = alpha * alpha

    def satisfied(t: int) -> bool:
        return aa * t >= math.log(index_count * (1.0 + beta * t))

    hi = 1
    while not satisfied(hi):
        hi *= 2
    lo = max(1, hi // 2)
    # aa*t - log(...) is concave-up in t and crosses zero once on [lo, hi].
    while lo < hi:
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass
class WeightLedger:
    """Sparse positive weights over hashable indices, default 1, stored as logs."""

    _logs: dict[Hashable, float] = field(default_factory=dict)

    def log_value(self, j) -> float:
        return self._logs.get(j, 0.0)

    def value(self, j) -> float:
        return math.exp(self._logs.get(j, 0.0))

    def set_value(self, j, w: float) -> None:
        if not (w > 0.0 and math.isfinite(w)):
            raise ValueError(f"weights must be positive and finite, got {w}")
        self._logs[j] = math.log(w)

    def update(self, j, alpha: float, gain: float) -> None:
        """Apply w_j <- w_j * (1 + alpha * gain).  Requires |alpha*gain| <= 1/2."""
        step = alpha * gain
        if abs(step) > 0.5:
            raise ValueError(f"update factor out of range: alpha*gain = {step}")
        if step != 0.0:
            self._logs[j] = self._logs.get(j, 0.0) + math.log1p(step)

    def touched(self):
        return self._logs.keys()

    def items(self):
        for j, lw in self._logs.items():
            yield j, math.exp(lw)

    def total_weight(self, index_count: int) -> float:
        """Sum of all weights over a universe of ``index_count`` indices."""
        stored = math.fsum(math.exp(lw) for lw in self._logs.values())
        return stored + (index_count - len(self._logs)) * 1.0

    def __len__(self) -> int:
        return len(self._logs)


class RoundedWeights:
    """Read-only thresholded view of a ledger: w~ = w if w >= threshold else 0."""

    __slots__ = ("_ledger", "threshold", "_log_threshold")

    def __init__(self, ledger: WeightLedger, threshold: float):
        if not (threshold >= 0.0 and math.isfinite(threshold)):
            raise ValueError(f"threshold must be >= 0, got {threshold}")
        self._ledger = ledger
        self.threshold = threshold
        # threshold 0 disables rounding entirely (every weight is positive)
        self._log_threshold = math.log(threshold) if threshold > 0.0 \
            else -math.inf

    def get(self, j) -> float:
        lw = self._ledger.log_value(j)
        return math.exp(lw) if lw >= self._log_threshold else 0.0

    @property
    def default(self) -> float:
        """Rounded value of a never-touched index (weight exactly 1)."""
        return 1.0 if 0.0 >= self._log_threshold else 0.0

    def l1(self, index_count: int) -> float:
        """l1 mass of the rounded vector over the full index universe."""
        stored = math.fsum(self.get(j) for j in self._ledger.touched())
        return stored + (index_count - len(self._ledger)) * self.default


def round_weights(ledger: WeightLedger, threshold: float) -> RoundedWeights:
    """Thresholded view of ``ledger``; boundary weights (w == threshold) are kept."""
    return RoundedWeights(ledger, threshold)


def check_gain_contract(gains: dict, rounded: RoundedWeights, index_count: int,
                        iteration: int, tol: Optional[float] = None) -> None:
    """Validate one round of gains; raises MwuContractViolation on failure.

    Checks |g|_inf <= 2 and <g, w~> <= tol, where tol defaults to
    ``1e-9 * (1 + |w~|_1)``.  Callers whose termination rule uses a wider
    tolerance can pass it explicitly so the two comparisons agree.
    """
    dot = 0.0
    for j, g in gains.items():
        g = float(g)
        if not math.isfinite(g):
            raise MwuContractViolation(f"non-finite gain {g!r} at index {j!r}",
                                       iteration)
        if abs(g) > GAIN_CAP + GAIN_CAP_SLACK:
            raise MwuContractViolation(
                f"gain {g:.6g} at index {j!r} exceeds cap {GAIN_CAP}", iteration)
        dot += g * rounded.get(j)
    if tol is None:
        tol = CONTRACT_RTOL * (1.0 + rounded.l1(index_count))
    if dot > tol:
        raise MwuContractViolation(
            f"<gain, rounded weights> = {dot:.6g} exceeds tolerance {tol:.3g}",
            iteration)


@dataclass
class MwuReport:
    """Outcome of a run: per-index average gains over the rounds played."""

    averages: dict
    iterations_run: int
    stopped_early: bool


def run_mwu(params: MwuParams,
            provider: Callable[[int, WeightLedger, RoundedWeights], Optional[dict]],
            ) -> MwuReport:
    """Drive the engine for ``params.iterations`` rounds.

    ``provider(i, ledger, rounded)`` is called with the 1-based round
    number and must return a sparse gain map (index -> gain) or None to
    stop early.  Gains are contract-checked before weights move.  For a
    full-length run sized by :func:`compute_iterations`, every reported
    average is at most ``5 * params.alpha``.
    """
    ledger = WeightLedger()
    sums: dict = {}
    rounds_played = 0
    stopped_early = False
    for i in range(1, params.iterations + 1):
        rounded = round_weights(ledger, params.threshold)
        gains = provider(i, ledger, rounded)
        if gains is None:
            stopped_early = True
            break
        check_gain_contract(gains, rounded, params.index_count, iteration=i)
        for j, g in gains.items():
            ledger.update(j, params.alpha, float(g))
            sums[j] = sums.get(j, 0.0) + float(g)
        rounds_played = i
        if len(ledger) > params.index_count:
            raise MwuContractViolation(
                f"provider touched {len(ledger)} indices, universe holds "
                f"{params.index_count}", i)
    denom = max(rounds_played, 1)
    averages = {j: s / denom for j, s in sums.items()}
    return MwuReport(averages=averages, iterations_run=rounds_played,
                     stopped_early=stopped_early)
