"""Sparse source functions, flows, and demand decomposition.

A source function is a sparse map ``vertex -> real`` (positive = supply,
negative = demand); a flow is a sparse map ``edge id -> real`` in the
edge's stored orientation.  Multi-commodity variants are plain lists of
these maps, one per commodity.  All maps purge entries whose magnitude
drops below :data:`localflow.graph.PURGE_EPS`.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .graph import Graph, PURGE_EPS, apply_incidence

__all__ = ["WeightedPair", "clean", "norms", "residual", "edge_congestion",
           "decompose_to_pairs"]

# Relative tolerance for balance checks and round-trip guarantees.
BALANCE_RTOL = 1e-9


class WeightedPair(NamedTuple):
    """A source/sink pair shipping ``demand`` units from ``s`` to ``t``."""

    s: int
    t: int
    demand: float


def clean(vec: dict) -> dict[int, float]:
    """Normalize a sparse map: int keys, finite float values, zeros purged."""
    out: dict[int, float] = {}
    for key, val in vec.items():
        val = float(val)
        if not math.isfinite(val):
            raise ValueError(f"non-finite value {val!r} at key {key}")
        if abs(val) > PURGE_EPS:
            out[int(key)] = val
    return out


def norms(vec: dict) -> tuple[int, float]:
    """Return (support size, l1 mass) of a sparse map, after purging zeros."""
    cleaned = clean(vec)
    return len(cleaned), math.fsum(abs(x) for x in cleaned.values())


def residual(g: Graph, b: dict, f: dict) -> dict[int, float]:
    """Unrouted demand ``b - B f`` as a sparse source function."""
    out = dict(clean(b))
    for v, x in apply_incidence(g, f).items():
        out[v] = out.get(v, 0.0) - x
    return {v: x for v, x in out.items() if abs(x) > PURGE_EPS}


def edge_congestion(flows) -> dict[int, float]:
    """Total per-edge load sum_j |f_j(e)| across a list of flows."""
    out: dict[int, float] = {}
    for f in flows:
        for e, val in f.items():
            out[int(e)] = out.get(int(e), 0.0) + abs(float(val))
    return {e: x for e, x in out.items() if x > PURGE_EPS}


def decompose_to_pairs(r: dict) -> list[WeightedPair]:
    """Greedily split a balanced source function into source/sink pairs.

    Surplus vertices (r > 0) and deficit vertices (r < 0) are kept in
    ascending vertex order; each step pairs the current head of the two
    lists and ships the smaller of the two remaining magnitudes.  At most
    one vertex survives each step, so at most ``len(r)`` pairs come back,
    and re-summing them reproduces ``r`` to within ``1e-9 * |r|_1``.

    Raises ValueError if ``r`` is not balanced to within that tolerance.
    """
    vec = clean(r)
    l1 = math.fsum(abs(x) for x in vec.values())
    total = math.fsum(vec.values())
    if abs(total) > BALANCE_RTOL * max(1.0, l1):
        raise ValueError(
            f"source function is not balanced: sum {total:.3e} exceeds "
            f"tolerance {BALANCE_RTOL * max(1.0, l1):.3e}")

    surplus = [(v, x) for v, x in sorted(vec.items()) if x > 0]
    deficit = [(v, -x) for v, x in sorted(vec.items()) if x < 0]
    retire_eps = PURGE_EPS * max(1.0, l1)

    pairs: list[WeightedPair] = []
    i = j = 0
    while i < len(surplus) and j < len(deficit):
        sv, sx = surplus[i]
        tv, tx = deficit[j]
        d = min(sx, tx)
        pairs.append(WeightedPair(sv, tv, d))
        sx -= d
        tx -= d
        if sx <= retire_eps:
            i += 1
        else:
            surplus[i] = (sv, sx)
        if tx <= retire_eps:
            j += 1
        else:
            deficit[j] = (tv, tx)
    return pairs
