"""Instance generators for tests and benchmarks.

Graphs come back as :class:`localflow.graph.Graph`; demand builders
return sparse source functions that are exactly balanced and respect
``|b(v)| <= deg(v)`` vertex by vertex, so the trivial single-vertex
screen never fires on them.  Every generator is deterministic in its
``seed``.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, build_graph

__all__ = ["path_graph", "grid_graph", "random_regular_graph",
           "random_gnm_graph", "random_balanced_demand",
           "random_integral_demand", "bottleneck_instance"]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def path_graph(n: int) -> Graph:
    """Path 0-1-...-(n-1); edges oriented low to high."""
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def grid_graph(rows: int, cols: int) -> Graph:
    """Grid with row-major vertex ids; right edges, then down edges."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return build_graph(rows * cols, edges)


def random_regular_graph(n: int, d: int, seed=0) -> Graph:
    """Random d-regular multigraph: d/2 random cycles (+ a matching if odd).

    Every vertex gets degree exactly d; parallel edges may occur (they
    are legal), self-loops cannot.  An odd d needs an even n.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if d % 2 == 1 and n % 2 == 1:
        raise ValueError(f"odd degree {d} needs an even vertex count, got {n}")
    rng = _rng(seed)
    tails, heads = [], []
    for _ in range(d // 2):
        perm = rng.permutation(n).astype(np.int32)
        tails.append(perm)
        heads.append(np.roll(perm, -1))
    if d % 2 == 1:
        perm = rng.permutation(n).astype(np.int32)
        tails.append(perm[0::2])
        heads.append(perm[1::2])
    return Graph(n, np.ascontiguousarray(np.concatenate(tails)),
                 np.ascontiguousarray(np.concatenate(heads)))


def random_gnm_graph(n: int, m: int, seed=0) -> Graph:
    """n vertices, m uniform random edges (no self-loops; parallels allowed)."""
    if n < 2 and m > 0:
        raise ValueError(f"need n >= 2 to place edges, got n={n}")
    rng = _rng(seed)
    tails = rng.integers(0, n, size=m, dtype=np.int32)
    heads = rng.integers(0, n - 1, size=m, dtype=np.int32)
    heads[heads >= tails] += 1
    return Graph(n, tails, heads)


def random_balanced_demand(g: Graph, support: int, l1: float, seed=0,
                           pool=None) -> dict[int, float]:
    """Equal-split demand: l1/support at each of support/2 sources and sinks.

    ``pool`` restricts the candidate vertices (default: every vertex of
    positive degree).  Draws are rejected until every chosen vertex can
    carry its share (``l1/support <= deg``); with a sensible l1 the
    first draw almost always lands.
    """
    if support < 2 or support % 2 != 0:
        raise ValueError(f"support must be even and >= 2, got {support}")
    if not l1 > 0:
        raise ValueError(f"l1 must be positive, got {l1}")
    rng = _rng(seed)
    if pool is None:
        pool = np.flatnonzero(g.deg > 0)
    pool = np.asarray(pool)
    if len(pool) < support:
        raise ValueError(f"pool of {len(pool)} vertices cannot host "
                         f"support {support}")
    share = l1 / support
    for _ in range(200):
        chosen = rng.choice(pool, size=support, replace=False)
        if all(share <= g.deg[v] for v in chosen):
            b = {int(v): share for v in chosen[:support // 2]}
            b.update({int(v): -share for v in chosen[support // 2:]})
            return b
    raise RuntimeError(f"no draw of {support} vertices supports share {share}; "
                       f"lower l1 or widen the pool")


def random_integral_demand(g: Graph, units: int, seed=0,
                           pool=None) -> dict[int, float]:
    """Balanced integral demand: ``units`` unit supplies and unit sinks.

    Sources and sinks come from disjoint halves of a shuffled pool, and
    units stack on a vertex only up to its degree.  Stacking is the
    point: pushing |b(v)| toward deg(v) makes infeasible draws common,
    which is what the exact-feasibility comparisons want.
    """
    if units < 1:
        raise ValueError(f"units must be >= 1, got {units}")
    rng = _rng(seed)
    if pool is None:
        pool = np.flatnonzero(g.deg > 0)
    shuffled = rng.permutation(np.asarray(pool))
    if len(shuffled) < 2:
        raise ValueError("pool must hold at least 2 usable vertices")
    mid = len(shuffled) // 2
    b: dict[int, float] = {}
    for side, step in ((shuffled[:mid], 1.0), (shuffled[mid:], -1.0)):
        placed = 0
        tries = 0
        while placed < units:
            tries += 1
            if tries > 50 * units + 100:
                raise RuntimeError(
                    f"could not place {units} units on a side with capacity "
                    f"{int(sum(g.deg[v] for v in side))}")
            v = int(side[rng.integers(0, len(side))])
            if abs(b.get(v, 0.0) + step) <= g.deg[v]:
                b[v] = b.get(v, 0.0) + step
                placed += 1
    return {v: x for v, x in b.items() if x != 0.0}


def _random_connected(rng: np.random.Generator, n: int, extra: int,
                      offset: int) -> list[tuple[int, int]]:
    edges = [(offset + v, offset + int(rng.integers(0, v)))
             for v in range(1, n)]
    for _ in range(extra):
        u = int(rng.integers(0, n))
        w = int(rng.integers(0, n - 1))
        if w >= u:
            w += 1
        edges.append((offset + u, offset + w))
    return edges


def bottleneck_instance(half: int, bridges: int, demand: int,
                        seed=0) -> tuple[Graph, dict[int, float]]:
    """Two random connected blobs joined by few edges, demand across.

    Ships ``demand`` integral units from blob A (vertices 0..half-1) to
    blob B; with ``demand > bridges`` the blob itself is a violating
    set, so the solver must come back with a certificate.  Units are
    stacked on vertices in degree order, never beyond deg(v) - 1, which
    keeps the single-vertex screen quiet.
    """
    if half < 2:
        raise ValueError(f"need half >= 2, got {half}")
    if bridges < 1 or demand < 1:
        raise ValueError("bridges and demand must be >= 1")
    rng = _rng(seed)
    edges = _random_connected(rng, half, half, 0)
    edges += _random_connected(rng, half, half, half)
    for _ in range(bridges):
        edges.append((int(rng.integers(0, half)),
                      half + int(rng.integers(0, half))))
    g = build_graph(2 * half, edges)

    def stack(vertices, sign: float) -> dict[int, float]:
        order = sorted(vertices, key=lambda v: (-int(g.deg[v]), v))
        placed: dict[int, float] = {}
        left = demand
        while left > 0:
            progress = False
            for v in order:
                room = int(g.deg[v]) - 1 - abs(placed.get(v, 0.0))
                if room >= 1 and left > 0:
                    placed[v] = placed.get(v, 0.0) + sign
                    left -= 1
                    progress = True
            if not progress:
                raise RuntimeError(f"blob cannot absorb {demand} units; "
                                   f"raise half or lower demand")
        return placed

    b = stack(range(half), +1.0)
    b.update(stack(range(half, 2 * half), -1.0))
    return g, b
