"""Unit-capacity undirected graphs in a compact array layout.

Edges keep their input orientation: edge ``e`` runs from ``tails[e]`` to
``heads[e]``, and a flow value ``f(e) > 0`` means flow in that direction.
The incidence operator ``B`` maps edge space to vertex space with ``+1``
at the tail and ``-1`` at the head, so ``(B f)(v)`` is the net flow out
of ``v``.

Adjacency is stored CSR-style with one entry per (vertex, incident edge)
pair, ordered by ascending edge id within each vertex block.  Parallel
edges are allowed; self-loops are not.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Graph", "build_graph", "boundary_size", "volume", "apply_incidence"]

# Entries whose magnitude falls below this after arithmetic are dropped
# from sparse vertex/edge maps.
PURGE_EPS = 1e-15


class Graph:
    """Immutable undirected multigraph with oriented edge ids.

    Attributes:
        n: number of vertices, labeled 0..n-1.
        m: number of edges, labeled 0..m-1.
        tails, heads: int32 arrays of length m giving each edge's endpoints.
        indptr: int64 array of length n+1; vertex v's incident entries live
            at positions indptr[v]:indptr[v+1] of the adjacency arrays.
        adj_edge: int32 edge id per adjacency entry, ascending within a block.
        adj_other: int32 opposite endpoint per adjacency entry.
        adj_sign: int8 incidence sign of the block's vertex on that edge
            (+1 tail, -1 head).
        deg: int64 vertex degrees (parallel edges count separately).
    """

    __slots__ = ("n", "m", "tails", "heads", "indptr", "adj_edge", "adj_other",
                 "adj_sign", "deg")

    def __init__(self, n: int, tails: np.ndarray, heads: np.ndarray):
        self.n = int(n)
        self.m = int(tails.shape[0])
        self.tails = tails
        self.heads = heads

        ends = np.concatenate([tails, heads])
        eids = np.concatenate([np.arange(self.m, dtype=np.int32)] * 2)
        signs = np.concatenate([np.ones(self.m, np.int8), -np.ones(self.m, np.int8)])
        others = np.concatenate([heads, tails])

        order = np.lexsort((eids, ends))
        self.adj_edge = np.ascontiguousarray(eids[order])
        self.adj_other = np.ascontiguousarray(others[order])
        self.adj_sign = np.ascontiguousarray(signs[order])
        self.deg = np.bincount(ends, minlength=self.n).astype(np.int64)
        self.indptr = np.zeros(self.n + 1, np.int64)
        np.cumsum(self.deg, out=self.indptr[1:])

        for a in (self.tails, self.heads, self.indptr, self.adj_edge,
                  self.adj_other, self.adj_sign, self.deg):
            a.flags.writeable = False

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(n: int, edges) -> Graph:
    """Build a Graph from an iterable of (u, v) pairs.

    Orientation of each pair is preserved verbatim.  Raises ValueError for
    n < 1, endpoints out of range, or self-loops.
    """
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    pairs = list(edges)
    m = len(pairs)
    tails = np.empty(m, np.int32)
    heads = np.empty(m, np.int32)
    for i, (u, v) in enumerate(pairs):
        u = int(u)
        v = int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge {i}: endpoint out of range 0..{n - 1}: ({u}, {v})")
        if u == v:
            raise ValueError(f"edge {i}: self-loop at vertex {u}")
        tails[i] = u
        heads[i] = v
    return Graph(n, tails, heads)


def _member_mask(g: Graph, s) -> np.ndarray:
    mask = np.zeros(g.n, dtype=bool)
    for v in s:
        v = int(v)
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} out of range 0..{g.n - 1}")
        mask[v] = True
    return mask


def boundary_size(g: Graph, s) -> int:
    """Number of edges with exactly one endpoint in the vertex set ``s``."""
    mask = _member_mask(g, s)
    return int(np.count_nonzero(mask[g.tails] != mask[g.heads]))


def volume(g: Graph, s) -> int:
    """Sum of degrees over the vertex set ``s`` (parallel edges counted)."""
    mask = _member_mask(g, s)
    return int(g.deg[mask].sum())


def apply_incidence(g: Graph, f: dict) -> dict:
    """Apply the incidence operator to a sparse flow: returns B f as a sparse map.

    ``f`` maps edge id -> value; the result maps vertex -> net outflow,
    with entries below the purge threshold dropped.
    """
    out: dict[int, float] = {}
    for e, val in f.items():
        e = int(e)
        if not 0 <= e < g.m:
            raise ValueError(f"edge id {e} out of range 0..{g.m - 1}")
        val = float(val)
        u = int(g.tails[e])
        v = int(g.heads[e])
        out[u] = out.get(u, 0.0) + val
        out[v] = out.get(v, 0.0) - val
    return {v: x for v, x in out.items() if abs(x) > PURGE_EPS}
