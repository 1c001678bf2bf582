"""Independent checkers for solver outputs.

Nothing here shares code with the solvers: every check recomputes its
quantities from the graph, the demands, and the claimed artifact by
plain full scans, so a bug in the solver's local bookkeeping cannot
hide.  The max-flow oracle is a textbook shortest-augmenting-path
routine over the standard super-source/super-sink reduction, kept
deliberately simple; it is meant for small instances in tests.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .graph import Graph, boundary_size, volume
from .sources import clean, edge_congestion, residual

__all__ = ["VerifyReport", "verify_cut_certificate",
           "verify_potential_certificate", "verify_flow_output",
           "oracle_feasible_single"]

CHECK_RTOL = 1e-9


@dataclass
class VerifyReport:
    ok: bool
    kind: str
    messages: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)


def verify_cut_certificate(g: Graph, b: dict, cert) -> VerifyReport:
    """Recompute b(S), the boundary, and the volume of a claimed cut.

    Sound iff |b(S)| strictly exceeds the number of boundary edges: a
    feasible flow moves at most one unit over each of them.  Recorded
    fields must match the recomputation (boundary and volume exactly,
    b(S) to relative 1e-9).
    """
    msgs: list[str] = []
    s = set(int(v) for v in cert.s)
    if not s:
        msgs.append("certificate set is empty")
        return VerifyReport(False, "cut-certificate", msgs)
    if any(not 0 <= v < g.n for v in s):
        msgs.append("certificate set contains out-of-range vertices")
        return VerifyReport(False, "cut-certificate", msgs)
    if len(s) == g.n:
        # S = V is legitimate only for unbalanced demand (boundary 0)
        pass
    b = clean(b)
    b_s = math.fsum(b.get(v, 0.0) for v in s)
    bd = boundary_size(g, s)
    vol = volume(g, s)
    if not abs(b_s) > bd:
        msgs.append(f"|b(S)| = {abs(b_s):.6g} does not exceed boundary {bd}")
    if abs(b_s - cert.b_of_s) > CHECK_RTOL * (1.0 + abs(b_s)):
        msgs.append(f"recorded b(S) {cert.b_of_s:.6g} != recomputed {b_s:.6g}")
    if bd != cert.boundary:
        msgs.append(f"recorded boundary {cert.boundary} != recomputed {bd}")
    if vol != cert.volume:
        msgs.append(f"recorded volume {cert.volume} != recomputed {vol}")
    details = {"b_of_s": b_s, "boundary": bd, "volume": vol}
    return VerifyReport(not msgs, "cut-certificate", msgs, details)


def verify_potential_certificate(g: Graph, bs: list, cert) -> VerifyReport:
    """Recompute both sides of a multi-commodity potential witness.

    The certificate is a sparse potential matrix phi(v, j); it is sound
    iff sum_{v,j} phi(v,j) b_j(v) strictly exceeds
    sum_e max_j |phi(tail,j) - phi(head,j)|, since any unit-congestion
    routing of the demands moves each edge's best drop at most once.
    """
    msgs: list[str] = []
    k = len(bs)
    phi: dict[tuple[int, int], float] = {}
    by_vertex: dict[int, list[tuple[int, float]]] = {}
    for (v, j), val in cert.phi.items():
        v = int(v)
        j = int(j)
        val = float(val)
        if not 0 <= v < g.n:
            msgs.append(f"potential entry at out-of-range vertex {v}")
            return VerifyReport(False, "potential-certificate", msgs)
        if not 0 <= j < k:
            msgs.append(f"potential entry at out-of-range commodity {j}")
            return VerifyReport(False, "potential-certificate", msgs)
        if not math.isfinite(val):
            msgs.append(f"non-finite potential at ({v}, {j})")
            return VerifyReport(False, "potential-certificate", msgs)
        if val != 0.0:
            phi[(v, j)] = val
            by_vertex.setdefault(v, []).append((j, val))
    if not phi:
        msgs.append("certificate has no nonzero entries")
        return VerifyReport(False, "potential-certificate", msgs)

    lhs = math.fsum(val * bs[j].get(v, 0.0) for (v, j), val in phi.items())
    rhs = 0.0
    for e in range(g.m):
        u = int(g.tails[e])
        w = int(g.heads[e])
        best = 0.0
        for j, val in by_vertex.get(u, ()):
            d = abs(val - phi.get((w, j), 0.0))
            if d > best:
                best = d
        for j, val in by_vertex.get(w, ()):
            if (u, j) in phi:
                continue  # already covered from u's side
            d = abs(val)
            if d > best:
                best = d
        rhs += best
    if not lhs > rhs:
        msgs.append(f"<phi, b> = {lhs:.6g} does not exceed "
                    f"total best drop {rhs:.6g}")
    if abs(lhs - cert.lhs) > CHECK_RTOL * (1.0 + abs(lhs)):
        msgs.append(f"recorded lhs {cert.lhs:.6g} != recomputed {lhs:.6g}")
    if abs(rhs - cert.rhs) > CHECK_RTOL * (1.0 + abs(rhs)):
        msgs.append(f"recorded rhs {cert.rhs:.6g} != recomputed {rhs:.6g}")
    details = {"lhs": lhs, "rhs": rhs}
    return VerifyReport(not msgs, "potential-certificate", msgs, details)


def verify_flow_output(g: Graph, bs: list, flows: list, eps: float) -> VerifyReport:
    """Check congestion and residual guarantees of a returned flow.

    Congestion: sum_j |f_j(e)| <= 1 + 1e-9 on every edge.  Residual:
    |b_j(v) - (B f_j)(v)| <= eps * deg(v) + 1e-9 for every commodity at
    every vertex.
    """
    msgs: list[str] = []
    if len(flows) != len(bs):
        msgs.append(f"{len(flows)} flows for {len(bs)} demand functions")
        return VerifyReport(False, "flow", msgs)
    for j, f in enumerate(flows):
        for e in f:
            if not 0 <= int(e) < g.m:
                msgs.append(f"commodity {j}: edge id {e} out of range")
                return VerifyReport(False, "flow", msgs)
    load = edge_congestion(flows)
    max_c = max(load.values(), default=0.0)
    if max_c > 1.0 + CHECK_RTOL:
        worst = max(load, key=load.get)
        msgs.append(f"congestion {max_c:.12g} on edge {worst} exceeds 1")
    worst_ratio = 0.0
    for j, (bj, fj) in enumerate(zip(bs, flows)):
        r = residual(g, bj, fj)
        for v, x in r.items():
            allowed = eps * float(g.deg[v]) + CHECK_RTOL
            if abs(x) > allowed:
                msgs.append(f"commodity {j}: residual {x:.6g} at vertex {v} "
                            f"exceeds eps * deg = {eps * float(g.deg[v]):.6g}")
            if g.deg[v] > 0:
                worst_ratio = max(worst_ratio, abs(x) / (eps * float(g.deg[v])))
    details = {"max_congestion": max_c, "worst_residual_ratio": worst_ratio}
    return VerifyReport(not msgs, "flow", msgs, details)


def oracle_feasible_single(g: Graph, b: dict) -> bool:
    """Exact feasibility of an integral single-commodity demand.

    Reduces to max flow with a super source/sink and answers whether all
    supply can be routed under unit edge capacities.  Demands must be
    integral (to 1e-9); raises ValueError otherwise.  Runs in
    O(V E^2); use on small instances.
    """
    b = clean(b)
    bi: dict[int, int] = {}
    for v, x in b.items():
        r = round(x)
        if abs(x - r) > 1e-9:
            raise ValueError(f"demand at vertex {v} is not integral: {x}")
        if r != 0:
            bi[v] = int(r)
    supply = sum(x for x in bi.values() if x > 0)
    demand = -sum(x for x in bi.values() if x < 0)
    if supply != demand:
        return False
    if supply == 0:
        return True

    nn = g.n + 2
    src, snk = g.n, g.n + 1
    head: list[list[int]] = [[] for _ in range(nn)]
    to: list[int] = []
    cap: list[int] = []

    def add_arc(u: int, v: int, c: int) -> None:
        head[u].append(len(to))
        to.append(v)
        cap.append(c)
        head[v].append(len(to))
        to.append(u)
        cap.append(0)

    for e in range(g.m):
        u = int(g.tails[e])
        v = int(g.heads[e])
        add_arc(u, v, 1)
        add_arc(v, u, 1)
    for v, x in bi.items():
        if x > 0:
            add_arc(src, v, x)
        else:
            add_arc(v, snk, -x)

    routed = 0
    while routed < supply:
        parent_arc = [-1] * nn
        parent_arc[src] = -2
        q = deque([src])
        while q and parent_arc[snk] == -1:
            u = q.popleft()
            for a in head[u]:
                if cap[a] > 0 and parent_arc[to[a]] == -1:
                    parent_arc[to[a]] = a
                    q.append(to[a])
        if parent_arc[snk] == -1:
            return False
        bottleneck = supply
        v = snk
        while v != src:
            a = parent_arc[v]
            bottleneck = min(bottleneck, cap[a])
            v = to[a ^ 1]
        v = snk
        while v != src:
            a = parent_arc[v]
            cap[a] -= bottleneck
            cap[a ^ 1] += bottleneck
            v = to[a ^ 1]
        routed += bottleneck
    return True
