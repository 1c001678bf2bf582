"""Single-commodity local flow solver.

Given a unit-capacity undirected graph and a source function ``b``, the
solver either returns a flow whose average congestion stays at or below
1 and whose residual demand is at most ``eps * deg(v)`` everywhere, or a
vertex set ``S`` with ``|b(S)| > boundary(S)``: a self-verifying witness
that no feasible routing exists.

Each round every vertex carries a potential derived from a pair of
multiplicative weights rounded at a threshold of ``n``; one unit of flow
crosses every edge with a potential drop; the relative excess
``(b(v) - net outflow) / deg(v)`` then moves the weights.  Rounding
makes untouched vertices completely inert, which is what keeps the work
proportional to the demand's neighborhood rather than the graph.

Two interchangeable drivers share the exact arithmetic (bit-for-bit):
:func:`solve_single` runs a compiled kernel, and
:func:`solve_single_reference` composes the documented step operations
in plain Python.  The reference driver exists to cross-check the kernel
and to make the round structure readable; use the compiled one for real
work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .graph import Graph, PURGE_EPS
from .mwu import MwuContractViolation, WeightLedger, compute_iterations
from .sources import clean, norms
from .stats import AuditViolation, KIND_BY_CODE, RunStats, audit_iteration
from .verify import verify_cut_certificate

__all__ = ["CutCertificate", "SingleResult", "SingleState", "precheck",
           "rounded_potential", "flow_step", "termination_check",
           "extract_certificate", "update_weights", "solve_single",
           "solve_single_reference"]

# Termination fires only when <phi, b> beats <phi, B f> by this margin.
TERM_RTOL = 1e-9
GAIN_LIMIT = 2.0 + 1e-9


@dataclass(frozen=True)
class CutCertificate:
    """A vertex set whose demand exceeds its boundary: |b(S)| > boundary.

    ``volume`` (sum of degrees over S) is recorded because the locality
    guarantee bounds it by ``T * |b|_1 * alpha / ln(n)``.
    """

    s: tuple
    b_of_s: float
    boundary: int
    volume: int


@dataclass
class SingleResult:
    """Exactly one of ``flow`` / ``certificate`` is set.

    flow: sparse edge map of the averaged flow (numerator / iterations).
    numerators: integer per-edge accumulators; dividing by ``iterations``
        reproduces ``flow`` exactly, which is how congestion stays at or
        below 1 with no float slack.
    residual: unrouted demand of the averaged flow.
    """

    iterations: int
    stats: RunStats
    flow: Optional[dict] = None
    numerators: Optional[dict] = None
    residual: Optional[dict] = None
    certificate: Optional[CutCertificate] = None

    @property
    def is_flow(self) -> bool:
        return self.flow is not None

    @property
    def is_certificate(self) -> bool:
        return self.certificate is not None


def _validate_eps(eps: float) -> float:
    eps = float(eps)
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return eps


def precheck(g: Graph, b: dict) -> Optional[CutCertificate]:
    """Screen for a single overloaded vertex: |b(v)| > deg(v).

    Scans the support in ascending vertex order and returns the witness
    {v} for the first hit, or None.  Run this before iterating; it also
    covers isolated vertices carrying demand.
    """
    for v in sorted(clean(b)):
        if not 0 <= v < g.n:
            raise ValueError(f"source vertex {v} out of range 0..{g.n - 1}")
        bv = float(b[v])
        d = int(g.deg[v])
        if abs(bv) > d:
            return CutCertificate(s=(v,), b_of_s=bv, boundary=d, volume=d)
    return None


class SingleState:
    """Mutable per-round state: weights, potentials, accumulators.

    The weight ledger holds one pair per vertex, keyed ``(v, +1)`` and
    ``(v, -1)``; a vertex is active exactly when its two rounded weights
    differ, and ``phi`` caches the potential of active vertices (absent
    means zero).  ``tracked`` preserves first-touch order, which fixes
    the scan order and makes runs reproducible.
    """

    def __init__(self, g: Graph, b: dict, eps: float,
                 iterations: Optional[int] = None):
        self.graph = g
        self.b = clean(b)
        self.eps = _validate_eps(eps)
        self.alpha = self.eps / 5.0
        self.threshold = float(g.n)
        self.log_threshold = math.log(self.threshold)
        self.b_l0, self.b_l1 = norms(self.b)
        if iterations is None:
            iterations = compute_iterations(self.alpha, 2 * g.n, g.n)
        self.iterations = int(iterations)
        self.iteration = 0
        self.weights = WeightLedger()
        self.cum_flow: dict[int, int] = {}
        self.cum_residual: dict[int, float] = {}
        self.phi: dict[int, float] = {}
        self.active_set: set[int] = set()
        self._b_sorted = sorted(self.b)
        self.tracked: dict[int, None] = {v: None for v in self._b_sorted}
        self.vol_active = 0.0
        # work counters (see localflow.stats for the unit definitions)
        self.scans = 0
        self.weight_updates = 0
        self.flow_entries = 0
        self.touched = 0
        self.sweep_scans = 0

    def _rounded_pair(self, v: int) -> tuple[float, float]:
        lwp = self.weights.log_value((v, +1))
        lwm = self.weights.log_value((v, -1))
        wtp = math.exp(lwp) if lwp >= self.log_threshold else 0.0
        wtm = math.exp(lwm) if lwm >= self.log_threshold else 0.0
        return wtp, wtm

    def _refresh(self, v: int) -> None:
        """Recompute activity, potential, and active volume for one vertex."""
        wtp, wtm = self._rounded_pair(v)
        was = v in self.active_set
        if wtp != wtm:
            self.phi[v] = (wtp - wtm) / float(self.graph.deg[v])
            if not was:
                self.active_set.add(v)
                self.vol_active += float(self.graph.deg[v])
        else:
            self.phi.pop(v, None)
            if was:
                self.active_set.discard(v)
                self.vol_active -= float(self.graph.deg[v])

    def refresh_all(self) -> None:
        """Rebuild every cached quantity from the ledger (test hook)."""
        for key, _ in list(self.weights.items()):
            v = key[0]
            self.tracked.setdefault(v, None)
        for v in self.tracked:
            self._refresh(v)

    def _audit_args(self):
        entries = [(v, 0, self.cum_residual.get(v, 0.0), int(self.graph.deg[v]),
                    v in self.active_set) for v in self.tracked]
        return (self.graph.n, self.alpha, self.iterations, self.iteration,
                entries, [self.vol_active], [self.b_l1])


def rounded_potential(state: SingleState, v: int) -> float:
    """Potential of ``v``: (rounded w+ - rounded w-) / deg(v).

    Zero for isolated vertices and for any vertex whose two rounded
    weights agree (in particular every untouched vertex, whose weights
    both sit at 1, below the threshold for n >= 2).
    """
    if not 0 <= v < state.graph.n:
        raise ValueError(f"vertex {v} out of range 0..{state.graph.n - 1}")
    d = int(state.graph.deg[v])
    if d == 0:
        return 0.0
    wtp, wtm = state._rounded_pair(v)
    return (wtp - wtm) / float(d)


def flow_step(state: SingleState) -> dict[int, int]:
    """Route one unit across every edge with a potential drop.

    Returns ``{edge id: +1 or -1}`` in the edge's stored orientation,
    visiting active vertices in first-touch order and each vertex's
    incident edges in ascending edge id.  Each edge is claimed by the
    first endpoint that reaches it.
    """
    g = state.graph
    phi = state.phi
    f: dict[int, int] = {}
    scans = 0
    for v in state.tracked:
        if v not in state.active_set:
            continue
        pv = phi[v]
        for idx in range(g.indptr[v], g.indptr[v + 1]):
            scans += 1
            e = int(g.adj_edge[idx])
            if e in f:
                continue
            o = int(g.adj_other[idx])
            d = pv - phi.get(o, 0.0)
            if d == 0.0:
                continue
            s = int(g.adj_sign[idx])
            f[e] = 1 if s * d > 0.0 else -1
    state.scans += scans
    return f


def termination_check(state: SingleState, f: dict) -> bool:
    """True when <phi, b> exceeds <phi, B f> beyond float tolerance.

    The right side equals the total potential drop over the routed
    edges, so this is exactly the event that makes the sweep cut of
    :func:`extract_certificate` worth extracting.
    """
    g = state.graph
    phi = state.phi
    lhs = 0.0
    for v in state.tracked:
        if v in state.active_set:
            lhs += phi[v] * state.b.get(v, 0.0)
    rhs = 0.0
    for e in f:
        delta = phi.get(int(g.tails[e]), 0.0) - phi.get(int(g.heads[e]), 0.0)
        rhs += abs(delta)
    return lhs > rhs + TERM_RTOL * (1.0 + abs(lhs) + abs(rhs))


def _sweep_cut(g: Graph, b: dict, items) -> tuple[Optional[CutCertificate], int]:
    """Scan prefixes of the potential ordering for a violating level set.

    ``items`` is the list of (vertex, potential) for active vertices.
    Positive potentials are scanned in decreasing order, then negative
    potentials in increasing order; ties break toward the smaller vertex
    id, so every threshold level set appears among the scanned prefixes.
    Returns (certificate or None, adjacency entries examined).
    """
    scans = 0
    pmap = dict(items)

    def try_side(cands, flip: float) -> Optional[CutCertificate]:
        nonlocal scans
        s_set: set[int] = set()
        order: list[int] = []
        b_s = 0.0
        boundary = 0
        vol = 0
        for v in cands:
            inside = 0
            for idx in range(g.indptr[v], g.indptr[v + 1]):
                scans += 1
                if int(g.adj_other[idx]) in s_set:
                    inside += 1
            d = int(g.deg[v])
            boundary += d - 2 * inside
            vol += d
            b_s += b.get(v, 0.0)
            s_set.add(v)
            order.append(v)
            if flip * b_s > boundary:
                return CutCertificate(s=tuple(sorted(order)), b_of_s=b_s,
                                      boundary=boundary, volume=vol)
        return None

    pos = sorted((v for v, p in pmap.items() if p > 0.0),
                 key=lambda v: (-pmap[v], v))
    cert = try_side(pos, 1.0)
    if cert is None:
        neg = sorted((v for v, p in pmap.items() if p < 0.0),
                     key=lambda v: (pmap[v], v))
        cert = try_side(neg, -1.0)
    return cert, scans


def extract_certificate(state: SingleState) -> Optional[CutCertificate]:
    """Sweep the current potentials for a set with |b(S)| > boundary(S).

    Termination firing guarantees (in exact arithmetic) that some level
    set of the potential violates the cut bound; this scans all of them
    and returns the first hit, or None when rounding noise produced a
    spurious trigger (the caller then simply keeps iterating).
    """
    items = [(v, state.phi[v]) for v in state.tracked if v in state.active_set]
    cert, scans = _sweep_cut(state.graph, state.b, items)
    state.sweep_scans += scans
    return cert


def update_weights(state: SingleState, f: dict) -> None:
    """Apply one round of multiplicative updates from the routed flow.

    The relative excess ``r(v) = (b(v) - net outflow) / deg(v)`` drives
    ``w+ <- w+ (1 + alpha r)`` and ``w- <- w- (1 - alpha r)`` for every
    vertex of the demand's support plus every flow endpoint, then the
    cached potentials, the active set, and the accumulators catch up.
    """
    g = state.graph
    # demand support first (ascending), then flow endpoints in claim order
    touched: list[int] = list(state._b_sorted)
    seen = set(touched)
    net: dict[int, int] = {}
    for e, val in f.items():
        val = int(val)
        state.cum_flow[e] = state.cum_flow.get(e, 0) + val
        u = int(g.tails[e])
        w = int(g.heads[e])
        net[u] = net.get(u, 0) + val
        net[w] = net.get(w, 0) - val
        if u not in seen:
            seen.add(u)
            touched.append(u)
        if w not in seen:
            seen.add(w)
            touched.append(w)
    state.flow_entries += len(f)
    for v in touched:
        state.tracked.setdefault(v, None)
        r = (state.b.get(v, 0.0) - net.get(v, 0)) / float(g.deg[v])
        if abs(r) > GAIN_LIMIT:
            raise MwuContractViolation(
                f"relative excess {r:.6g} at vertex {v} exceeds the gain cap",
                state.iteration + 1)
        state.weights.update((v, +1), state.alpha, r)
        state.weights.update((v, -1), state.alpha, -r)
        state.cum_residual[v] = state.cum_residual.get(v, 0.0) + r
        state._refresh(v)
    state.weight_updates += 2 * len(touched)
    state.touched += len(touched)
    state.iteration += 1


def _average_outputs(g: Graph, b: dict, numerators: dict, t: int):
    flow = {e: c / t for e, c in numerators.items() if c != 0}
    net: dict[int, int] = {}
    for e, c in numerators.items():
        if c == 0:
            continue
        u = int(g.tails[e])
        w = int(g.heads[e])
        net[u] = net.get(u, 0) + c
        net[w] = net.get(w, 0) - c
    residual: dict[int, float] = {}
    for v in set(b) | set(net):
        r = b.get(v, 0.0) - net.get(v, 0) / t
        if abs(r) > PURGE_EPS:
            residual[v] = r
    numerators = {e: c for e, c in numerators.items() if c != 0}
    return flow, numerators, residual


def _empty_stats(g: Graph, eps: float, alpha: float, t: int, b_l0: int,
                 b_l1: float, audit: bool, terminated: bool) -> RunStats:
    return RunStats(kind="single", n=g.n, m=g.m, k=1, eps=eps, alpha=alpha,
                    threshold=float(g.n), iterations_planned=t,
                    iterations_executed=0, terminated=terminated,
                    b_l0=b_l0, b_l1=b_l1, audit_enabled=audit)


def solve_single(g: Graph, b: dict, eps: float, *, audit: bool = False,
                 collect_series: bool = True) -> SingleResult:
    """Solve one commodity with the compiled kernel.

    Returns a SingleResult carrying either the averaged flow (with
    residual at most ``eps * deg(v)`` everywhere) or a cut certificate
    that is re-verified before being returned.  ``audit=True`` checks
    the locality invariants after every round and records violations in
    the stats; ``collect_series=False`` drops the per-round series to
    save memory on long runs.
    """
    b = clean(b)
    eps = _validate_eps(eps)
    alpha = eps / 5.0
    n = g.n
    t_total = compute_iterations(alpha, 2 * n, n)
    b_l0, b_l1 = norms(b)

    pre = precheck(g, b)
    if pre is not None:
        st = _empty_stats(g, eps, alpha, t_total, b_l0, b_l1, audit, True)
        return SingleResult(iterations=t_total, stats=st, certificate=pre)

    log_thr = math.log(float(n))
    lnn = math.log(max(n, 2))
    vol_bound = t_total * b_l1 * alpha / lnn
    phi_bound = lnn / alpha

    b_items = sorted(b.items())
    b0 = len(b_items)
    vcap = min(max(n, 1), max(16, 2 * b0 + 8))
    ecap = max(16, 4 * vcap)

    loc = np.full(n, -1, np.int32)
    eloc = np.full(g.m, -1, np.int32)
    vglob = np.zeros(vcap, np.int32)
    vb = np.zeros(vcap, np.float64)
    vdeg = np.ones(vcap, np.float64)
    lwp = np.zeros(vcap, np.float64)
    lwm = np.zeros(vcap, np.float64)
    cumr = np.zeros(vcap, np.float64)
    phi = np.zeros(vcap, np.float64)
    vnet = np.zeros(vcap, np.float64)
    vstamp = np.zeros(vcap, np.int64)
    vactive = np.zeros(vcap, np.uint8)
    rtouch = np.zeros(vcap, np.int32)
    eglob = np.zeros(ecap, np.int32)
    ecum = np.zeros(ecap, np.int64)
    eseen = np.zeros(ecap, np.int64)
    redge = np.zeros(ecap, np.int32)
    rsign = np.zeros(ecap, np.int8)
    rtl = np.zeros(ecap, np.int32)
    rhd = np.zeros(ecap, np.int32)
    for i, (v, val) in enumerate(b_items):
        loc[v] = i
        vglob[i] = v
        vb[i] = val
        vdeg[i] = float(g.deg[v])

    s_vol = np.zeros(t_total, np.float64)
    s_scan = np.zeros(t_total, np.int64)
    s_touch = np.zeros(t_total, np.int64)
    s_work = np.zeros(t_total, np.int64)
    ctr = np.zeros(4, np.int64)
    fstate = np.zeros(1, np.float64)
    counts = np.array([b0, 0, 0], np.int64)
    aud = np.zeros(8, np.float64)

    def vert_arrays():
        return [vglob, vb, vdeg, lwp, lwm, cumr, phi, vnet, vstamp, vactive,
                rtouch]

    def edge_arrays():
        return [eglob, ecum, eseen, redge, rsign, rtl, rhd]

    start = 0
    skip = 0
    sweep_scans = 0
    certificate = None
    executed = t_total
    terminated = False
    while True:
        ret = K.single_rounds(
            g.indptr, g.adj_edge, g.adj_other, g.adj_sign, loc, eloc,
            vglob, vb, vdeg, lwp, lwm, cumr, phi, vnet, vstamp, vactive,
            eglob, ecum, eseen, redge, rsign, rtl, rhd, rtouch,
            s_vol, s_scan, s_touch, s_work, ctr, fstate, counts, aud,
            alpha, log_thr, b0, t_total, start, skip,
            1 if audit else 0, vol_bound, phi_bound, b_l1)
        status, i_stop = ret[0], ret[1]
        if i_stop > start:
            skip = 0
        if status == K.DONE:
            break
        if status == K.GROW:
            which = vert_arrays() if ret[6] == K.GROW_VERTEX else edge_arrays()
            new = []
            for a in which:
                bigger = np.zeros(2 * a.shape[0], a.dtype)
                bigger[:a.shape[0]] = a
                new.append(bigger)
            if ret[6] == K.GROW_VERTEX:
                (vglob, vb, vdeg, lwp, lwm, cumr, phi, vnet, vstamp,
                 vactive, rtouch) = new
            else:
                (eglob, ecum, eseen, redge, rsign, rtl, rhd) = new
            start = i_stop
            continue
        if status == K.GAIN_CAP:
            raise MwuContractViolation(
                f"relative excess {ret[2]:.6g} at vertex {int(ret[5])} "
                f"exceeds the gain cap", i_stop + 1)
        # TERMINATED: extract and re-verify; resume on a spurious trigger
        vcnt = int(counts[0])
        items = [(int(vglob[lv]), float(phi[lv]))
                 for lv in range(vcnt) if vactive[lv] == 1]
        cert, used = _sweep_cut(g, b, items)
        sweep_scans += used
        if cert is not None and verify_cut_certificate(g, b, cert).ok:
            certificate = cert
            executed = i_stop + 1
            terminated = True
            s_vol[i_stop] = ret[5]
            s_scan[i_stop] = ret[4]
            s_touch[i_stop] = 0
            s_work[i_stop] = ret[4]
            ctr[0] += ret[4]
            break
        start = i_stop
        skip = 1

    first = None
    if aud[0] > 0:
        first = AuditViolation(kind=KIND_BY_CODE[int(aud[1])],
                               iteration=int(aud[2]),
                               vertex=None if aud[3] < 0 else int(aud[3]),
                               commodity=None, measured=float(aud[5]),
                               bound=float(aud[6]))
    series = None
    if collect_series:
        series = {"active_volume": s_vol[:executed].copy(),
                  "scanned": s_scan[:executed].copy(),
                  "touched": s_touch[:executed].copy(),
                  "work": s_work[:executed].copy()}
    st = RunStats(kind="single", n=g.n, m=g.m, k=1, eps=eps, alpha=alpha,
                  threshold=float(n), iterations_planned=t_total,
                  iterations_executed=executed, terminated=terminated,
                  b_l0=b_l0, b_l1=b_l1, scans=int(ctr[0]),
                  weight_updates=int(ctr[1]), flow_entries=int(ctr[2]),
                  touched=int(ctr[3]), sweep_scans=sweep_scans,
                  audit_enabled=audit, audit_violation_count=int(aud[0]),
                  audit_first_violation=first, series=series)
    if certificate is not None:
        return SingleResult(iterations=t_total, stats=st,
                            certificate=certificate)
    ecnt = int(counts[1])
    raw = {int(eglob[le]): int(ecum[le]) for le in range(ecnt)}
    flow, numerators, residual = _average_outputs(g, b, raw, t_total)
    return SingleResult(iterations=t_total, stats=st, flow=flow,
                        numerators=numerators, residual=residual)


def solve_single_reference(g: Graph, b: dict, eps: float, *,
                           audit: bool = False) -> SingleResult:
    """Plain-Python driver composing the documented round operations.

    Matches :func:`solve_single` decision-for-decision and bit-for-bit
    on the flow accumulators; meant for cross-checking and for reading,
    not speed.
    """
    b = clean(b)
    eps = _validate_eps(eps)
    alpha = eps / 5.0
    t_total = compute_iterations(alpha, 2 * g.n, g.n)
    b_l0, b_l1 = norms(b)

    pre = precheck(g, b)
    if pre is not None:
        st = _empty_stats(g, eps, alpha, t_total, b_l0, b_l1, audit, True)
        return SingleResult(iterations=t_total, stats=st, certificate=pre)

    state = SingleState(g, b, eps, iterations=t_total)
    violations: list[AuditViolation] = []
    series = {"active_volume": [], "scanned": [], "touched": [], "work": []}
    certificate = None
    executed = t_total
    terminated = False
    for i in range(t_total):
        vol_round = state.vol_active
        scans_before = state.scans
        f = flow_step(state)
        scans_round = state.scans - scans_before
        if termination_check(state, f):
            cert = extract_certificate(state)
            if cert is not None and verify_cut_certificate(g, b, cert).ok:
                certificate = cert
                executed = i + 1
                terminated = True
                series["active_volume"].append(vol_round)
                series["scanned"].append(scans_round)
                series["touched"].append(0)
                series["work"].append(scans_round)
                break
        touched_before = state.touched
        update_weights(state, f)
        if audit:
            violations.extend(audit_iteration(state))
        touched_round = state.touched - touched_before
        series["active_volume"].append(vol_round)
        series["scanned"].append(scans_round)
        series["touched"].append(touched_round)
        series["work"].append(scans_round + len(f) + 2 * touched_round)

    st = RunStats(kind="single", n=g.n, m=g.m, k=1, eps=eps, alpha=alpha,
                  threshold=float(g.n), iterations_planned=t_total,
                  iterations_executed=executed, terminated=terminated,
                  b_l0=b_l0, b_l1=b_l1, scans=state.scans,
                  weight_updates=state.weight_updates,
                  flow_entries=state.flow_entries, touched=state.touched,
                  sweep_scans=state.sweep_scans, audit_enabled=audit,
                  audit_violation_count=len(violations),
                  audit_first_violation=violations[0] if violations else None,
                  series={k2: np.asarray(v) for k2, v in series.items()})
    if certificate is not None:
        return SingleResult(iterations=t_total, stats=st,
                            certificate=certificate)
    flow, numerators, residual = _average_outputs(g, b, state.cum_flow, t_total)
    return SingleResult(iterations=t_total, stats=st, flow=flow,
                        numerators=numerators, residual=residual)
