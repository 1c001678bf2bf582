"""Multi-commodity local flow solver.

Routes ``k`` demand functions through one unit-capacity undirected graph
so that the *sum* of the per-commodity congestions stays at or below 1.
Either every commodity's residual ends up at most ``eps * deg(v)``
everywhere, or the solver returns a sparse potential matrix
``phi(v, j)`` with ``sum phi(v, j) b_j(v)`` strictly above
``sum_e max_j |phi drop across e|`` -- a witness that no concurrent
routing exists, checkable by one scan of the edge list.

The state generalizes the single-commodity solver from one weight pair
per vertex to one pair per tracked (vertex, commodity): each round the
commodity with the largest potential drop claims an edge (ties to the
smallest commodity index) and one unit crosses it.  With ``k = 1`` the
arithmetic collapses, operation for operation, to the single-commodity
solver; a kernel-level test pins that down bit for bit.

As in :mod:`localflow.single` there are two interchangeable drivers:
:func:`solve_multi` (compiled kernel) and :func:`solve_multi_reference`
(plain Python, same arithmetic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .graph import Graph
from .mwu import MwuContractViolation, WeightLedger, compute_iterations
from .single import GAIN_LIMIT, TERM_RTOL, _average_outputs, _validate_eps
from .sources import clean, norms
from .stats import AuditViolation, KIND_BY_CODE, RunStats, audit_iteration
from .verify import verify_potential_certificate

__all__ = ["PotentialCertificate", "MultiResult", "MultiState",
           "precheck_multi", "rounded_potential", "flow_step",
           "termination_check", "extract_certificate", "update_weights",
           "solve_multi", "solve_multi_reference"]


@dataclass(frozen=True)
class PotentialCertificate:
    """Sparse potentials with <phi, b> above the total best edge drop.

    ``phi`` maps ``(vertex, commodity)`` to a nonzero potential; ``lhs``
    and ``rhs`` record the two sides as the solver computed them.  Any
    concurrent routing moves at most one unit over each edge, and that
    unit gains at most the edge's best drop, so ``lhs > rhs`` rules out
    feasibility.
    """

    phi: dict
    lhs: float
    rhs: float


@dataclass
class MultiResult:
    """Exactly one of ``flows`` / ``certificate`` is set.

    flows: one sparse edge map per commodity (averaged flow).
    numerators: matching integer accumulators; entry / ``iterations``
        reproduces the flow exactly.
    residuals: per-commodity unrouted demand of the averaged flows.
    """

    iterations: int
    stats: RunStats
    flows: Optional[list] = None
    numerators: Optional[list] = None
    residuals: Optional[list] = None
    certificate: Optional[PotentialCertificate] = None

    @property
    def is_flow(self) -> bool:
        return self.flows is not None

    @property
    def is_certificate(self) -> bool:
        return self.certificate is not None


def _clean_demands(g: Graph, bs) -> list[dict]:
    if not bs:
        raise ValueError("need at least one demand function")
    out = []
    for j, b in enumerate(bs):
        b = clean(b)
        for v in b:
            if not 0 <= v < g.n:
                raise ValueError(f"commodity {j}: source vertex {v} out of "
                                 f"range 0..{g.n - 1}")
        out.append(b)
    return out


def precheck_multi(g: Graph, bs: list) -> Optional[PotentialCertificate]:
    """Screen for one overloaded vertex in any commodity.

    If ``|b_j(v)| > deg(v)`` the indicator potential ``phi(v, j) =
    sign(b_j(v))`` is already a certificate: its lhs is ``|b_j(v)|`` and
    every incident edge contributes drop exactly 1.  Vertices are
    scanned in ascending order, commodities in index order.
    """
    support = sorted(set().union(*[set(b) for b in bs]) if bs else set())
    for v in support:
        d = int(g.deg[v])
        for j, b in enumerate(bs):
            bv = b.get(v, 0.0)
            if abs(bv) > d:
                sign = 1.0 if bv > 0 else -1.0
                return PotentialCertificate(phi={(v, j): sign},
                                            lhs=abs(bv), rhs=float(d))
    return None


class MultiState:
    """Weights, potentials, and accumulators keyed by (vertex, commodity).

    The ledger holds keys ``(v, j, +1)`` and ``(v, j, -1)``.  ``tracked``
    fixes the vertex scan order (first touch); ``pair_order[v]`` fixes
    the per-vertex commodity order the same way.  Initial pairs are laid
    down commodity-major with vertices ascending, which is also the
    order the per-round weight update walks the demand support.
    """

    def __init__(self, g: Graph, bs: list, eps: float,
                 iterations: Optional[int] = None):
        self.graph = g
        self.bs = _clean_demands(g, bs)
        self.k = len(self.bs)
        self.eps = _validate_eps(eps)
        self.alpha = self.eps / 5.0
        self.threshold = float(g.n)
        self.log_threshold = math.log(self.threshold)
        self.bj_l1 = [norms(b)[1] for b in self.bs]
        if iterations is None:
            iterations = compute_iterations(self.alpha, 2 * g.n * self.k, g.n)
        self.iterations = int(iterations)
        self.iteration = 0
        self.weights = WeightLedger()
        self.cum_flow: list[dict[int, int]] = [{} for _ in range(self.k)]
        self.cum_residual: dict[tuple[int, int], float] = {}
        self.phi: dict[tuple[int, int], float] = {}
        self.active_pairs: set[tuple[int, int]] = set()
        self.tracked: dict[int, None] = {}
        self.pair_order: dict[int, dict[int, None]] = {}
        self._pb_pairs: list[tuple[int, int]] = []
        for j, b in enumerate(self.bs):
            for v in sorted(b):
                self.tracked.setdefault(v, None)
                self.pair_order.setdefault(v, {})[j] = None
                self._pb_pairs.append((v, j))
        self.vact: dict[int, int] = {}
        self.vol_active = 0.0
        self.volj = [0.0] * self.k
        self._term_lhs = 0.0
        self._term_rhs = 0.0
        self.scans = 0
        self.weight_updates = 0
        self.flow_entries = 0
        self.touched = 0

    def _rounded_pair(self, v: int, j: int) -> tuple[float, float]:
        lwp = self.weights.log_value((v, j, +1))
        lwm = self.weights.log_value((v, j, -1))
        wtp = math.exp(lwp) if lwp >= self.log_threshold else 0.0
        wtm = math.exp(lwm) if lwm >= self.log_threshold else 0.0
        return wtp, wtm

    def _refresh(self, v: int, j: int) -> None:
        wtp, wtm = self._rounded_pair(v, j)
        was = (v, j) in self.active_pairs
        d = float(self.graph.deg[v])
        if wtp != wtm:
            self.phi[(v, j)] = (wtp - wtm) / d
            if not was:
                self.active_pairs.add((v, j))
                self.vact[v] = self.vact.get(v, 0) + 1
                self.vol_active += d
                self.volj[j] += d
        else:
            self.phi.pop((v, j), None)
            if was:
                self.active_pairs.discard((v, j))
                self.vact[v] -= 1
                self.vol_active -= d
                self.volj[j] -= d

    def _audit_args(self):
        entries = [(v, j, self.cum_residual.get((v, j), 0.0),
                    int(self.graph.deg[v]), (v, j) in self.active_pairs)
                   for v in self.tracked for j in self.pair_order.get(v, ())]
        return (self.graph.n, self.alpha, self.iterations, self.iteration,
                entries, list(self.volj), list(self.bj_l1))


def rounded_potential(state: MultiState, v: int, j: int) -> float:
    """Potential of the pair (v, j); zero for isolated v."""
    if not 0 <= v < state.graph.n:
        raise ValueError(f"vertex {v} out of range 0..{state.graph.n - 1}")
    if not 0 <= j < state.k:
        raise ValueError(f"commodity {j} out of range 0..{state.k - 1}")
    d = int(state.graph.deg[v])
    if d == 0:
        return 0.0
    wtp, wtm = state._rounded_pair(v, j)
    return (wtp - wtm) / float(d)


def flow_step(state: MultiState) -> dict[int, tuple[int, int]]:
    """Give each edge with a potential drop to its best commodity.

    Returns ``{edge id: (commodity, +1 or -1)}`` in the edge's stored
    orientation.  The winner has the largest absolute drop among the
    commodities tracked at either endpoint; ties go to the smallest
    commodity index.  Claim order matches the single-commodity solver:
    tracked vertices in first-touch order, incident edges ascending.
    """
    g = state.graph
    phi = state.phi
    f: dict[int, tuple[int, int]] = {}
    scans = 0
    for v in state.tracked:
        if state.vact.get(v, 0) == 0:
            continue
        for idx in range(g.indptr[v], g.indptr[v + 1]):
            scans += 1
            e = int(g.adj_edge[idx])
            if e in f:
                continue
            o = int(g.adj_other[idx])
            cands = set(state.pair_order.get(v, ()))
            cands.update(state.pair_order.get(o, ()))
            best = 0.0
            absbest = 0.0
            bestj = -1
            for j in sorted(cands):
                dd = phi.get((v, j), 0.0) - phi.get((o, j), 0.0)
                ad = abs(dd)
                if ad > absbest:
                    best = dd
                    absbest = ad
                    bestj = j
            if absbest == 0.0:
                continue
            s = int(g.adj_sign[idx])
            f[e] = (bestj, 1 if s * best > 0.0 else -1)
    state.scans += scans
    return f


def termination_check(state: MultiState, f: dict) -> bool:
    """True when <phi, b> beats the claimed drops beyond float tolerance.

    Also stashes the two sides on the state so a certificate extracted
    right after records exactly the values that fired.
    """
    g = state.graph
    phi = state.phi
    lhs = 0.0
    for v in state.tracked:
        if state.vact.get(v, 0) == 0:
            continue
        for j in state.pair_order.get(v, ()):
            lhs += phi.get((v, j), 0.0) * state.bs[j].get(v, 0.0)
    rhs = 0.0
    for e, (j, _val) in f.items():
        delta = (phi.get((int(g.tails[e]), j), 0.0)
                 - phi.get((int(g.heads[e]), j), 0.0))
        rhs += abs(delta)
    state._term_lhs = lhs
    state._term_rhs = rhs
    return lhs > rhs + TERM_RTOL * (1.0 + abs(lhs) + abs(rhs))


def extract_certificate(state: MultiState) -> PotentialCertificate:
    """Package the active potentials as an infeasibility witness."""
    phi = {(v, j): state.phi[(v, j)] for (v, j) in state.active_pairs}
    return PotentialCertificate(phi=phi, lhs=state._term_lhs,
                                rhs=state._term_rhs)


def update_weights(state: MultiState, f: dict) -> None:
    """One multiplicative-weights round driven by the claimed flow.

    Touches the demand support pairs first (commodity-major, vertices
    ascending), then the endpoint pairs of each flow entry in claim
    order, tail before head; each touched pair moves by its own relative
    excess.
    """
    g = state.graph
    touched: list[tuple[int, int]] = list(state._pb_pairs)
    seen = set(touched)
    net: dict[tuple[int, int], int] = {}
    for e, (j, val) in f.items():
        state.cum_flow[j][e] = state.cum_flow[j].get(e, 0) + val
        u = int(g.tails[e])
        w = int(g.heads[e])
        net[(u, j)] = net.get((u, j), 0) + val
        net[(w, j)] = net.get((w, j), 0) - val
        for p in ((u, j), (w, j)):
            if p not in seen:
                seen.add(p)
                touched.append(p)
    state.flow_entries += len(f)
    for v, j in touched:
        state.tracked.setdefault(v, None)
        state.pair_order.setdefault(v, {})[j] = None
        r = (state.bs[j].get(v, 0.0) - net.get((v, j), 0)) / float(g.deg[v])
        if abs(r) > GAIN_LIMIT:
            raise MwuContractViolation(
                f"relative excess {r:.6g} at vertex {v} (commodity {j}) "
                f"exceeds the gain cap", state.iteration + 1)
        state.weights.update((v, j, +1), state.alpha, r)
        state.weights.update((v, j, -1), state.alpha, -r)
        state.cum_residual[(v, j)] = state.cum_residual.get((v, j), 0.0) + r
        state._refresh(v, j)
    state.weight_updates += 2 * len(touched)
    state.touched += len(touched)
    state.iteration += 1


def _empty_multi_stats(g: Graph, k: int, eps: float, alpha: float, t: int,
                       b_l0: int, b_l1: float, audit: bool,
                       terminated: bool) -> RunStats:
    return RunStats(kind="multi", n=g.n, m=g.m, k=k, eps=eps, alpha=alpha,
                    threshold=float(g.n), iterations_planned=t,
                    iterations_executed=0, terminated=terminated,
                    b_l0=b_l0, b_l1=b_l1, audit_enabled=audit)


def solve_multi(g: Graph, bs: list, eps: float, *, audit: bool = False,
                collect_series: bool = True) -> MultiResult:
    """Solve ``k`` commodities concurrently with the compiled kernel.

    Returns a MultiResult carrying either one averaged flow per
    commodity (summed congestion at most 1, per-commodity residual at
    most ``eps * deg(v)``) or a potential certificate that is re-verified
    before being returned.
    """
    bs = _clean_demands(g, bs)
    k = len(bs)
    eps = _validate_eps(eps)
    alpha = eps / 5.0
    n = g.n
    t_total = compute_iterations(alpha, 2 * n * k, n)
    l0s, l1s = zip(*(norms(b) for b in bs))
    b_l0, b_l1 = sum(l0s), math.fsum(l1s)

    pre = precheck_multi(g, bs)
    if pre is not None:
        st = _empty_multi_stats(g, k, eps, alpha, t_total, b_l0, b_l1,
                                audit, True)
        return MultiResult(iterations=t_total, stats=st, certificate=pre)

    log_thr = math.log(float(n))
    lnn = math.log(max(n, 2))
    phi_bound = lnn / alpha
    t_a_lnn = t_total * alpha / lnn

    support = sorted(set().union(*[set(b) for b in bs]))
    b0_v = len(support)
    pb0 = b_l0
    vcap = min(max(n, 1), max(16, 2 * b0_v + 8))
    pcap = min(max(n * k, 1), max(16, 2 * pb0 + 8))
    ecap = max(16, 4 * vcap)
    epcap = max(16, 4 * vcap)

    loc = np.full(n, -1, np.int32)
    eloc = np.full(g.m, -1, np.int32)
    vglob = np.zeros(vcap, np.int32)
    vdeg = np.ones(vcap, np.float64)
    vhead = np.full(vcap, -1, np.int32)
    vactcnt = np.zeros(vcap, np.int32)
    p_vloc = np.zeros(pcap, np.int32)
    p_j = np.zeros(pcap, np.int32)
    p_next = np.full(pcap, -1, np.int32)
    p_b = np.zeros(pcap, np.float64)
    p_lwp = np.zeros(pcap, np.float64)
    p_lwm = np.zeros(pcap, np.float64)
    p_cumr = np.zeros(pcap, np.float64)
    p_phi = np.zeros(pcap, np.float64)
    p_net = np.zeros(pcap, np.float64)
    p_stamp = np.zeros(pcap, np.int64)
    p_active = np.zeros(pcap, np.uint8)
    rtouch = np.zeros(pcap, np.int32)
    eglob = np.zeros(ecap, np.int32)
    eseen = np.zeros(ecap, np.int64)
    ep_head = np.full(ecap, -1, np.int32)
    ep_next = np.full(epcap, -1, np.int32)
    ep_j = np.zeros(epcap, np.int32)
    ep_cum = np.zeros(epcap, np.int64)
    redge = np.zeros(ecap, np.int32)
    rj = np.zeros(ecap, np.int32)
    rsign = np.zeros(ecap, np.int8)
    rp_t = np.zeros(ecap, np.int32)
    rp_h = np.zeros(ecap, np.int32)
    volj = np.zeros(k, np.float64)
    bj_l1 = np.asarray(l1s, np.float64)
    audit_rs = np.zeros(k, np.float64)
    cphi = np.zeros(k, np.float64)
    cmark = np.zeros(k, np.int64)

    pcnt = 0
    vcnt0 = 0
    for j, b in enumerate(bs):
        for v in sorted(b):
            lv = int(loc[v])
            if lv < 0:
                lv = vcnt0
                vcnt0 += 1
                loc[v] = lv
                vglob[lv] = v
                vdeg[lv] = float(g.deg[v])
            p_vloc[pcnt] = lv
            p_j[pcnt] = j
            p_b[pcnt] = b[v]
            q = int(vhead[lv])
            if q < 0:
                vhead[lv] = pcnt
            else:
                while p_next[q] >= 0:
                    q = int(p_next[q])
                p_next[q] = pcnt
            pcnt += 1

    s_vol = np.zeros(t_total, np.float64)
    s_scan = np.zeros(t_total, np.int64)
    s_touch = np.zeros(t_total, np.int64)
    s_work = np.zeros(t_total, np.int64)
    ctr = np.zeros(4, np.int64)
    fstate = np.zeros(1, np.float64)
    counts = np.array([vcnt0, 0, 0, pcnt, 0, 0], np.int64)
    aud = np.zeros(8, np.float64)

    def vert_arrays():
        return [vglob, vdeg, vhead, vactcnt]

    def pair_arrays():
        return [p_vloc, p_j, p_next, p_b, p_lwp, p_lwm, p_cumr, p_phi,
                p_net, p_stamp, p_active, rtouch]

    def edge_arrays():
        return [eglob, eseen, ep_head, redge, rj, rsign, rp_t, rp_h]

    def edge_pair_arrays():
        return [ep_next, ep_j, ep_cum]

    grow_groups = {K.GROW_VERTEX: vert_arrays, K.GROW_PAIR: pair_arrays,
                   K.GROW_EDGE: edge_arrays, K.GROW_EDGE_PAIR: edge_pair_arrays}

    start = 0
    skip = 0
    certificate = None
    executed = t_total
    terminated = False
    while True:
        ret = K.multi_rounds(
            g.indptr, g.adj_edge, g.adj_other, g.adj_sign, loc, eloc,
            vglob, vdeg, vhead, vactcnt,
            p_vloc, p_j, p_next, p_b, p_lwp, p_lwm, p_cumr, p_phi, p_net,
            p_stamp, p_active,
            eglob, eseen, ep_head, ep_next, ep_j, ep_cum,
            redge, rj, rsign, rp_t, rp_h, rtouch,
            volj, bj_l1, audit_rs, cphi, cmark,
            s_vol, s_scan, s_touch, s_work, ctr, fstate, counts, aud,
            alpha, log_thr, pb0, k, t_total, start, skip,
            1 if audit else 0, phi_bound, t_a_lnn)
        status, i_stop = ret[0], ret[1]
        if i_stop > start:
            skip = 0
        if status == K.DONE:
            break
        if status == K.GROW:
            group = grow_groups[int(ret[6])]()
            chains = (vhead, p_next, ep_head, ep_next)
            new = []
            for a in group:
                fill = -1 if any(a is c for c in chains) else 0
                bigger = np.full(2 * a.shape[0], fill, a.dtype)
                bigger[:a.shape[0]] = a
                new.append(bigger)
            if ret[6] == K.GROW_VERTEX:
                (vglob, vdeg, vhead, vactcnt) = new
            elif ret[6] == K.GROW_PAIR:
                (p_vloc, p_j, p_next, p_b, p_lwp, p_lwm, p_cumr, p_phi,
                 p_net, p_stamp, p_active, rtouch) = new
            elif ret[6] == K.GROW_EDGE:
                (eglob, eseen, ep_head, redge, rj, rsign, rp_t, rp_h) = new
            else:
                (ep_next, ep_j, ep_cum) = new
            start = i_stop
            continue
        if status == K.GAIN_CAP:
            raise MwuContractViolation(
                f"relative excess {ret[2]:.6g} at vertex {int(ret[5])} "
                f"(commodity {int(ret[3])}) exceeds the gain cap", i_stop + 1)
        # TERMINATED: package the active potentials and re-verify
        pcnt_now = int(counts[3])
        phi_cert = {}
        for p in range(pcnt_now):
            if p_active[p] == 1:
                phi_cert[(int(vglob[p_vloc[p]]), int(p_j[p]))] = float(p_phi[p])
        cert = PotentialCertificate(phi=phi_cert, lhs=float(ret[2]),
                                    rhs=float(ret[3]))
        if verify_potential_certificate(g, bs, cert).ok:
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
                               commodity=int(aud[4]), measured=float(aud[5]),
                               bound=float(aud[6]))
    series = None
    if collect_series:
        series = {"active_volume": s_vol[:executed].copy(),
                  "scanned": s_scan[:executed].copy(),
                  "touched": s_touch[:executed].copy(),
                  "work": s_work[:executed].copy()}
    st = RunStats(kind="multi", n=g.n, m=g.m, k=k, eps=eps, alpha=alpha,
                  threshold=float(n), iterations_planned=t_total,
                  iterations_executed=executed, terminated=terminated,
                  b_l0=b_l0, b_l1=b_l1, scans=int(ctr[0]),
                  weight_updates=int(ctr[1]), flow_entries=int(ctr[2]),
                  touched=int(ctr[3]), sweep_scans=0, audit_enabled=audit,
                  audit_violation_count=int(aud[0]),
                  audit_first_violation=first, series=series)
    if certificate is not None:
        return MultiResult(iterations=t_total, stats=st,
                           certificate=certificate)
    raw: list[dict[int, int]] = [{} for _ in range(k)]
    ecnt = int(counts[1])
    for le in range(ecnt):
        e = int(eglob[le])
        pe = int(ep_head[le])
        while pe >= 0:
            c = int(ep_cum[pe])
            if c != 0:
                raw[int(ep_j[pe])][e] = c
            pe = int(ep_next[pe])
    flows, numerators, residuals = [], [], []
    for j in range(k):
        fj, nj, rj_ = _average_outputs(g, bs[j], raw[j], t_total)
        flows.append(fj)
        numerators.append(nj)
        residuals.append(rj_)
    return MultiResult(iterations=t_total, stats=st, flows=flows,
                       numerators=numerators, residuals=residuals)


def solve_multi_reference(g: Graph, bs: list, eps: float, *,
                          audit: bool = False) -> MultiResult:
    """Plain-Python driver, bit-compatible with :func:`solve_multi`."""
    bs = _clean_demands(g, bs)
    k = len(bs)
    eps = _validate_eps(eps)
    alpha = eps / 5.0
    t_total = compute_iterations(alpha, 2 * g.n * k, g.n)
    l0s, l1s = zip(*(norms(b) for b in bs))
    b_l0, b_l1 = sum(l0s), math.fsum(l1s)

    pre = precheck_multi(g, bs)
    if pre is not None:
        st = _empty_multi_stats(g, k, eps, alpha, t_total, b_l0, b_l1,
                                audit, True)
        return MultiResult(iterations=t_total, stats=st, certificate=pre)

    state = MultiState(g, bs, eps, iterations=t_total)
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
            if verify_potential_certificate(g, bs, cert).ok:
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

    st = RunStats(kind="multi", n=g.n, m=g.m, k=k, eps=eps, alpha=alpha,
                  threshold=float(g.n), iterations_planned=t_total,
                  iterations_executed=executed, terminated=terminated,
                  b_l0=b_l0, b_l1=b_l1, scans=state.scans,
                  weight_updates=state.weight_updates,
                  flow_entries=state.flow_entries, touched=state.touched,
                  sweep_scans=0, audit_enabled=audit,
                  audit_violation_count=len(violations),
                  audit_first_violation=violations[0] if violations else None,
                  series={k2: np.asarray(v) for k2, v in series.items()})
    if certificate is not None:
        return MultiResult(iterations=t_total, stats=st,
                           certificate=certificate)
    flows, numerators, residuals = [], [], []
    for j in range(k):
        fj, nj, rj_ = _average_outputs(g, bs[j], state.cum_flow[j], t_total)
        flows.append(fj)
        numerators.append(nj)
        residuals.append(rj_)
    return MultiResult(iterations=t_total, stats=st, flows=flows,
                       numerators=numerators, residuals=residuals)
