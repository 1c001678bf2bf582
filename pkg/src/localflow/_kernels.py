"""Compiled inner loops for the local flow solvers.

Both kernels run the round loop (potential -> greedy unit flow ->
termination test -> weight update) entirely over flat arrays so a solve
touching only a small neighborhood never pays per-round Python cost.

Design rules shared by both kernels:

* State lives in caller-owned arrays mapped by global->local id tables,
  so the kernel is re-entrant: it returns with a status code and the
  caller may grow a table, extract a certificate, or resume the same
  round.  A kernel return never leaves a round half-applied: weight
  updates happen only after a full successful scan (the one exception is
  the gain-cap failure status, which abandons the run).
* Weights are stored as logarithms (see localflow.mwu); a vertex/pair is
  active exactly when its two rounded weights differ, and its potential
  is cached in an array that is zero whenever inactive, so untracked
  neighbors read as potential 0 without a lookup.
* Scan order is deterministic: local ids in insertion order, adjacency
  entries in ascending edge id.  The multi kernel with k=1 performs the
  same float operations in the same order as the single kernel, so the
  two produce bit-identical integer flow accumulators.
* Work accounting: one unit per adjacency entry examined, per flow entry
  applied, and per weight multiplication (two per touched vertex/pair).
  Totals are committed only when a round completes, so grow/terminate
  replays are not double counted.
"""

import math

import numpy as np
from numba import njit

# Kernel return statuses.
DONE = 0          # ran through round T-1; average flow is ready
TERMINATED = 1    # termination test fired; caller extracts a certificate
GROW = 2          # a local table is full; caller grows it and re-enters
GAIN_CAP = 3      # |relative excess| > 2: the entry contract was broken

# GROW kinds.
GROW_VERTEX = 1
GROW_EDGE = 2
GROW_PAIR = 3
GROW_EDGE_PAIR = 4

# Audit violation codes.
AUD_PHI = 1.0     # active index with |cumulative excess| below ln(n)/alpha
AUD_VOL = 2.0     # active volume above T * |b_j|_1 * alpha / ln(n)
AUD_RSUM = 3.0    # sum_v |cumulative excess| * deg above i * |b_j|_1

AUDIT_RTOL = 1e-9
AUDIT_ATOL = 1e-12
TERM_RTOL = 1e-9
GAIN_LIMIT = 2.0 + 1e-9


@njit(cache=True)
def single_rounds(
        # graph (read-only CSR)
        indptr, adj_edge, adj_other, adj_sign,
        # global -> local id maps
        loc, eloc,
        # local vertex table
        vglob, vb, vdeg, lwp, lwm, cumr, phi, vnet, vstamp, vactive,
        # local edge table
        eglob, ecum, eseen,
        # per-round scratch lists
        redge, rsign, rtl, rhd, rtouch,
        # per-round stats series (length T)
        s_vol, s_scan, s_touch, s_work,
        # running totals: [scans, weight updates, flow entries, touched]
        ctr,
        # float cells: [volume of active set]
        fstate,
        # mutable counts: [vcnt, ecnt, stamp]
        counts,
        # audit cells: [count, code, iter, vertex, j, measured, bound, spare]
        aud,
        # parameters
        alpha, log_thr, b0, t_total, start_iter, skip_first, do_audit,
        vol_bound, phi_bound, b_l1):
    vcnt = counts[0]
    ecnt = counts[1]
    stamp = counts[2]
    vcap = vglob.shape[0]
    ecap = eglob.shape[0]

    for i in range(start_iter, t_total):
        # ---- scan: potentials are cached from the previous update ----
        stamp += 1
        counts[2] = stamp
        vol_round = fstate[0]
        nflow = 0
        scans = np.int64(0)
        lhs = 0.0
        rhs = 0.0
        grow_kind = 0
        for lv in range(vcnt):
            if vactive[lv] == 0:
                continue
            pv = phi[lv]
            lhs += pv * vb[lv]
            v = vglob[lv]
            for idx in range(indptr[v], indptr[v + 1]):
                scans += 1
                e = adj_edge[idx]
                le = eloc[e]
                if le >= 0 and eseen[le] == stamp:
                    continue
                o = adj_other[idx]
                lo = loc[o]
                po = 0.0
                if lo >= 0:
                    po = phi[lo]
                d = pv - po
                if d == 0.0:
                    continue
                rhs += abs(d)
                if le < 0:
                    if ecnt >= ecap:
                        grow_kind = GROW_EDGE
                        break
                    le = ecnt
                    eloc[e] = le
                    eglob[le] = e
                    ecum[le] = 0
                    eseen[le] = 0
                    ecnt += 1
                eseen[le] = stamp
                if lo < 0:
                    if vcnt >= vcap:
                        grow_kind = GROW_VERTEX
                        break
                    lo = vcnt
                    loc[o] = lo
                    vglob[lo] = o
                    vb[lo] = 0.0
                    vdeg[lo] = np.float64(indptr[o + 1] - indptr[o])
                    lwp[lo] = 0.0
                    lwm[lo] = 0.0
                    cumr[lo] = 0.0
                    phi[lo] = 0.0
                    vnet[lo] = 0.0
                    vstamp[lo] = 0
                    vactive[lo] = 0
                    vcnt += 1
                s = adj_sign[idx]
                val = 1 if s * d > 0.0 else -1
                redge[nflow] = le
                rsign[nflow] = val
                if s > 0:
                    rtl[nflow] = lv
                    rhd[nflow] = lo
                else:
                    rtl[nflow] = lo
                    rhd[nflow] = lv
                nflow += 1
            if grow_kind != 0:
                break
        if grow_kind != 0:
            counts[0] = vcnt
            counts[1] = ecnt
            return (GROW, i, 0.0, 0.0, np.int64(0), 0.0, grow_kind)

        # ---- termination test ----
        tol = TERM_RTOL * (1.0 + abs(lhs) + abs(rhs))
        if lhs > rhs + tol and not (skip_first == 1 and i == start_iter):
            counts[0] = vcnt
            counts[1] = ecnt
            return (TERMINATED, i, lhs, rhs, scans, vol_round, 0)

        # ---- update: relative excess moves the weights ----
        ntouch = 0
        for t in range(b0):
            vstamp[t] = stamp
            rtouch[t] = t
            ntouch += 1
        for fi in range(nflow):
            le = redge[fi]
            val = rsign[fi]
            ecum[le] += val
            lt = rtl[fi]
            lhd = rhd[fi]
            vnet[lt] += val
            vnet[lhd] -= val
            if vstamp[lt] != stamp:
                vstamp[lt] = stamp
                rtouch[ntouch] = lt
                ntouch += 1
            if vstamp[lhd] != stamp:
                vstamp[lhd] = stamp
                rtouch[ntouch] = lhd
                ntouch += 1
        for t in range(ntouch):
            lv = rtouch[t]
            r = (vb[lv] - vnet[lv]) / vdeg[lv]
            vnet[lv] = 0.0
            if abs(r) > GAIN_LIMIT:
                counts[0] = vcnt
                counts[1] = ecnt
                return (GAIN_CAP, i, r, 0.0, np.int64(0),
                        np.float64(vglob[lv]), 0)
            ar = alpha * r
            lwp[lv] += math.log1p(ar)
            lwm[lv] += math.log1p(-ar)
            cumr[lv] += r
            wtp = math.exp(lwp[lv]) if lwp[lv] >= log_thr else 0.0
            wtm = math.exp(lwm[lv]) if lwm[lv] >= log_thr else 0.0
            was = vactive[lv]
            if wtp != wtm:
                vactive[lv] = 1
                phi[lv] = (wtp - wtm) / vdeg[lv]
                if was == 0:
                    fstate[0] += vdeg[lv]
            else:
                vactive[lv] = 0
                phi[lv] = 0.0
                if was == 1:
                    fstate[0] -= vdeg[lv]

        # ---- audit: post-update state is the start of round i+1 ----
        if do_audit == 1:
            rsum = 0.0
            for lv in range(vcnt):
                rsum += abs(cumr[lv]) * vdeg[lv]
                if vactive[lv] == 1:
                    need = phi_bound * (1.0 - AUDIT_RTOL) - AUDIT_ATOL
                    if abs(cumr[lv]) < need:
                        aud[0] += 1.0
                        if aud[0] == 1.0:
                            aud[1] = AUD_PHI
                            aud[2] = np.float64(i)
                            aud[3] = np.float64(vglob[lv])
                            aud[4] = 0.0
                            aud[5] = abs(cumr[lv])
                            aud[6] = phi_bound
            limit = (i + 1.0) * b_l1 * (1.0 + AUDIT_RTOL) + AUDIT_ATOL
            if rsum > limit:
                aud[0] += 1.0
                if aud[0] == 1.0:
                    aud[1] = AUD_RSUM
                    aud[2] = np.float64(i)
                    aud[3] = -1.0
                    aud[4] = 0.0
                    aud[5] = rsum
                    aud[6] = limit
            vlimit = vol_bound * (1.0 + AUDIT_RTOL) + AUDIT_ATOL
            if fstate[0] > vlimit:
                aud[0] += 1.0
                if aud[0] == 1.0:
                    aud[1] = AUD_VOL
                    aud[2] = np.float64(i)
                    aud[3] = -1.0
                    aud[4] = 0.0
                    aud[5] = fstate[0]
                    aud[6] = vlimit

        # ---- commit stats for the completed round ----
        s_vol[i] = vol_round
        s_scan[i] = scans
        s_touch[i] = ntouch
        work = scans + nflow + 2 * ntouch
        s_work[i] = work
        ctr[0] += scans
        ctr[1] += 2 * ntouch
        ctr[2] += nflow
        ctr[3] += ntouch
        skip_first = 0

    counts[0] = vcnt
    counts[1] = ecnt
    return (DONE, t_total, 0.0, 0.0, np.int64(0), 0.0, 0)


@njit(cache=True)
def multi_find_pair(p_vloc, p_j, p_next, vhead, lv, j):
    """Local pair id for (vertex lv, commodity j), or -1."""
    p = vhead[lv]
    while p >= 0:
        if p_j[p] == j:
            return p
        p = p_next[p]
    return -1


@njit(cache=True)
def multi_rounds(
        # graph
        indptr, adj_edge, adj_other, adj_sign,
        # global -> local maps
        loc, eloc,
        # local vertex table
        vglob, vdeg, vhead, vactcnt,
        # local pair table (one row per tracked (vertex, commodity))
        p_vloc, p_j, p_next, p_b, p_lwp, p_lwm, p_cumr, p_phi, p_net,
        p_stamp, p_active,
        # local edge table and per-edge commodity accumulator chains
        eglob, eseen, ep_head, ep_next, ep_j, ep_cum,
        # per-round scratch lists
        redge, rj, rsign, rp_t, rp_h, rtouch,
        # per-commodity cells
        volj, bj_l1, audit_rs, cphi, cmark,
        # per-round stats series
        s_vol, s_scan, s_touch, s_work,
        # running totals, float cells, counts:
        #   counts = [vcnt, ecnt, stamp, pcnt, epcnt, estamp]
        ctr, fstate, counts, aud,
        # parameters
        alpha, log_thr, pb0, k, t_total, start_iter, skip_first, do_audit,
        phi_bound, t_times_alpha_over_lnn):
    vcnt = counts[0]
    ecnt = counts[1]
    stamp = counts[2]
    pcnt = counts[3]
    epcnt = counts[4]
    estamp = counts[5]
    vcap = vglob.shape[0]
    ecap = eglob.shape[0]
    pcap = p_vloc.shape[0]
    epcap = ep_next.shape[0]

    for i in range(start_iter, t_total):
        stamp += 1
        counts[2] = stamp
        vol_round = fstate[0]
        nflow = 0
        scans = np.int64(0)
        lhs = 0.0
        rhs = 0.0
        grow_kind = 0
        for lv in range(vcnt):
            if vactcnt[lv] == 0:
                continue
            # every tracked commodity here contributes to <phi, b>;
            # inactive pairs hold phi == 0 and add nothing
            p = vhead[lv]
            while p >= 0:
                lhs += p_phi[p] * p_b[p]
                p = p_next[p]
            v = vglob[lv]
            for idx in range(indptr[v], indptr[v + 1]):
                scans += 1
                e = adj_edge[idx]
                le = eloc[e]
                if le >= 0 and eseen[le] == stamp:
                    continue
                o = adj_other[idx]
                lo = loc[o]
                # winner commodity: largest |phi(lv,j) - phi(o,j)|,
                # ties to the smallest j; costs one walk of each chain
                estamp += 1
                p = vhead[lv]
                while p >= 0:
                    jj = p_j[p]
                    cphi[jj] = p_phi[p]
                    cmark[jj] = estamp
                    p = p_next[p]
                best = 0.0
                absbest = 0.0
                bestj = -1
                if lo >= 0:
                    p = vhead[lo]
                    while p >= 0:
                        jj = p_j[p]
                        a = cphi[jj] if cmark[jj] == estamp else 0.0
                        dd = a - p_phi[p]
                        cmark[jj] = -estamp
                        ad = abs(dd)
                        if ad > absbest or (bestj >= 0 and ad == absbest
                                            and ad > 0.0 and jj < bestj):
                            best = dd
                            absbest = ad
                            bestj = jj
                        p = p_next[p]
                p = vhead[lv]
                while p >= 0:
                    jj = p_j[p]
                    if cmark[jj] == estamp:
                        dd = cphi[jj]
                        ad = abs(dd)
                        if ad > absbest or (bestj >= 0 and ad == absbest
                                            and ad > 0.0 and jj < bestj):
                            best = dd
                            absbest = ad
                            bestj = jj
                    p = p_next[p]
                if absbest == 0.0:
                    continue
                rhs += absbest
                if le < 0:
                    if ecnt >= ecap:
                        grow_kind = GROW_EDGE
                        break
                    le = ecnt
                    eloc[e] = le
                    eglob[le] = e
                    eseen[le] = 0
                    ep_head[le] = -1
                    ecnt += 1
                eseen[le] = stamp
                if lo < 0:
                    if vcnt >= vcap:
                        grow_kind = GROW_VERTEX
                        break
                    lo = vcnt
                    loc[o] = lo
                    vglob[lo] = o
                    vdeg[lo] = np.float64(indptr[o + 1] - indptr[o])
                    vhead[lo] = -1
                    vactcnt[lo] = 0
                    vcnt += 1
                # make sure both endpoint pairs for the winner exist
                pu = multi_find_pair(p_vloc, p_j, p_next, vhead, lv, bestj)
                if pu < 0:
                    if pcnt >= pcap:
                        grow_kind = GROW_PAIR
                        break
                    pu = pcnt
                    pcnt += 1
                    p_vloc[pu] = lv
                    p_j[pu] = bestj
                    p_next[pu] = -1
                    p_b[pu] = 0.0
                    p_lwp[pu] = 0.0
                    p_lwm[pu] = 0.0
                    p_cumr[pu] = 0.0
                    p_phi[pu] = 0.0
                    p_net[pu] = 0.0
                    p_stamp[pu] = 0
                    p_active[pu] = 0
                    q = vhead[lv]
                    if q < 0:
                        vhead[lv] = pu
                    else:
                        while p_next[q] >= 0:
                            q = p_next[q]
                        p_next[q] = pu
                po = multi_find_pair(p_vloc, p_j, p_next, vhead, lo, bestj)
                if po < 0:
                    if pcnt >= pcap:
                        grow_kind = GROW_PAIR
                        break
                    po = pcnt
                    pcnt += 1
                    p_vloc[po] = lo
                    p_j[po] = bestj
                    p_next[po] = -1
                    p_b[po] = 0.0
                    p_lwp[po] = 0.0
                    p_lwm[po] = 0.0
                    p_cumr[po] = 0.0
                    p_phi[po] = 0.0
                    p_net[po] = 0.0
                    p_stamp[po] = 0
                    p_active[po] = 0
                    q = vhead[lo]
                    if q < 0:
                        vhead[lo] = po
                    else:
                        while p_next[q] >= 0:
                            q = p_next[q]
                        p_next[q] = po
                s = adj_sign[idx]
                val = 1 if s * best > 0.0 else -1
                redge[nflow] = le
                rj[nflow] = bestj
                rsign[nflow] = val
                if s > 0:
                    rp_t[nflow] = pu
                    rp_h[nflow] = po
                else:
                    rp_t[nflow] = po
                    rp_h[nflow] = pu
                nflow += 1
            if grow_kind != 0:
                break
        if grow_kind != 0:
            counts[0] = vcnt
            counts[1] = ecnt
            counts[3] = pcnt
            counts[4] = epcnt
            counts[5] = estamp
            return (GROW, i, 0.0, 0.0, np.int64(0), 0.0, grow_kind)

        tol = TERM_RTOL * (1.0 + abs(lhs) + abs(rhs))
        if lhs > rhs + tol and not (skip_first == 1 and i == start_iter):
            counts[0] = vcnt
            counts[1] = ecnt
            counts[3] = pcnt
            counts[4] = epcnt
            counts[5] = estamp
            return (TERMINATED, i, lhs, rhs, scans, vol_round, 0)

        # ---- update ----
        ntouch = 0
        for t in range(pb0):
            p_stamp[t] = stamp
            rtouch[t] = t
            ntouch += 1
        applied = 0
        ep_grow = False
        for fi in range(nflow):
            le = redge[fi]
            jj = rj[fi]
            val = rsign[fi]
            pe = ep_head[le]
            while pe >= 0:
                if ep_j[pe] == jj:
                    break
                pe = ep_next[pe]
            if pe < 0:
                if epcnt >= epcap:
                    ep_grow = True
                    break
                pe = epcnt
                epcnt += 1
                ep_j[pe] = jj
                ep_cum[pe] = 0
                ep_next[pe] = -1
                q = ep_head[le]
                if q < 0:
                    ep_head[le] = pe
                else:
                    while ep_next[q] >= 0:
                        q = ep_next[q]
                    ep_next[q] = pe
            ep_cum[pe] += val
            pt = rp_t[fi]
            ph = rp_h[fi]
            p_net[pt] += val
            p_net[ph] -= val
            if p_stamp[pt] != stamp:
                p_stamp[pt] = stamp
                rtouch[ntouch] = pt
                ntouch += 1
            if p_stamp[ph] != stamp:
                p_stamp[ph] = stamp
                rtouch[ntouch] = ph
                ntouch += 1
            applied += 1
        if ep_grow:
            # roll back exactly the entries applied this round, then let
            # the caller grow the edge-pair table and re-run the round
            for fi2 in range(applied):
                le2 = redge[fi2]
                jj2 = rj[fi2]
                val2 = rsign[fi2]
                pe2 = ep_head[le2]
                while pe2 >= 0:
                    if ep_j[pe2] == jj2:
                        break
                    pe2 = ep_next[pe2]
                if pe2 >= 0:
                    ep_cum[pe2] -= val2
                p_net[rp_t[fi2]] = 0.0
                p_net[rp_h[fi2]] = 0.0
            counts[0] = vcnt
            counts[1] = ecnt
            counts[3] = pcnt
            counts[4] = epcnt
            counts[5] = estamp
            return (GROW, i, 0.0, 0.0, np.int64(0), 0.0, GROW_EDGE_PAIR)
        for t in range(ntouch):
            p = rtouch[t]
            lv = p_vloc[p]
            r = (p_b[p] - p_net[p]) / vdeg[lv]
            p_net[p] = 0.0
            if abs(r) > GAIN_LIMIT:
                counts[0] = vcnt
                counts[1] = ecnt
                counts[3] = pcnt
                counts[4] = epcnt
                counts[5] = estamp
                return (GAIN_CAP, i, r, np.float64(p_j[p]), np.int64(0),
                        np.float64(vglob[lv]), 0)
            ar = alpha * r
            p_lwp[p] += math.log1p(ar)
            p_lwm[p] += math.log1p(-ar)
            p_cumr[p] += r
            wtp = math.exp(p_lwp[p]) if p_lwp[p] >= log_thr else 0.0
            wtm = math.exp(p_lwm[p]) if p_lwm[p] >= log_thr else 0.0
            was = p_active[p]
            if wtp != wtm:
                p_active[p] = 1
                p_phi[p] = (wtp - wtm) / vdeg[lv]
                if was == 0:
                    vactcnt[lv] += 1
                    fstate[0] += vdeg[lv]
                    volj[p_j[p]] += vdeg[lv]
            else:
                p_active[p] = 0
                p_phi[p] = 0.0
                if was == 1:
                    vactcnt[lv] -= 1
                    fstate[0] -= vdeg[lv]
                    volj[p_j[p]] -= vdeg[lv]

        if do_audit == 1:
            for jj in range(k):
                audit_rs[jj] = 0.0
            for p in range(pcnt):
                lv = p_vloc[p]
                audit_rs[p_j[p]] += abs(p_cumr[p]) * vdeg[lv]
                if p_active[p] == 1:
                    need = phi_bound * (1.0 - AUDIT_RTOL) - AUDIT_ATOL
                    if abs(p_cumr[p]) < need:
                        aud[0] += 1.0
                        if aud[0] == 1.0:
                            aud[1] = AUD_PHI
                            aud[2] = np.float64(i)
                            aud[3] = np.float64(vglob[lv])
                            aud[4] = np.float64(p_j[p])
                            aud[5] = abs(p_cumr[p])
                            aud[6] = phi_bound
            for jj in range(k):
                limit = (i + 1.0) * bj_l1[jj] * (1.0 + AUDIT_RTOL) + AUDIT_ATOL
                if audit_rs[jj] > limit:
                    aud[0] += 1.0
                    if aud[0] == 1.0:
                        aud[1] = AUD_RSUM
                        aud[2] = np.float64(i)
                        aud[3] = -1.0
                        aud[4] = np.float64(jj)
                        aud[5] = audit_rs[jj]
                        aud[6] = limit
                vlimit = (t_times_alpha_over_lnn * bj_l1[jj]
                          * (1.0 + AUDIT_RTOL) + AUDIT_ATOL)
                if volj[jj] > vlimit:
                    aud[0] += 1.0
                    if aud[0] == 1.0:
                        aud[1] = AUD_VOL
                        aud[2] = np.float64(i)
                        aud[3] = -1.0
                        aud[4] = np.float64(jj)
                        aud[5] = volj[jj]
                        aud[6] = vlimit

        s_vol[i] = vol_round
        s_scan[i] = scans
        s_touch[i] = ntouch
        work = scans + nflow + 2 * ntouch
        s_work[i] = work
        ctr[0] += scans
        ctr[1] += 2 * ntouch
        ctr[2] += nflow
        ctr[3] += ntouch
        skip_first = 0

    counts[0] = vcnt
    counts[1] = ecnt
    counts[3] = pcnt
    counts[4] = epcnt
    counts[5] = estamp
    return (DONE, t_total, 0.0, 0.0, np.int64(0), 0.0, 0)
