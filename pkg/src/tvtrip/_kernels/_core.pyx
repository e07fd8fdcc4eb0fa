# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: push-relabel max flow, line DP, feasible-step enumeration.

Semantics match ``_pure`` exactly; arithmetic is int64, callers must guard
magnitudes (the dispatcher falls back to the pure backend otherwise).
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32

cdef i64 INF64 = 4611686018427387904  # 2**62


def max_flow(int n_nodes, arcs, int source, int sink):
    """Highest-label push-relabel with gap heuristic. See ``_pure.max_flow``."""
    cdef int n = n_nodes
    cdef list arcl = list(arcs)
    cdef int m = len(arcl)
    cdef cnp.ndarray[i32, ndim=1] to = np.empty(2 * m, dtype=np.int32)
    cdef cnp.ndarray[i64, ndim=1] cap = np.empty(2 * m, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] head = np.zeros(n + 1, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] pos = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] adj = np.empty(2 * m, dtype=np.int32)
    cdef int i, u, v, a
    cdef i64 c
    for i in range(m):
        u = arcl[i][0]; v = arcl[i][1]
        head[u + 1] += 1
        head[v + 1] += 1
    for i in range(n):
        head[i + 1] += head[i]
        pos[i] = head[i]
    for i in range(m):
        u = arcl[i][0]; v = arcl[i][1]; c = arcl[i][2]
        if c < 0:
            raise ValueError("negative arc capacity")
        a = 2 * i
        to[a] = v; cap[a] = c
        to[a + 1] = u; cap[a + 1] = 0
        adj[pos[u]] = a; pos[u] += 1
        adj[pos[v]] = a + 1; pos[v] += 1

    cdef cnp.ndarray[i32, ndim=1] height = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray[i64, ndim=1] excess = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] cur = head[:n].copy()
    cdef int max_h = 2 * n + 1
    cdef cnp.ndarray[i32, ndim=1] cnt = np.zeros(max_h + 2, dtype=np.int32)

    # intrusive doubly-linked active list per height
    cdef cnp.ndarray[i32, ndim=1] bhead = np.full(max_h + 2, -1, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] nxt = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] prv = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] inlist = np.zeros(n, dtype=np.uint8)
    cdef int highest = 0

    cdef i64[:] cap_v = cap
    cdef i32[:] to_v = to
    cdef i32[:] adj_v = adj
    cdef i32[:] head_v = head
    cdef i32[:] height_v = height
    cdef i64[:] excess_v = excess
    cdef i32[:] cur_v = cur
    cdef i32[:] cnt_v = cnt
    cdef i32[:] bhead_v = bhead
    cdef i32[:] nxt_v = nxt
    cdef i32[:] prv_v = prv
    cdef cnp.uint8_t[:] inlist_v = inlist

    cnt_v[0] = n - 1
    height_v[source] = n
    cnt_v[n] += 1

    cdef int old_h, new_h, h, w
    cdef i64 send

    # saturate source arcs
    for i in range(head_v[source], head_v[source + 1]):
        a = adj_v[i]
        c = cap_v[a]
        if c > 0:
            v = to_v[a]
            cap_v[a] = 0
            cap_v[a ^ 1] += c
            excess_v[source] -= c
            excess_v[v] += c
            if v != source and v != sink and excess_v[v] > 0 and inlist_v[v] == 0:
                h = height_v[v]
                nxt_v[v] = bhead_v[h]
                prv_v[v] = -1
                if bhead_v[h] >= 0:
                    prv_v[bhead_v[h]] = v
                bhead_v[h] = v
                inlist_v[v] = 1
                if h > highest:
                    highest = h

    while True:
        while highest >= 0 and bhead_v[highest] < 0:
            highest -= 1
        if highest < 0:
            break
        u = bhead_v[highest]
        bhead_v[highest] = nxt_v[u]
        if nxt_v[u] >= 0:
            prv_v[nxt_v[u]] = -1
        inlist_v[u] = 0
        while excess_v[u] > 0:
            if cur_v[u] >= head_v[u + 1]:
                old_h = height_v[u]
                new_h = max_h
                for i in range(head_v[u], head_v[u + 1]):
                    a = adj_v[i]
                    if cap_v[a] > 0:
                        h = height_v[to_v[a]] + 1
                        if h < new_h:
                            new_h = h
                cnt_v[old_h] -= 1
                if cnt_v[old_h] == 0 and old_h < n:
                    # gap: everything stranded above the hole is source-side
                    for w in range(n):
                        if w != source and w != sink and old_h < height_v[w] and height_v[w] < n:
                            if inlist_v[w] != 0:
                                h = height_v[w]
                                if prv_v[w] >= 0:
                                    nxt_v[prv_v[w]] = nxt_v[w]
                                else:
                                    bhead_v[h] = nxt_v[w]
                                if nxt_v[w] >= 0:
                                    prv_v[nxt_v[w]] = prv_v[w]
                                inlist_v[w] = 0
                            cnt_v[height_v[w]] -= 1
                            height_v[w] = n + 1
                            cnt_v[n + 1] += 1
                            if excess_v[w] > 0:
                                nxt_v[w] = bhead_v[n + 1]
                                prv_v[w] = -1
                                if bhead_v[n + 1] >= 0:
                                    prv_v[bhead_v[n + 1]] = w
                                bhead_v[n + 1] = w
                                inlist_v[w] = 1
                                if n + 1 > highest:
                                    highest = n + 1
                    if new_h < n:
                        new_h = n + 1
                height_v[u] = new_h
                cnt_v[new_h] += 1
                cur_v[u] = head_v[u]
                if new_h < max_h and excess_v[u] > 0:
                    nxt_v[u] = bhead_v[new_h]
                    prv_v[u] = -1
                    if bhead_v[new_h] >= 0:
                        prv_v[bhead_v[new_h]] = u
                    bhead_v[new_h] = u
                    inlist_v[u] = 1
                    if new_h > highest:
                        highest = new_h
                break
            a = adj_v[cur_v[u]]
            v = to_v[a]
            if cap_v[a] > 0 and height_v[u] == height_v[v] + 1:
                send = excess_v[u]
                if cap_v[a] < send:
                    send = cap_v[a]
                cap_v[a] -= send
                cap_v[a ^ 1] += send
                excess_v[u] -= send
                excess_v[v] += send
                if v != source and v != sink and excess_v[v] > 0 and inlist_v[v] == 0:
                    h = height_v[v]
                    nxt_v[v] = bhead_v[h]
                    prv_v[v] = -1
                    if bhead_v[h] >= 0:
                        prv_v[bhead_v[h]] = v
                    bhead_v[h] = v
                    inlist_v[v] = 1
                    if h > highest:
                        highest = h
            else:
                cur_v[u] += 1

    cdef i64 flow = excess_v[sink]

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] side = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[i32, ndim=1] stack = np.empty(n, dtype=np.int32)
    cdef int sp = 0
    side[source] = 1
    stack[sp] = source; sp += 1
    while sp > 0:
        sp -= 1
        u = stack[sp]
        for i in range(head_v[u], head_v[u + 1]):
            a = adj_v[i]
            if cap_v[a] > 0 and side[to_v[a]] == 0:
                side[to_v[a]] = 1
                stack[sp] = to_v[a]; sp += 1
    return int(flow), [bool(x) for x in side]


def line_dp(int n_cells, int n_vals, node_cost, abs_step, edge_weight, budget):
    """Exact line DP, int64. See ``_pure.line_dp`` for the contract."""
    if n_cells == 0:
        return 0, []
    cdef cnp.ndarray[i64, ndim=2] nc = np.asarray(node_cost, dtype=np.int64).reshape(n_cells, n_vals)
    cdef cnp.ndarray[i64, ndim=2] ab = np.asarray(abs_step, dtype=np.int64).reshape(n_cells, n_vals)
    cdef cnp.ndarray[i64, ndim=1] ew = np.asarray(edge_weight, dtype=np.int64).reshape(max(n_cells - 1, 0))
    cdef long long B = budget
    if B < 0:
        raise ValueError("negative capacity budget")
    cdef long long need = 0
    cdef int k, v, vp
    for k in range(n_cells):
        need += int(np.max(ab[k]))
    if B > need:
        B = need
    cdef int Bi = <int> B

    cdef cnp.ndarray[i64, ndim=3] f = np.full((n_cells, n_vals, Bi + 1), INF64, dtype=np.int64)
    cdef i64[:, :, :] f_v = f
    cdef i64[:, :] nc_v = nc
    cdef i64[:, :] ab_v = ab
    cdef i64[:] ew_v = ew
    cdef int a, u, tu
    cdef i64 ccost, trans, pv, cand, w

    for v in range(n_vals):
        a = <int> ab_v[0, v]
        if a <= Bi:
            ccost = nc_v[0, v]
            if ccost < f_v[0, v, a]:
                f_v[0, v, a] = ccost
    for k in range(1, n_cells):
        w = ew_v[k - 1]
        for v in range(n_vals):
            a = <int> ab_v[k, v]
            ccost = nc_v[k, v]
            for vp in range(n_vals):
                trans = ccost + w * (v - vp if v >= vp else vp - v)
                for u in range(Bi + 1 - a):
                    pv = f_v[k - 1, vp, u]
                    if pv >= INF64:
                        continue
                    cand = pv + trans
                    tu = u + a
                    if cand < f_v[k, v, tu]:
                        f_v[k, v, tu] = cand

    cdef i64 best = INF64
    cdef int bv = -1, bu = -1
    for v in range(n_vals):
        for u in range(Bi + 1):
            pv = f_v[n_cells - 1, v, u]
            if pv >= INF64:
                continue
            if (pv < best
                    or (pv == best and u < bu)
                    or (pv == best and u == bu and ab_v[n_cells - 1, v] < ab_v[n_cells - 1, bv])
                    or (pv == best and u == bu and ab_v[n_cells - 1, v] == ab_v[n_cells - 1, bv] and v < bv)):
                best = pv
                bv = v
                bu = u
    if bv < 0:
        raise ValueError("infeasible line problem")

    choices = [0] * n_cells
    choices[n_cells - 1] = bv
    cdef i64 total = best
    cdef int upr, pick_v
    cdef i64 pick_a
    v = bv
    u = bu
    for k in range(n_cells - 1, 0, -1):
        w = ew_v[k - 1]
        a = <int> ab_v[k, v]
        ccost = nc_v[k, v]
        upr = u - a
        pick_v = -1
        pick_a = 0
        for vp in range(n_vals):
            pv = f_v[k - 1, vp, upr]
            if pv >= INF64:
                continue
            if pv + ccost + w * (v - vp if v >= vp else vp - v) == total:
                if pick_v < 0 or ab_v[k - 1, vp] < pick_a or (ab_v[k - 1, vp] == pick_a and vp < pick_v):
                    pick_v = vp
                    pick_a = ab_v[k - 1, vp]
        total -= ccost + w * (v - pick_v if v >= pick_v else pick_v - v)
        v = pick_v
        u = upr
        choices[k - 1] = v
    return int(best), choices


def enumerate_feasible(int n_cells, int n_vals, prev_idx, budget, limit):
    """Capacity-pruned DFS enumeration. See ``_pure.enumerate_feasible``."""
    cdef cnp.ndarray[i64, ndim=1] prev = np.asarray(prev_idx, dtype=np.int64).reshape(n_cells)
    cdef long long B = budget
    cdef long long lim = limit
    cdef i64[:] prev_v = prev
    cdef cnp.ndarray[i64, ndim=1] used = np.zeros(n_cells + 1, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] val = np.zeros(n_cells, dtype=np.int32)
    cdef i64[:] used_v = used
    cdef i32[:] val_v = val
    cdef long long count = 0
    cdef int k = 0
    cdef int v, j
    cdef i64 a
    # first pass: count leaves
    while k >= 0:
        if k == n_cells:
            count += 1
            if count > lim:
                raise MemoryError("enumeration exceeds limit")
            k -= 1
            continue
        v = val_v[k]
        if v >= n_vals:
            val_v[k] = 0
            k -= 1
            continue
        a = v - prev_v[k] if v >= prev_v[k] else prev_v[k] - v
        val_v[k] += 1
        if used_v[k] + a <= B:
            used_v[k + 1] = used_v[k] + a
            if k + 1 < n_cells:
                val_v[k + 1] = 0
            k += 1
    # second pass: fill rows in the same order
    cdef cnp.ndarray[cnp.int8_t, ndim=2] out = np.empty((count, n_cells), dtype=np.int8)
    cdef cnp.int8_t[:, :] out_v = out
    cdef cnp.ndarray[i32, ndim=1] chosen = np.zeros(n_cells, dtype=np.int32)
    cdef i32[:] chosen_v = chosen
    cdef long long row = 0
    k = 0
    for j in range(n_cells):
        val_v[j] = 0
    used_v[0] = 0
    while k >= 0:
        if k == n_cells:
            for j in range(n_cells):
                out_v[row, j] = <cnp.int8_t> chosen_v[j]
            row += 1
            k -= 1
            continue
        v = val_v[k]
        if v >= n_vals:
            val_v[k] = 0
            k -= 1
            continue
        a = v - prev_v[k] if v >= prev_v[k] else prev_v[k] - v
        val_v[k] += 1
        if used_v[k] + a <= B:
            chosen_v[k] = v
            used_v[k + 1] = used_v[k] + a
            if k + 1 < n_cells:
                val_v[k + 1] = 0
            k += 1
    return out
