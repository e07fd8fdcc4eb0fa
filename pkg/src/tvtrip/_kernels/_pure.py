"""Pure-Python kernel implementations.

These are the reference semantics for the compiled kernels in ``_core``.
All kernels work on plain integers, so this backend also serves as the
arbitrary-precision fallback when scaled coefficients would overflow the
compiled backend's 64-bit arithmetic.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def max_flow(n_nodes, arcs, source, sink):
    """Max flow via highest-label push-relabel with the gap heuristic.

    ``arcs`` is a sequence of ``(u, v, cap)`` with nonnegative integer
    capacities. Returns ``(flow, source_side)`` where ``source_side`` is a
    list of bools marking the nodes reachable from ``source`` in the final
    residual graph (the minimal min-cut source side).
    """
    n = n_nodes
    # adjacency: arc i has to[i], cap[i]; reverse arc is i ^ 1
    to = []
    cap = []
    head = [[] for _ in range(n)]
    for u, v, c in arcs:
        if c < 0:
            raise ValueError("negative arc capacity")
        head[u].append(len(to))
        to.append(v)
        cap.append(c)
        head[v].append(len(to))
        to.append(u)
        cap.append(0)

    height = [0] * n
    excess = [0] * n
    cur = [0] * n
    max_h = 2 * n + 1
    cnt = [0] * (max_h + 2)
    cnt[0] = n - 1
    height[source] = n
    cnt[n] += 1

    # Buckets hold candidate active nodes per height; entries may go stale
    # after relabels or gap lifts and are skipped lazily at pop time.
    buckets = [[] for _ in range(max_h + 2)]
    highest = 0

    def activate(v):
        nonlocal highest
        if v != source and v != sink and excess[v] > 0:
            buckets[height[v]].append(v)
            if height[v] > highest:
                highest = height[v]

    for a in head[source]:
        c = cap[a]
        if c > 0:
            v = to[a]
            cap[a] = 0
            cap[a ^ 1] += c
            excess[source] -= c
            excess[v] += c
            activate(v)

    while True:
        while highest >= 0 and not buckets[highest]:
            highest -= 1
        if highest < 0:
            break
        u = buckets[highest].pop()
        if excess[u] <= 0 or height[u] != highest:
            continue
        # discharge u
        while excess[u] > 0:
            if cur[u] >= len(head[u]):
                # relabel
                old_h = height[u]
                new_h = max_h
                for a in head[u]:
                    if cap[a] > 0:
                        h = height[to[a]] + 1
                        if h < new_h:
                            new_h = h
                cnt[old_h] -= 1
                if cnt[old_h] == 0 and old_h < n:
                    # gap: nodes stranded above the hole cannot reach the sink
                    for w in range(n):
                        if w != source and w != sink and old_h < height[w] < n:
                            cnt[height[w]] -= 1
                            height[w] = n + 1
                            cnt[n + 1] += 1
                            if excess[w] > 0:
                                buckets[n + 1].append(w)
                                if n + 1 > highest:
                                    highest = n + 1
                    if new_h < n:
                        new_h = n + 1
                height[u] = new_h
                cnt[new_h] += 1
                cur[u] = 0
                if new_h < max_h:
                    activate(u)
                break
            a = head[u][cur[u]]
            v = to[a]
            if cap[a] > 0 and height[u] == height[v] + 1:
                send = excess[u] if excess[u] < cap[a] else cap[a]
                cap[a] -= send
                cap[a ^ 1] += send
                excess[u] -= send
                excess[v] += send
                activate(v)
            else:
                cur[u] += 1

    flow = excess[sink]

    # minimal source side from residual reachability
    side = [False] * n
    side[source] = True
    stack = [source]
    while stack:
        u = stack.pop()
        for a in head[u]:
            if cap[a] > 0 and not side[to[a]]:
                side[to[a]] = True
                stack.append(to[a])
    return flow, side


def line_dp(n_cells, n_vals, node_cost, abs_step, edge_weight, budget):
    """Exact DP over (cell, value, used capacity) for a serialized line.

    Minimizes ``sum node_cost[k][v_k] + sum edge_weight[k]*|v_{k+1}-v_k|``
    subject to ``sum abs_step[k][v_k] <= budget``. Value indices are over a
    contiguous set, so index differences equal value differences.

    Ties are broken toward smaller ``abs_step`` per cell, then smaller value
    index, making the output deterministic.
    """
    if n_cells == 0:
        return 0, []
    B = int(budget)
    if B < 0:
        raise ValueError("negative capacity budget")
    cap_needed = sum(max(abs_step[k]) for k in range(n_cells))
    if B > cap_needed:
        B = cap_needed
    INF = None

    # f[v][u]: best cost of prefix with last cell at value v using u capacity
    f = [[INF] * (B + 1) for _ in range(n_vals)]
    for v in range(n_vals):
        a = abs_step[0][v]
        if a <= B:
            c = node_cost[0][v]
            if f[v][a] is None or c < f[v][a]:
                f[v][a] = c
    tables = [f]
    for k in range(1, n_cells):
        g = [[INF] * (B + 1) for _ in range(n_vals)]
        w = edge_weight[k - 1]
        fk = tables[-1]
        for v in range(n_vals):
            a = abs_step[k][v]
            c = node_cost[k][v]
            for vp in range(n_vals):
                trans = c + w * abs(v - vp)
                row = fk[vp]
                grow = g[v]
                for u in range(B + 1 - a):
                    pv = row[u]
                    if pv is None:
                        continue
                    cand = pv + trans
                    tu = u + a
                    if grow[tu] is None or cand < grow[tu]:
                        grow[tu] = cand
        tables.append(g)

    # best terminal state: smallest cost, then smallest capacity, abs, value
    best = None
    bv = bu = -1
    last = tables[-1]
    for v in range(n_vals):
        for u in range(B + 1):
            val = last[v][u]
            if val is None:
                continue
            key = (val, u, abs_step[n_cells - 1][v], v)
            if best is None or key < best:
                best = key
                bv, bu = v, u
    if best is None:
        raise ValueError("infeasible line problem")

    choices = [0] * n_cells
    choices[n_cells - 1] = bv
    v, u, total = bv, bu, best[0]
    for k in range(n_cells - 1, 0, -1):
        w = edge_weight[k - 1]
        a = abs_step[k][v]
        c = node_cost[k][v]
        upr = u - a
        pick = None
        for vp in range(n_vals):
            pv = tables[k - 1][vp][upr]
            if pv is None:
                continue
            if pv + c + w * abs(v - vp) == total:
                key = (abs_step[k - 1][vp], vp)
                if pick is None or key < pick:
                    pick = key
                    pick_v = vp
        assert pick is not None
        total -= c + w * abs(v - pick_v)
        v, u = pick_v, upr
        choices[k - 1] = v
    return best[0], choices


def enumerate_feasible(n_cells, n_vals, prev_idx, budget, limit):
    """All value-index assignments with total |v - prev| within budget.

    DFS in row-major order with ascending values, pruned on the capacity
    budget. Returns an int8 array of shape (count, n_cells). Raises if more
    than ``limit`` assignments would be produced.
    """
    out = []
    cur = [0] * n_cells
    B = int(budget)

    def rec(k, used):
        if k == n_cells:
            if len(out) >= limit:
                raise MemoryError("enumeration exceeds limit")
            out.append(bytes(cur))
            return
        p = prev_idx[k]
        for v in range(n_vals):
            a = v - p if v >= p else p - v
            if used + a <= B:
                cur[k] = v
                rec(k + 1, used + a)

    rec(0, 0)
    if not out:
        return np.zeros((0, n_cells), dtype=np.int8)
    return np.frombuffer(b"".join(out), dtype=np.int8).reshape(len(out), n_cells).copy()
