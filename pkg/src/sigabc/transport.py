"""Exact optimal transport between uniformly weighted point clouds.

Solves the transportation problem with dense float costs and integer
marginals using the primal network simplex (north-west-corner start,
block entering-arc rule, tree-stored basis). Uniform weights 1/n and 1/m
are rescaled to the integer supplies m and demands n, which keeps every
basic flow integral and the pivoting free of float-degeneracy issues; the
objective is rescaled back at the end.

The solver is deterministic: identical inputs always produce identical
pivot sequences and hence bit-identical costs.
"""

import numpy as np
from numba import njit


class TransportError(RuntimeError):
    """Raised when the simplex fails to terminate (should not happen)."""


@njit(cache=True, nogil=True)
def _network_simplex(C, supply, demand):
    n = supply.shape[0]
    m = demand.shape[0]
    nn = n + m
    nb = nn - 1  # spanning-tree basis size

    barc_i = np.empty(nb, dtype=np.int64)
    barc_j = np.empty(nb, dtype=np.int64)
    bflow = np.empty(nb, dtype=np.int64)

    # north-west corner initial basic feasible solution (staircase tree)
    rs = supply.copy()
    rd = demand.copy()
    i = 0
    j = 0
    for t in range(nb):
        q = rs[i] if rs[i] < rd[j] else rd[j]
        barc_i[t] = i
        barc_j[t] = j
        bflow[t] = q
        rs[i] -= q
        rd[j] -= q
        if i == n - 1 and j == m - 1:
            break
        if rs[i] == 0 and i < n - 1:
            i += 1
        else:
            j += 1

    # tree bookkeeping, rebuilt after every pivot (O(n + m))
    adj_start = np.empty(nn + 1, dtype=np.int64)
    adj_arc = np.empty(2 * nb, dtype=np.int64)
    deg = np.empty(nn, dtype=np.int64)
    parent = np.empty(nn, dtype=np.int64)
    parent_arc = np.empty(nn, dtype=np.int64)
    depth = np.empty(nn, dtype=np.int64)
    pot = np.empty(nn, dtype=np.float64)
    stack = np.empty(nn, dtype=np.int64)

    cmax = 0.0
    for a in range(n):
        for b in range(m):
            v = abs(C[a, b])
            if v > cmax:
                cmax = v
    tol = 1e-12 * (1.0 + cmax)

    total = n * m
    block = int(np.sqrt(total)) + 10
    max_pivots = 50 * total + 10000
    scan_pos = 0
    status = 1  # 1: pivot budget exceeded, 0: optimal, -1: lost leaving arc

    for _pivot in range(max_pivots):
        # adjacency lists of the basis tree
        for v in range(nn):
            deg[v] = 0
        for t in range(nb):
            deg[barc_i[t]] += 1
            deg[n + barc_j[t]] += 1
        adj_start[0] = 0
        for v in range(nn):
            adj_start[v + 1] = adj_start[v] + deg[v]
            deg[v] = 0
        for t in range(nb):
            u = barc_i[t]
            w = n + barc_j[t]
            adj_arc[adj_start[u] + deg[u]] = t
            deg[u] += 1
            adj_arc[adj_start[w] + deg[w]] = t
            deg[w] += 1

        # potentials from a depth-first traversal rooted at node 0
        for v in range(nn):
            parent[v] = -1
        parent[0] = 0
        parent_arc[0] = -1
        depth[0] = 0
        pot[0] = 0.0
        top = 0
        stack[0] = 0
        while top >= 0:
            v = stack[top]
            top -= 1
            for s in range(adj_start[v], adj_start[v + 1]):
                t = adj_arc[s]
                u = barc_i[t]
                w = n + barc_j[t]
                o = w if u == v else u
                if parent[o] == -1:
                    parent[o] = v
                    parent_arc[o] = t
                    depth[o] = depth[v] + 1
                    pot[o] = C[barc_i[t], barc_j[t]] - pot[v]
                    top += 1
                    stack[top] = o

        # entering arc: most negative reduced cost in the first block
        # (wrapping scan) that contains any negative one
        ei = -1
        ej = -1
        best = -tol
        scanned = 0
        pos = scan_pos
        while scanned < total:
            hi = block if block < total - scanned else total - scanned
            found = False
            for s in range(hi):
                p = pos + s
                if p >= total:
                    p -= total
                a = p // m
                b = p - a * m
                rc = C[a, b] - pot[a] - pot[n + b]
                if rc < best:
                    best = rc
                    ei = a
                    ej = b
                    found = True
            scanned += hi
            pos += hi
            if pos >= total:
                pos -= total
            if found:
                scan_pos = pos
                break
        if ei < 0:
            status = 0
            break

        # The entering arc (ei, n+ej) closes a unique cycle through the tree
        # paths of both endpoints. Pushing flow around the cycle changes arc
        # flows with alternating signs; because the graph is bipartite the
        # sign of each tree arc follows from the type of its child node:
        #   walk from the sink endpoint (cycle direction == child->parent):
        #     child is a sink  -> flow decreases, child is a source -> grows
        #   walk from the source endpoint (cycle direction is parent->child):
        #     child is a source -> flow decreases, child is a sink  -> grows
        a_node = ei
        b_node = n + ej
        da = depth[a_node]
        db = depth[b_node]
        theta = np.int64(-1)
        leave = -1
        xa = a_node
        xb = b_node
        while da > db:
            t = parent_arc[xa]
            if xa < n and (theta < 0 or bflow[t] < theta):
                theta = bflow[t]
                leave = t
            xa = parent[xa]
            da -= 1
        while db > da:
            t = parent_arc[xb]
            if xb >= n and (theta < 0 or bflow[t] < theta):
                theta = bflow[t]
                leave = t
            xb = parent[xb]
            db -= 1
        while xa != xb:
            t = parent_arc[xa]
            if xa < n and (theta < 0 or bflow[t] < theta):
                theta = bflow[t]
                leave = t
            xa = parent[xa]
            t = parent_arc[xb]
            if xb >= n and (theta < 0 or bflow[t] < theta):
                theta = bflow[t]
                leave = t
            xb = parent[xb]
        if leave < 0:
            status = -1
            break

        if theta > 0:
            pa = a_node
            pb = b_node
            da = depth[a_node]
            db = depth[b_node]
            while da > db:
                t = parent_arc[pa]
                bflow[t] += -theta if pa < n else theta
                pa = parent[pa]
                da -= 1
            while db > da:
                t = parent_arc[pb]
                bflow[t] += -theta if pb >= n else theta
                pb = parent[pb]
                db -= 1
            while pa != pb:
                t = parent_arc[pa]
                bflow[t] += -theta if pa < n else theta
                pa = parent[pa]
                t = parent_arc[pb]
                bflow[t] += -theta if pb >= n else theta
                pb = parent[pb]

        # entering arc replaces the leaving arc in the basis
        barc_i[leave] = ei
        barc_j[leave] = ej
        bflow[leave] = theta

    cost = 0.0
    if status == 0:
        for t in range(nb):
            cost += bflow[t] * C[barc_i[t], barc_j[t]]
    return status, cost


def transport_cost_uniform(C: np.ndarray) -> float:
    """Exact OT cost between uniform marginals 1/n (rows) and 1/m (cols).

    ``C`` is the dense (n, m) ground-cost matrix. Internally the marginals
    are scaled to integers (supplies m, demands n) and the objective is
    divided by n*m afterwards.
    """
    C = np.ascontiguousarray(C, dtype=np.float64)
    n, m = C.shape
    if n == 0 or m == 0:
        raise TransportError("empty cost matrix")
    supply = np.full(n, m, dtype=np.int64)
    demand = np.full(m, n, dtype=np.int64)
    status, raw = _network_simplex(C, supply, demand)
    if status == -1:
        raise TransportError("network simplex lost the leaving arc")
    if status == 1:
        raise TransportError("network simplex exceeded its pivot budget")
    return raw / (n * m)
