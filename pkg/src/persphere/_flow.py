"""Successive shortest paths for dense balanced transportation problems.

The network is ``S -> sources -> sinks -> T`` with arc costs only on the
complete bipartite middle layer.  Dijkstra runs on reduced costs with node
potentials, so every augmentation follows a cheapest residual path.
Reduced costs that come out slightly negative from rounding are clamped to 0.
"""

import numpy as np
from numba import njit

# node layout: 0 = S, 1..n = sources, n+1..n+m = sinks, n+m+1 = T


@njit(cache=True, nogil=True)
def _ssp(a, b, C, eps):
    n, m = C.shape
    V = n + m + 2
    S, T = 0, n + m + 1
    pot = np.zeros(V)
    flow = np.zeros((n, m))
    r_src = a.copy()     # residual S -> source
    r_snk = b.copy()     # residual sink -> T
    remaining = min(a.sum(), b.sum())
    dist = np.empty(V)
    prev = np.empty(V, dtype=np.int64)
    done = np.empty(V, dtype=np.bool_)
    n_aug = 0
    while remaining > eps:
        dist[:] = np.inf
        prev[:] = -1
        done[:] = False
        dist[S] = 0.0
        for _ in range(V):
            u = -1
            best = np.inf
            for x in range(V):
                if not done[x] and dist[x] < best:
                    best = dist[x]
                    u = x
            if u < 0:
                break
            done[u] = True
            du = dist[u]
            if u == S:
                for i in range(n):
                    if r_src[i] > eps:
                        x = 1 + i
                        rc = pot[S] - pot[x]
                        if rc < 0.0:
                            rc = 0.0
                        if du + rc < dist[x]:
                            dist[x] = du + rc
                            prev[x] = u
            elif u <= n:
                i = u - 1
                if a[i] - r_src[i] > eps:
                    rc = pot[u] - pot[S]
                    if rc < 0.0:
                        rc = 0.0
                    if du + rc < dist[S]:
                        dist[S] = du + rc
                        prev[S] = u
                for j in range(m):
                    x = 1 + n + j
                    if done[x]:
                        continue
                    rc = C[i, j] + pot[u] - pot[x]
                    if rc < 0.0:
                        rc = 0.0
                    if du + rc < dist[x]:
                        dist[x] = du + rc
                        prev[x] = u
            elif u < T:
                j = u - 1 - n
                for i in range(n):
                    if flow[i, j] > eps:
                        x = 1 + i
                        if done[x]:
                            continue
                        rc = -C[i, j] + pot[u] - pot[x]
                        if rc < 0.0:
                            rc = 0.0
                        if du + rc < dist[x]:
                            dist[x] = du + rc
                            prev[x] = u
                if r_snk[j] > eps:
                    rc = pot[u] - pot[T]
                    if rc < 0.0:
                        rc = 0.0
                    if du + rc < dist[T]:
                        dist[T] = du + rc
                        prev[T] = u
            else:
                for j in range(m):
                    x = 1 + n + j
                    if b[j] - r_snk[j] > eps and not done[x]:
                        rc = pot[T] - pot[x]
                        if rc < 0.0:
                            rc = 0.0
                        if du + rc < dist[x]:
                            dist[x] = du + rc
                            prev[x] = u
        if not done[T]:
            return flow, -1
        dT = dist[T]
        for x in range(V):
            pot[x] += dist[x] if dist[x] < dT else dT

        # bottleneck along the path T <- ... <- S
        delta = np.inf
        x = T
        while x != S:
            u = prev[x]
            if u == S:
                cap = r_src[x - 1]
            elif x == S:
                cap = a[u - 1] - r_src[u - 1]
            elif x == T:
                cap = r_snk[u - 1 - n]
            elif u == T:
                cap = b[x - 1 - n] - r_snk[x - 1 - n]
            elif u <= n:
                cap = np.inf
            else:
                cap = flow[x - 1, u - 1 - n]
            if cap < delta:
                delta = cap
            x = u
        x = T
        while x != S:
            u = prev[x]
            if u == S:
                r_src[x - 1] -= delta
            elif x == S:
                r_src[u - 1] += delta
            elif x == T:
                r_snk[u - 1 - n] -= delta
            elif u == T:
                r_snk[x - 1 - n] += delta
            elif u <= n:
                flow[u - 1, x - 1 - n] += delta
            else:
                flow[x - 1, u - 1 - n] -= delta
            x = u
        remaining -= delta
        n_aug += 1
    return flow, n_aug


def min_cost_transport(supply, demand, cost):
    """Solve ``min <F, cost>`` over ``F >= 0`` with row sums ``supply`` and column sums ``demand``.

    Totals must agree up to a relative ``1e-12``.  Returns the flow matrix.
    """
    a = np.ascontiguousarray(supply, dtype=float)
    b = np.ascontiguousarray(demand, dtype=float)
    C = np.ascontiguousarray(cost, dtype=float)
    if C.shape != (len(a), len(b)):
        raise ValueError("cost matrix shape does not match supply/demand")
    if np.any(a < 0) or np.any(b < 0) or not np.all(np.isfinite(C)):
        raise ValueError("supplies must be nonnegative and costs finite")
    total = max(a.sum(), b.sum(), 1.0)
    if abs(a.sum() - b.sum()) > 1e-12 * total:
        raise ValueError("unbalanced transportation problem")
    if len(a) == 0 or len(b) == 0:
        return np.zeros(C.shape)
    flow, n_aug = _ssp(a, b, C, 1e-13 * total)
    if n_aug < 0:
        raise RuntimeError("no augmenting path; transportation problem infeasible")
    flow[flow < 1e-13 * total] = 0.0
    return flow
