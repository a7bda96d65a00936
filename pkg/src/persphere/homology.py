"""Persistence diagrams from data.

* ``sublevel_pd0``: degree-0 sublevel persistence of the piecewise-linear
  interpolation of a sampled curve (union-find, elder rule).
* ``rips_pd``: degree-0 and degree-1 Vietoris-Rips persistence of a planar
  point cloud with a diameter cap.  H0 comes from Kruskal's algorithm; H1
  from persistent cohomology over GF(2) with clearing of the MST edges.

Ties in filtration values are broken lexicographically on sorted vertex
tuples, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.special import comb

from .measures import PersistenceMeasure, _fmt

__all__ = [
    "SampledCurve",
    "PointCloud",
    "sublevel_pd0",
    "sublevel_pd0_sweep",
    "rips_pd",
    "rips_pd_bruteforce",
    "mst_lengths_prim",
    "MAX_RIPS_POINTS",
    "read_curve",
    "write_curve",
    "read_point_cloud",
    "write_point_cloud",
]

MAX_RIPS_POINTS = 400


@dataclass(frozen=True, eq=False)
class SampledCurve:
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValueError("a curve needs at least two (t, value) samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite curve samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("curve abscissae must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(p)):
            raise ValueError("non-finite point coordinates")
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.points)


def _measure(pairs) -> PersistenceMeasure:
    pairs = [(b, d) for b, d in pairs if d > b]
    return PersistenceMeasure.from_pairs(pairs) if pairs else PersistenceMeasure.empty()


# --------------------------------------------------------------------------
# sublevel H0

def sublevel_pd0(curve: SampledCurve) -> PersistenceMeasure:
    """Elder-rule H0 diagram; the global minimum is paired with the global maximum."""
    f = curve.values
    n = len(f)
    order = np.lexsort((np.arange(n), f))
    parent = np.full(n, -1)
    root_min = np.zeros(n, dtype=np.int64)  # vertex holding each root's minimum

    def find(x):
        r = x
        while parent[r] != r:
            r = parent[r]
        while parent[x] != r:
            parent[x], x = r, parent[x]
        return r

    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    pairs = []
    for v in order:
        parent[v] = v
        root_min[v] = v
        for u in (v - 1, v + 1):
            if 0 <= u < n and parent[u] >= 0:
                ru, rv = find(u), find(v)
                if ru == rv:
                    continue
                # the younger component (later in the sweep) dies
                if rank[root_min[ru]] < rank[root_min[rv]]:
                    old, young = ru, rv
                else:
                    old, young = rv, ru
                pairs.append((f[root_min[young]], f[v]))
                parent[young] = old
    pairs.append((f.min(), f.max()))
    return _measure(pairs)


def sublevel_pd0_sweep(curve: SampledCurve) -> PersistenceMeasure:
    """Threshold-sweep oracle: relabel sublevel runs at every distinct value."""
    f = curve.values
    n = len(f)
    key = list(zip(f.tolist(), range(n)))
    alive = {}  # representative vertex -> birth value
    pairs = []
    for t in np.unique(f):
        inside = f <= t
        i = 0
        while i < n:
            if not inside[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and inside[j + 1]:
                j += 1
            reps = [r for r in alive if i <= r <= j]
            if not reps:
                r = min(range(i, j + 1), key=lambda q: key[q])
                alive[r] = f[r]
            elif len(reps) > 1:
                reps.sort(key=lambda q: key[q])
                for r in reps[1:]:
                    pairs.append((alive.pop(r), t))
            i = j + 1
    pairs.append((f.min(), f.max()))
    return _measure(pairs)


# --------------------------------------------------------------------------
# Vietoris-Rips

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def _tri_index(i, j, k):
    """Combinatorial index of the sorted triple ``i < j < k``."""
    return k * (k - 1) * (k - 2) // 6 + j * (j - 1) // 2 + i


def rips_pd(pc: PointCloud, cap: float) -> tuple[PersistenceMeasure, PersistenceMeasure]:
    """H0 and H1 Rips diagrams with filtration value = diameter, truncated at ``cap``."""
    n = len(pc)
    if n > MAX_RIPS_POINTS:
        raise ValueError(f"rips_pd is limited to {MAX_RIPS_POINTS} points (got {n})")
    if not cap > 0:
        raise ValueError("cap must be positive")
    if n < 2:
        return PersistenceMeasure.empty(), PersistenceMeasure.empty()
    D = squareform(pdist(pc.points))

    # edges within the cap in filtration order (length, i, j)
    iu, ju = np.triu_indices(n, 1)
    lens = D[iu, ju]
    keep = lens <= cap
    iu, ju, lens = iu[keep], ju[keep], lens[keep]
    eorder = np.lexsort((ju, iu, lens))
    iu, ju, lens = iu[eorder], ju[eorder], lens[eorder]

    uf = _UnionFind(n)
    h0 = []
    is_mst = np.zeros(len(lens), dtype=bool)
    for e in range(len(lens)):
        if uf.union(int(iu[e]), int(ju[e])):
            is_mst[e] = True
            h0.append((0.0, float(lens[e])))

    # triangles within the cap, ranked in filtration order (diam, i, j, k)
    tri_rank = np.full(int(comb(n, 3, exact=True)), -1, dtype=np.int64)
    I, J, K = [], [], []
    for k in range(2, n):
        jj, ii = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        sel = ii < jj
        I.append(ii[sel]); J.append(jj[sel]); K.append(np.full(sel.sum(), k))
    I, J, K = (np.concatenate(a) for a in (I, J, K))
    diam = np.maximum(np.maximum(D[I, J], D[I, K]), D[J, K])
    keep = diam <= cap
    I, J, K, diam = I[keep], J[keep], K[keep], diam[keep]
    torder = np.lexsort((K, J, I, diam))
    tri_diam = diam[torder]
    tri_rank[_tri_index(I[torder], J[torder], K[torder])] = np.arange(len(torder))

    others = np.arange(n)

    def coboundary(i, j):
        k = others[(others != i) & (others != j)]
        a = np.minimum(np.minimum(i, j), k)
        c = np.maximum(np.maximum(i, j), k)
        b = i + j + k - a - c
        r = tri_rank[_tri_index(a, b, c)]
        return np.sort(r[r >= 0])

    # persistent cohomology: columns in reverse filtration order, pivot = earliest triangle
    pivot_owner = {}
    reduced = {}
    h1 = []
    for e in range(len(lens) - 1, -1, -1):
        if is_mst[e]:
            continue  # cleared: its cocycle is a coboundary of H0
        col = coboundary(int(iu[e]), int(ju[e]))
        while len(col):
            p = int(col[0])
            other = pivot_owner.get(p)
            if other is None:
                break
            col = np.setxor1d(col, reduced[other], assume_unique=True)
        if len(col):
            p = int(col[0])
            pivot_owner[p] = e
            reduced[e] = col
            h1.append((float(lens[e]), float(tri_diam[p])))
    return _measure(h0), _measure(h1)


def rips_pd_bruteforce(pc: PointCloud, cap: float) -> tuple[PersistenceMeasure, PersistenceMeasure]:
    """Dense GF(2) boundary-matrix reduction on the full 2-skeleton (oracle, small inputs only)."""
    n = len(pc)
    if n > 10:
        raise ValueError("brute-force reduction limited to 10 points")
    P = pc.points
    d = lambda a, b: float(np.sqrt(np.sum((P[a] - P[b]) ** 2)))
    simplices = [((0.0, 0, (v,)), (v,)) for v in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if d(a, b) <= cap:
                simplices.append(((d(a, b), 1, (a, b)), (a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                diam = max(d(a, b), d(a, c), d(b, c))
                if diam <= cap:
                    simplices.append(((diam, 2, (a, b, c)), (a, b, c)))
    simplices.sort(key=lambda s: s[0])
    index = {s[1]: i for i, s in enumerate(simplices)}
    m = len(simplices)
    B = np.zeros((m, m), dtype=np.uint8)
    for col, (_, verts) in enumerate(simplices):
        if len(verts) > 1:
            for drop in range(len(verts)):
                B[index[verts[:drop] + verts[drop + 1:]], col] = 1

    def low(c):
        nz = np.nonzero(B[:, c])[0]
        return int(nz[-1]) if len(nz) else -1

    lows = {}
    h0, h1 = [], []
    for c in range(m):
        l = low(c)
        while l >= 0 and l in lows:
            B[:, c] ^= B[:, lows[l]]
            l = low(c)
        if l >= 0:
            lows[l] = c
            birth, death = simplices[l][0][0], simplices[c][0][0]
            (h0 if len(simplices[c][1]) == 2 else h1).append((birth, death))
    return _measure(h0), _measure(h1)


def mst_lengths_prim(points) -> np.ndarray:
    """Sorted MST edge lengths via dense Prim (oracle for the H0 identity)."""
    P = np.asarray(points, dtype=float)
    n = len(P)
    if n < 2:
        return np.zeros(0)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best[0] = 0.0
    out = []
    for _ in range(n):
        u = int(np.argmin(np.where(in_tree, np.inf, best)))
        if in_tree.any():
            out.append(best[u])
        in_tree[u] = True
        dist = np.sqrt(np.sum((P - P[u]) ** 2, axis=1))
        best = np.where(~in_tree & (dist < best), dist, best)
    return np.sort(np.array(out))


# --------------------------------------------------------------------------
# files

def _read_two_columns(path, what):
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{what}: expected 2 fields at line {lineno}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"{what}: malformed number at line {lineno}") from None
    return np.array(rows, dtype=float).reshape(-1, 2)


def read_curve(path) -> SampledCurve:
    arr = _read_two_columns(path, "curve")
    return SampledCurve(arr[:, 0], arr[:, 1])


def write_curve(curve: SampledCurve, path) -> None:
    lines = [f"{_fmt(t)},{_fmt(v)}" for t, v in zip(curve.t, curve.values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_point_cloud(path) -> PointCloud:
    return PointCloud(_read_two_columns(path, "point cloud"))


def write_point_cloud(pc: PointCloud, path) -> None:
    lines = [f"{_fmt(x)},{_fmt(y)}" for x, y in pc.points]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
