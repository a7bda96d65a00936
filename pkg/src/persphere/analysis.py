"""Distance matrices, average-linkage clustering and the simulation pipelines."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import (
    image_distance_matrix,
    image_geometry_for,
    landscape,
    landscape_grid,
    landscape_l2,
    power_of_ten_pixel,
)
from .generators import (
    FdaConfig,
    PP_FAMILIES,
    PpConfig,
    child_seeds,
    fda_sample,
    fda_smooth,
    rng_for,
)
from .homology import rips_pd, sublevel_pd0
from .measures import ArctanStep, _fmt, reweight
from .sphere import SphereGrid, sample_sphere
from .transport import pot1, sliced_wasserstein

__all__ = [
    "METRICS",
    "DistanceMatrix",
    "distance_matrix",
    "Dendrogram",
    "average_linkage",
    "cut",
    "rand_index",
    "matrix_correlation",
    "read_labels",
    "write_labels",
    "fda_dataset",
    "fda_metric_options",
    "pp_dataset",
    "pp_metric_options",
]

METRICS = ("pot1", "sw", "sphere-L2", "sphere-sup", "landscape-L2", "image-L2")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    entries: np.ndarray
    metric: str = ""

    def __post_init__(self):
        D = np.array(self.entries, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.all(np.isfinite(D)):
            raise ValueError("distance matrix has non-finite entries")
        if np.any(D < 0) or not np.array_equal(D, D.T) or np.any(np.diag(D) != 0):
            raise ValueError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
        D.flags.writeable = False
        object.__setattr__(self, "entries", D)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def write(self, path) -> None:
        lines = [f"{self.n},{self.metric}" if self.metric else str(self.n)]
        lines += [",".join(_fmt(x) for x in row) for row in self.entries]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> "DistanceMatrix":
        rows = [r for r in Path(path).read_text(encoding="utf-8").splitlines() if r.strip()]
        if not rows:
            raise ValueError("empty distance-matrix file")
        head = rows[0].split(",")
        n = int(head[0])
        metric = head[1] if len(head) > 1 else ""
        if len(rows) != n + 1:
            raise ValueError(f"expected {n} matrix rows, found {len(rows) - 1}")
        D = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
        if D.shape != (n, n):
            raise ValueError("distance matrix rows have the wrong length")
        return cls(D, metric)


def _symmetric_from_pairs(n, fn, workers=1) -> np.ndarray:
    D = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(lambda ij: fn(*ij), pairs))
    else:
        vals = [fn(i, j) for i, j in pairs]
    for (i, j), v in zip(pairs, vals):
        D[i, j] = D[j, i] = v
    return D


def distance_matrix(items, metric: str, grid: SphereGrid | None = None, *, n_dirs: int = 50,
                    seed: int | None = None, t_grid=None, n_t: int = 1000,
                    image_geometry=None, image_weight="flat", image_anchor=None,
                    workers: int = 1) -> DistanceMatrix:
    """Pairwise distances between persistence measures.

    Sliced Wasserstein uses one set of ``n_dirs`` angles for every pair
    (random when ``seed`` is set).  Landscapes share a grid spanning all
    births and deaths unless ``t_grid`` is given.  Image distances need an
    :class:`ImageGeometry` and are computed from pixel inner products.
    """
    items = list(items)
    n = len(items)
    if metric == "pot1":
        D = _symmetric_from_pairs(n, lambda i, j: pot1(items[i], items[j]).cost, workers)
    elif metric == "sw":
        if seed is None:
            angles = -np.pi / 2 + np.pi * np.arange(n_dirs) / n_dirs
        else:
            angles = rng_for(seed).uniform(-np.pi / 2, np.pi / 2, n_dirs)
        D = _symmetric_from_pairs(n, lambda i, j: sliced_wasserstein(items[i], items[j], angles=angles), workers)
    elif metric in ("sphere-L2", "sphere-sup"):
        grid = grid or SphereGrid()
        F = np.array([sample_sphere(m, grid).values for m in items]).reshape(n, -1)
        if metric == "sphere-sup":
            D = _symmetric_from_pairs(n, lambda i, j: float(np.max(np.abs(F[i] - F[j]))))
        else:
            # quadrature L² from the weighted Gram matrix; extras carry zero weight
            Fw = F * np.sqrt(grid.weights)[None, :]
            g = Fw @ Fw.T
            sq = np.diag(g)[:, None] + np.diag(g)[None, :] - 2.0 * g
            D = np.sqrt(np.maximum(sq, 0.0))
            D = 0.5 * (D + D.T)
            np.fill_diagonal(D, 0.0)
    elif metric == "landscape-L2":
        if t_grid is None:
            pts = [m.points for m in items if len(m)]
            lo = min((p[:, 0].min() for p in pts), default=0.0)
            hi = max((p[:, 1].max() for p in pts), default=1.0)
            t_grid = landscape_grid(lo, hi, n_t)
        lands = []
        for m in items:
            lam = landscape(m, t_grid)
            nz = np.any(lam.values > 0, axis=1)
            lands.append(type(lam)(lam.t_grid, lam.values[nz] if nz.any() else lam.values[:1]))
        D = _symmetric_from_pairs(n, lambda i, j: landscape_l2(lands[i], lands[j]), workers)
    elif metric == "image-L2":
        if image_geometry is None:
            raise ValueError("image-L2 needs an image geometry")
        D = image_distance_matrix(items, image_geometry, image_weight, image_anchor)
    else:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    return DistanceMatrix(D, metric)


# --------------------------------------------------------------------------
# clustering

@dataclass(frozen=True)
class Dendrogram:
    """``merges[k] = (a, b, height, size)``; new clusters get ids ``n, n+1, ...``."""

    n: int
    merges: tuple


def average_linkage(D: DistanceMatrix | np.ndarray) -> Dendrogram:
    """UPGMA; ties go to the lexicographically smallest pair of cluster ids."""
    D = D.entries if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)
    n = D.shape[0]
    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(D[i, j])
    size = {i: 1 for i in range(n)}
    merges = []
    next_id = n
    while len(size) > 1:
        (a, b), h = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        na, nb = size.pop(a), size.pop(b)
        del dist[(a, b)]
        for c in size:
            dac = dist.pop((min(a, c), max(a, c)))
            dbc = dist.pop((min(b, c), max(b, c)))
            dist[(c, next_id)] = (na * dac + nb * dbc) / (na + nb)
        size[next_id] = na + nb
        merges.append((a, b, h, na + nb))
        next_id += 1
    return Dendrogram(n, tuple(merges))


def cut(dend: Dendrogram, k: int) -> np.ndarray:
    """Labels of the ``k``-cluster partition, numbered by first appearance."""
    n = dend.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    members = {i: [i] for i in range(n)}
    for step, (a, b, _, _) in enumerate(dend.merges[: n - k]):
        members[n + step] = members.pop(a) + members.pop(b)
    labels = np.empty(n, dtype=np.int64)
    for lab, group in enumerate(sorted(members.values(), key=min)):
        labels[group] = lab
    return labels


def rand_index(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must have the same length")
    if len(a) < 2:
        raise ValueError("need at least two elements")
    iu = np.triu_indices(len(a), 1)
    same_a = (a[:, None] == a[None, :])[iu]
    same_b = (b[:, None] == b[None, :])[iu]
    return float(np.mean(same_a == same_b))


def matrix_correlation(D1, D2) -> float:
    """Pearson correlation of the strict upper triangles."""
    A = D1.entries if isinstance(D1, DistanceMatrix) else np.asarray(D1, dtype=float)
    B = D2.entries if isinstance(D2, DistanceMatrix) else np.asarray(D2, dtype=float)
    if A.shape != B.shape or A.shape[0] < 3:
        raise ValueError("need two matrices of the same size n >= 3")
    iu = np.triu_indices(A.shape[0], 1)
    x, y = A[iu] - A[iu].mean(), B[iu] - B[iu].mean()
    den = np.sqrt(np.dot(x, x) * np.dot(y, y))
    if den == 0:
        raise ValueError("zero variance in a distance matrix")
    return float(np.clip(np.dot(x, y) / den, -1.0, 1.0))


def write_labels(labels, path) -> None:
    Path(path).write_text("".join(f"{int(x)}\n" for x in labels), encoding="utf-8")


def read_labels(path) -> np.ndarray:
    rows = [r.strip() for r in Path(path).read_text(encoding="utf-8").splitlines() if r.strip()]
    try:
        return np.array([int(r) for r in rows], dtype=np.int64)
    except ValueError:
        raise ValueError("labels file must hold one integer per line") from None


# --------------------------------------------------------------------------
# pipelines

def fda_dataset(cfg: FdaConfig, seed: int, replicates: int | None = None):
    """Diagrams and class labels for one FDA run (two classes).

    Returns ``(diagrams, labels, records)``; each record describes one
    replicate (class, sample size, stream index) for the manifest.
    """
    N = cfg.replicates if replicates is None else replicates
    streams = child_seeds(seed, 2 + 2 * N)
    curves = [fda_smooth(streams[c], cfg) for c in range(2)]
    diagrams, labels, records = [], [], []
    for c in range(2):
        for i in range(N):
            idx = 2 + c * N + i
            s_n, s_x = streams[idx].spawn(2)
            n = cfg.fixed_n if cfg.fixed_n is not None else int(rng_for(s_n).integers(cfg.n_min, cfg.n_max + 1))
            dgm = sublevel_pd0(fda_sample(curves[c], n, cfg.sigma, s_x))
            diagrams.append(dgm)
            labels.append(c)
            records.append({"class": c, "replicate": i, "n": n, "stream": idx})
    return diagrams, np.array(labels), records


def _fda_reweighting(cfg: FdaConfig):
    if cfg.reweight is None:
        return None
    if cfg.reweight == "arctan":
        return ArctanStep(cfg.sigma)
    return cfg.reweight


def fda_metric_options(diagrams, cfg: FdaConfig, metric: str):
    """Inputs and keyword arguments for ``distance_matrix`` under the FDA conventions.

    Reweighting applies to spheres and images only; image pixels are
    ``1/500`` of the smaller side of the diagrams' bounding box rounded to a
    power of ten, with bandwidth ten pixels.
    """
    scheme = _fda_reweighting(cfg)
    items = diagrams
    if scheme is not None and metric in ("sphere-L2", "sphere-sup", "image-L2"):
        items = [reweight(m, scheme) for m in diagrams]
    kw = {}
    if metric == "image-L2":
        pts = np.concatenate([m.points for m in diagrams if len(m)])
        side = float(min(np.ptp(pts[:, 0]), np.ptp(pts[:, 1])))
        pixel = power_of_ten_pixel(side if side > 0 else 1.0)
        sigma = 10.0 * pixel
        kw = dict(image_geometry=image_geometry_for(items, pixel, sigma),
                  image_weight=cfg.image_weight)
    return items, kw


def pp_dataset(cfg: PpConfig, seed: int, per_family: int = 30, families=tuple(PP_FAMILIES)):
    """Point clouds, their H0/H1 Rips diagrams and family labels."""
    streams = child_seeds(seed, len(families) * per_family)
    clouds, h0, h1, labels, records = [], [], [], [], []
    for f, fam in enumerate(families):
        for i in range(per_family):
            idx = f * per_family + i
            pc = PP_FAMILIES[fam](cfg, streams[idx])
            d0, d1 = rips_pd(pc, cfg.cap)
            clouds.append(pc); h0.append(d0); h1.append(d1); labels.append(f)
            records.append({"family": fam, "replicate": i, "stream": idx})
    return clouds, h0, h1, np.array(labels), records


def pp_metric_options(diagrams, cfg: PpConfig, metric: str, degree: int, anchor: bool = False):
    """Image settings for point-process diagrams: pixel s/100, bandwidth s/10, arctan weight.

    ``anchor=True`` adds the diagonal point ``(s/10, s/10)`` to H0 images.
    """
    if metric != "image-L2":
        return diagrams, {}
    pixel, sigma = cfg.s / 100.0, cfg.s / 10.0
    a = cfg.s / 10.0 if (anchor and degree == 0) else None
    geom = image_geometry_for(diagrams, pixel, sigma, anchor=a)
    return diagrams, dict(image_geometry=geom, image_weight="arctan:1", image_anchor=a)
