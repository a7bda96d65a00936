"""Persistence landscapes and Gaussian persistence images.

Images live on the birth-persistence plane ``T(x, y) = (x, y - x)``; each
pixel stores the exact integral of the Gaussian over its cell, computed from
CDF differences, so the image of a unit atom sums to 1 on a large window.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .measures import PersistenceMeasure, _fmt

__all__ = [
    "Landscape",
    "landscape",
    "landscape_l2",
    "landscape_grid",
    "ImageWeight",
    "ImageGeometry",
    "PersistenceImage",
    "persistence_image",
    "image_factors",
    "image_gram",
    "image_l2",
    "image_distance_matrix",
    "image_geometry_for",
    "power_of_ten_pixel",
    "gaussian_l2_closed_form",
    "gaussian_l2_norm",
    "write_landscape",
    "read_landscape",
    "write_image",
    "read_image",
]


# --------------------------------------------------------------------------
# landscapes

@dataclass(frozen=True, eq=False)
class Landscape:
    t_grid: np.ndarray
    values: np.ndarray  # (k_max, n_t)

    @property
    def k_max(self) -> int:
        return self.values.shape[0]


def landscape_grid(t_min: float, t_max: float, n_t: int) -> np.ndarray:
    return np.linspace(t_min, t_max, n_t)


def _expand_counting(mu: PersistenceMeasure) -> np.ndarray:
    w = mu.weights
    if not np.all(w == np.round(w)):
        raise ValueError("landscapes need integer (counting) multiplicities")
    return np.repeat(mu.points, w.astype(np.int64), axis=0)


def landscape(mu: PersistenceMeasure, t_grid, k_max: int | None = None) -> Landscape:
    """Sample ``λ_k(t)``, the k-th largest of the tents ``max(0, min(t - x, y - t))``.

    ``k_max=None`` keeps every landscape function (one per atom).
    ``t_grid`` is an array or a ``(t_min, t_max, n_t)`` triple.
    """
    if isinstance(t_grid, tuple):
        t_grid = landscape_grid(*t_grid)
    t = np.asarray(t_grid, dtype=float)
    pts = _expand_counting(mu)
    k = max(len(pts), 1) if k_max is None else k_max
    vals = np.zeros((k, len(t)))
    if len(pts):
        tents = np.maximum(0.0, np.minimum(t[None, :] - pts[:, :1], pts[:, 1:] - t[None, :]))
        tents = -np.sort(-tents, axis=0)
        kk = min(k, len(pts))
        vals[:kk] = tents[:kk]
    return Landscape(t, vals)


def landscape_l2(a: Landscape, b: Landscape) -> float:
    """``sqrt(sum_k ∫ (λ_k^a - λ_k^b)^2 dt)`` by the trapezoid rule; missing levels count as 0."""
    if a.t_grid.shape != b.t_grid.shape or not np.array_equal(a.t_grid, b.t_grid):
        raise ValueError("landscapes sampled on different grids")
    k = max(a.k_max, b.k_max)
    va = np.zeros((k, len(a.t_grid)))
    vb = np.zeros_like(va)
    va[: a.k_max] = a.values
    vb[: b.k_max] = b.values
    return float(np.sqrt(np.trapezoid(np.sum((va - vb) ** 2, axis=0), a.t_grid)))


# --------------------------------------------------------------------------
# images

@dataclass(frozen=True)
class ImageWeight:
    """Atom weight as a function of the lifetime ``y - x``.

    ``kind`` is ``"flat"``, ``"pers"`` (``(y - x) ** power``) or ``"arctan"``
    (``(2/π) arctan((y - x) / scale)``).
    """

    kind: str = "flat"
    power: float = 1.0
    scale: float = 1.0

    @classmethod
    def parse(cls, text: str) -> "ImageWeight":
        text = text.strip()
        if text == "flat":
            return cls("flat")
        if text.startswith("arctan"):
            _, _, scale = text.partition(":")
            return cls("arctan", scale=float(scale) if scale else 1.0)
        if text.startswith("pers"):
            tail = text[4:]
            return cls("pers", power=float(tail) if tail else 1.0)
        raise ValueError(f"unknown image weight {text!r}")

    def __str__(self) -> str:
        if self.kind == "pers":
            return "pers" if self.power == 1 else f"pers{self.power:g}"
        if self.kind == "arctan":
            return f"arctan:{self.scale:g}"
        return "flat"

    def __call__(self, lifetime) -> np.ndarray:
        lifetime = np.asarray(lifetime, dtype=float)
        if self.kind == "flat":
            return np.ones_like(lifetime)
        if self.kind == "pers":
            return lifetime ** self.power
        if self.kind == "arctan":
            return (2.0 / np.pi) * np.arctan(lifetime / self.scale)
        raise ValueError(f"unknown image weight kind {self.kind!r}")


@dataclass(frozen=True)
class ImageGeometry:
    birth_min: float
    birth_max: float
    pers_min: float
    pers_max: float
    pixel_size: float
    sigma: float

    def __post_init__(self):
        if not self.pixel_size > 0:
            raise ValueError("pixel_size must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not (self.birth_max > self.birth_min and self.pers_max > self.pers_min):
            raise ValueError("empty image window")

    def _edges(self, lo, hi):
        n = int(np.ceil(round((hi - lo) / self.pixel_size, 9)))
        return lo + self.pixel_size * np.arange(n + 1)

    @property
    def birth_edges(self) -> np.ndarray:
        return self._edges(self.birth_min, self.birth_max)

    @property
    def pers_edges(self) -> np.ndarray:
        return self._edges(self.pers_min, self.pers_max)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.birth_edges) - 1, len(self.pers_edges) - 1


@dataclass(frozen=True, eq=False)
class PersistenceImage:
    geometry: ImageGeometry
    weight: ImageWeight
    pixels: np.ndarray  # (n_birth, n_pers)


def _cell_masses(centres: np.ndarray, edges: np.ndarray, sigma: float) -> np.ndarray:
    cdf = ndtr((edges[None, :] - centres[:, None]) / sigma)
    return np.diff(cdf, axis=1)


def image_factors(mu: PersistenceMeasure, geom: ImageGeometry, weight: ImageWeight | str = "flat",
                  diagonal_anchor: float | None = None):
    """Separable factors ``(c, G_birth, G_pers)`` with ``pixels = G_birthᵀ diag(c) G_pers``.

    ``diagonal_anchor=a`` adds an atom at ``(a, a)``, weighted by the scheme
    evaluated at zero lifetime.
    """
    if isinstance(weight, str):
        weight = ImageWeight.parse(weight)
    births = mu.points[:, 0]
    life = mu.points[:, 1] - mu.points[:, 0]
    c = mu.weights * weight(life)
    if diagonal_anchor is not None:
        births = np.append(births, diagonal_anchor)
        life = np.append(life, 0.0)
        c = np.append(c, weight(np.zeros(1)))
    gb = _cell_masses(births, geom.birth_edges, geom.sigma)
    gp = _cell_masses(life, geom.pers_edges, geom.sigma)
    return c, gb, gp


def persistence_image(mu: PersistenceMeasure, geom: ImageGeometry, weight: ImageWeight | str = "flat",
                      diagonal_anchor: float | None = None) -> PersistenceImage:
    if isinstance(weight, str):
        weight = ImageWeight.parse(weight)
    c, gb, gp = image_factors(mu, geom, weight, diagonal_anchor)
    pixels = gb.T @ (c[:, None] * gp) if len(c) else np.zeros(geom.shape)
    return PersistenceImage(geom, weight, pixels)


def image_l2(a: PersistenceImage, b: PersistenceImage) -> float:
    """Riemann approximation of the continuous L² distance of the underlying surfaces.

    Pixels hold cell integrals, so the surface value on a cell is
    ``pixel / pixel_size**2`` and the distance is ``sqrt(sum (a - b)^2) / pixel_size``.
    """
    if a.geometry != b.geometry:
        raise ValueError("images have different geometry")
    return float(np.sqrt(np.sum((a.pixels - b.pixels) ** 2)) / a.geometry.pixel_size)


def image_gram(factors) -> np.ndarray:
    """Pixel inner products ``<A_k, A_l>`` computed from separable factors."""
    n = len(factors)
    gram = np.zeros((n, n))
    for k in range(n):
        ck, bk, pk = factors[k]
        for l in range(k, n):
            cl, bl, pl = factors[l]
            if len(ck) == 0 or len(cl) == 0:
                continue
            val = ck @ ((bk @ bl.T) * (pk @ pl.T)) @ cl
            gram[k, l] = gram[l, k] = val
    return gram


def image_distance_matrix(measures, geom: ImageGeometry, weight="flat", diagonal_anchor=None) -> np.ndarray:
    """All pairwise :func:`image_l2` distances without materialising the images."""
    factors = [image_factors(m, geom, weight, diagonal_anchor) for m in measures]
    g = image_gram(factors)
    sq = np.diag(g)[:, None] + np.diag(g)[None, :] - 2.0 * g
    d = np.sqrt(np.maximum(sq, 0.0)) / geom.pixel_size
    np.fill_diagonal(d, 0.0)
    return d


def power_of_ten_pixel(side: float, fraction: float = 1.0 / 500.0) -> float:
    """``fraction * side`` rounded to the closest power of ten (in log scale)."""
    if not side > 0:
        raise ValueError("side must be positive")
    return float(10.0 ** np.round(np.log10(side * fraction)))


def image_geometry_for(measures, pixel_size: float, sigma: float, margin: float | None = None,
                       anchor: float | None = None) -> ImageGeometry:
    """Window covering all atoms (birth-persistence coordinates) plus ``margin`` (default 3σ)."""
    margin = 3.0 * sigma if margin is None else margin
    pts = [m.points for m in measures if len(m)]
    b = np.concatenate([p[:, 0] for p in pts]) if pts else np.zeros(1)
    life = np.concatenate([p[:, 1] - p[:, 0] for p in pts]) if pts else np.zeros(1)
    if anchor is not None:
        b = np.append(b, anchor)
        life = np.append(life, 0.0)
    return ImageGeometry(float(b.min() - margin), float(b.max() + margin),
                         float(life.min() - margin), float(life.max() + margin),
                         pixel_size, sigma)


def gaussian_l2_norm(sigma: float) -> float:
    """``||g_p^σ||_{L²(R²)} = 1 / (2 √π σ)``."""
    return 1.0 / (2.0 * np.sqrt(np.pi) * sigma)


def gaussian_l2_closed_form(p, q, sigma: float) -> float:
    """``||g_p^σ - g_q^σ||_{L²(R²)}`` for isotropic unit-mass Gaussians."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    dist2 = float(np.sum((np.asarray(p, dtype=float) - np.asarray(q, dtype=float)) ** 2))
    return float(np.sqrt(-np.expm1(-dist2 / (4.0 * sigma * sigma))) / (np.sqrt(2.0 * np.pi) * sigma))


# --------------------------------------------------------------------------
# files

def write_landscape(lam: Landscape, path) -> None:
    t = lam.t_grid
    lines = [f"{_fmt(t[0])},{_fmt(t[-1])},{len(t)}"]
    lines += [",".join(_fmt(x) for x in row) for row in lam.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_landscape(path) -> Landscape:
    rows = [r for r in Path(path).read_text(encoding="utf-8").splitlines() if r.strip()]
    t0, t1, n = rows[0].split(",")
    vals = np.array([[float(x) for x in r.split(",")] for r in rows[1:]]).reshape(-1, int(n))
    return Landscape(landscape_grid(float(t0), float(t1), int(n)), vals)


def write_image(img: PersistenceImage, path) -> None:
    g = img.geometry
    head = [g.birth_min, g.birth_max, g.pers_min, g.pers_max, g.pixel_size, g.sigma]
    lines = [",".join([*(_fmt(x) for x in head), str(img.weight)])]
    lines += [",".join(_fmt(x) for x in row) for row in img.pixels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_image(path) -> PersistenceImage:
    rows = [r for r in Path(path).read_text(encoding="utf-8").splitlines() if r.strip()]
    *head, weight = rows[0].split(",")
    geom = ImageGeometry(*(float(x) for x in head))
    pixels = np.array([[float(x) for x in r.split(",")] for r in rows[1:]]).reshape(geom.shape)
    return PersistenceImage(geom, ImageWeight.parse(weight), pixels)
