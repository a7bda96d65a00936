"""Curve data for the one-point drift experiments.

Each function returns an ordered mapping ``column -> array`` with ``k`` as
the first column; the CLI writes it as CSV.
"""

from __future__ import annotations

import numpy as np

from .baselines import (
    ImageGeometry,
    gaussian_l2_closed_form,
    image_l2,
    landscape,
    landscape_l2,
    persistence_image,
)
from .measures import PersistenceMeasure, total_persistence
from .sphere import SphereFunction, SphereGrid, l2_diff, sample_sphere, sup_diff
from .transport import pot1

__all__ = ["FIGURES", "decay_curve", "deletion_curve", "pl_growth_curve", "pi_saturation_curve", "linear_fit"]

P0 = (0.0, 1.0)
H = 1.0 / np.sqrt(2.0)


def _atom(p) -> PersistenceMeasure:
    return PersistenceMeasure.from_pairs([p])


def decay_bound(k, p=P0, h=H):
    """``2h(1 + √2 P) / k``; meaningful for ``k >= |d| + 2h``."""
    P = 0.5 * (p[1] - p[0])
    return 2.0 * h * (1.0 + np.sqrt(2.0) * P) / np.asarray(k, dtype=float)


def decay_curve(ks=range(0, 201), grid: SphereGrid | None = None, p=P0, h=H) -> dict:
    """``mu_k = δ_{p + (k,k)}`` against ``nu_k = δ_{p + (k+h, k+h)}``."""
    grid = grid or SphereGrid()
    ks = np.asarray(list(ks), dtype=float)
    sup, l2, ref = [], [], []
    for k in ks:
        mu = _atom((p[0] + k, p[1] + k))
        nu = _atom((p[0] + k + h, p[1] + k + h))
        f, g = sample_sphere(mu, grid), sample_sphere(nu, grid)
        sup.append(sup_diff(f, g))
        l2.append(l2_diff(f, g))
        ref.append(pot1(mu, nu).cost)
    with np.errstate(divide="ignore"):
        bound = np.where(ks > 0, decay_bound(np.maximum(ks, 1e-300), p, h), np.inf)
    return {"k": ks, "sup_diff": np.array(sup), "l2_diff": np.array(l2), "pot1": np.array(ref), "bound": bound}


def deletion_curve(ks=range(0, 201), grid: SphereGrid | None = None, p=P0) -> dict:
    """``mu_k = δ_{p + (k,k)}`` against the null measure."""
    grid = grid or SphereGrid()
    ks = np.asarray(list(ks), dtype=float)
    zero = SphereFunction.zeros(grid)
    sup, l2, ref = [], [], []
    for k in ks:
        mu = _atom((p[0] + k, p[1] + k))
        f = sample_sphere(mu, grid)
        sup.append(sup_diff(f, zero))
        l2.append(l2_diff(f, zero))
        ref.append(pot1(mu, PersistenceMeasure.empty()).cost)
    reference = np.full(len(ks), np.sqrt(2.0) * total_persistence(_atom(p)))
    return {"k": ks, "sup_diff": np.array(sup), "l2_diff": np.array(l2), "pot1": np.array(ref),
            "sqrt2_pers": reference}


def pl_growth_curve(ks=range(0, 11), p=(0.0, 2.0), q=(1.0, 3.0), n_t: int = 20001) -> dict:
    """Landscape L² distance between ``{p + k u}`` and ``{q + k u}``, ``u = (-1, 1)/√2``.

    The grid spans both atoms at the largest ``k`` so every tent is resolved.
    """
    ks = np.asarray(list(ks), dtype=float)
    u = np.array([-1.0, 1.0]) / np.sqrt(2.0)
    kmax = ks.max()
    lo = min(p[0], q[0]) + kmax * u[0] - 1.0
    hi = max(p[1], q[1]) + kmax * u[1] + 1.0
    t = np.linspace(lo, hi, n_t)
    dist, ref = [], []
    for k in ks:
        mu = _atom(tuple(np.asarray(p) + k * u))
        nu = _atom(tuple(np.asarray(q) + k * u))
        dist.append(landscape_l2(landscape(mu, t), landscape(nu, t)))
        ref.append(pot1(mu, nu).cost)
    dist = np.array(dist)
    return {"k": ks, "landscape_l2": dist, "landscape_l2_sq": dist ** 2, "pot1": np.array(ref)}


def pi_saturation_curve(ks=None, sigma: float = 1.0, pixel_size: float = 0.05, base=(0.0, 5.0)) -> dict:
    """Image distance between a fixed Gaussian and one drifting along ``(1, 1)/√2``.

    ``base`` and the drift are in birth-persistence coordinates.  The window
    keeps both atoms at least ``6σ`` from every edge.
    """
    if ks is None:
        ks = np.arange(0.0, 30.0 * sigma + 1e-9, 0.5 * sigma)
    ks = np.asarray(ks, dtype=float)
    step = ks.max() / np.sqrt(2.0)
    margin = 6.0 * sigma
    geom = ImageGeometry(base[0] - margin, base[0] + step + margin,
                         base[1] - margin, base[1] + step + margin, pixel_size, sigma)
    b0, l0 = base
    fixed = persistence_image(_atom((b0, b0 + l0)), geom)
    out, closed = [], []
    for k in ks:
        b, life = b0 + k / np.sqrt(2.0), l0 + k / np.sqrt(2.0)
        img = persistence_image(_atom((b, b + life)), geom)
        out.append(image_l2(fixed, img))
        closed.append(gaussian_l2_closed_form((b0, l0), (b, life), sigma))
    ceiling = np.full(len(ks), 1.0 / (np.sqrt(2.0 * np.pi) * sigma))
    return {"k": ks, "image_l2": np.array(out), "closed_form": np.array(closed), "ceiling": ceiling}


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line ``y = a + b x``; returns ``(a, b, R²)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), float(r2)


FIGURES = {
    "decay": decay_curve,
    "deletion": deletion_curve,
    "pl-growth": pl_growth_curve,
    "pi-saturation": pi_saturation_curve,
}
