"""Seeded generators for the functional-data scenarios and the planar point processes.

All randomness flows through ``numpy.random.Generator`` (PCG64) built from a
``SeedSequence``; replicates get independent child streams via ``spawn``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .homology import PointCloud, SampledCurve

__all__ = [
    "FdaConfig",
    "PpConfig",
    "FDA_SCENARIOS",
    "PP_FAMILIES",
    "rng_for",
    "child_seeds",
    "fda_smooth",
    "fda_sample",
    "sample_csr",
    "sample_thomas",
    "sample_matern2",
    "sample_lattice",
    "sample_pp",
]


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def child_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent per-replicate streams split from one root seed."""
    return np.random.SeedSequence(seed).spawn(n)


# --------------------------------------------------------------------------
# functional data

@dataclass(frozen=True)
class FdaConfig:
    m: int = 40
    value_range: float = 50.0
    sigma: float = 10.0
    n_min: int = 200
    n_max: int = 800
    fixed_n: int | None = None
    fixed_prefix: tuple = ()
    replicates: int = 50
    reweight: str | None = None       # measure reweighting applied to spheres and images
    image_weight: str = "pers"

    def __post_init__(self):
        if self.m < 2 or len(self.fixed_prefix) > self.m:
            raise ValueError("need m >= 2 control points and a prefix no longer than m")
        if self.fixed_n is None and not (2 <= self.n_min <= self.n_max):
            raise ValueError("invalid sample-size range")
        if self.sigma < 0:
            raise ValueError("noise level must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fixed_prefix"] = list(self.fixed_prefix)
        return d


def _fda_scenarios():
    base = FdaConfig()
    return {
        "fda-i": base,
        "fda-ii": replace(base, reweight="pers2", image_weight="flat"),
        # step weight at the true noise scale; the scale is filled in from sigma
        "fda-iii": replace(base, reweight="arctan", image_weight="flat"),
        "fda-iv": replace(base, fixed_n=200, fixed_prefix=(-100.0, 100.0, -100.0, 100.0)),
    }


FDA_SCENARIOS = _fda_scenarios()


def fda_smooth(seed, cfg: FdaConfig = FdaConfig(), values=None) -> CubicSpline:
    """Natural cubic spline through ``m`` equispaced control values on [0, 1].

    Control values are ``Unif[-value_range, value_range]`` with ``cfg.fixed_prefix``
    overriding the first entries; pass ``values`` to bypass the draw.
    """
    knots = np.linspace(0.0, 1.0, cfg.m)
    if values is None:
        values = rng_for(seed).uniform(-cfg.value_range, cfg.value_range, cfg.m)
        values[: len(cfg.fixed_prefix)] = cfg.fixed_prefix
    values = np.asarray(values, dtype=float)
    if values.shape != (cfg.m,):
        raise ValueError("need one control value per knot")
    return CubicSpline(knots, values, bc_type="natural")


def fda_sample(f, n: int, sigma: float, seed) -> SampledCurve:
    """``n`` sorted uniform abscissae with values ``f(X) + N(0, (sigma/3)^2)``."""
    if n < 2:
        raise ValueError("need at least two samples")
    rng = rng_for(seed)
    x = np.sort(rng.uniform(0.0, 1.0, n))
    y = f(x) + rng.normal(0.0, sigma / 3.0, n) if sigma > 0 else f(x)
    return SampledCurve(x, np.asarray(y, dtype=float))


# --------------------------------------------------------------------------
# point processes

@dataclass(frozen=True)
class PpConfig:
    n: int = 200
    L: float = 1000.0
    sigma_mult: float = 0.9
    r_hc_mult: float = 0.5
    cand_mult: float = 3.0
    growth: float = 1.5
    rho: float = 0.75
    cap_mult: float = 7.0
    n_par: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.n < 1 or not self.L > 0:
            raise ValueError("need n >= 1 and L > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("jitter fraction must lie in [0, 1]")
        if self.lattice_k ** 2 < self.n:
            raise ValueError("lattice has fewer cells than points (k^2 < n)")
        if self.growth <= 1.0:
            raise ValueError("candidate growth factor must exceed 1")

    @property
    def s(self) -> float:
        return self.L / math.sqrt(self.n)

    @property
    def sigma(self) -> float:
        return self.sigma_mult * self.s

    @property
    def parents(self) -> int:
        return self.n_par if self.n_par is not None else math.ceil(math.sqrt(self.n))

    @property
    def lam_off(self) -> float:
        return self.n / self.parents

    @property
    def r_hc(self) -> float:
        return self.r_hc_mult * self.s

    @property
    def m_cand(self) -> float:
        return self.cand_mult * self.n

    @property
    def lattice_k(self) -> int:
        return self.k if self.k is not None else math.ceil(math.sqrt(self.n))

    @property
    def cap(self) -> float:
        return self.cap_mult * self.s

    def to_dict(self) -> dict:
        return asdict(self)


def sample_csr(cfg: PpConfig, seed) -> PointCloud:
    return PointCloud(rng_for(seed).uniform(0.0, cfg.L, (cfg.n, 2)))


def _inside(p, L):
    return np.all((p >= 0.0) & (p <= L), axis=1)


def sample_thomas(cfg: PpConfig, seed) -> PointCloud:
    """Parents once, then offspring batches around random parents until ``n`` points survive."""
    rng = rng_for(seed)
    parents = rng.uniform(0.0, cfg.L, (cfg.parents, 2))
    batches, total = [], 0
    while total < cfg.n:
        j = rng.integers(cfg.parents)
        k = rng.poisson(cfg.lam_off)
        cand = parents[j] + rng.normal(0.0, cfg.sigma, (k, 2))
        cand = cand[_inside(cand, cfg.L)]
        batches.append(cand)
        total += len(cand)
    X = np.concatenate(batches)
    if len(X) > cfg.n:
        X = X[np.sort(rng.choice(len(X), cfg.n, replace=False))]
    return PointCloud(X)


def _matern_thin(Y, marks, r):
    tree = cKDTree(Y)
    keep = np.ones(len(Y), dtype=bool)
    for i, nb in enumerate(tree.query_ball_point(Y, r)):
        if marks[nb].min() < marks[i]:
            keep[i] = False
    return keep


def sample_matern2(cfg: PpConfig, seed) -> PointCloud:
    """Mark thinning of Poisson candidates; grow the candidate mean until ``n`` survive."""
    rng = rng_for(seed)
    m = cfg.m_cand
    while True:
        M = rng.poisson(m)
        Y = rng.uniform(0.0, cfg.L, (M, 2))
        marks = rng.uniform(0.0, 1.0, M)
        kept = Y[_matern_thin(Y, marks, cfg.r_hc)] if M else Y
        if len(kept) >= cfg.n:
            return PointCloud(kept[np.sort(rng.choice(len(kept), cfg.n, replace=False))])
        m *= cfg.growth


def sample_lattice(cfg: PpConfig, seed) -> PointCloud:
    """One uniformly jittered point in each of ``n`` distinct cells of a k x k lattice."""
    rng = rng_for(seed)
    k = cfg.lattice_k
    h = cfg.L / k
    cells = rng.choice(k * k, cfg.n, replace=False)
    centres = np.column_stack([(cells % k + 0.5) * h, (cells // k + 0.5) * h])
    half = 0.5 * cfg.rho * h
    return PointCloud(centres + rng.uniform(-half, half, (cfg.n, 2)))


PP_FAMILIES = {
    "csr": sample_csr,
    "thomas": sample_thomas,
    "matern2": sample_matern2,
    "lattice": sample_lattice,
}


def sample_pp(family: str, cfg: PpConfig, seed) -> PointCloud:
    try:
        return PP_FAMILIES[family](cfg, seed)
    except KeyError:
        raise ValueError(f"unknown point-process family {family!r}") from None
