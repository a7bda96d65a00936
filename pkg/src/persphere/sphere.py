"""Persistence spheres: the signed lift-zonoid transform of augmented measures on S².

For a direction ``v = (v0, v1, v2)`` write ``s = v1 + v2`` and ``t = v2 - v1``.
An atom ``p`` with diagonal coordinate ``d`` and persistence ``pers``
contributes ``relu(v0 + s d + t pers) - relu(v0 + s d)`` to ``S(mu)(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .measures import PersistenceMeasure, Region, _fmt, split, total_persistence

__all__ = [
    "V_PERS",
    "SphereGrid",
    "SphereFunction",
    "GridMismatchError",
    "as_direction",
    "st_coords",
    "integrand_phi",
    "eval_sphere",
    "sample_sphere",
    "sup_diff",
    "l2_diff",
    "v_pers",
    "v_delta",
    "t_delta",
    "low_pers_bound",
    "far_direction",
    "reflect",
    "truncation_gap",
    "lift_zonoid_support",
    "drift_limit",
    "sphere_lipschitz",
    "linf_from_l2",
    "read_sphere_function",
    "write_sphere_function",
]

_SQRT1_2 = float(np.sqrt(0.5))
V_PERS = (0.0, -_SQRT1_2, _SQRT1_2)


def as_direction(v, tol: float = 1e-12) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError("directions are 3-vectors")
    if np.any(np.abs(np.einsum("...i,...i->...", v, v) - 1.0) > tol):
        raise ValueError("direction is not a unit vector")
    return v


def st_coords(v):
    """``(s, t) = (v1 + v2, v2 - v1)``; works on a single direction or a stack."""
    v = np.asarray(v, dtype=float)
    return v[..., 1] + v[..., 2], v[..., 2] - v[..., 1]


def _relu(a):
    return np.maximum(a, 0.0)


def integrand_phi(v, p):
    """Pointwise integrand ``phi_v(p)``; broadcasts over directions (rows) and points (columns)."""
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    s, t = st_coords(v)
    d = 0.5 * (p[..., 0] + p[..., 1])
    pers = 0.5 * (p[..., 1] - p[..., 0])
    if v.ndim > 1 and p.ndim > 1:
        v0, s, t = v[:, 0, None], s[:, None], t[:, None]
    else:
        v0 = v[..., 0]
    base = v0 + s * d
    out = _relu(base + t * pers) - _relu(base)
    return float(out) if np.ndim(out) == 0 else out


def _transform(points: np.ndarray, weights: np.ndarray, nodes: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.zeros(len(nodes))
    if len(weights) == 0:
        return out
    d = 0.5 * (points[:, 0] + points[:, 1])
    pers = 0.5 * (points[:, 1] - points[:, 0])
    s, t = st_coords(nodes)
    for lo in range(0, len(nodes), chunk):
        hi = lo + chunk
        base = nodes[lo:hi, 0, None] + s[lo:hi, None] * d[None, :]
        phi = _relu(base + t[lo:hi, None] * pers[None, :]) - _relu(base)
        out[lo:hi] = phi @ weights
    return out


def eval_sphere(mu: PersistenceMeasure, v):
    """Evaluate ``S(mu)`` at one direction (returns a float) or a stack of directions."""
    v = np.asarray(v, dtype=float)
    vals = _transform(mu.points, mu.weights, v.reshape(-1, 3))
    return float(vals[0]) if v.ndim == 1 else vals.reshape(v.shape[:-1])


@dataclass(frozen=True)
class SphereGrid:
    """Cell-centred polar grid on S² plus zero-weight extra nodes.

    Nodes are ``(cos θ, sin θ cos φ, sin θ sin φ)`` with colatitude
    ``θ_i = (i + 1/2) π / n_lat`` measured from the ``v0`` axis and
    ``φ_j = 2π j / n_lon``.  Quadrature weights are
    ``sin θ_i (π / n_lat)(2π / n_lon)``.  ``extra`` directions are appended
    after the regular nodes with zero weight so that sup-norm identities
    attained at analytic directions are visible on the grid.
    """

    n_lat: int = 100
    n_lon: int = 200
    extra: tuple = (V_PERS,)

    def __post_init__(self):
        if self.n_lat < 1 or self.n_lon < 1:
            raise ValueError("grid dimensions must be positive")
        extra = tuple(tuple(float(c) for c in as_direction(e)) for e in self.extra)
        object.__setattr__(self, "extra", extra)

    @property
    def n_regular(self) -> int:
        return self.n_lat * self.n_lon

    def __len__(self) -> int:
        return self.n_regular + len(self.extra)

    @cached_property
    def theta(self) -> np.ndarray:
        return (np.arange(self.n_lat) + 0.5) * np.pi / self.n_lat

    @cached_property
    def phi(self) -> np.ndarray:
        return np.arange(self.n_lon) * 2.0 * np.pi / self.n_lon

    @cached_property
    def nodes(self) -> np.ndarray:
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        reg = np.stack([np.cos(th), np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)], axis=-1)
        nodes = np.vstack([reg.reshape(-1, 3), np.asarray(self.extra, dtype=float).reshape(-1, 3)])
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def weights(self) -> np.ndarray:
        cell = (np.pi / self.n_lat) * (2.0 * np.pi / self.n_lon)
        w = np.repeat(np.sin(self.theta) * cell, self.n_lon)
        w = np.concatenate([w, np.zeros(len(self.extra))])
        w.setflags(write=False)
        return w

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def parse(cls, text: str, extra=(V_PERS,)) -> "SphereGrid":
        """Build from ``"LATxLON"``."""
        lat, _, lon = text.lower().partition("x")
        return cls(int(lat), int(lon), extra)


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SphereFunction:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if len(vals) != len(self.grid):
            raise ValueError("value count does not match the grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sphere function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def matrix(self) -> np.ndarray:
        return self.values[: self.grid.n_regular].reshape(self.grid.n_lat, self.grid.n_lon)

    @property
    def extra_values(self) -> np.ndarray:
        return self.values[self.grid.n_regular:]

    def __add__(self, other: "SphereFunction") -> "SphereFunction":
        _check_grid(self, other)
        return SphereFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "SphereFunction") -> "SphereFunction":
        _check_grid(self, other)
        return SphereFunction(self.grid, self.values - other.values)

    @classmethod
    def zeros(cls, grid: SphereGrid) -> "SphereFunction":
        return cls(grid, np.zeros(len(grid)))


def _check_grid(f: SphereFunction, g: SphereFunction) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def sample_sphere(mu: PersistenceMeasure, grid: SphereGrid) -> SphereFunction:
    return SphereFunction(grid, _transform(mu.points, mu.weights, grid.nodes))


def sup_diff(f: SphereFunction, g: SphereFunction) -> float:
    """Grid maximum of ``|f - g|``, a lower bound for the true sup norm."""
    _check_grid(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def l2_diff(f: SphereFunction, g: SphereFunction) -> float:
    """Quadrature approximation of ``||f - g||_{L²(S²)}``."""
    _check_grid(f, g)
    diff = f.values - g.values
    return float(np.sqrt(np.sum(f.grid.weights * diff * diff)))


def v_pers() -> np.ndarray:
    """Direction reading off total persistence: ``S(mu)(v_pers) = √2 pers(mu)``."""
    return np.array(V_PERS)


def t_delta(delta: float) -> float:
    return float(np.sqrt(2.0 / (1.0 + 2.0 * delta * delta)))


def v_delta(delta: float) -> np.ndarray:
    """Direction with ``S(mu)(v_delta) = t_delta * sum w (pers - delta)_+``."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return v_pers()
    td = t_delta(delta)
    return np.array([-delta * td, -0.5 * td, 0.5 * td])


def low_pers_bound(mu: PersistenceMeasure, delta: float) -> float:
    """Combination of three sphere values equal to ``sum w g(pers)``, where
    ``g(r) = r - 2 (r - delta)_+ + (r - 2 delta)_+``.

    ``g`` is a tent that agrees with ``r`` below ``delta`` and vanishes above
    ``2 delta``, so the result dominates the persistence carried by atoms
    with ``pers < delta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    dirs = np.stack([v_pers(), v_delta(delta), v_delta(2 * delta)])
    s0, s1, s2 = eval_sphere(mu, dirs)
    return float(s0 / np.sqrt(2.0) - 2.0 / t_delta(delta) * s1 + s2 / t_delta(2 * delta))


def far_direction(r0: float, m0: float) -> np.ndarray:
    """Direction vanishing on ``{|d| <= r0, pers <= m0}`` with ``s, t > 0``."""
    if not (r0 > 0 and m0 > 0):
        raise ValueError("r0 and m0 must be positive")
    s0, t0 = 1.0 / (2.0 * r0), 1.0 / (2.0 * m0)
    v = np.array([-1.0, 0.5 * (s0 - t0), 0.5 * (s0 + t0)])
    return v / np.linalg.norm(v)


def reflect(v) -> np.ndarray:
    """``(v0, v1, v2) -> (v0, -v2, -v1)``: flips ``s``, keeps ``t``."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 0], -v[..., 2], -v[..., 1]], axis=-1)


def truncation_gap(mu: PersistenceMeasure, region: Region, grid: SphereGrid) -> tuple[float, float]:
    """Grid sup distance between ``S(mu)`` and ``S(mu|_A)``, and the bound
    ``√2 * pers(mu|_{A^c})``."""
    inside, outside = split(mu, region)
    # S(mu) - S(mu|_A) = S(mu|_{A^c}) by linearity
    gap = float(np.max(np.abs(sample_sphere(outside, grid).values)))
    return gap, float(np.sqrt(2.0) * total_persistence(outside))


def lift_zonoid_support(mu: PersistenceMeasure, v):
    """Support function of the (positive) lift zonoid, ``sum w relu(<v, (1, p)>)``."""
    v = np.asarray(v, dtype=float)
    vv = v.reshape(-1, 3)
    inner = vv[:, :1] + vv[:, 1:2] * mu.points[:, 0] + vv[:, 2:3] * mu.points[:, 1]
    vals = _relu(inner) @ mu.weights if len(mu) else np.zeros(len(vv))
    return float(vals[0]) if v.ndim == 1 else vals.reshape(v.shape[:-1])


def drift_limit(mu: PersistenceMeasure, v) -> np.ndarray | float:
    """Pointwise limit ``1{s > 0} t pers(mu)`` under drift to ``d -> +inf``."""
    s, t = st_coords(v)
    out = np.where(s > 0, t * total_persistence(mu), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def sphere_lipschitz(mu: PersistenceMeasure) -> float:
    """Lipschitz constant of ``S(mu)`` on S²: ``2 sum w ||(1, p)||_2``."""
    if len(mu) == 0:
        return 0.0
    norms = np.sqrt(1.0 + mu.points[:, 0] ** 2 + mu.points[:, 1] ** 2)
    return float(2.0 * np.dot(mu.weights, norms))


def linf_from_l2(l2: float, lipschitz: float) -> float:
    """Upper bound on the sup norm of an ``L``-Lipschitz function on S² from its L² norm."""
    return 2.0 * max(np.pi ** -0.25 * np.sqrt(lipschitz * l2), np.pi ** -0.5 * l2)


def write_sphere_function(f: SphereFunction, path) -> None:
    lines = [f"{f.grid.n_lat},{f.grid.n_lon}"]
    lines += [",".join(_fmt(x) for x in row) for row in f.matrix]
    for v, val in zip(f.grid.extra, f.extra_values):
        lines.append(",".join(["extra", *(_fmt(c) for c in v), _fmt(val)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sphere_function(path) -> SphereFunction:
    rows = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    n_lat, n_lon = (int(x) for x in rows[0].split(","))
    body = [[float(x) for x in r.split(",")] for r in rows[1 : 1 + n_lat]]
    if len(body) != n_lat or any(len(r) != n_lon for r in body):
        raise ValueError("sphere function file does not match its header")
    extra, extra_vals = [], []
    for r in rows[1 + n_lat:]:
        tag, *nums = r.split(",")
        if tag != "extra" or len(nums) != 4:
            raise ValueError(f"unexpected trailing row {r!r}")
        nums = [float(x) for x in nums]
        extra.append(tuple(nums[:3]))
        extra_vals.append(nums[3])
    grid = SphereGrid(n_lat, n_lon, tuple(extra))
    return SphereFunction(grid, np.concatenate([np.asarray(body).reshape(-1), extra_vals]))
