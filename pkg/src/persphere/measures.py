"""Finitely supported persistence measures and diagonal geometry.

A persistence measure is a finite list of positively weighted atoms
``(birth, death)`` strictly above the diagonal ``y = x``.  Atoms with equal
coordinates are kept as separate entries; nothing here merges them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = [
    "PersistenceMeasure",
    "SignedAtomSet",
    "Region",
    "PersPow",
    "ArctanStep",
    "DiagramFormatError",
    "diag_coord",
    "persistence",
    "diag_project",
    "total_persistence",
    "augment",
    "cross_augment",
    "restrict",
    "split",
    "reweight",
    "parse_weight_scheme",
    "parse_diagram",
    "serialize_diagram",
    "read_diagram",
    "write_diagram",
]

ATOL = 1e-9


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    return arr.reshape(-1, 2)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PersistenceMeasure:
    """Positively weighted atoms in ``X = {(x, y) : x < y}``.

    Parameters
    ----------
    points : array-like, shape (n, 2)
        Birth/death pairs.
    weights : array-like, shape (n,), optional
        Positive weights; defaults to ones (a counting measure).
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = _as_points(self.points)
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise ValueError(f"got {len(pts)} points but {len(w)} weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("persistence measure has non-finite coordinates or weights")
        if np.any(pts[:, 1] <= pts[:, 0]):
            raise ValueError("persistence measure atoms must satisfy death > birth")
        if np.any(w <= 0):
            raise ValueError("persistence measure weights must be positive")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def empty(cls) -> "PersistenceMeasure":
        return cls(np.zeros((0, 2)))

    @classmethod
    def from_pairs(cls, pairs: Iterable, weights=None) -> "PersistenceMeasure":
        return cls(_as_points(list(pairs)), weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __add__(self, other: "PersistenceMeasure") -> "PersistenceMeasure":
        return PersistenceMeasure(
            np.vstack([self.points, other.points]),
            np.concatenate([self.weights, other.weights]),
        )

    def __mul__(self, c: float) -> "PersistenceMeasure":
        if c <= 0:
            raise ValueError("measures can only be scaled by positive factors")
        return PersistenceMeasure(self.points, self.weights * c)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"PersistenceMeasure(n={len(self)}, mass={self.mass:g})"

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def is_counting(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def translate(self, shift) -> "PersistenceMeasure":
        return PersistenceMeasure(self.points + np.asarray(shift, dtype=float), self.weights)

    def same_atoms(self, other: "PersistenceMeasure", atol: float = ATOL) -> bool:
        """Multiset equality of weighted atoms, up to ``atol``."""
        if len(self) != len(other):
            return False
        a = np.column_stack([self.points, self.weights])
        b = np.column_stack([other.points, other.weights])
        a = a[np.lexsort(a.T[::-1])]
        b = b[np.lexsort(b.T[::-1])]
        return bool(np.allclose(a, b, rtol=0.0, atol=atol))


@dataclass(frozen=True, eq=False)
class SignedAtomSet:
    """Real-weighted atoms on the closed half-plane ``X ∪ Δ``.

    Holds augmentations (signed) and cross-augmentations (positive, with
    atoms on the diagonal).
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.points)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise ValueError(f"got {len(pts)} points but {len(w)} weights")
        if np.any(pts[:, 1] < pts[:, 0]):
            raise ValueError("atoms below the diagonal are not allowed")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    def __len__(self) -> int:
        return len(self.weights)

    def __add__(self, other: "SignedAtomSet") -> "SignedAtomSet":
        return SignedAtomSet(np.vstack([self.points, other.points]),
                             np.concatenate([self.weights, other.weights]))

    def __neg__(self) -> "SignedAtomSet":
        return SignedAtomSet(self.points, -self.weights)

    def __sub__(self, other: "SignedAtomSet") -> "SignedAtomSet":
        return self + (-other)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def mass(self) -> float:
        return float(np.abs(self.weights).sum())

    def canonical(self, atol: float = ATOL) -> "SignedAtomSet":
        """Merge coincident atoms, drop cancelled ones and sort."""
        if len(self) == 0:
            return self
        keys = np.round(self.points / atol).astype(np.int64)
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        w = np.bincount(inverse, weights=self.weights)
        pts = np.zeros((len(w), 2))
        pts[inverse] = self.points
        keep = np.abs(w) > atol
        pts, w = pts[keep], w[keep]
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        return SignedAtomSet(pts[order], w[order])

    def equals(self, other: "SignedAtomSet", atol: float = ATOL) -> bool:
        a, b = self.canonical(atol), other.canonical(atol)
        return (len(a) == len(b)
                and np.allclose(a.points, b.points, atol=atol, rtol=0)
                and np.allclose(a.weights, b.weights, atol=atol, rtol=0))


def diag_coord(p) -> np.ndarray | float:
    """Position along the diagonal, ``(x + y) / 2``."""
    p = np.asarray(p, dtype=float)
    out = 0.5 * (p[..., 0] + p[..., 1])
    return float(out) if out.ndim == 0 else out


def persistence(p) -> np.ndarray | float:
    """Half lifetime ``(y - x) / 2``, the sup-norm distance to the diagonal."""
    p = np.asarray(p, dtype=float)
    if np.any(p[..., 1] < p[..., 0]):
        raise ValueError("persistence is undefined below the diagonal (y < x)")
    out = 0.5 * (p[..., 1] - p[..., 0])
    return float(out) if out.ndim == 0 else out


def diag_project(p) -> np.ndarray:
    """Sup-norm projection onto the diagonal: ``(d(p), d(p))``."""
    p = np.asarray(p, dtype=float)
    d = 0.5 * (p[..., 0] + p[..., 1])
    return np.stack([d, d], axis=-1)


def total_persistence(mu: PersistenceMeasure) -> float:
    if len(mu) == 0:
        return 0.0
    return float(np.dot(mu.weights, persistence(mu.points)))


def augment(mu: PersistenceMeasure) -> SignedAtomSet:
    """``mu - (proj_diag)_# mu``: every atom paired with a negative copy on the diagonal."""
    return SignedAtomSet(np.vstack([mu.points, diag_project(mu.points).reshape(-1, 2)]),
                         np.concatenate([mu.weights, -mu.weights]))


def cross_augment(mu: PersistenceMeasure, nu: PersistenceMeasure) -> SignedAtomSet:
    """``mu + (proj_diag)_# nu``, a positive measure on the closed half-plane."""
    return SignedAtomSet(np.vstack([mu.points, diag_project(nu.points).reshape(-1, 2)]),
                         np.concatenate([mu.weights, nu.weights]))


@dataclass(frozen=True)
class Region:
    """Band of the half-plane described by inclusive bounds.

    Every bound is optional; a point belongs to the region when it satisfies
    all bounds that are set.  ``abs_d_max`` bounds ``|d(p)|`` and
    ``norm_max`` bounds the Euclidean norm ``||p||_2``.
    """

    d_min: float | None = None
    d_max: float | None = None
    abs_d_max: float | None = None
    pers_min: float | None = None
    pers_max: float | None = None
    norm_max: float | None = None
    empty: bool = False

    @classmethod
    def everything(cls) -> "Region":
        return cls()

    @classmethod
    def nothing(cls) -> "Region":
        return cls(empty=True)

    def contains(self, points) -> np.ndarray:
        pts = _as_points(points)
        if self.empty:
            return np.zeros(len(pts), dtype=bool)
        d = 0.5 * (pts[:, 0] + pts[:, 1])
        pers = 0.5 * (pts[:, 1] - pts[:, 0])
        mask = np.ones(len(pts), dtype=bool)
        if self.d_min is not None:
            mask &= d >= self.d_min
        if self.d_max is not None:
            mask &= d <= self.d_max
        if self.abs_d_max is not None:
            mask &= np.abs(d) <= self.abs_d_max
        if self.pers_min is not None:
            mask &= pers >= self.pers_min
        if self.pers_max is not None:
            mask &= pers <= self.pers_max
        if self.norm_max is not None:
            mask &= np.hypot(pts[:, 0], pts[:, 1]) <= self.norm_max
        return mask

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None and v is not False}

    @classmethod
    def from_dict(cls, data: dict) -> "Region":
        return cls(**data)


def _subset(mu: PersistenceMeasure, mask: np.ndarray) -> PersistenceMeasure:
    return PersistenceMeasure(mu.points[mask], mu.weights[mask])


def restrict(mu: PersistenceMeasure, region: Region) -> PersistenceMeasure:
    """Keep exactly the atoms lying in ``region``."""
    return _subset(mu, region.contains(mu.points))


def split(mu: PersistenceMeasure, region: Region) -> tuple[PersistenceMeasure, PersistenceMeasure]:
    """Return ``(mu|_A, mu|_{A^c})``."""
    mask = region.contains(mu.points)
    return _subset(mu, mask), _subset(mu, ~mask)


@dataclass(frozen=True)
class PersPow:
    """Weight ``pers(p) ** n`` with ``pers = (y - x) / 2``."""

    n: float = 2.0

    def __call__(self, points) -> np.ndarray:
        return persistence(_as_points(points)) ** self.n


@dataclass(frozen=True)
class ArctanStep:
    """Weight ``(2 / pi) * arctan((y - x) / scale)``; zero on the diagonal, saturating at 1."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("arctan step scale must be positive")

    def __call__(self, points) -> np.ndarray:
        pts = _as_points(points)
        return (2.0 / np.pi) * np.arctan((pts[:, 1] - pts[:, 0]) / self.scale)


def parse_weight_scheme(text: str):
    """Parse ``pers2``, ``pers_pow:3`` or ``arctan:SCALE``."""
    text = text.strip()
    if text.startswith("arctan"):
        _, _, scale = text.partition(":")
        return ArctanStep(float(scale) if scale else 1.0)
    if text.startswith("pers_pow:"):
        return PersPow(float(text.split(":", 1)[1]))
    if text.startswith("pers"):
        tail = text[4:]
        return PersPow(float(tail) if tail else 1.0)
    raise ValueError(f"unknown weight scheme {text!r}")


def reweight(mu: PersistenceMeasure, scheme) -> PersistenceMeasure:
    """Multiply every weight by ``scheme(point)``; atoms whose weight becomes 0 are dropped."""
    if isinstance(scheme, str):
        scheme = parse_weight_scheme(scheme)
    w = mu.weights * scheme(mu.points)
    keep = w > 0
    return PersistenceMeasure(mu.points[keep], w[keep])


class DiagramFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} at line {line}")
        self.line = line


def parse_diagram(text: str) -> PersistenceMeasure:
    """Parse ``birth,death[,weight]`` lines; ``#`` lines and blank lines are skipped."""
    pts, ws = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) not in (2, 3):
            raise DiagramFormatError("expected 2 or 3 comma-separated values", lineno)
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise DiagramFormatError("malformed number", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise DiagramFormatError("non-finite value", lineno)
        x, y = vals[0], vals[1]
        w = vals[2] if len(vals) == 3 else 1.0
        if y <= x:
            raise DiagramFormatError("death ≤ birth", lineno)
        if w <= 0:
            raise DiagramFormatError("weight ≤ 0", lineno)
        pts.append((x, y))
        ws.append(w)
    return PersistenceMeasure(_as_points(pts), np.array(ws))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_diagram(mu: PersistenceMeasure) -> str:
    counting = mu.is_counting
    lines = []
    for (x, y), w in zip(mu.points, mu.weights):
        row = [_fmt(x), _fmt(y)] if counting else [_fmt(x), _fmt(y), _fmt(w)]
        lines.append(",".join(row))
    return "\n".join(lines) + ("\n" if lines else "")


def read_diagram(path) -> PersistenceMeasure:
    return parse_diagram(Path(path).read_text(encoding="utf-8"))


def write_diagram(mu: PersistenceMeasure, path) -> None:
    Path(path).write_text(serialize_diagram(mu), encoding="utf-8")
