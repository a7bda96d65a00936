"""Partial optimal transport between persistence measures.

``pot1`` solves the partial 1-Wasserstein problem under the sup-norm ground
cost, where unmatched mass is sent to the diagonal at cost ``pers``.  It is
posed as a balanced transportation problem with one virtual diagonal node on
each side.  ``ot1_cross_augmented`` solves plain OT between the two
cross-augmented measures with diagonal atoms at their true locations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path

import numpy as np

from ._flow import min_cost_transport
from .measures import PersistenceMeasure, Region, _fmt, cross_augment, persistence, total_persistence
from .sphere import SphereGrid, sample_sphere, sup_diff

__all__ = [
    "DIAG",
    "TransportResult",
    "sup_cost_matrix",
    "pot1",
    "pot1_distance",
    "ot1_cross_augmented",
    "pot1_bruteforce",
    "sliced_wasserstein",
    "holder_diagnostic",
    "write_transport_result",
    "read_transport_result",
]

DIAG = "DIAG"


@dataclass(frozen=True)
class TransportResult:
    """Optimal cost and plan.

    ``plan`` rows are ``(src, dst, mass)`` where ``src``/``dst`` are atom
    indices or :data:`DIAG`.  For :func:`ot1_cross_augmented` indices refer to
    the atoms of the two cross-augmented measures.
    """

    cost: float
    plan: list = field(default_factory=list)

    def marginals(self, n_src: int, n_dst: int) -> tuple[np.ndarray, np.ndarray]:
        out_src, out_dst = np.zeros(n_src), np.zeros(n_dst)
        for i, j, mass in self.plan:
            if i != DIAG:
                out_src[i] += mass
            if j != DIAG:
                out_dst[j] += mass
        return out_src, out_dst


def sup_cost_matrix(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    q = np.asarray(q, dtype=float).reshape(-1, 2)
    return np.max(np.abs(p[:, None, :] - q[None, :, :]), axis=-1)


def _check_finite(*measures: PersistenceMeasure) -> None:
    for m in measures:
        if not np.all(np.isfinite(m.points)):
            raise ValueError("non-finite coordinates")


def pot1(mu: PersistenceMeasure, nu: PersistenceMeasure, _deletion_scale: float = 1.0) -> TransportResult:
    """Exact partial 1-Wasserstein transport with sup-norm ground cost.

    Nodes are the atoms of ``mu`` (supply ``w_i``), the atoms of ``nu``
    (demand ``w_j``) and a diagonal node with supply ``mass(nu)`` and demand
    ``mass(mu)``.  Deleting an atom costs its persistence and diagonal to
    diagonal transport is free.

    Examples
    --------
    >>> mu = PersistenceMeasure.from_pairs([(0, 2)])
    >>> nu = PersistenceMeasure.from_pairs([(0, 4)])
    >>> pot1(mu, nu).cost
    2.0

    ``_deletion_scale`` multiplies the diagonal cost; it exists only so the
    self-test can check that a corrupted cost constant is caught.
    """
    _check_finite(mu, nu)
    n, m = len(mu), len(nu)
    if n == 0 or m == 0:
        # only one admissible plan: delete everything
        plan = [(i, DIAG, float(w)) for i, w in enumerate(mu.weights)]
        plan += [(DIAG, j, float(w)) for j, w in enumerate(nu.weights)]
        return TransportResult(_deletion_scale * (total_persistence(mu) + total_persistence(nu)), plan)

    cost = np.zeros((n + 1, m + 1))
    cost[:n, :m] = sup_cost_matrix(mu.points, nu.points)
    cost[:n, m] = _deletion_scale * persistence(mu.points)
    cost[n, :m] = _deletion_scale * persistence(nu.points)
    supply = np.append(mu.weights, nu.mass)
    demand = np.append(nu.weights, mu.mass)
    flow = min_cost_transport(supply, demand, cost)

    plan = []
    for i, j in zip(*np.nonzero(flow)):
        if i == n and j == m:
            continue
        plan.append((DIAG if i == n else int(i), DIAG if j == m else int(j), float(flow[i, j])))
    return TransportResult(float(np.sum(flow * cost)), plan)


def pot1_distance(mu: PersistenceMeasure, nu: PersistenceMeasure) -> float:
    return pot1(mu, nu).cost


def ot1_cross_augmented(mu: PersistenceMeasure, nu: PersistenceMeasure) -> TransportResult:
    """Balanced 1-Wasserstein transport between ``mu ⊕ proj(nu)`` and ``nu ⊕ proj(mu)``.

    Diagonal atoms sit at their actual projected locations, so moving mass
    along the diagonal is charged.
    """
    _check_finite(mu, nu)
    src = cross_augment(mu, nu)
    dst = cross_augment(nu, mu)
    if len(src) == 0:
        return TransportResult(0.0, [])
    cost = sup_cost_matrix(src.points, dst.points)
    flow = min_cost_transport(src.weights, dst.weights, cost)
    plan = [(int(i), int(j), float(flow[i, j])) for i, j in zip(*np.nonzero(flow))]
    return TransportResult(float(np.sum(flow * cost)), plan)


def pot1_bruteforce(mu: PersistenceMeasure, nu: PersistenceMeasure, max_atoms: int = 4) -> float:
    """Minimum deletion-augmented cost over all partial matchings (oracle).

    Only for counting measures with at most ``max_atoms`` atoms each.
    """
    if len(mu) > max_atoms or len(nu) > max_atoms:
        raise ValueError(f"brute force limited to {max_atoms} atoms per measure")
    if not (mu.is_counting and nu.is_counting):
        raise ValueError("brute force requires counting measures")
    P, Q = [tuple(p) for p in mu.points], [tuple(q) for q in nu.points]
    pers_p = [0.5 * (y - x) for x, y in P]
    pers_q = [0.5 * (y - x) for x, y in Q]
    best = sum(pers_p) + sum(pers_q)
    for k in range(1, min(len(P), len(Q)) + 1):
        for src in itertools.combinations(range(len(P)), k):
            for dst in itertools.permutations(range(len(Q)), k):
                c = sum(max(abs(P[i][0] - Q[j][0]), abs(P[i][1] - Q[j][1])) for i, j in zip(src, dst))
                c += sum(pers_p[i] for i in range(len(P)) if i not in src)
                c += sum(pers_q[j] for j in range(len(Q)) if j not in dst)
                best = min(best, c)
    return float(best)


def _integer_multiplicities(weights: np.ndarray, max_denominator: int, max_total: int) -> tuple[np.ndarray, int]:
    fracs = [Fraction(float(w)).limit_denominator(max_denominator) for w in weights]
    for f, w in zip(fracs, weights):
        if abs(float(f) - w) > 1e-12 * max(1.0, abs(w)):
            raise ValueError(f"weight {w!r} is not a small-denominator rational; cannot expand")
    scale = lcm(*(f.denominator for f in fracs)) if fracs else 1
    counts = np.array([int(f * scale) for f in fracs], dtype=np.int64)
    if counts.sum() > max_total:
        raise ValueError("weight expansion would exceed the atom budget")
    return counts, scale


def sliced_wasserstein(mu: PersistenceMeasure, nu: PersistenceMeasure, n_dirs: int = 50,
                       seed: int | None = None, angles=None,
                       max_denominator: int = 1000, max_atoms: int = 200_000) -> float:
    """Sliced 1-Wasserstein distance between diagonal-augmented diagrams.

    ``mu ∪ proj(nu)`` and ``nu ∪ proj(mu)`` are projected onto lines at
    angles ``θ ∈ [-π/2, π/2)``; the 1-D distances (sorted matching) are
    averaged.  Angles are evenly spaced, ``θ_k = -π/2 + kπ/n_dirs``, unless
    ``seed`` is given (uniform random angles) or ``angles`` are passed.
    Weights are expanded into integer multiplicities over their common
    denominator; each copy carries mass ``1/scale``.
    """
    if angles is None:
        if n_dirs < 1:
            raise ValueError("n_dirs must be at least 1")
        if seed is None:
            angles = -np.pi / 2 + np.pi * np.arange(n_dirs) / n_dirs
        else:
            angles = np.random.default_rng(seed).uniform(-np.pi / 2, np.pi / 2, n_dirs)
    angles = np.atleast_1d(np.asarray(angles, dtype=float))

    weights = np.concatenate([mu.weights, nu.weights])
    counts, scale = _integer_multiplicities(weights, max_denominator, max_atoms)
    cm, cn = counts[: len(mu)], counts[len(mu):]
    proj_mu = np.repeat(0.5 * (mu.points.sum(axis=1)), cm)
    proj_nu = np.repeat(0.5 * (nu.points.sum(axis=1)), cn)
    a = np.vstack([np.repeat(mu.points, cm, axis=0), np.column_stack([proj_nu, proj_nu])])
    b = np.vstack([np.repeat(nu.points, cn, axis=0), np.column_stack([proj_mu, proj_mu])])
    if len(a) == 0:
        return 0.0
    lines = np.stack([np.cos(angles), np.sin(angles)])
    pa = np.sort(a @ lines, axis=0)
    pb = np.sort(b @ lines, axis=0)
    return float(np.mean(np.sum(np.abs(pa - pb), axis=0)) / scale)


def holder_diagnostic(pairs, band: Region, grid: SphereGrid | None = None) -> list[tuple[float, float, float]]:
    """Tabulate ``(sup_diff, pot1, pers(mu) + pers(nu))`` for pairs inside ``band``."""
    grid = grid or SphereGrid()
    rows = []
    for mu, nu in pairs:
        for m in (mu, nu):
            if not np.all(band.contains(m.points)):
                raise ValueError("atom outside the declared band")
        eps = sup_diff(sample_sphere(mu, grid), sample_sphere(nu, grid))
        rows.append((eps, pot1(mu, nu).cost, total_persistence(mu) + total_persistence(nu)))
    return rows


def write_transport_result(res: TransportResult, path) -> None:
    lines = [f"cost,{_fmt(res.cost)}"]
    lines += [f"{i},{j},{_fmt(mass)}" for i, j, mass in res.plan]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_transport_result(path) -> TransportResult:
    rows = [r for r in Path(path).read_text(encoding="utf-8").splitlines() if r.strip()]
    tag, value = rows[0].split(",")
    if tag != "cost":
        raise ValueError("transport file must start with a cost row")
    plan = []
    for r in rows[1:]:
        i, j, mass = r.split(",")
        plan.append((DIAG if i == DIAG else int(i), DIAG if j == DIAG else int(j), float(mass)))
    return TransportResult(float(value), plan)
