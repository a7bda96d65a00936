"""Fast invariant suite behind ``persphere selftest``.

Every check draws from a fixed seed and returns ``(passed, detail)``.  With
``mutate=True`` the partial transport solver runs with halved deletion
costs, which several checks must catch.
"""

from __future__ import annotations

import numpy as np

from .figures import decay_curve
from .homology import PointCloud, SampledCurve, rips_pd, rips_pd_bruteforce, sublevel_pd0, sublevel_pd0_sweep
from .measures import PersistenceMeasure, Region, total_persistence
from .sphere import (
    SphereFunction,
    SphereGrid,
    drift_limit,
    eval_sphere,
    l2_diff,
    low_pers_bound,
    sample_sphere,
    st_coords,
    sup_diff,
    t_delta,
    truncation_gap,
    v_delta,
    v_pers,
)
from .transport import ot1_cross_augmented, pot1, pot1_bruteforce

__all__ = ["random_measure", "run_selftest", "CHECKS"]

GRID = SphereGrid(40, 80)


def random_measure(rng, n_max=10, lo=-10.0, hi=10.0, weighted=False, n_min=1) -> PersistenceMeasure:
    n = int(rng.integers(n_min, n_max + 1))
    if n == 0:
        return PersistenceMeasure.empty()
    a = rng.uniform(lo, hi, (n, 2))
    x, y = a.min(axis=1), a.max(axis=1)
    y = np.where(y > x, y, x + 1e-3)
    w = rng.uniform(0.2, 3.0, n) if weighted else None
    return PersistenceMeasure(np.column_stack([x, y]), w)


def _pairs(seed, count, **kw):
    rng = np.random.default_rng(seed)
    return [(random_measure(rng, **kw), random_measure(rng, **kw)) for _ in range(count)]


def check_oracle(pot):
    bad = [abs(pot(m, n) - pot1_bruteforce(m, n)) for m, n in _pairs(1, 60, n_max=4)]
    return max(bad) <= 1e-9, f"max |pot1 - brute force| = {max(bad):.3g}"


def check_null(pot):
    errs = [abs(pot(m, PersistenceMeasure.empty()) - total_persistence(m)) for m, _ in _pairs(2, 30, weighted=True)]
    return max(errs) == 0.0, f"max |pot1(mu, 0) - pers(mu)| = {max(errs):.3g}"


def check_stability(pot):
    worst = -np.inf
    for m, n in _pairs(3, 40):
        gap = sup_diff(sample_sphere(m, GRID), sample_sphere(n, GRID)) - 2 * np.sqrt(2) * pot(m, n)
        worst = max(worst, gap)
    return worst <= 1e-7, f"max(sup - 2√2 pot1) = {worst:.3g}"


def check_sandwich_lower(pot):
    worst = max(pot(m, n) - ot1_cross_augmented(m, n).cost for m, n in _pairs(4, 40, weighted=True))
    return worst <= 1e-7, f"max(pot1 - ot1) = {worst:.3g}"


def check_sandwich_upper(pot):
    worst = max(ot1_cross_augmented(m, n).cost - 2 * pot(m, n) for m, n in _pairs(4, 40, weighted=True))
    return worst <= 1e-7, f"max(ot1 - 2 pot1) = {worst:.3g}"


def check_vpers(pot):
    errs = []
    for m, _ in _pairs(5, 30, weighted=True):
        want = np.sqrt(2) * total_persistence(m)
        errs.append(abs(eval_sphere(m, v_pers()) - want) / want)
    return max(errs) <= 1e-12, f"max rel error = {max(errs):.3g}"


def check_hinge(pot):
    rng = np.random.default_rng(6)
    errs = []
    for m, _ in _pairs(6, 30, weighted=True):
        delta = rng.uniform(0.0, 5.0)
        pers = 0.5 * (m.points[:, 1] - m.points[:, 0])
        want = t_delta(delta) * np.dot(m.weights, np.maximum(pers - delta, 0.0))
        got = eval_sphere(m, v_delta(delta))
        errs.append(abs(got - want) / max(abs(want), 1e-300) if want else abs(got))
    return max(errs) <= 1e-10, f"max rel error = {max(errs):.3g}"


def check_low_pers(pot):
    rng = np.random.default_rng(7)
    errs = []
    for m, _ in _pairs(7, 30, weighted=True):
        delta = rng.uniform(0.1, 5.0)
        r = 0.5 * (m.points[:, 1] - m.points[:, 0])
        g = r - 2 * np.maximum(r - delta, 0) + np.maximum(r - 2 * delta, 0)
        errs.append(abs(low_pers_bound(m, delta) - np.dot(m.weights, g)))
    return max(errs) <= 1e-9, f"max abs error = {max(errs):.3g}"


def check_sign(pot):
    _, t = st_coords(GRID.nodes)
    worst = max(np.max(sample_sphere(m, GRID).values[t <= 0]) for m, _ in _pairs(8, 30, weighted=True))
    return worst <= 1e-12, f"max S on t <= 0 = {worst:.3g}"


def check_truncation(pot):
    rng = np.random.default_rng(9)
    worst = -np.inf
    for m, _ in _pairs(9, 30, weighted=True):
        band = Region(abs_d_max=rng.uniform(0, 10), pers_max=rng.uniform(0, 10))
        gap, bound = truncation_gap(m, band, GRID)
        worst = max(worst, gap - bound)
    return worst <= 1e-9, f"max(gap - bound) = {worst:.3g}"


def check_decay(pot):
    d = decay_curve(range(2, 41), GRID)
    ok = np.all(d["sup_diff"] <= 2.4143 / d["k"]) and np.all(np.abs(d["pot1"] - 1 / np.sqrt(2)) <= 1e-12)
    return bool(ok), f"max k*sup = {np.max(d['sup_diff'] * d['k']):.4f}"


def check_drift(pot):
    mu = PersistenceMeasure.from_pairs([(0.0, 1.0), (-1.0, 2.5)])
    nodes = GRID.nodes[::97]
    s, _ = st_coords(nodes)
    nodes = nodes[np.abs(s) > 1e-3]
    far = mu.translate((1e4, 1e4))
    err = np.max(np.abs(eval_sphere(far, nodes) - drift_limit(mu, nodes)))
    return err < 1e-3, f"max |S(mu_k) - limit| = {err:.3g}"


def check_l2_sup(pot):
    worst = -np.inf
    for m, n in _pairs(10, 20, weighted=True):
        f, g = sample_sphere(m, GRID), sample_sphere(n, GRID)
        worst = max(worst, l2_diff(f, g) - (np.sqrt(4 * np.pi) + 1e-2) * sup_diff(f, g))
    total = SphereGrid(100, 200).total_weight
    ok = worst <= 0 and abs(total - 4 * np.pi) <= 1e-3
    return ok, f"max(l2 - √(4π) sup) = {worst:.3g}, quadrature mass = {total:.6f}"


def check_rips(pot):
    rng = np.random.default_rng(11)
    key = lambda m: sorted(map(tuple, np.round(m.points, 12)))
    for _ in range(15):
        pc = PointCloud(rng.uniform(0, 1, (int(rng.integers(3, 9)), 2)))
        a, b = rips_pd(pc, 0.8), rips_pd_bruteforce(pc, 0.8)
        if key(a[0]) != key(b[0]) or key(a[1]) != key(b[1]):
            return False, "fast and brute-force Rips diagrams differ"
    sq = rips_pd(PointCloud([(0, 0), (1, 0), (1, 1), (0, 1)]), 10.0)[1]
    ok = len(sq) == 1 and sq.points[0, 0] == 1.0 and sq.points[0, 1] == np.sqrt(2.0)
    return ok, f"unit square H1 = {sq.points.tolist()}"


def check_sublevel(pot):
    rng = np.random.default_rng(12)
    key = lambda m: sorted(map(tuple, np.round(m.points, 12)))
    for _ in range(40):
        c = SampledCurve(np.arange(20.0), rng.normal(size=20))
        if key(sublevel_pd0(c)) != key(sublevel_pd0_sweep(c)):
            return False, "union-find and threshold sweep disagree"
    return True, "40 random curves agree"


def check_zero_function(pot):
    zero = SphereFunction.zeros(GRID)
    errs = [abs(sup_diff(sample_sphere(m, GRID), zero) / (np.sqrt(2) * total_persistence(m)) - 1)
            for m, _ in _pairs(13, 20, weighted=True)]
    return max(errs) <= 1e-12, f"max rel |sup S(mu) - √2 pers| = {max(errs):.3g}"


CHECKS = {
    "pot1-bruteforce-oracle": check_oracle,
    "pot1-null-measure": check_null,
    "stability-2sqrt2": check_stability,
    "sandwich-lower": check_sandwich_lower,
    "sandwich-upper": check_sandwich_upper,
    "total-persistence-direction": check_vpers,
    "hinge-identity": check_hinge,
    "low-persistence-combination": check_low_pers,
    "sign-constraint": check_sign,
    "truncation-bound": check_truncation,
    "uniform-decay-bound": check_decay,
    "drift-limit": check_drift,
    "l2-vs-sup": check_l2_sup,
    "rips-oracle": check_rips,
    "sublevel-oracle": check_sublevel,
    "sup-of-single-sphere": check_zero_function,
}


def run_selftest(mutate: bool = False) -> list[tuple[str, bool, str]]:
    scale = 0.5 if mutate else 1.0
    pot = lambda m, n: pot1(m, n, _deletion_scale=scale).cost
    report = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(pot)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        report.append((name, bool(ok), detail))
    return report
