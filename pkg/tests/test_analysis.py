import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist, squareform

from persphere.analysis import (
    METRICS,
    DistanceMatrix,
    average_linkage,
    cut,
    distance_matrix,
    fda_dataset,
    fda_metric_options,
    matrix_correlation,
    pp_dataset,
    rand_index,
    read_labels,
    write_labels,
)
from persphere.baselines import ImageGeometry
from persphere.generators import FDA_SCENARIOS, PpConfig
from persphere.measures import PersistenceMeasure
from persphere.sphere import SphereGrid
from persphere.transport import pot1_bruteforce

from conftest import random_measure

P = PersistenceMeasure.from_pairs
labelings = st.lists(st.integers(0, 3), min_size=2, max_size=12)


def euclid(pts):
    return squareform(pdist(np.asarray(pts, dtype=float)))


# --- distance matrices ---------------------------------------------------------

def test_pot1_matrix_matches_bruteforce():
    ms = [P([(0, 2)]), P([(0, 4)]), P([(5, 6)])]
    D = distance_matrix(ms, "pot1").entries
    for i in range(3):
        for j in range(3):
            assert D[i, j] == pot1_bruteforce(ms[i], ms[j])
    assert D[0, 1] == 2.0


@pytest.mark.parametrize("metric", METRICS)
def test_every_metric_gives_valid_matrix(metric, rng):
    ms = [random_measure(rng, 1, 5, 0, 10) for _ in range(4)]
    ms.append(ms[0])
    kw = {"grid": SphereGrid(20, 40)}
    if metric == "image-L2":
        kw["image_geometry"] = ImageGeometry(-3, 13, -3, 13, 0.2, 0.5)
    D = distance_matrix(ms, metric, **kw)
    assert D.n == 5 and D.metric == metric
    assert D.entries[0, 4] == 0.0
    assert np.all(D.entries[0, 1:4] > 0)


def test_single_item_matrix():
    D = distance_matrix([P([(0, 1)])], "pot1")
    assert D.entries.shape == (1, 1) and D.entries[0, 0] == 0.0


def test_workers_do_not_change_results(rng):
    ms = [random_measure(rng, 1, 6, weighted=True) for _ in range(7)]
    a = distance_matrix(ms, "pot1").entries
    b = distance_matrix(ms, "pot1", workers=4).entries
    assert np.array_equal(a, b)


def test_unknown_metric_and_missing_geometry():
    with pytest.raises(ValueError):
        distance_matrix([P([(0, 1)])], "bottleneck")
    with pytest.raises(ValueError):
        distance_matrix([P([(0, 1)])], "image-L2")


def test_distance_matrix_validation_and_io(tmp_path):
    with pytest.raises(ValueError):
        DistanceMatrix([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix([[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix([[0, -1], [-1, 0]])
    D = DistanceMatrix(euclid([[0, 0], [1, 0], [0, 0.3]]), "pot1")
    D.write(tmp_path / "d.csv")
    back = DistanceMatrix.read(tmp_path / "d.csv")
    assert back.metric == "pot1" and np.array_equal(back.entries, D.entries)
    (tmp_path / "short.csv").write_text("3\n0,1,2\n")
    with pytest.raises(ValueError):
        DistanceMatrix.read(tmp_path / "short.csv")


# --- clustering ----------------------------------------------------------------

def test_two_blobs():
    pts = [[0, 0], [0.1, 0], [0, 0.1], [10, 0], [10.1, 0], [10, 0.1]]
    labels = cut(average_linkage(euclid(pts)), 2)
    assert list(labels) == [0, 0, 0, 1, 1, 1]


def test_cut_extremes():
    d = average_linkage(euclid(np.arange(5)[:, None] ** 1.5 * [1, 0]))
    assert list(cut(d, 5)) == [0, 1, 2, 3, 4]
    assert list(cut(d, 1)) == [0] * 5
    with pytest.raises(ValueError):
        cut(d, 0)
    with pytest.raises(ValueError):
        cut(d, 6)


def test_ties_go_to_smallest_pair():
    D = np.ones((4, 4)) - np.eye(4)
    merges = average_linkage(D).merges
    assert merges[0][:2] == (0, 1)
    assert merges[1][:2] == (2, 3)


def test_matches_scipy_average_linkage(rng):
    for _ in range(20):
        pts = rng.normal(size=(int(rng.integers(3, 25)), 2))
        Z = linkage(pdist(pts), method="average")
        dend = average_linkage(euclid(pts))
        heights = np.array([m[2] for m in dend.merges])
        assert np.allclose(heights, Z[:, 2], rtol=1e-12)
        assert np.all(np.diff(heights) >= -1e-12)
        for k in (2, 3):
            if k <= len(pts):
                assert rand_index(cut(dend, k), fcluster(Z, k, "maxclust")) == 1.0


def test_cut_refinement(rng):
    pts = rng.normal(size=(15, 2))
    dend = average_linkage(euclid(pts))
    for k in range(2, 15):
        fine, coarse = cut(dend, k), cut(dend, k - 1)
        # every fine cluster sits inside one coarse cluster, and exactly one pair merges
        pairs = {(f, c) for f, c in zip(fine, coarse)}
        assert len(pairs) == k
        assert len(set(coarse)) == k - 1


# --- scores ----------------------------------------------------------------------

def test_rand_examples():
    assert rand_index([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert math.isclose(rand_index([0, 0, 1, 1], [0, 1, 0, 1]), 1 / 3)
    assert rand_index([0, 0, 1, 2], [5, 5, 9, 7]) == 1.0
    with pytest.raises(ValueError):
        rand_index([0, 1], [0, 1, 1])


@given(labelings, st.permutations(range(4)))
def test_rand_symmetric_and_relabel_invariant(a, perm):
    b = list(reversed(a))
    assert rand_index(a, b) == rand_index(b, a)
    relabelled = [perm[x] for x in a]
    assert rand_index(a, relabelled) == 1.0
    assert 0.0 <= rand_index(a, b) <= 1.0


def test_correlation_examples(rng):
    D = euclid(rng.normal(size=(6, 2)))
    assert math.isclose(matrix_correlation(D, 2 * D), 1.0)
    off = 10.0 - D
    np.fill_diagonal(off, 0.0)
    assert math.isclose(matrix_correlation(D, off), -1.0)
    A = np.zeros((4, 4))
    B = np.zeros((4, 4))
    A[np.triu_indices(4, 1)] = [1, 2, 3, 4, 5, 6]
    B[np.triu_indices(4, 1)] = [2, 1, 4, 3, 6, 5]
    assert math.isclose(matrix_correlation(A + A.T, B + B.T), 29 / 35, rel_tol=1e-14)
    with pytest.raises(ValueError):
        matrix_correlation(np.ones((3, 3)) - np.eye(3), D[:3, :3])


@given(st.floats(0.1, 10), st.floats(0, 10))
def test_correlation_affine_invariance(a, b):
    D = euclid(np.random.default_rng(1).normal(size=(7, 2)))
    E = euclid(np.random.default_rng(2).normal(size=(7, 2)))
    assert math.isclose(matrix_correlation(D, E), matrix_correlation(a * D + b, E), rel_tol=1e-9)


def test_labels_roundtrip(tmp_path):
    write_labels([0, 1, 1, 0], tmp_path / "l.csv")
    assert list(read_labels(tmp_path / "l.csv")) == [0, 1, 1, 0]
    (tmp_path / "bad.csv").write_text("0\nx\n")
    with pytest.raises(ValueError):
        read_labels(tmp_path / "bad.csv")


# --- pipelines -------------------------------------------------------------------

def test_fda_dataset_is_deterministic():
    cfg = FDA_SCENARIOS["fda-i"]
    d1, l1, r1 = fda_dataset(cfg, seed=3, replicates=4)
    d2, l2, _ = fda_dataset(cfg, seed=3, replicates=4)
    assert len(d1) == 8 and list(l1) == [0, 0, 0, 0, 1, 1, 1, 1]
    assert np.array_equal(l1, l2) and all(a.same_atoms(b) for a, b in zip(d1, d2))
    assert len(r1) == 8 and all(200 <= r["n"] <= 800 for r in r1)


def test_fda_metric_options_image_geometry():
    cfg = FDA_SCENARIOS["fda-ii"]
    diagrams, _, _ = fda_dataset(cfg, seed=0, replicates=2)
    items, opts = fda_metric_options(diagrams, cfg, "image-L2")
    geom = opts["image_geometry"]
    assert math.isclose(geom.sigma, 10 * geom.pixel_size)
    assert math.log10(geom.pixel_size) == round(math.log10(geom.pixel_size))


def test_pp_dataset_shapes():
    cfg = PpConfig(n=40)
    clouds, h0, h1, labels, _ = pp_dataset(cfg, seed=1, per_family=2)
    assert len(clouds) == len(h0) == len(h1) == 8
    assert sorted(set(labels)) == [0, 1, 2, 3]
    assert all(len(c) == 40 for c in clouds)
