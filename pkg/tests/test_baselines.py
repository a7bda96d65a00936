import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from persphere.baselines import (
    ImageGeometry,
    ImageWeight,
    Landscape,
    gaussian_l2_closed_form,
    gaussian_l2_norm,
    image_distance_matrix,
    image_geometry_for,
    image_l2,
    landscape,
    landscape_grid,
    landscape_l2,
    persistence_image,
    power_of_ten_pixel,
    read_image,
    read_landscape,
    write_image,
    write_landscape,
)
from persphere.measures import PersistenceMeasure

from conftest import random_measure

P = PersistenceMeasure.from_pairs
E = PersistenceMeasure.empty()
FINE = landscape_grid(-2.0, 12.0, 10_000)


def counting(draw_pts):
    return P(draw_pts) if draw_pts else E


pairs = st.lists(
    st.tuples(st.floats(0, 5), st.floats(0.1, 5)).map(lambda t: (t[0], t[0] + t[1])),
    min_size=0, max_size=6,
)


# --- landscapes -------------------------------------------------------------

@pytest.mark.parametrize("x, y", [(0, 2), (1, 7), (3.5, 4.25)])
def test_single_tent_area(x, y):
    lam = landscape(P([(x, y)]), FINE)
    pers = (y - x) / 2
    assert math.isclose(lam.values[0].max(), pers, rel_tol=2e-3)
    assert math.isclose(np.trapezoid(lam.values[0], FINE), pers ** 2, rel_tol=1e-3)


def test_tent_vs_empty():
    pers = 3.0
    lam = landscape(P([(0, 2 * pers)]), FINE)
    zero = landscape(E, FINE)
    assert not np.any(zero.values)
    assert math.isclose(landscape_l2(lam, zero), math.sqrt(2 * pers ** 3 / 3), rel_tol=1e-3)
    assert landscape_l2(lam, lam) == 0.0


def test_disjoint_tents_have_zero_second_level():
    lam = landscape(P([(0, 2), (5, 9)]), FINE)
    assert lam.k_max == 2 and not np.any(lam.values[1])


def test_grid_triple_and_mismatch():
    a = landscape(P([(0, 2)]), (0.0, 4.0, 101))
    assert len(a.t_grid) == 101
    with pytest.raises(ValueError):
        landscape_l2(a, landscape(P([(0, 2)]), (0.0, 4.0, 51)))


def test_landscape_needs_integer_weights():
    with pytest.raises(ValueError):
        landscape(P([(0, 2)], [0.5]), FINE)


@given(pairs)
def test_landscape_levels_are_ordered_and_lipschitz(pts):
    t = landscape_grid(-1, 11, 601)
    lam = landscape(counting(pts), t)
    v = lam.values
    assert np.all(v >= 0)
    assert np.all(v[:-1] >= v[1:])
    dt = t[1] - t[0]
    assert np.all(np.abs(np.diff(v, axis=1)) <= dt * (1 + 1e-9))


@given(pairs, st.randoms())
def test_landscape_reorder_invariant(pts, r):
    shuffled = list(pts)
    r.shuffle(shuffled)
    t = landscape_grid(-1, 11, 301)
    assert np.array_equal(landscape(counting(pts), t).values, landscape(counting(shuffled), t).values)


def test_landscape_multiplicity_equals_duplicates():
    t = landscape_grid(-1, 6, 301)
    a = landscape(P([(0, 4)], [2.0]), t)
    b = landscape(P([(0, 4), (0, 4)]), t)
    assert np.array_equal(a.values, b.values)


def test_landscape_file_roundtrip(tmp_path):
    lam = landscape(P([(0, 2), (1, 3)]), (0.0, 3.0, 31))
    write_landscape(lam, tmp_path / "l.csv")
    back = read_landscape(tmp_path / "l.csv")
    assert np.array_equal(back.t_grid, lam.t_grid) and np.array_equal(back.values, lam.values)
    assert isinstance(back, Landscape)


# --- images -----------------------------------------------------------------

def big_geom(sigma=1.0, pixel=0.05):
    return ImageGeometry(-15, 25, -15, 25, pixel, sigma)


def test_weight_parsing():
    assert ImageWeight.parse("flat")(np.array([3.0]))[0] == 1.0
    assert ImageWeight.parse("pers")(np.array([3.0]))[0] == 3.0
    assert ImageWeight.parse("pers2")(np.array([3.0]))[0] == 9.0
    assert ImageWeight.parse("pers8")(np.array([2.0]))[0] == 256.0
    assert math.isclose(ImageWeight.parse("arctan")(np.array([1.0]))[0], 0.5, rel_tol=1e-15)
    assert math.isclose(ImageWeight.parse("arctan:4")(np.array([4.0]))[0], 0.5, rel_tol=1e-15)
    for text in ("flat", "pers", "pers4", "arctan:2.5"):
        assert ImageWeight.parse(str(ImageWeight.parse(text))) == ImageWeight.parse(text)
    with pytest.raises(ValueError):
        ImageWeight.parse("gauss")


def test_geometry_validation():
    with pytest.raises(ValueError):
        ImageGeometry(0, 1, 0, 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        ImageGeometry(0, 1, 0, 1, 0.1, -1.0)
    assert ImageGeometry(0, 1, 0, 2, 0.1, 1.0).shape == (10, 20)


def test_empty_image_is_zero():
    img = persistence_image(E, big_geom())
    assert img.pixels.shape == big_geom().shape and not np.any(img.pixels)


def test_single_atom_mass_is_one():
    img = persistence_image(P([(3, 8)]), big_geom())
    assert abs(img.pixels.sum() - 1.0) < 1e-3


def test_linearity_in_weights():
    a = persistence_image(P([(3, 8)]), big_geom(), "pers")
    b = persistence_image(P([(3, 8)], [2.0]), big_geom(), "pers")
    assert np.allclose(b.pixels, 2 * a.pixels, rtol=1e-14, atol=0)


def test_image_l2_matches_closed_form():
    g = big_geom()
    p, q = (3.0, 5.0), (4.0, 6.5)
    a = persistence_image(P([(p[0], p[0] + p[1])]), g)
    b = persistence_image(P([(q[0], q[0] + q[1])]), g)
    want = gaussian_l2_closed_form(p, q, 1.0)
    assert math.isclose(image_l2(a, b), want, rel_tol=0.02)
    assert image_l2(a, a) == 0.0


def test_closed_form_examples():
    assert gaussian_l2_closed_form((0, 0), (0, 0), 1.0) == 0.0
    assert math.isclose(gaussian_l2_closed_form((0, 0), (1e3, 0), 1.0), 0.3989422804014327, rel_tol=1e-12)
    assert math.isclose(gaussian_l2_norm(1.0), 0.28209479177387814, rel_tol=1e-14)
    with pytest.raises(ValueError):
        gaussian_l2_closed_form((0, 0), (1, 1), 0.0)


def test_single_gaussian_norm_matches_image():
    g = big_geom()
    img = persistence_image(P([(3, 8)]), g)
    zero = persistence_image(E, g)
    assert math.isclose(image_l2(img, zero), gaussian_l2_norm(1.0), rel_tol=0.02)


def test_saturation_curve():
    g = ImageGeometry(-5, 30, -5, 30, 0.05, 1.0)
    base = np.array([2.0, 2.0])
    shift = np.array([1.0, 1.0]) / math.sqrt(2)
    ref = persistence_image(P([(base[0], base.sum())]), g)
    ceiling = 1 / (math.sqrt(2 * math.pi) * 1.0)
    prev = 0.0
    for k in np.arange(0, 20.5, 0.5):
        q = base + k * shift
        d = image_l2(ref, persistence_image(P([(q[0], q.sum())]), g))
        assert d >= prev - 1e-12
        if k >= 10:
            assert abs(d - ceiling) <= 0.01 * ceiling
        prev = d


def test_flat_deletion_independent_of_persistence():
    g = ImageGeometry(-5, 15, -5, 25, 0.05, 1.0)
    zero = persistence_image(E, g)
    vals = [image_l2(persistence_image(P([(5, 5 + life)]), g), zero) for life in (5, 8, 12, 16)]
    assert max(vals) - min(vals) <= 1e-3


def test_distance_matrix_matches_direct(rng):
    ms = [random_measure(rng, 0, 6, 0, 10) for _ in range(6)]
    g = image_geometry_for(ms, 0.1, 0.5)
    imgs = [persistence_image(m, g, "arctan") for m in ms]
    direct = np.array([[image_l2(a, b) for b in imgs] for a in imgs])
    fast = image_distance_matrix(ms, g, "arctan")
    assert np.allclose(fast, direct, rtol=1e-9, atol=1e-9)


def test_anchor_adds_a_diagonal_atom():
    g = ImageGeometry(-5, 15, -5, 15, 0.1, 1.0)
    a = persistence_image(E, g, "flat", diagonal_anchor=1.0)
    b = persistence_image(P([(1.0, 1.0 + 1e-9)]), g, "flat")
    assert np.allclose(a.pixels, b.pixels)


def test_geometry_for_and_pixel_rule():
    g = image_geometry_for([P([(0, 10)]), P([(2, 3)])], 0.1, 1.0)
    assert (g.birth_min, g.birth_max) == (-3.0, 5.0)
    assert (g.pers_min, g.pers_max) == (-2.0, 13.0)
    assert power_of_ten_pixel(100.0) == 0.1
    assert power_of_ten_pixel(1000.0) == 1.0
    with pytest.raises(ValueError):
        power_of_ten_pixel(0.0)


def test_image_geometry_mismatch():
    a = persistence_image(E, big_geom())
    with pytest.raises(ValueError):
        image_l2(a, persistence_image(E, big_geom(sigma=2.0)))


def test_image_file_roundtrip(tmp_path):
    g = ImageGeometry(0, 2, 0, 3, 0.5, 0.3)
    img = persistence_image(P([(0.5, 2.0)]), g, "arctan:2")
    write_image(img, tmp_path / "i.csv")
    back = read_image(tmp_path / "i.csv")
    assert back.geometry == g and back.weight == img.weight
    assert np.array_equal(back.pixels, img.pixels)
