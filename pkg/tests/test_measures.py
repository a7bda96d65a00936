import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from persphere.measures import (
    ArctanStep,
    DiagramFormatError,
    PersPow,
    PersistenceMeasure,
    Region,
    SignedAtomSet,
    augment,
    cross_augment,
    diag_coord,
    diag_project,
    parse_diagram,
    persistence,
    read_diagram,
    restrict,
    reweight,
    serialize_diagram,
    split,
    total_persistence,
    write_diagram,
)

from conftest import atoms, coord, gap, measures

P = PersistenceMeasure.from_pairs


def signed(rows):
    pts = [r[:2] for r in rows]
    w = [r[2] for r in rows]
    return SignedAtomSet(np.array(pts, dtype=float), np.array(w, dtype=float))


# --- pointwise geometry -----------------------------------------------------

@pytest.mark.parametrize("p, d", [((0, 2), 1.0), ((3.5, 3.5), 3.5), ((-3, 5), 1.0)])
def test_diag_coord(p, d):
    assert diag_coord(p) == d


@pytest.mark.parametrize("p, r", [((0, 2), 1.0), ((4, 4), 0.0), ((1, 4), 1.5)])
def test_persistence(p, r):
    assert persistence(p) == r


def test_persistence_rejects_subdiagonal():
    with pytest.raises(ValueError):
        persistence((2, 1))


@pytest.mark.parametrize("p, q", [((0, 2), (1, 1)), ((3, 3), (3, 3)), ((-1, 5), (2, 2))])
def test_diag_project(p, q):
    assert np.array_equal(diag_project(p), q)


@given(coord, gap)
def test_projection_idempotent_and_zero_persistence(x, g):
    p = np.array([x, x + g])
    q = diag_project(p)
    assert persistence(q) == 0.0
    assert np.array_equal(diag_project(q), q)


@given(coord, coord, coord, coord)
def test_projection_is_1_lipschitz_in_sup_norm(a, b, c, d):
    p, q = np.array([a, b]), np.array([c, d])
    lhs = np.max(np.abs(diag_project(p) - diag_project(q)))
    assert lhs <= np.max(np.abs(p - q)) + 1e-12


@given(coord, gap)
def test_persistence_below_half_sqrt2_norm(x, g):
    p = np.array([x, x + g])
    assert persistence(p) <= math.sqrt(2) / 2 * np.hypot(*p) + 1e-12


# --- measures ---------------------------------------------------------------

def test_total_persistence_examples():
    assert total_persistence(P([(0, 2)])) == 1.0
    assert total_persistence(PersistenceMeasure.empty()) == 0.0
    assert total_persistence(P([(0, 2), (1, 4)], [1, 2])) == 4.0


def test_measure_validation():
    with pytest.raises(ValueError):
        P([(1, 1)])
    with pytest.raises(ValueError):
        P([(0, 1)], [0.0])
    with pytest.raises(ValueError):
        P([(0, np.inf)])


def test_measure_is_immutable():
    m = P([(0, 1)])
    with pytest.raises(ValueError):
        m.points[0, 0] = 3.0


def test_duplicates_are_kept():
    m = P([(0, 1), (0, 1)])
    assert len(m) == 2 and m.mass == 2.0


def test_augment_examples():
    assert augment(P([(0, 2)])).equals(signed([(0, 2, 1), (1, 1, -1)]))
    assert len(augment(PersistenceMeasure.empty())) == 0
    a = augment(P([(0, 2), (2, 4)]))
    assert len(a) == 4
    neg = sorted(map(tuple, a.points[a.weights < 0]))
    assert neg == [(1.0, 1.0), (3.0, 3.0)]


def test_cross_augment_examples():
    e = PersistenceMeasure.empty()
    assert cross_augment(P([(0, 2)]), e).equals(signed([(0, 2, 1)]))
    assert cross_augment(e, P([(0, 4)])).equals(signed([(2, 2, 1)]))
    assert cross_augment(P([(0, 2)]), P([(0, 4)])).equals(signed([(0, 2, 1), (2, 2, 1)]))


@given(measures(), measures())
def test_augmentation_identities(mu, nu):
    assert abs(augment(mu).total_weight) <= 1e-9 * (1 + mu.mass)
    a, b = cross_augment(mu, nu), cross_augment(nu, mu)
    assert math.isclose(a.total_weight, mu.mass + nu.mass, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(a.total_weight, b.total_weight, rel_tol=1e-12, abs_tol=1e-12)
    # mu^aug - nu^aug = (mu ⊕ nu) - (nu ⊕ mu) after cancellation
    assert (augment(mu) - augment(nu)).equals(a - b)


def test_restrict_examples():
    m = P([(0, 2), (10, 12)])
    assert restrict(m, Region.everything()).same_atoms(m)
    assert len(restrict(m, Region.nothing())) == 0
    assert restrict(m, Region(abs_d_max=5)).same_atoms(P([(0, 2)]))


@given(measures(), st.floats(0, 10), st.floats(0, 10))
def test_split_partitions_the_measure(mu, r, m):
    inside, outside = split(mu, Region(abs_d_max=r, pers_max=m))
    assert atoms(inside + outside) == atoms(mu)


def test_region_roundtrip():
    r = Region(d_min=-1.0, pers_max=2.0)
    assert Region.from_dict(r.to_dict()) == r


def test_reweight_examples():
    assert reweight(P([(0, 2)]), PersPow(2)).same_atoms(P([(0, 2)]))
    assert reweight(P([(0, 4)]), PersPow(2)).same_atoms(P([(0, 4)], [4.0]))
    sigma = 7.0
    w = reweight(P([(0, sigma)]), ArctanStep(sigma)).weights[0]
    assert math.isclose(w, 0.5, rel_tol=1e-15)


def test_reweight_parses_names():
    assert reweight(P([(0, 4)]), "pers2").weights[0] == 4.0
    assert reweight(P([(0, 4)]), "pers_pow:3").weights[0] == 8.0
    with pytest.raises(ValueError):
        ArctanStep(0.0)


# --- file format -----------------------------------------------------------

def test_parse_examples():
    assert parse_diagram("0,2\n").same_atoms(P([(0, 2)]))
    assert parse_diagram("0,2,3\n").same_atoms(P([(0, 2)], [3.0]))
    assert parse_diagram("# header\n\n0,2\n").same_atoms(P([(0, 2)]))


@pytest.mark.parametrize("text, msg", [
    ("2,0\n", "death ≤ birth at line 1"),
    ("0,1\n1,1\n", "death ≤ birth at line 2"),
    ("0,1,0\n", "weight ≤ 0 at line 1"),
    ("0,inf\n", "non-finite value at line 1"),
    ("0,abc\n", "malformed number at line 1"),
    ("0\n", "at line 1"),
])
def test_parse_errors_carry_line_numbers(text, msg):
    with pytest.raises(DiagramFormatError, match=msg):
        parse_diagram(text)


@given(measures())
def test_serialize_roundtrip(mu):
    back = parse_diagram(serialize_diagram(mu))
    assert back.same_atoms(mu, atol=1e-12)


def test_file_roundtrip(tmp_path):
    mu = P([(0.1, 0.30000000000000004), (-2, 5)], [1.0, 2.5])
    write_diagram(mu, tmp_path / "d.csv")
    back = read_diagram(tmp_path / "d.csv")
    assert np.array_equal(back.points, mu.points) and np.array_equal(back.weights, mu.weights)
