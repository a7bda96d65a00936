import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from persphere.measures import PersistenceMeasure

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
gap = st.floats(1e-3, 10, allow_nan=False, allow_infinity=False)
weight = st.floats(0.05, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def measures(draw, min_atoms=0, max_atoms=6, weighted=True):
    n = draw(st.integers(min_atoms, max_atoms))
    if n == 0:
        return PersistenceMeasure.empty()
    xs = draw(st.lists(coord, min_size=n, max_size=n))
    gs = draw(st.lists(gap, min_size=n, max_size=n))
    pts = [(x, x + g) for x, g in zip(xs, gs)]
    w = draw(st.lists(weight, min_size=n, max_size=n)) if weighted else None
    return PersistenceMeasure.from_pairs(pts, w)


def random_measure(rng, n_min=1, n_max=10, lo=-10.0, hi=10.0, weighted=False):
    n = int(rng.integers(n_min, n_max + 1))
    if n == 0:
        return PersistenceMeasure.empty()
    a = rng.uniform(lo, hi, (n, 2))
    x, y = a.min(axis=1), a.max(axis=1)
    y = np.where(y > x, y, x + 1e-3)
    w = rng.uniform(0.05, 2.0, n) if weighted else None
    return PersistenceMeasure(np.column_stack([x, y]), w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def atoms(m):
    """Sorted (x, y, w) rows for multiset comparisons."""
    rows = np.column_stack([m.points, m.weights]) if len(m) else np.zeros((0, 3))
    return sorted(map(tuple, np.round(rows, 12)))


# --- acceptance report --------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def measured(request):
    """Attach a one-line measurement to an acceptance criterion's report line."""
    notes = _ACCEPTANCE.setdefault(request.node.nodeid, {"notes": []})["notes"]
    return notes.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    entry = _ACCEPTANCE.setdefault(report.nodeid, {"notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcome"] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[nodeid]
        name = nodeid.split("::test_criterion_")[-1]
        num, _, label = name.partition("_")
        status = "PASS" if entry.get("outcome") == "passed" else "FAIL"
        detail = "; ".join(entry["notes"])
        terminalreporter.write_line(f"{status}  criterion {int(num):2d} {label.replace('_', ' ')}  {detail}")
