"""Persistence spheres, exact partial optimal transport and baseline summaries."""

from .measures import (
    PersistenceMeasure,
    Region,
    SignedAtomSet,
    augment,
    cross_augment,
    diag_coord,
    diag_project,
    persistence,
    read_diagram,
    reweight,
    total_persistence,
    write_diagram,
)
from .sphere import SphereFunction, SphereGrid, eval_sphere, l2_diff, sample_sphere, sup_diff
from .transport import ot1_cross_augmented, pot1, pot1_bruteforce, sliced_wasserstein

__version__ = "0.1.0"

__all__ = [
    "PersistenceMeasure",
    "Region",
    "SignedAtomSet",
    "SphereFunction",
    "SphereGrid",
    "augment",
    "cross_augment",
    "diag_coord",
    "diag_project",
    "eval_sphere",
    "l2_diff",
    "ot1_cross_augmented",
    "persistence",
    "pot1",
    "pot1_bruteforce",
    "read_diagram",
    "reweight",
    "sample_sphere",
    "sliced_wasserstein",
    "sup_diff",
    "total_persistence",
    "write_diagram",
    "__version__",
]
