import numpy as np
import pytest

from hietan.dataset import Dataset
from hietan.hierarchy import build_dag

# Canonical 6-feature hierarchy used throughout: letters A..F map to 0..5.
# Edges (parent -> child): F->B, F->C, E->C, E->A, C->D, A->D.
A, B, C, D, E, F = range(6)
CANONICAL_EDGES = [(F, B), (F, C), (E, C), (E, A), (C, D), (A, D)]


@pytest.fixture(scope="session")
def canonical_dag():
    return build_dag(6, CANONICAL_EDGES)


@pytest.fixture(scope="session")
def tiny_consistent_dataset():
    # Two hierarchy-consistent instances: one fully annotated, one where only
    # B (and therefore its ancestor F) is annotated. Columns ordered A..F.
    values = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [0, 1, 0, 0, 0, 1],
        ],
        dtype=np.uint8,
    )
    return Dataset(values, np.array([0, 1], dtype=np.uint8),
                   ("A", "B", "C", "D", "E", "F"))
