import numpy as np
import pytest

from kronheat import TemporalMesh, assemble_temporal_operators

# Nonuniform base partition of (0, 1/2) used throughout the experiments.
BASE_NODES = (0.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 2.0)


@pytest.fixture(scope="session")
def base_mesh():
    return TemporalMesh(np.array(BASE_NODES))


@pytest.fixture(scope="session")
def base_ops(base_mesh):
    # Budget large enough that truncation is far below every test tolerance.
    return assemble_temporal_operators(base_mesh, j_max=400_000)
