import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dirichlet_lab.domain import build_graph, build_interval  # noqa: E402
from dirichlet_lab.forms import nonlocal_robin_form  # noqa: E402


@pytest.fixture
def path3():
    """Unit-weight path 0-1-2 with boundary {0, 2}."""
    return build_graph([(0, 1), (1, 2)], [0, 2])


@pytest.fixture
def aw_form(path3):
    return nonlocal_robin_form(path3, [[1.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_symmetric_form_matrix(rng, n, density=0.5):
    A = rng.uniform(-1, 1, (n, n))
    A *= rng.random((n, n)) < density
    return np.triu(A) + np.triu(A, 1).T


def random_graph(rng, n, p=0.4):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    nb = int(rng.integers(1, n))
    boundary = sorted(rng.choice(n, size=nb, replace=False).tolist())
    return build_graph(edges, boundary, n=n)


__all__ = ["random_symmetric_form_matrix", "random_graph", "build_interval"]
