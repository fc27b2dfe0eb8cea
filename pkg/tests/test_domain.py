import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_lab.domain import Domain, build_graph, build_interval, build_rectangle
from dirichlet_lab.errors import InvalidDomain


def test_interval_three_nodes_length_two():
    d = build_interval(3, 2.0)
    assert d.n == 3
    assert d.boundary == (0, 2)
    assert d.interior == (1,)
    np.testing.assert_array_equal(d.conductance, [1.0, 1.0])
    np.testing.assert_array_equal(d.sigma, [1.0, 1.0])
    assert d.edge_set == {(0, 1), (1, 2)}


def test_interval_half_spacing():
    d = build_interval(3, 1.0)
    np.testing.assert_array_equal(d.conductance, [2.0, 2.0])
    np.testing.assert_array_equal(d.mass, [0.25, 0.5, 0.25])


@pytest.mark.parametrize("n", [2, 1, 0])
def test_interval_too_small(n):
    with pytest.raises(InvalidDomain):
        build_interval(n, 1.0)


def test_rectangle_counts():
    d = build_rectangle(3, 3, 1, 1)
    assert d.n == 9 and d.interior == (4,) and len(d.boundary) == 8
    d = build_rectangle(4, 3, 1, 1)
    assert d.n == 12 and d.interior == (5, 6)


def test_rectangle_too_small():
    with pytest.raises(InvalidDomain):
        build_rectangle(2, 3, 1, 1)


def test_rectangle_weights():
    d = build_rectangle(4, 3, 1.5, 1.0)
    hx, hy = 0.5, 0.5
    assert math.isclose(d.mass.sum(), 1.5)
    # perimeter length
    assert math.isclose(d.sigma.sum(), 2 * (1.5 + 1.0))
    corner = d.boundary_position(0)
    assert d.sigma[corner] == 0.5 * (hx + hy)
    # perimeter edges carry half the interior conductance
    W = d.adjacency()
    assert W[0, 1] == 0.5 and W[4, 5] == 1.0


def test_rectangle_anisotropic_conductance():
    d = build_rectangle(3, 5, 1.0, 1.0)  # hx = 0.5, hy = 0.25
    W = d.adjacency()
    c = 1 * 3 + 1  # node (1, 1)
    assert W[c, c + 1] == pytest.approx(0.25 / 0.5)
    assert W[c, c + 3] == pytest.approx(0.5 / 0.25)


def test_graph_unit_path(path3):
    assert path3.n == 3
    assert path3.boundary == (0, 2) and path3.interior == (1,)
    np.testing.assert_array_equal(path3.mass, np.ones(3))
    np.testing.assert_array_equal(path3.sigma, np.ones(2))


def test_graph_triangle():
    d = build_graph([(0, 1), (1, 2), (0, 2)], [0])
    assert d.interior == (1, 2)
    assert len(d.edges) == 3


@pytest.mark.parametrize(
    "edges, boundary",
    [
        ([(0, 0)], [0]),
        ([(0, 1, -1.0)], [0]),
        ([(0, 1, 0.0)], [0]),
        ([(0, 1)], [0, 1]),
        ([(0, 1)], []),
        ([(0, 1), (1, 0)], [0]),
    ],
)
def test_graph_rejects(edges, boundary):
    with pytest.raises(InvalidDomain):
        build_graph(edges, boundary)


def test_graph_rejects_bad_mass():
    with pytest.raises(InvalidDomain):
        build_graph([(0, 1)], [0], mass=[1.0, 0.0])


def test_domain_is_immutable(path3):
    with pytest.raises(ValueError):
        path3.mass[0] = 2.0
    with pytest.raises(AttributeError):
        path3.kind = "interval"


@settings(max_examples=50, deadline=None)
@given(n=st.integers(3, 200), length=st.floats(1e-3, 1e3))
def test_interval_mass_is_exact_quadrature(n, length):
    d = build_interval(n, length)
    assert abs(math.fsum(d.mass) - length) <= 4 * n * np.spacing(length)


@pytest.mark.parametrize(
    "make",
    [
        lambda: build_interval(7, 1.3),
        lambda: build_rectangle(5, 4, 2.0, 0.7),
        lambda: build_graph([(0, 1, 2.0), (1, 2), (2, 3, 0.5), (0, 3)], [0, 3], mass=[1, 2, 3, 4], sigma=[0.5, 2]),
    ],
)
def test_invariants_and_json_round_trip(make):
    d = make()
    W = d.adjacency()
    np.testing.assert_array_equal(W, W.T)
    assert np.all(np.diag(W) == 0)
    assert sorted(d.interior + d.boundary) == list(range(d.n))
    assert make() == d  # deterministic rebuild
    text = json.dumps(d.to_dict())
    again = Domain.from_dict(json.loads(text))
    assert again == d


def test_json_rejects_inconsistent_grid():
    data = build_interval(5, 1.0).to_dict()
    data["mass"][0] = 1.0
    with pytest.raises(InvalidDomain):
        Domain.from_dict(data)
    with pytest.raises(InvalidDomain):
        Domain.from_dict({"kind": "sphere"})
    with pytest.raises(InvalidDomain):
        Domain.from_dict({"kind": "interval", "n": 5, "colour": "red"})
