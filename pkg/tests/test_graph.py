from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrbounds.graph import (
    SpinGraph,
    coordination_number,
    distance,
    max_local_dim,
    set_diameter,
    set_distance,
)


@st.composite
def graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return SpinGraph.from_edge_list(n, edges)


def brute_diameter(g, X):
    return max(distance(g, x, y) for x in X for y in X)


def brute_set_distance(g, X, Y):
    return min(distance(g, x, y) for x in X for y in Y)


def test_path_distances():
    g = SpinGraph.path(3)
    assert distance(g, 1, 3) == 2
    assert distance(g, 2, 2) == 0


def test_disconnected_is_inf():
    g = SpinGraph.from_edge_list(4, [(1, 2), (3, 4)])
    assert distance(g, 1, 4) == math.inf
    assert set_distance(g, [1, 2], [3]) == math.inf


def test_set_diameter_examples():
    assert set_diameter(SpinGraph.path(5), [3]) == 0
    assert set_diameter(SpinGraph.path(3), [1, 3]) == 2
    g4 = SpinGraph.path(4)
    assert set_diameter(g4, [1, 2, 4]) == 3 == brute_diameter(g4, [1, 2, 4])


def test_set_distance_examples():
    g4 = SpinGraph.path(4)
    assert set_distance(g4, [1, 2], [2, 3]) == 0
    assert set_distance(g4, [1, 2], [4]) == 2 == brute_set_distance(g4, [1, 2], [4])
    for n in range(2, 12):
        assert set_distance(SpinGraph.path(n), [1], [n]) == n - 1


def test_coordination_numbers():
    assert coordination_number(SpinGraph.path(2)) == 1
    for n in (3, 7):
        assert coordination_number(SpinGraph.path(n)) == 2
    for k in (1, 3, 6):
        assert coordination_number(SpinGraph.star(k)) == k
    assert coordination_number(SpinGraph.cycle(4)) == 2


def test_local_dims():
    g = SpinGraph.from_edge_list(3, [(1, 2), (2, 3)], local_dims={2: 3})
    assert max_local_dim(g) == 3
    assert max_local_dim(g, [1, 2]) == 3
    assert max_local_dim(g, [3]) == 2
    assert max_local_dim(SpinGraph.path(4)) == 2


@pytest.mark.parametrize(
    "n, edges, dims",
    [
        (0, [], None),
        (3, [(1, 1)], None),
        (3, [(1, 4)], None),
        (3, [(1, 2)], {2: 1}),
        (3, [(1, 2)], {5: 2}),
    ],
)
def test_invalid_graphs(n, edges, dims):
    with pytest.raises(ValueError):
        SpinGraph.from_edge_list(n, edges, local_dims=dims)


def test_invalid_vertex_sets():
    g = SpinGraph.path(3)
    with pytest.raises(ValueError):
        distance(g, 0, 1)
    with pytest.raises(ValueError):
        set_diameter(g, [])
    with pytest.raises(ValueError):
        set_distance(g, [1], [9])


def test_adjacency_symmetric():
    g = SpinGraph.from_edge_list(5, [(1, 2), (2, 5), (3, 4)])
    for v, nbrs in g.adjacency.items():
        for w in nbrs:
            assert v in g.adjacency[w]


@given(st.integers(1, 15), st.data())
def test_path_metric_is_index_difference(n, data):
    g = SpinGraph.path(n)
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, n))
    assert distance(g, i, j) == abs(i - j)


@settings(max_examples=60)
@given(graphs())
def test_triangle_inequality_and_symmetry(g):
    for x, y, z in itertools.product(g.vertices, repeat=3):
        assert distance(g, x, y) == distance(g, y, x)
        if max(distance(g, x, y), distance(g, y, z)) < math.inf:
            assert distance(g, x, z) <= distance(g, x, y) + distance(g, y, z)


@settings(max_examples=60)
@given(graphs(), st.data())
def test_set_functions_match_brute_force(g, data):
    verts = list(g.vertices)
    X = data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True))
    Y = data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True))
    assert set_diameter(g, X) == brute_diameter(g, X)
    assert set_distance(g, X, Y) == brute_set_distance(g, X, Y) == set_distance(g, Y, X)
    extra = data.draw(st.sampled_from(verts))
    assert set_diameter(g, X + [extra]) >= set_diameter(g, X)
