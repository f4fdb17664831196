import random

import pytest

from wreathlab.errors import InvalidConfigError
from wreathlab.schreier import build_schreier, far_pair, schreier_distance
from wreathlab.trees import _index_to_vertex


def test_level_one():
    g = build_schreier(1)
    assert g.size == 3
    # a-edges form the triangle, all b-moves are loops
    assert g.moves["a"] == [1, 2, 0]
    assert g.moves["b"] == [0, 1, 2]
    assert schreier_distance(g, "0", "2") == 1


def test_level_two_b_triangle():
    g = build_schreier(2)
    assert g.size == 9
    b_edges = {
        (i, j) for i, j in enumerate(g.moves["b"]) if i != j
    }
    verts = {v for e in b_edges for v in e}
    assert {_index_to_vertex(v, 2) for v in verts} == {"00", "01", "02"}
    assert schreier_distance(g, "20", "22") == 3


def test_connectivity_and_degree():
    for n in range(1, 8):
        g = build_schreier(n)
        assert g.is_connected()
        for idx in range(g.size):
            assert len(g.neighbors(idx)) == 4


def test_distance_metric_properties():
    rng = random.Random(5)
    g = build_schreier(4)
    for _ in range(40):
        u, v, w = ("".join(rng.choice("012") for _ in range(4)) for _ in range(3))
        duv = schreier_distance(g, u, v)
        assert duv == schreier_distance(g, v, u)
        assert schreier_distance(g, u, u) == 0
        assert duv <= schreier_distance(g, u, w) + schreier_distance(g, w, v)


def test_far_pair_lower_bound():
    for n in range(1, 9):
        g = build_schreier(n)
        u, v = far_pair(n)
        assert schreier_distance(g, u, v) >= 2 ** (n - 1)


def test_level_validation():
    with pytest.raises(InvalidConfigError):
        build_schreier(0)
    with pytest.raises(InvalidConfigError):
        build_schreier(13)
    g = build_schreier(2)
    with pytest.raises(ValueError):
        schreier_distance(g, "0", "00")
