from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepmatrix.geometry import (
    COORD_LIMIT,
    Configuration,
    GeneralPositionError,
    Point,
    convex_hull,
    format_points,
    hull_vertices_by_containment,
    orientation,
    parse_points,
    random_configuration,
    separates,
    separating_count,
)

from conftest import SQUARE, TRIANGLE_PLUS, db_configs

coord = st.integers(-COORD_LIMIT, COORD_LIMIT)
points = st.builds(Point, coord, coord)


def test_orientation_examples():
    assert orientation(Point(0, 0), Point(1, 0), Point(0, 1)) == 1
    assert orientation(Point(0, 0), Point(1, 1), Point(2, 2)) == 0
    assert orientation(Point(0, 0), Point(0, 1), Point(1, 0)) == -1


def test_orientation_exact_at_coordinate_limit():
    # a float determinant would round these to zero
    a = Point(-COORD_LIMIT, -COORD_LIMIT)
    b = Point(COORD_LIMIT, COORD_LIMIT)
    assert orientation(a, b, Point(COORD_LIMIT - 1, COORD_LIMIT)) == 1
    assert orientation(a, b, Point(COORD_LIMIT, COORD_LIMIT - 1)) == -1


@pytest.mark.parametrize("bad", [(COORD_LIMIT + 1, 0), (0, -COORD_LIMIT - 1), (0.5, 1), ("1", 2), (True, 0)])
def test_point_rejects_bad_coordinates(bad):
    with pytest.raises((ValueError, TypeError)):
        Point(*bad)


def test_separates_examples():
    a, b = Point(0, 0), Point(2, 0)
    assert separates(a, b, Point(1, 1), Point(1, -1))
    assert not separates(a, b, Point(1, 1), Point(3, 2))
    with pytest.raises(GeneralPositionError):
        separates(Point(0, 0), Point(1, 1), Point(2, 2), Point(0, 1))


@given(points, points, points)
def test_orientation_antisymmetric(a, b, c):
    o = orientation(a, b, c)
    assert orientation(b, a, c) == -o
    assert orientation(a, c, b) == -o
    assert orientation(c, b, a) == -o
    assert orientation(b, c, a) == o


@given(points, points, points, points)
def test_separates_symmetries(a, b, p, q):
    if 0 in (orientation(a, b, p), orientation(a, b, q)):
        return
    v = separates(a, b, p, q)
    assert separates(b, a, p, q) == v
    assert separates(a, b, q, p) == v


def test_separating_count_examples():
    assert separating_count(SQUARE, 0, 2) == 1
    assert separating_count(SQUARE, 0, 1) == 0
    assert separating_count(TRIANGLE_PLUS, 0, 1) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 9), st.integers(0, 10**6))
def test_separating_count_symmetric_and_bounded(n, seed):
    cfg = random_configuration(n, seed, 50)
    cap = (n - 2) * (n - 3) // 2
    for i in range(n):
        for j in range(i + 1, n):
            v = separating_count(cfg, i, j)
            assert v == separating_count(cfg, j, i)
            assert 0 <= v <= cap


def test_configuration_rejects_collinear_and_small():
    with pytest.raises(GeneralPositionError):
        Configuration([(0, 0), (1, 1), (2, 2), (5, 0)])
    with pytest.raises(ValueError):
        Configuration([(0, 0), (1, 0)])


def test_hull_examples():
    h = convex_hull(TRIANGLE_PLUS)
    assert h.vertex_set == {0, 1, 2}
    assert convex_hull(SQUARE).indices == (0, 1, 2, 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 12), st.integers(0, 10**6))
def test_hull_matches_containment_oracle(n, seed):
    cfg = random_configuration(n, seed, 30)
    h = convex_hull(cfg)
    assert h.vertex_set == hull_vertices_by_containment(cfg)
    k = h.k
    for t in range(k):
        assert orientation(cfg[h.indices[t]], cfg[h.indices[(t + 1) % k]], cfg[h.indices[(t + 2) % k]]) == 1
    assert h.indices[0] == min(h.indices)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_hull_matches_oracle_on_database(n):
    for cfg in db_configs(n):
        assert convex_hull(cfg).vertex_set == hull_vertices_by_containment(cfg)


def test_hull_relabelling():
    cfg = random_configuration(7, 3, 100)
    for perm in list(permutations(range(7)))[::700]:
        inv = {p: t for t, p in enumerate(perm)}
        got = convex_hull(cfg.permuted(perm)).vertex_set
        assert got == {inv[v] for v in convex_hull(cfg).vertex_set}


def test_random_configuration_contract():
    tri = random_configuration(3, 11, 100)
    assert tri.n == 3
    a = random_configuration(7, 12345, 1000)
    assert a == random_configuration(7, 12345, 1000)
    assert all(abs(p.x) <= 1000 and abs(p.y) <= 1000 for p in a.points)
    with pytest.raises(RuntimeError):
        random_configuration(50, 1, 2)


def test_point_text_round_trip():
    text = format_points(SQUARE)
    assert text.splitlines()[0] == "4"
    assert parse_points(text) == SQUARE


@pytest.mark.parametrize("text", ["", "3\n0 0\n1 0\n", "2\n0 0\n1 1\n", "3\n0 0\n1 x\n0 1\n", "3\n0 0\n1 1\n2 2\n"])
def test_point_text_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_points(text)
