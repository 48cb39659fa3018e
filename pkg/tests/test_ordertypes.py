import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepmatrix.geometry import random_configuration
from sepmatrix.matrix import orientation_tensor
from sepmatrix.ordertypes import (
    KNOWN_COUNTS,
    arrangement_cells,
    canonical_form,
    cell_point,
    enumerate_levels,
    generate_database,
    integer_realisation,
    random_realisation,
    write_records,
)
from sepmatrix.otdb import DatabaseReader

from conftest import db_path


def xy(cfg):
    return np.array([(p.x, p.y) for p in cfg.points], dtype=np.int64)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.integers(0, 10**6), st.randoms())
def test_canonical_form_invariant(n, seed, rnd):
    a = xy(random_configuration(n, seed, 1000))
    perm = list(range(n))
    rnd.shuffle(perm)
    key = canonical_form(a)
    assert canonical_form(a[perm]) == key
    assert canonical_form(a * np.array([-1, 1])) == key  # mirror image
    assert canonical_form(a[:, ::-1]) == key
    assert canonical_form(3 * a + 7) == key


def test_canonical_form_separates_types():
    convex = np.array([[0, 0], [10, 0], [10, 10], [0, 10]])
    triangle = np.array([[0, 0], [12, 0], [0, 12], [3, 3]])
    assert canonical_form(convex) != canonical_form(triangle)


def test_triangle_arrangement_has_seven_cells():
    tri = np.array([[0, 0], [255, 0], [0, 255]])
    cells = arrangement_cells(tri)
    assert len(cells.signs) == 7
    assert len({tuple(r) for r in cells.signs}) == 7


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10**6))
def test_cell_points_lie_in_their_cells(n, seed):
    a = xy(random_configuration(n, seed, 100))
    cells = arrangement_cells(a)
    for r in range(len(cells.signs)):
        q = cell_point(a, cells, r)
        for (i, j), s in zip(cells.pairs, cells.signs[r]):
            d = (a[j] - a[i]).astype(float)
            v = d[0] * (q[1] - a[i][1]) - d[1] * (q[0] - a[i][0])
            assert np.sign(v) == s


def test_levels_match_known_counts():
    got = {lv.n: len(lv.keys) for lv in enumerate_levels(7)}
    assert got == {n: KNOWN_COUNTS[n] for n in range(3, 8)}


def test_realisations_verified():
    for lv in enumerate_levels(6):
        for key, c in zip(lv.keys, lv.coords):
            assert canonical_form(c) == key
            assert c.min() >= 0 and c.max() <= 255


def test_integer_realisation_keeps_orientations():
    a = xy(random_configuration(7, 9, 10**6)).astype(float)
    want = orientation_tensor(a.astype(np.int64))
    g = integer_realisation(a, want, 255, seed=1)
    assert g is not None
    assert np.array_equal(orientation_tensor(g), want)
    assert g.min() >= 0 and g.max() <= 255


def test_random_realisation_same_type():
    rng = np.random.default_rng(0)
    a = xy(random_configuration(8, 5, 100)) + 100
    b = random_realisation(a, rng)
    assert canonical_form(b) == canonical_form(a)
    assert not np.array_equal(a, b)


def test_generate_small_database(tmp_path):
    paths = generate_database(tmp_path, 6)
    assert sorted(paths) == [3, 4, 5, 6]
    assert len(DatabaseReader(paths[6], 6)) == 16
    assert paths[6].name == "otypes06.b08"


def test_write_records_range_check(tmp_path):
    with pytest.raises(ValueError):
        write_records(tmp_path / "x", 4, [np.array([[0, 0], [256, 0], [0, 1], [1, 1]])])


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_database_types_distinct(n):
    path = db_path(n)
    if path is None:
        pytest.skip(f"no {n}-point database file")
    keys = {canonical_form(a) for _, a in DatabaseReader(path, n).iter_arrays()}
    assert len(keys) == KNOWN_COUNTS[n]


def test_exchange_relations_characterise_five_points():
    from itertools import product

    from sepmatrix.ordertypes import _exchange_ok, triple_table

    tri = triple_table(5)
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(40000):
        a = rng.integers(-10**6, 10**6, (5, 2))
        chi = orientation_tensor(a)
        v = chi[tri[:, 0], tri[:, 1], tri[:, 2]]
        if v.all():
            seen.add(tuple(v))
    # every uniform rank-3 oriented matroid on five elements is realisable by
    # vectors, so the exchange relations accept exactly the reorientations
    # (sign changes of some elements) of point-set patterns
    closure = set()
    for mask in product((0, 1), repeat=5):
        flip = np.array([(-1) ** (mask[a] + mask[b] + mask[c]) for a, b, c in tri])
        closure |= {tuple(int(x) for x in np.array(v) * flip) for v in seen}
    seen = closure
    for v in product((-1, 1), repeat=len(tri)):
        chi = np.zeros((5, 5, 5), np.int8)
        for (a, b, c), s in zip(tri, v):
            for x, y, z, sg in ((a, b, c, s), (b, c, a, s), (c, a, b, s), (b, a, c, -s), (a, c, b, -s), (c, b, a, -s)):
                chi[x, y, z] = sg
        assert _exchange_ok(chi, 5) == (v in seen)


def test_flipped_cells_are_new_and_realisable():
    from sepmatrix.ordertypes import _chi_with_point, _exchange_ok, _repair, flipped_cells

    a = xy(random_configuration(6, 1, 200)) + 200
    cells = arrangement_cells(a)
    existing = {r.tobytes() for r in cells.signs}
    flips = flipped_cells(cells)
    assert flips
    realised = 0
    for r, f in flips:
        assert f.tobytes() not in existing
        assert np.count_nonzero(f != cells.signs[r]) in (2, 3)
        chi = _chi_with_point(a, cells.pairs, f)
        if not _exchange_ok(chi, 7):
            continue
        g = _repair(np.vstack([a.astype(float), cell_point(a, cells, r)]), chi, 4095, seed=0)
        if g is not None:
            assert np.array_equal(orientation_tensor(g), chi)
            realised += 1
    assert realised
