import json

import pytest

from sepmatrix.census import Source, aggregate, analyse, census_records, run_census

from conftest import HULL_BELOW_INTERIOR, SQUARE, TRIANGLE_PLUS, db_path

# record indices of the generated 7-point file whose plain search stops below the hull size
FAKE_INDICES_7 = [63, 77, 81, 108, 111, 121, 122, 123, 124, 125, 126, 127, 128, 130, 131, 132]


def test_analyse_small():
    r = analyse(0, TRIANGLE_PLUS)
    assert (r.hull_size, r.first_k, r.fake_smaller, r.anomalies) == (3, 3, False, [])
    assert r.filtered_exact
    r = analyse(0, SQUARE)
    assert (r.hull_size, r.first_k) == (4, 4)
    assert r.hull_rowsum and r.hull_combined is None


def test_random_source_deterministic():
    src = Source.random(8, 5, seed=3)
    a = [c for _, c in src.configs(0, 5)]
    assert a == [c for _, c in src.configs(0, 5)]
    assert [c for _, c in src.configs(2, 4)] == a[2:4]


def test_chunking_and_workers_do_not_change_records():
    src = Source.random(7, 30, seed=11)
    base = census_records(src, jobs=1)
    assert census_records(src, jobs=1, chunk=7) == base
    assert census_records(src, jobs=3, chunk=4) == base
    assert [r.index for r in base] == list(range(30))


def test_report_text_and_json():
    rep = run_census(Source.random(6, 20, seed=1))
    d = json.loads(rep.to_json())
    assert d["total"] == 20 and d["n"] == 6
    assert sum(d["hull_sizes"].values()) == 20
    assert "fakes" in rep.format() and "row-sum filter" in rep.format()
    plain = aggregate(Source.random(6, 20, seed=1), census_records(Source.random(6, 20, seed=1)), filters=False)
    assert plain.filter_stats == {} and "row-sum" not in plain.format()


def test_unrescued_hull_is_reported():
    r = analyse(4, HULL_BELOW_INTERIOR)
    assert (r.hull_size, r.hull_rowsum, r.hull_combined, r.filtered_size_ok) == (4, False, False, False)
    rep = aggregate(Source.random(9, 1, seed=0), [r])
    assert rep.filter_stats["true_hulls_rejected_rowsum"] == 1
    assert rep.filter_stats["true_hulls_rescued_combined"] == 0
    assert rep.unrescued_hull_indices == [4]
    assert "discrepancy: 1 true hulls fail both filters, records 4" in rep.format()
    ok = aggregate(Source.random(4, 1, seed=0), [analyse(0, SQUARE)])
    assert ok.unrescued_hull_indices == [] and "discrepancy" not in ok.format()


def test_worker_failure_is_recorded(monkeypatch):
    import sepmatrix.census as census

    def boom(i, cfg, full_scan=False):
        if i == 2:
            raise RuntimeError("bad record")
        return analyse(i, cfg, full_scan)

    monkeypatch.setattr(census, "analyse", boom)
    rep = run_census(Source.random(5, 4, seed=0))
    assert rep.total == 4
    assert rep.failures == [{"index": 2, "anomalies": ["RuntimeError: bad record"]}]


def test_seven_point_census_frozen():
    path = db_path(7)
    if path is None:
        pytest.skip("no 7-point database file")
    rep = run_census(Source.database(path, 7))
    assert rep.fake_indices == FAKE_INDICES_7
    assert rep.hull_sizes == {"3": 49, "4": 59, "5": 22, "6": 4, "7": 1}
    assert rep.filter_stats["fake_subsets_rejected_rowsum"] == rep.filter_stats["fake_subsets"]
    assert rep.filter_stats["true_hulls_rejected_rowsum"] == 0
    assert rep.filter_stats["filtered_size_correct"] == 135
    assert rep.failures == []


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_no_fakes_below_seven(n):
    path = db_path(n)
    if path is None:
        pytest.skip(f"no {n}-point database file")
    rep = run_census(Source.database(path, n))
    assert rep.fakes == 0 and rep.failures == []
