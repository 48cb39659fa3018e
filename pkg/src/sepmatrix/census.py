"""Fake-hull census over a database file or a random sample.

Every record is processed independently: separating matrix from the
points, every target-hitting subset of every size, the geometric hull, and
the filter verdicts.  Workers return per-record summaries keyed by record
index, and the report is assembled in index order.  The output therefore
does not depend on how many workers ran.

Terminology used in the report:

``fake`` (primary count)
    The plain search (smallest size with a hit) stops below the hull size,
    so it reports a wrong hull size.
``fake, same size included``
    The plain search returns some subset that is not the hull, possibly
    next to the hull itself.
``fake subsets``
    Hitting subsets smaller than the hull, i.e. the hits a filtered search
    has to get past before it reaches the hull size.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Configuration, convex_hull, random_configuration
from .matrix import SeparatingMatrix, orientation_tensor, separating_entries
from .otdb import DatabaseReader
from .recovery import (
    FILTERED_OUT,
    CycleScore,
    HullCandidate,
    SearchExhaustedError,
    apply_filters,
    cycle_score,
    general_hull_search,
    iter_all_hits,
    target,
)

log = logging.getLogger(__name__)

RANDOM_COORD_BOUND = 1000


@dataclass
class RecordSummary:
    index: int
    n: int
    hull_size: int = 0
    first_k: int = 0
    fake_smaller: bool = False  # smallest hitting size is below the hull size
    fake_first: bool = False  # the plain search returns some non-hull subset
    fake_any: bool = False  # some non-hull subset of any scanned size hits its target
    fake_sizes: list[int] = field(default_factory=list)
    fake_subsets: int = 0
    fake_subsets_rowsum_rejected: int = 0
    fake_subsets_accepted: int = 0  # passing the row-sum or the combined filter
    hull_rowsum: bool = True
    hull_combined: bool | None = None
    filtered_size_ok: bool = False  # filtered search stops at the hull size with the hull among its candidates
    filtered_exact: bool = False  # ... and the hull is its only candidate
    anomalies: list[str] = field(default_factory=list)


def _convex_position(chi: np.ndarray, subset) -> bool:
    idx = np.asarray(subset)
    o = chi[np.ix_(idx, idx, idx)]
    # o[a, b, p] == o[b, c, p] == o[c, a, p] means p is inside triangle abc
    ab = o[:, :, None, :]
    bc = o[None, :, :, :]
    ca = np.transpose(o, (1, 0, 2))[:, None, :, :]
    inside = (ab == bc) & (bc == ca) & (ab != 0)
    return not inside.any()


def analyse(index: int, config: Configuration, full_scan: bool = False) -> RecordSummary:
    """Census summary of one configuration.

    Hits are scanned up to the hull size (all a filtered search can meet
    while the hull survives the filters), or up to n with ``full_scan``.
    """
    n = config.n
    xy = np.array([(p.x, p.y) for p in config.points], dtype=np.int64)
    s = SeparatingMatrix(separating_entries(xy))
    chi = orientation_tensor(xy)
    hull = convex_hull(config)
    hull_set = hull.vertex_set
    k = hull.k
    anomalies = []

    score = cycle_score(s, hull.indices)
    if score != target(n, k):
        anomalies.append(f"hull cycle score {score} != target {target(n, k)}")

    hits = list(iter_all_hits(s, n if full_scan else k))
    if not any(frozenset(h.subset) == hull_set for h in hits):
        anomalies.append("true hull does not reach its target")
    first_k = min(h.k for h in hits) if hits else 0
    fakes = [h for h in hits if frozenset(h.subset) != hull_set]
    for f in fakes:
        if _convex_position(chi, f.subset):
            anomalies.append(f"fake {f.subset} is in convex position")

    smaller = [apply_filters(s, HullCandidate(f)) for f in fakes if f.k < k]
    hull_cand = apply_filters(s, HullCandidate(CycleScore(tuple(sorted(hull_set)), hull.indices, score)))
    size_ok = exact = False
    try:
        res = general_hull_search(s, filters=True)
        size_ok = res.k == k and any(c.vertex_set == hull_set for c in res.candidates)
        exact = size_ok and len(res.candidates) == 1
    except SearchExhaustedError:
        anomalies.append("filtered search exhausted")

    return RecordSummary(
        index=index,
        n=n,
        hull_size=k,
        first_k=first_k,
        fake_smaller=first_k < k,
        fake_first=any(f.k == first_k for f in fakes),
        fake_any=bool(fakes),
        fake_sizes=sorted({f.k for f in fakes}),
        fake_subsets=len(smaller),
        fake_subsets_rowsum_rejected=sum(1 for f in smaller if not f.filters["row-sum"]),
        fake_subsets_accepted=sum(1 for f in smaller if f.status != FILTERED_OUT),
        hull_rowsum=hull_cand.filters["row-sum"],
        hull_combined=hull_cand.filters["combined"],
        filtered_size_ok=size_ok,
        filtered_exact=exact,
        anomalies=anomalies,
    )


@dataclass(frozen=True)
class Source:
    """Where census records come from: a database file or seeded random configurations."""

    n: int
    count: int
    path: str | None = None
    seed: int = 0
    coord_bound: int = RANDOM_COORD_BOUND
    byteorder: str | None = None

    @classmethod
    def database(cls, path, n: int, byteorder: str | None = None) -> "Source":
        reader = DatabaseReader(path, n, byteorder)
        return cls(n=n, count=len(reader), path=str(path), byteorder=reader.byteorder)

    @classmethod
    def random(cls, n: int, count: int, seed: int, coord_bound: int = RANDOM_COORD_BOUND) -> "Source":
        return cls(n=n, count=count, seed=seed, coord_bound=coord_bound)

    def configs(self, start: int, stop: int):
        if self.path is not None:
            for rec in DatabaseReader(self.path, self.n, self.byteorder).records(start, stop):
                yield rec.index, rec.config
        else:
            for i in range(start, stop):
                # seeds are spread so neighbouring samples do not share generator streams
                yield i, random_configuration(self.n, self.seed * 1_000_003 + i, self.coord_bound)


def _work(source: Source, start: int, stop: int, full_scan: bool = False) -> list[RecordSummary]:
    out = []
    for i, cfg in source.configs(start, stop):
        try:
            out.append(analyse(i, cfg, full_scan))
        except Exception as e:  # per-record failures are reported, never fatal
            out.append(RecordSummary(i, source.n, anomalies=[f"{type(e).__name__}: {e}"]))
    return out


def census_records(source: Source, jobs: int = 1, chunk: int | None = None,
                   full_scan: bool = False) -> list[RecordSummary]:
    if chunk is None:
        # a few chunks per worker for load balance, capped to keep results streaming back
        chunk = min(2000, max(1, -(-source.count // (4 * max(jobs, 1)))))
    bounds = [(lo, min(lo + chunk, source.count)) for lo in range(0, source.count, chunk)]
    if jobs <= 1 or len(bounds) <= 1:
        parts = [_work(source, lo, hi, full_scan) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_work, source, lo, hi, full_scan) for lo, hi in bounds]
            parts = [f.result() for f in futs]
    out = [r for p in parts for r in p]
    out.sort(key=lambda r: r.index)
    return out


@dataclass
class CensusReport:
    """Census totals.

    ``fakes`` counts configurations whose plain search stops below the hull
    size, i.e. reports a wrong hull size.  ``fakes_same_size_included`` also
    counts configurations where the plain search returns the hull together
    with another subset of the same size.
    """

    n: int
    total: int
    fakes: int
    fakes_same_size_included: int
    filter_stats: dict
    hull_sizes: dict
    fake_indices: list[int]
    rowsum_rejected_hull_indices: list[int]
    unrescued_hull_indices: list[int]  # true hulls failing both filters
    failures: list[dict]
    source: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def format(self) -> str:
        fs = self.filter_stats
        lines = [
            f"source {self.source}",
            f"n {self.n}",
            f"total {self.total}",
            f"fakes {self.fakes}",
            f"fakes including same-size {self.fakes_same_size_included}",
            "hull sizes " + " ".join(f"{k}:{v}" for k, v in sorted(self.hull_sizes.items(), key=lambda kv: int(kv[0]))),
        ]
        if fs:
            lines += [
                f"row-sum filter: fake subsets {fs['fake_subsets']}, rejected {fs['fake_subsets_rejected_rowsum']}; "
                f"true hulls rejected {fs['true_hulls_rejected_rowsum']}",
                f"combined filter: rejected true hulls rescued {fs['true_hulls_rescued_combined']} "
                f"of {fs['true_hulls_rejected_rowsum']}; fake subsets surviving both {fs['fake_subsets_surviving']}",
                f"filtered search: hull size correct {fs['filtered_size_correct']}, "
                f"hull unique candidate {fs['filtered_exact']} of {self.total}",
            ]
            if self.unrescued_hull_indices:
                lines.append(f"discrepancy: {len(self.unrescued_hull_indices)} true hulls fail both filters, records "
                             + " ".join(map(str, self.unrescued_hull_indices)))
        lines.append(f"failures {len(self.failures)}")
        for f in self.failures:
            lines.append(f"  record {f['index']}: {'; '.join(f['anomalies'])}")
        return "\n".join(lines) + "\n"


def aggregate(source: Source, records: list[RecordSummary], filters: bool = True) -> CensusReport:
    hull_sizes: dict[str, int] = {}
    for r in records:
        hull_sizes[str(r.hull_size)] = hull_sizes.get(str(r.hull_size), 0) + 1
    stats = {}
    if filters:
        rejected = [r for r in records if not r.hull_rowsum]
        stats = {
            "fake_subsets": sum(r.fake_subsets for r in records),
            "fake_subsets_rejected_rowsum": sum(r.fake_subsets_rowsum_rejected for r in records),
            "true_hulls_rejected_rowsum": len(rejected),
            "true_hulls_rescued_combined": sum(1 for r in rejected if r.hull_combined),
            "fake_subsets_surviving": sum(r.fake_subsets_accepted for r in records),
            "filtered_size_correct": sum(1 for r in records if r.filtered_size_ok),
            "filtered_exact": sum(1 for r in records if r.filtered_exact),
        }
    src = Path(source.path).name if source.path else f"random n={source.n} count={source.count} seed={source.seed}"
    return CensusReport(
        n=source.n,
        total=len(records),
        fakes=sum(1 for r in records if r.fake_smaller),
        fakes_same_size_included=sum(1 for r in records if r.fake_first),
        filter_stats=stats,
        hull_sizes=hull_sizes,
        fake_indices=[r.index for r in records if r.fake_smaller],
        rowsum_rejected_hull_indices=[r.index for r in records if not r.hull_rowsum] if filters else [],
        unrescued_hull_indices=[r.index for r in records if not r.hull_rowsum and not r.hull_combined] if filters else [],
        failures=[{"index": r.index, "anomalies": r.anomalies} for r in records if r.anomalies],
        source=src,
    )


def run_census(source: Source, jobs: int = 1, filters: bool = True) -> CensusReport:
    return aggregate(source, census_records(source, jobs), filters)
