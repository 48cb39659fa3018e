"""Convex hull recovery from a separating matrix alone.

For a hull of size k in an n-point configuration, the matrix entries along
the hull cycle add up to exactly (n - k)(n - 1).  Every other cycle on the
hull vertices scores more, and every other subset in convex position
scores less.  So a subset whose cheapest Hamiltonian cycle hits that
target is a hull candidate.  Non-convex subsets can hit it too ("fake"
hulls), which is why :func:`general_hull_search` returns every hit at the
smallest size and why the two row-sum filters exist.

Tie-breaking is lexicographic by index everywhere: subsets are enumerated
in lexicographic order, cycles are written starting at their smallest
index with the second element smaller than the last, and among equal
scores the lexicographically smallest cycle wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator, Sequence

import numpy as np

from .geometry import Configuration, convex_hull
from .matrix import SeparatingMatrix, row_sums

CONFIRMED_SIZE3 = "confirmed-size-3"
CANDIDATE = "candidate"
FILTERED_OUT = "filtered-out"
FAKE = "fake"
TRUE_HULL = "true-hull"

# Upper bound on gathered elements per numpy batch in the subset scans.
_BATCH_ELEMENTS = 1 << 22


class InconsistentMatrixError(ValueError):
    """Two different triples reach the size-3 target; no configuration has such a matrix."""


class SearchExhaustedError(RuntimeError):
    """No subset size up to the limit produced an (accepted) candidate."""

    def __init__(self, message, rejected=()):
        super().__init__(message)
        self.rejected = list(rejected)


def target(n: int, k: int) -> int:
    """Hull cycle sum for hull size k: (n - k)(n - 1) = n^2 - (k + 1)n + k."""
    if not 3 <= k <= n:
        raise ValueError(f"need 3 <= k <= n, got k={k}, n={n}")
    return (n - k) * (n - 1)


@dataclass(frozen=True)
class CycleScore:
    subset: tuple[int, ...]
    order: tuple[int, ...]
    score: int

    @property
    def k(self) -> int:
        return len(self.subset)


@dataclass(frozen=True)
class HullCandidate:
    cycle: CycleScore
    status: str = CANDIDATE
    filters: dict = field(default_factory=dict, compare=False)
    verdict: str | None = None  # "true" or "fake" once checked against geometry

    @property
    def k(self) -> int:
        return self.cycle.k

    @property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.cycle.subset)

    def to_dict(self) -> dict:
        d = {
            "indices": list(self.cycle.subset),
            "order": list(self.cycle.order),
            "score": self.cycle.score,
            "status": self.status,
            "filters": dict(self.filters),
        }
        if self.verdict is not None:
            d["verdict"] = self.verdict
        return d


@dataclass(frozen=True)
class RecoveryResult:
    n: int
    k: int
    candidates: tuple[HullCandidate, ...]
    filters_applied: bool = False
    rejected: tuple[HullCandidate, ...] = ()  # filtered-out hits at sizes below k

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "target": target(self.n, self.k),
            "filters_applied": self.filters_applied,
            "candidates": [c.to_dict() for c in self.candidates],
            "rejected": [c.to_dict() for c in self.rejected],
        }

    def format(self) -> str:
        lines = [f"n {self.n}, size {self.k}, target {target(self.n, self.k)}"]
        for c in self.rejected + self.candidates:
            f = " ".join(f"{name}={'pass' if ok else 'fail'}" for name, ok in c.filters.items() if ok is not None)
            lines.append(
                f"size {c.k}, vertices {' '.join(map(str, c.cycle.subset))}, "
                f"order {' '.join(map(str, c.cycle.order))}, score {c.cycle.score}, {c.status}"
                + (f", {f}" if f else "")
                + (f", oracle {c.verdict}" if c.verdict else "")
            )
        return "\n".join(lines) + "\n"


def _entries(matrix) -> np.ndarray:
    return matrix.entries if isinstance(matrix, SeparatingMatrix) else np.asarray(matrix, dtype=np.int64)


def cycle_score(matrix, order: Sequence[int]) -> int:
    """Sum of entries over consecutive pairs of ``order``, wrap-around edge included."""
    order = list(order)
    if len(order) < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    if len(set(order)) != len(order):
        raise ValueError(f"duplicate index in cycle {order}")
    s = _entries(matrix)
    return int(sum(s[order[t], order[(t + 1) % len(order)]] for t in range(len(order))))


@lru_cache(maxsize=None)
def cycle_table(k: int) -> np.ndarray:
    """Distinct Hamiltonian cycles on positions 0..k-1, shape ((k-1)!/2, k).

    Each row starts at 0 and has row[1] < row[-1]; rows are in
    lexicographic order.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    rows = [(0,) + p for p in permutations(range(1, k)) if p[0] < p[-1]]
    t = np.array(rows, dtype=np.intp)
    t.flags.writeable = False
    return t


def _scores_for_subsets(s: np.ndarray, subsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min cycle score and argmin cycle row for each row of ``subsets`` (all of size k)."""
    m, k = subsets.shape
    cyc = cycle_table(k)
    nxt = np.roll(cyc, -1, axis=1)
    best = np.empty(m, dtype=np.int64)
    arg = np.empty(m, dtype=np.intp)
    step = max(1, _BATCH_ELEMENTS // (len(cyc) * k))
    for lo in range(0, m, step):
        sub = subsets[lo:lo + step]
        w = s[sub[:, :, None], sub[:, None, :]]  # (b, k, k) submatrices
        tot = np.zeros((len(sub), len(cyc)), dtype=np.int64)
        for t in range(k):
            tot += w[:, cyc[:, t], nxt[:, t]]
        best[lo:lo + step] = tot.min(axis=1)
        arg[lo:lo + step] = tot.argmin(axis=1)
    return best, arg


@lru_cache(maxsize=None)
def subset_table(n: int, k: int) -> np.ndarray:
    t = np.array(list(combinations(range(n), k)), dtype=np.intp).reshape(-1, k)
    t.flags.writeable = False
    return t


def min_cycle(matrix, subset: Sequence[int]) -> CycleScore:
    """Cheapest Hamiltonian cycle on ``subset`` by exhaustive search over (k-1)!/2 cycles."""
    sub = sorted(subset)
    if len(set(sub)) != len(sub):
        raise ValueError(f"duplicate index in subset {list(subset)}")
    s = _entries(matrix)
    if len(sub) < 3 or len(sub) > s.shape[0] or sub[0] < 0 or sub[-1] >= s.shape[0]:
        raise ValueError(f"subset {list(subset)} invalid for n={s.shape[0]}")
    arr = np.array([sub], dtype=np.intp)
    best, arg = _scores_for_subsets(s, arr)
    order = tuple(int(sub[t]) for t in cycle_table(len(sub))[arg[0]])
    return CycleScore(tuple(sub), order, int(best[0]))


def min_cycles_of_size(matrix, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All k-subsets in lexicographic order, their min cycle scores and optimal orders."""
    s = _entries(matrix)
    subsets = subset_table(s.shape[0], k)
    best, arg = _scores_for_subsets(s, subsets)
    orders = np.take_along_axis(subsets, cycle_table(k)[arg], axis=1)
    return subsets, best, orders


def hits_of_size(matrix, k: int) -> list[CycleScore]:
    """Every k-subset whose min cycle score equals target(n, k), lexicographic order."""
    n = _entries(matrix).shape[0]
    subsets, best, orders = min_cycles_of_size(matrix, k)
    tgt = target(n, k)
    return [
        CycleScore(tuple(int(v) for v in subsets[i]), tuple(int(v) for v in orders[i]), tgt)
        for i in np.flatnonzero(best == tgt)
    ]


def detect_hull_size3(matrix) -> tuple[int, int, int] | None:
    """The triple whose pairwise entries sum to n^2 - 4n + 3, or None if the hull is larger.

    O(n^3).  Raises :class:`InconsistentMatrixError` if more than one
    triple reaches the target.
    """
    s = _entries(matrix)
    n = s.shape[0]
    tgt = target(n, 3)
    found = None
    for i, j, k in combinations(range(n), 3):
        if s[i, j] + s[i, k] + s[j, k] == tgt:
            if found is not None:
                raise InconsistentMatrixError(f"triples {found} and {(i, j, k)} both sum to {tgt}")
            found = (i, j, k)
    return found


def row_sum_filter(matrix, candidate: HullCandidate) -> bool:
    """Pass iff every candidate row sum is >= every row sum outside the candidate."""
    sums = row_sums(matrix) if isinstance(matrix, SeparatingMatrix) else [int(v) for v in _entries(matrix).sum(axis=1)]
    inside = candidate.vertex_set
    outside = [sums[t] for t in range(len(sums)) if t not in inside]
    if not outside:
        return True
    return min(sums[t] for t in inside) >= max(outside)


def combined_filter(matrix, candidate: HullCandidate) -> bool:
    """Fallback for candidates failing :func:`row_sum_filter`.

    m is the number of candidate rows tied at the candidate's smallest row
    sum.  Rows are ranked by row sum, descending, ties by index ascending;
    pass iff all k candidate rows sit within the first k + m ranks.
    """
    sums = [int(v) for v in _entries(matrix).sum(axis=1)]
    inside = sorted(candidate.vertex_set)
    low = min(sums[t] for t in inside)
    m = sum(1 for t in inside if sums[t] == low)
    ranking = sorted(range(len(sums)), key=lambda t: (-sums[t], t))
    top = set(ranking[: len(inside) + m])
    return all(t in top for t in inside)


def apply_filters(matrix, candidate: HullCandidate) -> HullCandidate:
    """Run the row-sum filter and, if it fails, the combined filter; record both outcomes.

    A confirmed size-3 hull keeps its status whatever the heuristics say:
    the size-3 test is exact.
    """
    rs = row_sum_filter(matrix, candidate)
    comb_ok = None if rs else combined_filter(matrix, candidate)
    ok = rs or bool(comb_ok) or candidate.status == CONFIRMED_SIZE3
    status = candidate.status if ok else FILTERED_OUT
    return replace(candidate, status=status, filters={"row-sum": rs, "combined": comb_ok})


def general_hull_search(matrix, max_k: int | None = None, filters: bool = False) -> RecoveryResult:
    """Grow k from 3 and return every target-hitting k-subset at the first k that has one.

    With ``filters`` on, hits are screened by :func:`apply_filters` and the
    search moves on to k + 1 while no hit survives; screened-out hits are
    kept in ``RecoveryResult.rejected``.  Raises
    :class:`SearchExhaustedError` if nothing qualifies up to ``max_k``
    (default n).
    """
    s = _entries(matrix)
    n = s.shape[0]
    max_k = n if max_k is None else min(max_k, n)
    rejected: list[HullCandidate] = []
    for k in range(3, max_k + 1):
        status = CONFIRMED_SIZE3 if k == 3 else CANDIDATE
        cands = [HullCandidate(c, status) for c in hits_of_size(s, k)]
        if not cands:
            continue
        if filters:
            cands = [apply_filters(s, c) for c in cands]
            kept = [c for c in cands if c.status != FILTERED_OUT]
            if not kept:
                rejected.extend(cands)
                continue
            rejected.extend(c for c in cands if c.status == FILTERED_OUT)
            cands = kept
        return RecoveryResult(n, k, tuple(cands), filters, tuple(rejected))
    raise SearchExhaustedError(f"no candidate hull of size <= {max_k}", rejected)


def iter_all_hits(matrix, max_k: int | None = None) -> Iterator[CycleScore]:
    """Every target-hitting subset of every size 3..max_k (census helper)."""
    n = _entries(matrix).shape[0]
    for k in range(3, (n if max_k is None else max_k) + 1):
        yield from hits_of_size(matrix, k)


def classify_against_oracle(config: Configuration, result: RecoveryResult) -> list[HullCandidate]:
    """Mark each candidate (and rejected hit) true or fake by comparing with the geometric hull."""
    hull = convex_hull(config).vertex_set

    def mark(c: HullCandidate) -> HullCandidate:
        real = c.vertex_set == hull
        status = c.status if real or c.status == FILTERED_OUT else FAKE
        return replace(c, status=status, verdict="true" if real else "fake")

    return [mark(c) for c in result.rejected + result.candidates]

