"""Separating matrices: construction, Orchard parity classes and screening.

The (i, j) entry of the separating matrix counts the lines through two
other points of the configuration that separate points i and j.  Genuine
matrices satisfy a handful of necessary conditions (symmetry, zero
diagonal, an entry bound and two parity constraints coming from the
Orchard relation); :func:`validate` checks those on arbitrary input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .geometry import Configuration, separating_count

CHECK_IDS = ("symmetry", "zero-diagonal", "max-entry", "parity-count", "parity-transitivity")


class NotEquivalenceError(ValueError):
    """The Orchard parity relation of a matrix is not an equivalence with at most two classes."""


def max_entry(n: int) -> int:
    return comb(n - 2, 2)


@dataclass(frozen=True, eq=False)
class SeparatingMatrix:
    """Symmetric, zero-diagonal, bounded nonnegative integer matrix.

    Construction enforces those structural invariants only; the parity
    conditions are left to :func:`validate`.  ``entries`` is a read-only
    int64 array.
    """

    entries: np.ndarray = field(repr=False)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        n = a.shape[0]
        if n < 3:
            raise ValueError("matrix order must be at least 3")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix is not symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("matrix diagonal is not zero")
        if a.min() < 0 or a.max() > max_entry(n):
            raise ValueError(f"entries must lie in [0, {max_entry(n)}]")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, ij) -> int:
        return int(self.entries[ij])

    def __eq__(self, other):
        return isinstance(other, SeparatingMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def permuted(self, perm: Sequence[int]) -> "SeparatingMatrix":
        p = np.asarray(perm)
        return SeparatingMatrix(self.entries[np.ix_(p, p)])


def compute_matrix(config: Configuration) -> SeparatingMatrix:
    """Reference construction: one :func:`separating_count` per pair, O(n^4) orientation tests."""
    n = config.n
    s = [[0] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        s[i][j] = s[j][i] = separating_count(config, i, j)
    return SeparatingMatrix(s)


def orientation_tensor(coords: np.ndarray) -> np.ndarray:
    """int8 array ``o[a, b, c]`` = orientation sign of points a, b, c (exact in int64)."""
    xy = np.asarray(coords, dtype=np.int64)
    x, y = xy[:, 0], xy[:, 1]
    dx = x[None, :] - x[:, None]
    dy = y[None, :] - y[:, None]
    det = dx[:, :, None] * dy[:, None, :] - dy[:, :, None] * dx[:, None, :]
    return np.sign(det).astype(np.int8)


def separating_entries(coords: np.ndarray) -> np.ndarray:
    """Vectorised separating matrix of an (n, 2) integer array; no general-position check.

    Same counts as :func:`compute_matrix` (cross-checked in the tests); the
    census uses this path for speed.
    """
    o = orientation_tensor(coords).astype(np.int16)
    n = o.shape[0]
    iu = np.triu_indices(n, 1)
    lines = o[iu[0], iu[1], :]  # (pairs, n): side of each point w.r.t. each line
    opposite = (lines[:, :, None] * lines[:, None, :]) < 0
    return opposite.sum(axis=0, dtype=np.int64)


def compute_matrix_fast(config: Configuration) -> SeparatingMatrix:
    return SeparatingMatrix(separating_entries([(p.x, p.y) for p in config.points]))


@dataclass(frozen=True)
class OrchardPartition:
    """Class label (0 or 1) for each point; point 0 is always in class 0."""

    class_of: tuple[int, ...]

    @property
    def sizes(self) -> tuple[int, int]:
        ones = sum(self.class_of)
        return (len(self.class_of) - ones, ones)

    def classes(self) -> list[list[int]]:
        return [[i for i, c in enumerate(self.class_of) if c == lab] for lab in (0, 1) if lab in self.class_of]


def orchard_partition(matrix: SeparatingMatrix) -> OrchardPartition:
    """Partition induced by i ~ j iff entry(i, j) == n - 1 (mod 2).

    Raises :class:`NotEquivalenceError` if that relation is not an
    equivalence relation with at most two classes.
    """
    s = matrix.entries
    n = matrix.n
    same = (s % 2) == ((n - 1) % 2)
    labels = tuple(0 if (j == 0 or same[0, j]) else 1 for j in range(n))
    for i, j in combinations(range(n), 2):
        if bool(same[i, j]) != (labels[i] == labels[j]):
            raise NotEquivalenceError(
                f"entries ({0},{i})={s[0, i]}, ({0},{j})={s[0, j]}, ({i},{j})={s[i, j]} "
                f"violate the parity relation for n={n}"
            )
    return OrchardPartition(labels)


@dataclass(frozen=True)
class Check:
    id: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, check_id: str) -> Check:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def failed(self) -> list[str]:
        return [c.id for c in self.checks if not c.passed]

    def format(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.id}: {c.detail}" for c in self.checks]
        if self.overall:
            lines.append("necessary conditions satisfied")
        else:
            lines.append("necessary conditions violated: " + ", ".join(self.failed()))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [{"id": c.id, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def admissible_parity_counts(n: int) -> list[int]:
    return sorted({i * (n - i) for i in range(n + 1)})


def validate(matrix) -> ValidationReport:
    """Screen a raw square integer matrix against the necessary conditions.

    Accepts anything ``np.array`` turns into a square integer matrix of
    order >= 3, including a :class:`SeparatingMatrix`.  Failures are
    reported, not raised.  The parity checks read the strict upper
    triangle, so they stay meaningful for non-symmetric input.  Passing
    every check does not mean the matrix is realised by a configuration.
    """
    if isinstance(matrix, SeparatingMatrix):
        matrix = matrix.entries
    a = np.array(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] < 3:
        raise ValueError("matrix order must be at least 3")
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError("matrix entries must be integers")
    a = a.astype(np.int64)
    n = a.shape[0]
    checks = []

    asym = [(i, j) for i, j in combinations(range(n), 2) if a[i, j] != a[j, i]]
    checks.append(Check("symmetry", not asym,
                        "symmetric" if not asym else f"{len(asym)} asymmetric pairs, first {asym[0]}"))

    nz = [i for i in range(n) if a[i, i] != 0]
    checks.append(Check("zero-diagonal", not nz,
                        "diagonal is zero" if not nz else f"nonzero diagonal at rows {nz}"))

    bound = max_entry(n)
    out = [(int(i), int(j)) for i, j in zip(*np.nonzero((a < 0) | (a > bound)))]
    checks.append(Check("max-entry", not out,
                        f"all entries in [0, {bound}]" if not out
                        else f"entry {out[0]} = {a[out[0]]} outside [0, {bound}]"))

    odd_parity = (n - 1) % 2
    upper = [int(a[i, j]) for i, j in combinations(range(n), 2)]
    opposite = sum(1 for v in upper if v % 2 != odd_parity)
    allowed = admissible_parity_counts(n)
    kind = "even" if n % 2 == 0 else "odd"
    checks.append(Check("parity-count", opposite in allowed,
                        f"{opposite} {kind} upper-triangle entries; admissible counts i(n-i): {allowed}"))

    def u(i, j):
        return int(a[min(i, j), max(i, j)])

    bad = None
    for j in range(n):
        for i, k in combinations([t for t in range(n) if t != j], 2):
            want = (n - 1) % 2 if (u(i, j) - u(j, k)) % 2 == 0 else n % 2
            if u(i, k) % 2 != want:
                bad = (i, j, k)
                break
        if bad:
            break
    checks.append(Check("parity-transitivity", bad is None,
                        "parity transitivity holds for all triples" if bad is None
                        else f"triple {bad} violates parity transitivity"))
    return ValidationReport(tuple(checks))


def row_sums(matrix: SeparatingMatrix) -> list[int]:
    return [int(v) for v in matrix.entries.sum(axis=1)]


def parse_matrix(text: str) -> np.ndarray:
    """Parse the matrix text format (``n`` then n rows of n integers) into a raw int64 array."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"line 1: expected matrix order, got {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            row = [int(v) for v in ln.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer entry in {ln!r}") from None
        if len(row) != n:
            raise ValueError(f"line {lineno}: expected {n} entries, got {len(row)}")
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(n, n)


def format_matrix(matrix) -> str:
    a = matrix.entries if isinstance(matrix, SeparatingMatrix) else np.asarray(matrix)
    return f"{a.shape[0]}\n" + "".join(" ".join(str(int(v)) for v in row) + "\n" for row in a)
