"""Exact integer planar primitives.

Everything here works on integer coordinates and integer determinants, so
no predicate can be wrong because of rounding.  Coordinates are limited to
``|x|, |y| <= COORD_LIMIT`` (2**24): coordinate differences then fit in 25
bits and every orientation determinant fits comfortably in a signed 64-bit
integer, which keeps the vectorised numpy paths elsewhere in the package
exact as well.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

COORD_LIMIT = 1 << 24


class GeneralPositionError(ValueError):
    """Raised when three points of an input are collinear (or coincide)."""


@dataclass(frozen=True, slots=True)
class Point:
    x: int
    y: int

    def __post_init__(self):
        for v in (self.x, self.y):
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"coordinates must be int, got {v!r}")
            if abs(v) > COORD_LIMIT:
                raise ValueError(f"coordinate {v} exceeds the exact-arithmetic bound 2**24")

    def __iter__(self):
        yield self.x
        yield self.y


def orientation(a: Point, b: Point, c: Point) -> int:
    """Sign of the determinant |b-a, c-a|: +1 counterclockwise, -1 clockwise, 0 collinear."""
    d = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (d > 0) - (d < 0)


def separates(a: Point, b: Point, p: Point, q: Point) -> bool:
    """True iff the line through a and b puts p and q in opposite open half-planes."""
    sp = orientation(a, b, p)
    sq = orientation(a, b, q)
    if sp == 0 or sq == 0:
        raise GeneralPositionError(f"point on line through {tuple(a)} and {tuple(b)}")
    return sp != sq


def _as_point(p) -> Point:
    return p if isinstance(p, Point) else Point(*p)


@dataclass(frozen=True)
class Configuration:
    """An ordered planar point set with no three points collinear.

    Points are referred to by their 0-based position everywhere else in the
    package.  Construction verifies general position over all triples.
    """

    points: tuple[Point, ...]

    def __init__(self, points: Iterable):
        pts = tuple(_as_point(p) for p in points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 3:
            raise ValueError(f"a configuration needs at least 3 points, got {len(pts)}")
        bad = find_collinear_triple(pts)
        if bad is not None:
            raise GeneralPositionError(f"points {bad[0]}, {bad[1]}, {bad[2]} are collinear")

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    def permuted(self, perm: Sequence[int]) -> "Configuration":
        """New configuration whose point t is this configuration's point perm[t]."""
        return Configuration([self.points[i] for i in perm])


def find_collinear_triple(points: Sequence[Point]) -> tuple[int, int, int] | None:
    """First index triple (lexicographic) with zero orientation, or None.

    Coincident points count as collinear.
    """
    for i, j, k in combinations(range(len(points)), 3):
        if orientation(points[i], points[j], points[k]) == 0:
            return (i, j, k)
    return None


@dataclass(frozen=True)
class HullCycle:
    """Convex hull vertices in counterclockwise order, starting at the smallest index."""

    indices: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.indices)


def canonical_ccw(indices: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cyclic sequence so that it starts at its smallest element."""
    s = indices.index(min(indices))
    return tuple(indices[s:]) + tuple(indices[:s])


def separating_count(config: Configuration, i: int, j: int) -> int:
    """Number of lines through two other points of ``config`` that separate points i and j."""
    n = config.n
    if i == j:
        raise ValueError("separating_count needs two distinct indices")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"index out of range for n={n}")
    pts = config.points
    p, q = pts[i], pts[j]
    rest = [pts[t] for t in range(n) if t != i and t != j]
    return sum(1 for a, b in combinations(rest, 2) if separates(a, b, p, q))


def convex_hull(config: Configuration) -> HullCycle:
    """Exact convex hull (monotone chain) as a counterclockwise cycle of indices."""
    pts = config.points
    order = sorted(range(config.n), key=lambda t: (pts[t].x, pts[t].y))

    def chain(seq):
        out: list[int] = []
        for t in seq:
            while len(out) >= 2 and orientation(pts[out[-2]], pts[out[-1]], pts[t]) <= 0:
                out.pop()
            out.append(t)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    return HullCycle(canonical_ccw(lower[:-1] + upper[:-1]))


def in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool:
    """Strict containment of p in triangle abc (either orientation)."""
    s1 = orientation(a, b, p)
    s2 = orientation(b, c, p)
    s3 = orientation(c, a, p)
    return s1 == s2 == s3 != 0


def hull_vertices_by_containment(config: Configuration) -> frozenset[int]:
    """Brute-force hull oracle: a point is a hull vertex iff no triangle of other points contains it.

    O(n^4) and independent of :func:`convex_hull`; used to check it.
    """
    pts = config.points
    n = config.n
    out = set()
    for p in range(n):
        others = [t for t in range(n) if t != p]
        if not any(in_triangle(pts[p], pts[a], pts[b], pts[c]) for a, b, c in combinations(others, 3)):
            out.add(p)
    return frozenset(out)


def in_convex_position(config: Configuration, subset: Iterable[int]) -> bool:
    """True iff no point of ``subset`` lies inside a triangle of three other subset points."""
    idx = list(subset)
    pts = config.points
    for p in idx:
        others = [t for t in idx if t != p]
        for a, b, c in combinations(others, 3):
            if in_triangle(pts[p], pts[a], pts[b], pts[c]):
                return False
    return True


def convex_order(config: Configuration, subset: Iterable[int]) -> tuple[int, ...]:
    """Counterclockwise cyclic order of a subset in convex position."""
    idx = list(subset)
    sub = Configuration([config.points[t] for t in idx])
    return canonical_ccw([idx[t] for t in convex_hull(sub).indices])


def random_configuration(n: int, seed: int, coord_bound: int, max_tries: int = 10_000) -> Configuration:
    """Uniform integer points in [-coord_bound, coord_bound]^2 in general position.

    Points are drawn one at a time and a draw is rejected if it coincides
    with, or is collinear with, points already accepted.  ``max_tries``
    rejections in a row raise ``RuntimeError`` (the box is too small for n).
    Deterministic in (n, seed, coord_bound).
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if not 1 <= coord_bound <= COORD_LIMIT:
        raise ValueError(f"coord_bound must be in [1, 2**24], got {coord_bound}")
    rng = random.Random(seed)
    pts: list[Point] = []
    while len(pts) < n:
        for _ in range(max_tries):
            c = Point(rng.randint(-coord_bound, coord_bound), rng.randint(-coord_bound, coord_bound))
            if all(orientation(a, b, c) != 0 for a, b in combinations(pts, 2)) and c not in pts:
                pts.append(c)
                break
        else:
            raise RuntimeError(
                f"no point in general position found after {max_tries} tries "
                f"(n={n}, coord_bound={coord_bound}); enlarge coord_bound"
            )
    return Configuration(pts)


def parse_points(text: str) -> Configuration:
    """Parse the plain-text point format: a line ``n`` then n lines ``x y``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty point file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"line 1: expected point count, got {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} point lines, found {len(lines) - 1}")
    pts = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'x y', got {ln!r}")
        try:
            pts.append(Point(int(parts[0]), int(parts[1])))
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return Configuration(pts)


def format_points(config: Configuration) -> str:
    return "".join([f"{config.n}\n"] + [f"{p.x} {p.y}\n" for p in config.points])
