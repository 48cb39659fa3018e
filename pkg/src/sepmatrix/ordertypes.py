"""Enumeration of planar order types by single-point extension.

Builds files in the order-type database layout (see :mod:`sepmatrix.otdb`)
for users who do not have the distributed files.  Every order type of n
points arises from one of n - 1 points by adding a point, and the order
type of the extension depends only on the cell of the line arrangement
(lines through pairs of old points) that the new point lies in.  So for
every known (n-1)-point realisation we list all cells of its arrangement
exactly, read off the child chirotope from the cell's sign vector, and
deduplicate children by a canonical form that is invariant under
relabelling and reflection.

Cell listing is exact integer arithmetic.  Each cell has at least one
arrangement vertex on its boundary, and the four directions +-u1 +- u2
(u1, u2 the directions of two lines through a vertex) point into every
sector around that vertex.  Completeness of the resulting list is checked
against the known counts 1, 2, 3, 16, 135, 3315, 158817 (n = 3..9).

Which cells exist depends on the realisation, not just the order type,
so one realisation per parent misses some children (555 at n = 9).  A
short level is widened by arrangement flips: a triangular or wedge cell
reverses when its lines pass through a common point, and the reversed
sign vector is a child candidate.  Candidates that satisfy the exchange
relations are realised by hill climbing from the old cell, and their
point deletions become new parent realisations for the next round.

Realisations on the 8-bit (n <= 8) or 16-bit grid are found heuristically
(affine normalisation, rounding, then a hill climb that spreads points
while keeping every orientation), and every written record is verified
exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
from numba import njit

from .matrix import orientation_tensor
from .otdb import coord_width, database_filename, record_size

log = logging.getLogger(__name__)

KNOWN_COUNTS = {3: 1, 4: 2, 5: 3, 6: 16, 7: 135, 8: 3315, 9: 158817, 10: 14309547}


def triple_table(n: int) -> np.ndarray:
    return np.array(list(combinations(range(n), 3)), dtype=np.int64).reshape(-1, 3)


@njit(cache=True)
def _is_extreme(chi, n, p):
    for q in range(n):
        if q == p:
            continue
        s0 = 0
        ok = True
        for r in range(n):
            if r == p or r == q:
                continue
            v = chi[p, q, r]
            if s0 == 0:
                s0 = v
            elif v != s0:
                ok = False
                break
        if ok:
            return True
    return False


@njit(cache=True)
def _canonical_into(chi, n, triples, out):
    """Lexicographically largest orientation signature over all extreme-point labellings."""
    T = triples.shape[0]
    perm = np.empty(n, np.int64)
    sig = np.empty(T, np.uint8)
    have = False
    for p in range(n):
        if not _is_extreme(chi, n, p):
            continue
        for s in (1, -1):
            perm[0] = p
            m = 1
            for q in range(n):
                if q != p:
                    perm[m] = q
                    m += 1
            for i in range(2, n):
                x = perm[i]
                j = i - 1
                while j >= 1 and s * chi[p, x, perm[j]] > 0:
                    perm[j + 1] = perm[j]
                    j -= 1
                perm[j + 1] = x
            state = 1 if not have else 0
            for t in range(T):
                v = 1 if s * chi[perm[triples[t, 0]], perm[triples[t, 1]], perm[triples[t, 2]]] > 0 else 0
                if state == 0:
                    if v > out[t]:
                        state = 1
                    elif v < out[t]:
                        state = -1
                        break
                sig[t] = v
            if state == 1:
                out[:] = sig
                have = True


@njit(cache=True)
def _extend_all(chi_parent, m, pairs, signs, triples, out):
    """Canonical forms of the (m+1)-point children given by each row of ``signs``."""
    n = m + 1
    chi = np.zeros((n, n, n), np.int8)
    for a in range(m):
        for b in range(m):
            for c in range(m):
                chi[a, b, c] = chi_parent[a, b, c]
    for r in range(signs.shape[0]):
        for l in range(pairs.shape[0]):
            a = pairs[l, 0]
            b = pairs[l, 1]
            v = signs[r, l]
            chi[a, b, m] = v
            chi[b, m, a] = v
            chi[m, a, b] = v
            chi[b, a, m] = -v
            chi[a, m, b] = -v
            chi[m, b, a] = -v
        _canonical_into(chi, n, triples, out[r])


def chirotope(coords) -> np.ndarray:
    return orientation_tensor(coords)


def canonical_form(coords) -> bytes:
    """Relabelling- and reflection-invariant key of the order type of an (n, 2) point array."""
    chi = chirotope(coords)
    n = chi.shape[0]
    tri = triple_table(n)
    out = np.zeros(len(tri), np.uint8)
    _canonical_into(chi, n, tri, out)
    return np.packbits(out).tobytes()


@dataclass
class Cells:
    """Sign vectors of all cells of a point set's line arrangement, with one witness ray each.

    ``signs[r, l]`` is the orientation of (p_a, p_b, q) for line l = (a, b)
    and any q in cell r.  Cell r contains the points ``vertex[r] + t * direction[r]``
    for all small t > 0, where ``vertex[r]`` is ``(X, Y) / D``.
    """

    pairs: np.ndarray
    signs: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vd: np.ndarray
    direction: np.ndarray


def arrangement_cells(coords) -> Cells:
    pts = np.asarray(coords, dtype=np.int64)
    m = len(pts)
    span = int(np.abs(pts - pts.min(axis=0)).max())
    dtype = np.int64 if span < (1 << 12) else object
    pts = (pts - pts.min(axis=0)).astype(dtype)
    pairs = np.array(list(combinations(range(m), 2)), dtype=np.int64)
    xa, ya = pts[pairs[:, 0], 0], pts[pairs[:, 0], 1]
    xb, yb = pts[pairs[:, 1], 0], pts[pairs[:, 1], 1]
    # orient(a, b, q) = A x_q + B y_q + C
    A = -(yb - ya)
    B = xb - xa
    C = (yb - ya) * xa - (xb - xa) * ya
    L = len(pairs)
    i1, i2 = np.triu_indices(L, 1)
    D = A[i1] * B[i2] - A[i2] * B[i1]
    keep = D != 0
    i1, i2, D = i1[keep], i2[keep], D[keep]
    X = B[i1] * C[i2] - B[i2] * C[i1]
    Y = C[i1] * A[i2] - C[i2] * A[i1]
    neg = D < 0
    D = np.where(neg, -D, D)
    X = np.where(neg, -X, X)
    Y = np.where(neg, -Y, Y)
    # line directions u = (B, -A)
    u1 = np.stack([B[i1], -A[i1]], axis=1)
    u2 = np.stack([B[i2], -A[i2]], axis=1)
    dirs = np.concatenate([u1 + u2, u1 - u2, -u1 + u2, -u1 - u2])
    X4, Y4, D4 = (np.tile(v, 4) for v in (X, Y, D))
    at_v = X4[:, None] * A[None, :] + Y4[:, None] * B[None, :] + D4[:, None] * C[None, :]
    along = dirs[:, 0:1] * A[None, :] + dirs[:, 1:2] * B[None, :]
    val = np.where(at_v == 0, along, at_v)
    sg = np.sign(val.astype(np.float64) if dtype is object else val).astype(np.int8)
    good = np.all(sg != 0, axis=1)
    sg = sg[good]
    _, first = np.unique(sg, axis=0, return_index=True)
    first = np.sort(first)
    idx = np.flatnonzero(good)[first]
    return Cells(pairs, sg[first], X4[idx], Y4[idx], D4[idx], dirs[idx])


def cell_point(coords, cells: Cells, r: int) -> np.ndarray:
    """A float point inside cell r: halfway from its vertex to the first line crossed along the witness ray."""
    pts = np.asarray(coords, dtype=np.float64)
    base = pts.min(axis=0)
    v = np.array([float(cells.vx[r]) / float(cells.vd[r]), float(cells.vy[r]) / float(cells.vd[r])])
    dx, dy = (int(c) for c in cells.direction[r])
    d = np.array([dx, dy], dtype=np.float64) / np.hypot(dx, dy)
    p = pts - base
    ip = np.asarray(coords, dtype=np.int64)
    iu = ip[cells.pairs[:, 1]] - ip[cells.pairs[:, 0]]
    # exact test: rays parallel to a line never cross it
    parallel = iu[:, 0] * dy - iu[:, 1] * dx == 0
    a = p[cells.pairs[:, 0]]
    u = iu.astype(np.float64)
    # orient at v + t d = f0 + t f1
    f0 = u[:, 0] * (v[1] - a[:, 1]) - u[:, 1] * (v[0] - a[:, 0])
    f1 = u[:, 0] * d[1] - u[:, 1] * d[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -f0 / f1
    scale = float(np.ptp(p, axis=0).max())
    near = np.abs(f0) <= 1e-9 * scale * scale
    t = t[(~near) & (~parallel) & np.isfinite(t) & (t > 1e-12 * scale)]
    step = 0.5 * t.min() if len(t) else scale
    return base + v + step * d


@njit(cache=True)
def _quality(xy, triples, want):
    """min over triples of (signed) smallest triangle height / diameter; <= 0 if an orientation is wrong.

    Rounding moves a point by at most half a grid diagonal, so a realisation
    survives rounding onto a grid of side g once this exceeds about 1.5 / g.
    """
    n = xy.shape[0]
    diam = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xy[i, 0] - xy[j, 0]
            dy = xy[i, 1] - xy[j, 1]
            d = dx * dx + dy * dy
            if d > diam:
                diam = d
    diam = np.sqrt(diam)
    q = 1e300
    for t in range(triples.shape[0]):
        a = triples[t, 0]
        b = triples[t, 1]
        c = triples[t, 2]
        det = (xy[b, 0] - xy[a, 0]) * (xy[c, 1] - xy[a, 1]) - (xy[b, 1] - xy[a, 1]) * (xy[c, 0] - xy[a, 0])
        side = 0.0
        for u, v in ((a, b), (b, c), (c, a)):
            d = np.sqrt((xy[u, 0] - xy[v, 0]) ** 2 + (xy[u, 1] - xy[v, 1]) ** 2)
            if d > side:
                side = d
        v = want[t] * det / (side * diam)
        if v < q:
            q = v
    return q


@njit(cache=True)
def _spread(xy, triples, want, steps, seed):
    """Random-walk hill climb raising _quality; keeps the orientation of every triple."""
    np.random.seed(seed)
    n = xy.shape[0]
    best = _quality(xy, triples, want)
    sigma = 0.05
    span = 0.0
    for i in range(n):
        for c in range(2):
            span = max(span, abs(xy[i, c] - xy[0, c]))
    for it in range(steps):
        i = np.random.randint(n)
        ox = xy[i, 0]
        oy = xy[i, 1]
        xy[i, 0] += np.random.normal() * sigma * span
        xy[i, 1] += np.random.normal() * sigma * span
        q = _quality(xy, triples, want)
        if q > best:
            best = q
        else:
            xy[i, 0] = ox
            xy[i, 1] = oy
            if it % 64 == 63:
                sigma = max(sigma * 0.9, 1e-4)
    return best


def _normalise(xy: np.ndarray) -> np.ndarray:
    """Orientation-preserving affine whitening, then fit into the unit square."""
    c = xy - xy.mean(axis=0)
    cov = np.cov(c.T)
    w, v = np.linalg.eigh(cov)
    t = v @ np.diag(1.0 / np.sqrt(np.maximum(w, 1e-300))) @ v.T
    c = c @ t.T
    c -= c.min(axis=0)
    return c / c.max()


def _round_to_grid(xy: np.ndarray, top: int) -> np.ndarray:
    u = _normalise(xy)
    return np.rint(u * top).astype(np.int64)


def integer_realisation(xy, want_chi: np.ndarray, top: int, seed: int = 0, rounds: int = 12) -> np.ndarray | None:
    """Integer coordinates in [0, top]^2 with chirotope ``want_chi``, or None if not found."""
    n = want_chi.shape[0]
    tri = triple_table(n)
    want = want_chi[tri[:, 0], tri[:, 1], tri[:, 2]].astype(np.float64)
    cur = np.array(xy, dtype=np.float64)
    for r in range(rounds + 1):
        g = _round_to_grid(cur, top)
        if np.array_equal(orientation_tensor(g), want_chi):
            return g
        if r == rounds:
            break
        if _quality(_normalise(cur), tri, want) <= 0:
            return None
        cur = _normalise(cur)
        _spread(cur, tri, want, 400 * n * (r + 1), seed + r)
    return None


@dataclass
class Level:
    n: int
    keys: list[bytes]
    coords: list[np.ndarray]  # integer realisation per order type, same order as keys


def _children_of(coords: np.ndarray, tri: np.ndarray):
    chi = chirotope(coords)
    m = len(coords)
    cells = arrangement_cells(coords)
    out = np.zeros((len(cells.signs), len(tri)), np.uint8)
    _extend_all(chi, m, cells.pairs, cells.signs, tri, out)
    keys = [k.tobytes() for k in np.packbits(out, axis=1)]
    return cells, keys


def _child_chi(coords, cells: Cells, r: int) -> np.ndarray:
    return _chi_with_point(coords, cells.pairs, cells.signs[r])


_MAX_WITNESSES = 6
_ALT_TOP = (1 << 12) - 1  # alternative realisations stay on the exact int64 path of arrangement_cells


def random_realisation(coords, rng: np.random.Generator, steps: int = 300, top: int = _ALT_TOP) -> np.ndarray:
    """Another realisation of the same order type on a (top + 1)-grid, by a random walk of single-point moves."""
    want = orientation_tensor(coords)
    g = _round_to_grid(np.asarray(coords, dtype=np.float64), top)
    if not np.array_equal(orientation_tensor(g), want):
        g = np.asarray(coords, dtype=np.int64)
    n = len(g)
    radius = max(top // 8, 1)
    for _ in range(steps):
        p = rng.integers(n)
        trial = g.copy()
        trial[p] = np.clip(trial[p] + rng.integers(-radius, radius + 1, 2), 0, top)
        if np.array_equal(orientation_tensor(trial), want):
            g = trial
    return g


class _Scan:
    """Children of a growing pool of parent realisations, with a few witness cells per child."""

    def __init__(self, n: int):
        self.n = n
        self.tri = triple_table(n)
        self.sources: list[np.ndarray] = []
        self.cells: dict[int, Cells] = {}
        self.witnesses: dict[bytes, list[tuple[int, int]]] = {}

    def add(self, coords) -> tuple[int, Cells]:
        """Scan one parent realisation; return the number of new order types and its cells."""
        s = len(self.sources)
        self.sources.append(coords)
        cells, keys = _children_of(coords, self.tri)
        used = False
        fresh = 0
        for r, k in enumerate(keys):
            w = self.witnesses.get(k)
            if w is None:
                w = self.witnesses[k] = []
                fresh += 1
            if len(w) < _MAX_WITNESSES:
                w.append((s, r))
                used = True
        if used:
            self.cells[s] = cells
        return fresh, cells

    def realise(self, keys, seed: int) -> list[np.ndarray]:
        top = (1 << coord_width(self.n)) - 1
        out = []
        for i, k in enumerate(keys):
            g = None
            for attempt, (s, r) in enumerate(self.witnesses[k]):
                base = self.sources[s]
                cells = self.cells[s]
                xy = np.vstack([base.astype(np.float64), cell_point(base, cells, r)])
                g = integer_realisation(xy, _child_chi(base, cells, r), top, seed=seed + i,
                                        rounds=12 if attempt == 0 else 30)
                if g is not None:
                    break
            if g is None:
                raise RuntimeError(f"could not realise an order type of {self.n} points on a {top + 1}-grid")
            out.append(g)
            if i % 20000 == 19999:
                log.info("n=%d: %d/%d realised", self.n, i + 1, len(keys))
        return out


@njit(cache=True)
def _exchange_ok(chi, n):
    """Three-term Grassmann-Pluecker relations of a uniform chirotope; False if one fails."""
    for a in range(n):
        for b in range(n):
            if b == a:
                continue
            for c in range(n):
                if c == a or c == b:
                    continue
                for d in range(c + 1, n):
                    if d == a or d == b:
                        continue
                    for e in range(d + 1, n):
                        if e == a or e == b:
                            continue
                        s1 = chi[a, b, c] * chi[a, d, e]
                        s2 = -chi[a, b, d] * chi[a, c, e]
                        s3 = chi[a, b, e] * chi[a, c, d]
                        if s1 == s2 and s2 == s3:
                            return False
    return True


def flipped_cells(cells: Cells) -> list[tuple[int, np.ndarray]]:
    """Sign vectors a single triangle or wedge flip of the arrangement would create.

    A cell bounded by two or three lines (a line bounds it iff reversing
    that one sign gives another cell) reverses as a whole when its lines
    pass through a common point.  Returns (cell index, new sign vector)
    for each such reversal that is not already a cell.
    """
    rows = {r.tobytes() for r in cells.signs}
    out = []
    for i, r in enumerate(cells.signs):
        bound = []
        for l in range(len(r)):
            f = r.copy()
            f[l] = -f[l]
            if f.tobytes() in rows:
                bound.append(l)
                if len(bound) > 3:
                    break
        if len(bound) in (2, 3):
            f = r.copy()
            f[bound] = -f[bound]
            if f.tobytes() not in rows:
                out.append((i, f))
    return out


def _chi_with_point(coords, pairs, signs) -> np.ndarray:
    m = len(coords)
    chi = np.zeros((m + 1, m + 1, m + 1), np.int8)
    chi[:m, :m, :m] = chirotope(coords)
    for l, (a, b) in enumerate(pairs):
        v = signs[l]
        chi[a, b, m] = chi[b, m, a] = chi[m, a, b] = v
        chi[b, a, m] = chi[a, m, b] = chi[m, b, a] = -v
    return chi


def _repair(xy, chi, top: int, seed: int) -> np.ndarray | None:
    """Grid realisation of ``chi`` starting from nearby float points with some orientations wrong."""
    tri = triple_table(chi.shape[0])
    want = chi[tri[:, 0], tri[:, 1], tri[:, 2]].astype(np.float64)
    cur = _normalise(np.asarray(xy, dtype=np.float64))
    for r in range(6):
        if _spread(cur, tri, want, 4000, seed + r) > 0:
            return integer_realisation(cur, chi, top, seed=seed, rounds=20)
        cur = _normalise(cur)
    return None


def _mutated_children(scan: "_Scan", frontier: dict[int, Cells], seed: int) -> list[np.ndarray]:
    """Realisations of unseen children reachable by one arrangement flip of a frontier parent."""
    cands: dict[bytes, list[tuple[int, int, np.ndarray]]] = {}
    for s, cells in frontier.items():
        flips = flipped_cells(cells)
        if not flips:
            continue
        coords = scan.sources[s]
        signs = np.array([f for _, f in flips], dtype=np.int8)
        out = np.zeros((len(signs), len(scan.tri)), np.uint8)
        _extend_all(chirotope(coords), len(coords), cells.pairs, signs, scan.tri, out)
        for (r, f), k in zip(flips, np.packbits(out, axis=1)):
            key = k.tobytes()
            if key not in scan.witnesses:
                cands.setdefault(key, []).append((s, r, f))
    found = []
    for i, (key, options) in enumerate(sorted(cands.items())):
        for s, r, f in options[:3]:
            coords = scan.sources[s]
            chi = _chi_with_point(coords, frontier[s].pairs, f)
            if not _exchange_ok(chi, chi.shape[0]):
                break  # same key, same chirotope up to relabelling: no other witness can help
            xy = np.vstack([coords.astype(np.float64), cell_point(coords, frontier[s], r)])
            g = _repair(xy, chi, _ALT_TOP, seed + i)
            if g is not None:
                found.append(g)
                break
    log.info("n=%d: %d flip candidates, %d realised", scan.n, len(cands), len(found))
    return found


def extend_level(parents: Level, seed: int = 0, flip_rounds: int = 20, drift_rounds: int = 60) -> Level:
    """All order types of n+1 points reachable from the parents' realisations.

    One realisation per parent type can miss children whose cell only
    exists in other realisations.  If the count falls short of the known
    one, the parent pool is widened in two stages.  First, flip rounds:
    unseen children one triangle or wedge flip away are realised directly,
    and their point deletions join the pool as new parent realisations.
    Second, drift rounds: every parent gets an alternative realisation
    that drifts by a random walk from round to round.
    """
    n = parents.n + 1
    scan = _Scan(n)
    frontier = {}
    for s, coords in enumerate(parents.coords):
        frontier[s] = scan.add(coords)[1]
        if s % 500 == 499:
            log.info("n=%d: %d/%d parents scanned, %d order types", n, s + 1, len(parents.coords), len(scan.witnesses))
    want = KNOWN_COUNTS.get(n)

    def short() -> bool:
        return want is not None and len(scan.witnesses) < want

    for rnd in range(flip_rounds):
        if not short():
            break
        log.info("n=%d: %d of %d order types; flip round %d", n, len(scan.witnesses), want, rnd + 1)
        found = _mutated_children(scan, frontier, seed + 1000 * rnd)
        frontier = {}
        for g in found:
            for t in range(n):
                s = len(scan.sources)
                frontier[s] = scan.add(np.delete(g, t, axis=0))[1]
        if not frontier:
            break
    rng = np.random.default_rng(seed)
    drifting = list(parents.coords)
    for rnd in range(drift_rounds):
        if not short():
            break
        log.info("n=%d: %d of %d order types; drift round %d", n, len(scan.witnesses), want, rnd + 1)
        for i, coords in enumerate(drifting):
            drifting[i] = random_realisation(coords, rng)
            scan.add(drifting[i])
            if not short():
                break
    if short():
        log.warning("n=%d: only %d of %d order types found", n, len(scan.witnesses), want)
    log.info("n=%d: %d order types from %d realisations", n, len(scan.witnesses), len(scan.sources))
    keys = sorted(scan.witnesses)
    return Level(n, keys, scan.realise(keys, seed))


def base_level() -> Level:
    tri = np.array([[0, 0], [255, 0], [0, 255]], dtype=np.int64)
    return Level(3, [canonical_form(tri)], [tri])


def enumerate_levels(max_n: int, seed: int = 0):
    """Yield a :class:`Level` for n = 3..max_n."""
    level = base_level()
    yield level
    while level.n < max_n:
        level = extend_level(level, seed=seed)
        yield level


def generate_database(out_dir, max_n: int, seed: int = 0) -> dict[int, Path]:
    """Write one database file per n = 3..max_n into ``out_dir``; return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for level in enumerate_levels(max_n, seed=seed):
        path = out_dir / database_filename(level.n)
        write_records(path, level.n, level.coords)
        paths[level.n] = path
        log.info("wrote %s (%d records)", path, len(level.coords))
    return paths


def write_records(path, n: int, coords) -> None:
    """Write realisations in the database record layout (16-bit values little-endian)."""
    dt = np.uint8 if coord_width(n) == 8 else np.dtype("<u2")
    top = np.iinfo(dt).max
    arr = np.asarray(coords, dtype=np.int64).reshape(-1, n, 2)
    if arr.size and (arr.min() < 0 or arr.max() > top):
        raise ValueError(f"coordinates outside [0, {top}]")
    data = arr.astype(dt).tobytes()
    assert len(data) == len(arr) * record_size(n)
    Path(path).write_bytes(data)
