"""Reader for order-type database files.

Layout: a flat sequence of fixed-size records, one per order type, each
holding n (x, y) pairs of unsigned integers.  Files for n <= 8 use 8-bit
coordinates (2n bytes per record), files for n >= 9 use 16-bit coordinates
(4n bytes per record).  The byte order of 16-bit files is not fixed by the
layout.  It is detected once per file by decoding the first records both
ways and keeping the reading under which they are in general position.
Random-looking coordinates are in general position under both readings,
so that test often cannot decide; little-endian is then assumed with a
warning, and callers can pin the order explicitly.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .geometry import Configuration, GeneralPositionError

log = logging.getLogger(__name__)

MIN_N, MAX_N = 3, 10
_PROBE_RECORDS = 64
_CHUNK_RECORDS = 4096


class DatabaseFormatError(ValueError):
    """The file does not match the record layout (truncated, or a record is degenerate)."""


def coord_width(n: int) -> int:
    """Bits per coordinate for n-point files."""
    if not MIN_N <= n <= MAX_N:
        raise ValueError(f"unsupported point count n={n}; supported range is {MIN_N}..{MAX_N}")
    return 8 if n <= 8 else 16


def record_size(n: int) -> int:
    return 2 * n * coord_width(n) // 8


def database_filename(n: int) -> str:
    return f"otypes{n:02d}.b{coord_width(n):02d}"


@dataclass(frozen=True)
class OrderTypeRecord:
    index: int
    config: Configuration


def _dtype(n: int, byteorder: str) -> np.dtype:
    if coord_width(n) == 8:
        return np.dtype(np.uint8)
    return np.dtype("<u2" if byteorder == "little" else ">u2")


def _degenerate_records(block: np.ndarray) -> np.ndarray:
    """Boolean mask over an (m, n, 2) block: records with a collinear triple."""
    n = block.shape[1]
    i, j, k = np.array([(a, b, c) for a in range(n) for b in range(a + 1, n) for c in range(b + 1, n)]).T
    x = block[:, :, 0].astype(np.int64)
    y = block[:, :, 1].astype(np.int64)
    det = (x[:, j] - x[:, i]) * (y[:, k] - y[:, i]) - (y[:, j] - y[:, i]) * (x[:, k] - x[:, i])
    return (det == 0).any(axis=1)


class DatabaseReader:
    """Streaming reader over one database file.

    Metadata (``n``, ``width``, ``byteorder``, ``count``) is fixed at
    construction.  Iterating yields :class:`OrderTypeRecord` in file order
    and may be repeated; each pass reopens the file.
    """

    def __init__(self, path, n: int, byteorder: str | None = None):
        if byteorder not in (None, "little", "big"):
            raise ValueError(f"byteorder must be 'little', 'big' or None, got {byteorder!r}")
        self.path = Path(path)
        self.n = n
        self.width = coord_width(n)
        self.record_size = record_size(n)
        size = os.path.getsize(self.path)
        if size % self.record_size:
            raise DatabaseFormatError(
                f"{self.path}: length {size} is not a multiple of the record size {self.record_size} for n={n}"
            )
        self.count = size // self.record_size
        if self.width == 8:
            self.byteorder = None
        else:
            self.byteorder = byteorder or self._detect_byteorder()
        log.info("%s: n=%d, %d-bit coordinates, byte order %s, %d records",
                 self.path, n, self.width, self.byteorder or "n/a", self.count)

    def _detect_byteorder(self) -> str:
        probe = min(self.count, _PROBE_RECORDS)
        with open(self.path, "rb") as f:
            raw = f.read(probe * self.record_size)
        verdict = {}
        for order in ("little", "big"):
            arr = np.frombuffer(raw, dtype=_dtype(self.n, order)).reshape(probe, self.n, 2)
            verdict[order] = not _degenerate_records(arr).any()
        if verdict["little"] and verdict["big"]:
            log.warning("%s: byte order ambiguous on %d records; assuming little-endian", self.path, probe)
            return "little"
        for order in ("little", "big"):
            if verdict[order]:
                return order
        raise DatabaseFormatError(f"{self.path}: first records degenerate under both byte orders")

    def __len__(self) -> int:
        return self.count

    def iter_arrays(self, start: int = 0, stop: int | None = None) -> Iterator[tuple[int, np.ndarray]]:
        """(index, (n, 2) int64 array) pairs for records start..stop-1, without validation."""
        stop = self.count if stop is None else min(stop, self.count)
        dt = _dtype(self.n, self.byteorder or "little")
        with open(self.path, "rb") as f:
            f.seek(start * self.record_size)
            idx = start
            while idx < stop:
                m = min(_CHUNK_RECORDS, stop - idx)
                raw = f.read(m * self.record_size)
                if len(raw) != m * self.record_size:
                    raise DatabaseFormatError(f"{self.path}: file shrank while reading record {idx}")
                block = np.frombuffer(raw, dtype=dt).reshape(m, self.n, 2).astype(np.int64)
                for r in block:
                    yield idx, r
                    idx += 1

    def __iter__(self) -> Iterator[OrderTypeRecord]:
        return self.records()

    def records(self, start: int = 0, stop: int | None = None) -> Iterator[OrderTypeRecord]:
        for idx, xy in self.iter_arrays(start, stop):
            try:
                cfg = Configuration(xy.tolist())
            except GeneralPositionError as e:
                raise DatabaseFormatError(f"{self.path}: record {idx}: {e}") from None
            yield OrderTypeRecord(idx, cfg)


def read_database(path, n: int) -> Iterator[OrderTypeRecord]:
    """Stream the records of an n-point database file in file order."""
    return iter(DatabaseReader(path, n))


def find_database(directory, n: int) -> Path | None:
    """Path of the n-point file in ``directory`` under the standard name, if present."""
    if directory is None:
        return None
    p = Path(directory) / database_filename(n)
    return p if p.is_file() else None
