"""Command-line front end.

Exit codes: 0 success, 1 semantic failure (a check failed, input refused),
2 input error (unreadable or malformed file, general-position violation),
3 hull search exhausted without a candidate.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from .census import Source, run_census
from .geometry import GeneralPositionError, parse_points
from .matrix import compute_matrix, format_matrix, parse_matrix, validate
from .otdb import DatabaseFormatError, coord_width
from .recovery import (
    CONFIRMED_SIZE3,
    HullCandidate,
    InconsistentMatrixError,
    RecoveryResult,
    SearchExhaustedError,
    apply_filters,
    detect_hull_size3,
    general_hull_search,
    min_cycle,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None


def _emit(args, text: str, data) -> None:
    if args.format == "structured":
        sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def cmd_matrix(args) -> int:
    try:
        cfg = parse_points(_read(args.points))
    except (ValueError, GeneralPositionError) as e:
        raise InputError(str(e)) from None
    m = compute_matrix(cfg)
    _emit(args, format_matrix(m), {"n": m.n, "matrix": m.tolist()})
    return EXIT_OK


def _load_matrix(path):
    try:
        return parse_matrix(_read(path))
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_validate(args) -> int:
    raw = _load_matrix(args.matrix)
    try:
        report = validate(raw)
    except ValueError as e:
        raise InputError(str(e)) from None
    _emit(args, report.format(), report.to_dict())
    return EXIT_OK if report.overall else EXIT_FAIL


def cmd_recover(args) -> int:
    raw = _load_matrix(args.matrix)
    try:
        report = validate(raw)
    except ValueError as e:
        raise InputError(str(e)) from None
    if not report.overall:
        sys.stderr.write("refusing to recover: " + report.format())
        return EXIT_FAIL
    filters = args.filters == "on"
    try:
        triple = detect_hull_size3(raw)
    except InconsistentMatrixError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_FAIL
    if triple is not None:
        cand = HullCandidate(min_cycle(raw, triple), CONFIRMED_SIZE3)
        if filters:
            cand = apply_filters(raw, cand)
        result = RecoveryResult(raw.shape[0], 3, (cand,), filters)
    else:
        try:
            result = general_hull_search(raw, max_k=args.max_k, filters=filters)
        except SearchExhaustedError as e:
            sys.stderr.write(f"search exhausted: {e}\n")
            return EXIT_EXHAUSTED
    if not args.all_candidates:
        result = RecoveryResult(result.n, result.k, result.candidates[:1], result.filters_applied,
                                result.rejected if filters else ())
    _emit(args, result.format(), result.to_dict())
    return EXIT_OK


_DB_NAME = re.compile(r"otypes(\d+)\.b(08|16)$")


def cmd_census(args) -> int:
    if args.random:
        n, count, seed = args.random
        if n < 3 or count < 0:
            raise InputError("--random needs n >= 3 and count >= 0")
        source = Source.random(n, count, seed)
    else:
        if args.database is None:
            raise InputError("census needs a database file or --random n count seed")
        n = args.n
        if n is None:
            m = _DB_NAME.search(Path(args.database).name)
            if not m:
                raise InputError("cannot infer n from the file name; pass --n")
            n = int(m.group(1))
        try:
            coord_width(n)
            source = Source.database(args.database, n, args.byteorder)
        except (OSError, ValueError, DatabaseFormatError) as e:
            raise InputError(str(e)) from None
    report = run_census(source, jobs=args.jobs, filters=args.filters)
    if args.format == "structured":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.format())
    return EXIT_OK


def cmd_generate(args) -> int:
    from .ordertypes import generate_database

    paths = generate_database(args.out_dir, args.max_n, seed=args.seed)
    for n, p in sorted(paths.items()):
        sys.stdout.write(f"{n} {p}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepmatrix", description="Separating matrices of planar point configurations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=("text", "structured"), default="text")

    sp = sub.add_parser("matrix", help="separating matrix of a point file")
    sp.add_argument("points", help="point file ('-' for stdin)")
    fmt(sp)
    sp.set_defaults(func=cmd_matrix)

    sp = sub.add_parser("validate", help="check a matrix against the necessary conditions")
    sp.add_argument("matrix", help="matrix file ('-' for stdin)")
    fmt(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("recover", help="recover hull candidates from a matrix")
    sp.add_argument("matrix", help="matrix file ('-' for stdin)")
    sp.add_argument("--filters", choices=("on", "off"), default="off")
    sp.add_argument("--all-candidates", action="store_true", help="print every candidate, not just the first")
    sp.add_argument("--max-k", type=int, default=None, help="largest subset size to search (default n)")
    fmt(sp)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("census", help="fake-hull census over a database file or random sample")
    sp.add_argument("database", nargs="?", help="database file (otypesNN.b08 / .b16)")
    sp.add_argument("--n", type=int, default=None, help="points per record (default: from file name)")
    sp.add_argument("--byteorder", choices=("little", "big"), default=None,
                    help="byte order of 16-bit files (default: detect)")
    sp.add_argument("--random", nargs=3, type=int, metavar=("N", "COUNT", "SEED"))
    sp.add_argument("--filters", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--jobs", type=int, default=1)
    fmt(sp)
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("generate-db", help="enumerate order types and write database files")
    sp.add_argument("out_dir")
    sp.add_argument("--max-n", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
