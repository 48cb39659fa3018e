import os
from pathlib import Path

import pytest

from sepmatrix.geometry import Configuration
from sepmatrix.otdb import find_database, read_database

DB_DIR = Path(os.environ.get("SEPMATRIX_DB_DIR", Path(__file__).resolve().parent.parent / "data"))

SQUARE = Configuration([(0, 0), (10, 0), (10, 10), (0, 10)])
TRIANGLE_PLUS = Configuration([(0, 0), (12, 0), (0, 12), (3, 3)])
# 9 points, hull 0 8 1 2: hull row 8 (72) is below interior row 6 (73) and ties interior row 5
HULL_BELOW_INTERIOR = Configuration([
    (0, 16836), (63598, 7171), (17296, 65535), (19125, 35215), (14818, 22102),
    (3308, 24296), (32520, 45656), (6777, 24033), (3936, 0),
])


def db_path(n):
    return find_database(DB_DIR, n)


def db_configs(n):
    path = db_path(n)
    if path is None:
        pytest.skip(f"no {n}-point database file in {DB_DIR}")
    return [r.config for r in read_database(path, n)]


@pytest.fixture
def square():
    return SQUARE


@pytest.fixture
def triangle_plus():
    return TRIANGLE_PLUS


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
