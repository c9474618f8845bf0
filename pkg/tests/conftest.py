import sys
from pathlib import Path

import pytest

from helpers import make_records, make_table

ROOT = Path(__file__).resolve().parents[1]


def pytest_addoption(parser):
    parser.addoption("--liar-plus-dir", default=str(ROOT / "data" / "liar_plus"),
                     help="directory with train2.tsv / val2.tsv / test2.tsv")
    parser.addoption("--glove", default=str(ROOT / "data" / "glove.6B.100d.txt"),
                     help="100-d GloVe vectors")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[key])


@pytest.fixture(scope="session")
def table():
    return make_table()


@pytest.fixture(scope="session")
def corpus():
    return make_records(240, seed=3)
