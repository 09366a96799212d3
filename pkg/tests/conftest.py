import sys
from pathlib import Path

import pytest

from infrewrite import parse_certificate, parse_trs, parse_universe

DATA = Path(__file__).resolve().parent.parent / "data"


def data_path(name: str) -> Path:
    return DATA / name


def load_trs(name: str):
    return parse_trs(data_path(name).read_text())


def load_cert(name: str, trs):
    return parse_certificate(data_path(name).read_text(), trs)


def load_universe(name: str, trs):
    return parse_universe(data_path(name).read_text(), trs)


@pytest.fixture
def ex11():
    return load_trs("ex11.trs")


@pytest.fixture
def ex12():
    return load_trs("ex12.trs")


@pytest.fixture
def ex13():
    return load_trs("ex13.trs")


@pytest.fixture
def ex42():
    return load_trs("ex42.trs")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
