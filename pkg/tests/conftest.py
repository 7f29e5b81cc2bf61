import pathlib

import pytest

from clhavoc.frontend import parse_system

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load(name: str):
    return parse_system((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def ring():
    return load("ring.clsys")


@pytest.fixture(scope="session")
def chain():
    return load("chain.clsys")


@pytest.fixture(scope="session")
def pcring():
    return load("pcring.clsys")


@pytest.fixture(scope="session")
def bad():
    return load("bad.clsys")


@pytest.fixture(scope="session")
def tll():
    return load("tll.clsys")


@pytest.fixture(scope="session")
def tll_original():
    return load("tll_original.clsys")


@pytest.fixture(scope="session")
def tll_pcr():
    return load("tll_pcr.clsys")
