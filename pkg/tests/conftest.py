from pathlib import Path

import pytest

from chains import chain_a, chain_b, chain_d
from metastab.hierarchy import build_hierarchy

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def hier_a():
    return build_hierarchy(chain_a())


@pytest.fixture(scope="session")
def hier_b():
    return build_hierarchy(chain_b())


@pytest.fixture(scope="session")
def hier_d():
    return build_hierarchy(chain_d())
