import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dwm.core import LatticeModel  # noqa: E402


@pytest.fixture
def lattice401():
    return LatticeModel.from_sites(401)


@pytest.fixture
def small_lattice():
    return LatticeModel(20)
