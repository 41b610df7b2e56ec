import pytest

import medium
from config import DATA_DIR


@pytest.fixture
def sand():
    return medium.load_medium(DATA_DIR / "sand.ini")


@pytest.fixture
def default_medium():
    return medium.MediumParams()
