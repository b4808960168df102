import sys
from pathlib import Path

import pytest

from solsent import geolocate

TESTS_DIR = Path(__file__).parent
HELPERS_DIR = TESTS_DIR / "helpers"
DATA_DIR = Path(geolocate.__file__).parent / "data"
DEMO_DIR = DATA_DIR / "demo"


@pytest.fixture(scope="session")
def gazetteer():
    return geolocate.load_default_gazetteer()


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return DEMO_DIR


@pytest.fixture()
def echo_backend_cmd():
    def build(*args: str) -> list[str]:
        return [sys.executable, str(HELPERS_DIR / "echo_backend.py"), *args]

    return build
