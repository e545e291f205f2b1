import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PLOTS_DIR))


@pytest.fixture(scope="session")
def samples():
    return PLOTS_DIR / "samples"


@pytest.fixture(scope="session")
def scripts():
    return PLOTS_DIR / "scripts"
