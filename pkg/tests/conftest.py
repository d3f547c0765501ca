import math
import os

import numpy as np
import pytest

from app.config import settings as settings_module
from app.core.colander import construct_grid_colander
from app.models.schemas import ColanderSpec

SQRT2 = math.sqrt(2.0)


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test starts from default settings regardless of the caller's environment"""
    for name in [k for k in os.environ if k.upper().startswith("COLANDER_")]:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(settings_module, "_settings", None)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid_spec() -> ColanderSpec:
    return ColanderSpec.of(0.25, 0.1 * SQRT2, 1.0)


@pytest.fixture(scope="session")
def grid_colander(grid_spec):
    return construct_grid_colander(grid_spec)


@pytest.fixture(scope="session")
def fine_spec() -> ColanderSpec:
    return ColanderSpec.of(0.1, 0.05 * SQRT2, 1.0)
