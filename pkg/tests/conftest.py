from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from classes.background import PhysicalParams
from classes.spectral import TorusGrid

settings.register_profile("jeansbench", max_examples=25, deadline=None)
settings.load_profile("jeansbench")


@pytest.fixture
def params() -> PhysicalParams:
    return PhysicalParams(1.0, 1.0, 4 / 3)


@pytest.fixture
def grid() -> TorusGrid:
    return TorusGrid(8)


@pytest.fixture
def grid16() -> TorusGrid:
    return TorusGrid(16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
