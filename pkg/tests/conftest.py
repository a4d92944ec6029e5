import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fracflow import GridSpec, harmonic_field


@pytest.fixture
def grid16():
    return GridSpec.for_band(16)


@pytest.fixture
def grid32():
    return GridSpec.for_band(32)


def cosine(grid, amps):
    """Shorthand: sum_m amps[m] * cos(mx)."""
    return harmonic_field(grid, cos_amps=amps)


@pytest.fixture(autouse=True)
def _quiet_cfl_warning():
    # several tests intentionally exceed the advisory step-size bound
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*step size dt=.*")
        yield
