import os
import sys

import pytest

# Add parent directory to path for imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if parent_dir not in sys.path:
    sys.path.insert(0, parent_dir)

from models import NetworkConfig  # noqa: E402


@pytest.fixture
def unity():
    return NetworkConfig.unity(1)


@pytest.fixture
def unity_two():
    return NetworkConfig.unity(2)


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240611)
