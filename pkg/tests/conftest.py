"""Shared fixtures for the invforge test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.services.channel_zoo import random_density


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def qubit_state():
    return random_density(2, seed=7)


@pytest.fixture
def qutrit_state():
    return random_density(3, seed=11)
