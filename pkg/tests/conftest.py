"""
Pytest configuration and shared fixtures.
"""

import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Add the package root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from bmv.matrix_core import HermitianPair, dump_matrix  # noqa: E402


def swap_pair(theta: float = 1.0) -> HermitianPair:
    """A = [[0, theta], [theta, 0]], B = diag(1, 2)."""
    return HermitianPair.from_arrays(
        np.array([[0.0, theta], [theta, 0.0]]), np.diag([1.0, 2.0])
    )


def bessel_density(s: float, theta: float = 1.0) -> float:
    """Exact density of :func:`swap_pair` on (1, 2), from mpmath's modified Bessel I1."""
    import mpmath

    u = 2.0 * s - 3.0
    c = mpmath.sqrt(1 - mpmath.mpf(u) ** 2)
    return float(2 * theta * mpmath.besseli(1, theta * c) / c)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def pair_swap():
    return swap_pair(1.0)


@pytest.fixture
def pair_diagonal():
    """A = diag(1, ln 2), B = diag(1, 2)."""
    return HermitianPair.from_arrays(np.diag([1.0, np.log(2.0)]), np.diag([1.0, 2.0]))


@pytest.fixture
def write_matrix(temp_dir):
    """Write a matrix as JSON into the temporary directory and return its path."""

    def _write(name, matrix):
        path = temp_dir / name
        with open(path, "w") as f:
            json.dump(dump_matrix(np.asarray(matrix, dtype=complex)), f)
        return str(path)

    return _write


@pytest.fixture(autouse=True)
def clean_environment():
    """Keep a user's BMV_CONFIG out of the tests."""
    original_env = os.environ.copy()
    os.environ.pop("BMV_CONFIG", None)

    yield

    os.environ.clear()
    os.environ.update(original_env)


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests of a single function or class")
    config.addinivalue_line("markers", "integration: Tests that run a full pipeline")
    config.addinivalue_line("markers", "slow: Tests that take longer to execute")
