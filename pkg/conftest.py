"""Shared pytest fixtures: seeded generators and the standard test vectors."""

import numpy as np
import pytest

from src.core.fock import FockVector, coherent_coefficients


@pytest.fixture
def rng():
    """Fresh seeded generator per test."""
    return np.random.default_rng(20240517)


@pytest.fixture
def vacuum():
    return FockVector.basis(0, 64)


@pytest.fixture
def coherent_one():
    return coherent_coefficients(1.0, 64)


@pytest.fixture
def coherent_two():
    return coherent_coefficients(2.0, 64)


@pytest.fixture
def geometric_half():
    q = 0.5
    return FockVector(np.sqrt(1.0 - q * q) * q ** np.arange(64))


@pytest.fixture
def random_unit_vector(rng):
    """Factory for seeded complex unit vectors of a given dimension."""
    def make(dim: int) -> FockVector:
        coeffs = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return FockVector(coeffs / np.linalg.norm(coeffs))
    return make
