"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from indistinguo.matrices import fourier_unitary, haar_random_unitary
from indistinguo.states import validate_gram


@pytest.fixture
def tritter() -> np.ndarray:
    return fourier_unitary(3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def random_gram(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random positive-semidefinite Gram matrix with unit diagonal."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    g = a @ a.conj().T
    d = 1.0 / np.sqrt(np.real(np.diag(g)))
    g = g * d[:, None] * d[None, :]
    np.fill_diagonal(g, 1.0)
    return validate_gram(g)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar draw keyed off an existing generator, for loops inside tests."""
    seed = int(rng.integers(0, 2**63 - 1))
    return haar_random_unitary(n, np.random.SeedSequence(seed))
