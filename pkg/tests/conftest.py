"""Shared helpers for the test suite."""

import numpy as np
import pytest

from unifwatch import DiscreteDistribution, SeededRng


@pytest.fixture
def gen():
    """Fresh deterministic generator per test."""
    return SeededRng(20260817).generator


def random_distribution(gen: np.random.Generator, n: int) -> DiscreteDistribution:
    """Random point in the simplex, bounded away from degenerate all-zeros."""
    raw = gen.random(n) + 1e-3
    return DiscreteDistribution(raw / raw.sum())
