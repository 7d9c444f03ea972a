"""
Pytest fixtures for thorp_mixing tests.

Provides small decks, oracles, seeded generators and temp files.
"""
import os
import tempfile

import numpy as np
import pytest


@pytest.fixture
def identity_d2():
    """Identity deck of 4 cards."""
    from thorp_mixing.utils.permutations import Permutation
    return Permutation.identity(4)


@pytest.fixture
def zero_oracle_d2():
    """All-zero 2 x 2 oracle table (rows l < 2, rounds t < 2)."""
    from thorp_mixing.utils.oracles import TabularOracle
    return TabularOracle.zeros(2, 2)


@pytest.fixture
def point_mass_s4():
    """Point mass at the identity of S_4."""
    from thorp_mixing.services.distributions import PermDistribution
    return PermDistribution.point(2)


@pytest.fixture
def rng():
    """Deterministic numpy generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def clean_env(monkeypatch):
    """Environment without THORP_SEED / THORP_LOG_LEVEL."""
    monkeypatch.delenv("THORP_SEED", raising=False)
    monkeypatch.delenv("THORP_LOG_LEVEL", raising=False)
    return monkeypatch


@pytest.fixture
def temp_output_file():
    """Path to a temporary file, removed after the test."""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.out', delete=False) as f:
        temp_path = f.name

    yield temp_path

    if os.path.exists(temp_path):
        os.remove(temp_path)
