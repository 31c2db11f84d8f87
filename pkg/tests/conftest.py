from __future__ import annotations

import numpy as np
import pytest

from lrbounds.operators import PAULI, local_operator


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running (11-12 site chains)")


@pytest.fixture
def endpoint_z():
    """``sigma^z`` on the first and last site of an ``L``-site chain."""

    def make(L):
        return local_operator(PAULI["z"], 1, L), local_operator(PAULI["z"], L, L)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
