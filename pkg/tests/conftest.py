"""
Shared fixtures: built-in problems and seeded Brownian bundles.
"""

import pytest

from hrc.core import builtin_problem
from hrc.sim import brownian_only


@pytest.fixture
def heat_spec():
    return builtin_problem("heat")


@pytest.fixture
def ou_spec():
    return builtin_problem("ou-heat")


@pytest.fixture
def lq_spec():
    return builtin_problem("lq-decoupled")


@pytest.fixture
def decoupled_spec():
    return builtin_problem("decoupled")


@pytest.fixture
def zero_cost_spec():
    return builtin_problem("zero-cost")


@pytest.fixture(scope="session")
def brownian_bundle():
    """d = 1, T = 1, dt = 1/16, 4096 paths."""
    return brownian_only(1, 1.0, 1.0 / 16, 4096, seed=7)


@pytest.fixture(scope="session")
def brownian_bundle_2d():
    return brownian_only(2, 1.0, 1.0 / 8, 4096, seed=11)
