"""Shared fixtures.

Session scope matters here: the weighted SVD and the padded exponential
are cached by model identity, so every test module must consume the same
rep objects to hit those caches.  Rebuilding an identical rep inside a
test gets correct numbers but pays for a fresh factorisation.
"""

import pytest

from horolab import (
    build_rep,
    build_tensor,
    invariant_distributions,
    flow_invariant_distributions,
)

KERNEL_TOL = 1e-8
DECAY_TOL = 1e-12


@pytest.fixture(scope="session")
def rep8():
    return build_rep(0.25, 8)


@pytest.fixture(scope="session")
def rep16():
    return build_rep(0.25, 16)


@pytest.fixture(scope="session")
def rep16_theta():
    return build_rep(5.0, 16)


@pytest.fixture(scope="session")
def rep16_low():
    return build_rep(-2.0, 16)


@pytest.fixture(scope="session")
def rep32():
    return build_rep(0.25, 32)


@pytest.fixture(scope="session")
def rep32_theta():
    return build_rep(5.0, 32)


@pytest.fixture(scope="session")
def rep32_low():
    return build_rep(-2.0, 32)


@pytest.fixture(scope="session")
def ds16(rep16):
    return invariant_distributions(rep16, 1.0, KERNEL_TOL, gap_check=False)


@pytest.fixture(scope="session")
def ds16_theta(rep16_theta):
    return invariant_distributions(rep16_theta, 1.0, KERNEL_TOL, gap_check=False)


@pytest.fixture(scope="session")
def ds32(rep32):
    return invariant_distributions(rep32, 1.0, KERNEL_TOL, gap_check=False)


@pytest.fixture(scope="session")
def ds32_decay(rep32):
    return invariant_distributions(rep32, 1.0, DECAY_TOL, gap_check=False)


@pytest.fixture(scope="session")
def flow16(rep16):
    return flow_invariant_distributions(rep16)


@pytest.fixture(scope="session")
def tensor16(rep16, rep16_theta):
    return build_tensor(rep16, rep16_theta, 1.0, 1.0)


@pytest.fixture(scope="session")
def tensor32(rep32, rep32_theta):
    return build_tensor(rep32, rep32_theta, 1.0, 1.0)


@pytest.fixture(scope="session")
def tensor8(rep8):
    right = build_rep(5.0, 8)
    return build_tensor(rep8, right, 1.0, 1.0)


@pytest.fixture(scope="session")
def ds8_left(tensor8):
    return invariant_distributions(tensor8.left, 1.0, KERNEL_TOL, gap_check=False)


@pytest.fixture(scope="session")
def ds8_right(tensor8):
    return invariant_distributions(tensor8.right, 1.0, KERNEL_TOL, gap_check=False)
