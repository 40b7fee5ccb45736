import os

import pytest
from hypothesis import HealthCheck, settings

from fermi_trap.theory.couplings import (
    EffectiveCouplings,
    TrapSpec,
    free_couplings,
    im1_couplings,
    im2_couplings,
)
from fermi_trap.theory.matrix_elements import MatrixElementTable, build_table

settings.register_profile(
    "dev",
    settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]),
)
settings.register_profile(
    "ci",
    settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]),
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(scope="session")
def trap() -> TrapSpec:
    return TrapSpec(N=14)


@pytest.fixture(scope="session")
def free() -> EffectiveCouplings:
    return free_couplings()


@pytest.fixture(scope="session")
def im1_weak() -> EffectiveCouplings:
    return im1_couplings(-1.0)


@pytest.fixture(scope="session")
def im1_strong() -> EffectiveCouplings:
    return im1_couplings(-10.0)


@pytest.fixture(scope="session")
def im2_weak() -> EffectiveCouplings:
    return im2_couplings(-1.0, 0.3)


@pytest.fixture(scope="session")
def free_table(trap, free) -> MatrixElementTable:
    return build_table(trap, free)


@pytest.fixture(scope="session")
def im1_table(trap, im1_weak) -> MatrixElementTable:
    return build_table(trap, im1_weak)


@pytest.fixture(scope="session")
def im2_table(trap, im2_weak) -> MatrixElementTable:
    return build_table(trap, im2_weak)


@pytest.fixture(scope="session")
def im1_strong_table(trap, im1_strong) -> MatrixElementTable:
    return build_table(trap, im1_strong)
