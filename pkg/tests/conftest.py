"""
Pytest configuration and shared fixtures
"""

import pytest
from pathlib import Path
import tempfile
import shutil
from typing import Generator

import numpy as np


@pytest.fixture
def temp_workspace() -> Generator[Path, None, None]:
    """
    Create temporary workspace directory for tests

    Automatically cleaned up after test completes
    """
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def mock_settings():
    """
    Mock settings for testing

    Temporarily sets DEBUG=True and restores every field touched by the test
    """
    from config import settings
    original = settings.model_dump()

    settings.DEBUG = True
    settings.LOG_LEVEL = "DEBUG"

    yield settings

    for key, value in original.items():
        setattr(settings, key, value)


@pytest.fixture
def reset_metrics():
    """
    Reset metrics collector before each test

    Ensures clean state for metrics tests
    """
    from utils.metrics import metrics_collector
    metrics_collector.reset()
    yield metrics_collector
    metrics_collector.reset()


@pytest.fixture(scope="session")
def four_point():
    """A < 1 and 2 < B with every cross pair spacelike"""
    from services.spacetime import four_point_causet
    return four_point_causet()


@pytest.fixture(scope="session")
def four_point_props(four_point):
    from services.propagators import causet_retarded_green
    return causet_retarded_green(four_point, mass=0.0, density=1.0)


@pytest.fixture(scope="session")
def four_point_modes(four_point_props):
    from services.propagators import sj_modes
    return sj_modes(four_point_props)


@pytest.fixture(scope="session")
def scenario():
    """Lab {1, 2}, f = e_1 + e_2, Alice at A, Bob at B"""
    from services.scenario import four_point_scenario
    return four_point_scenario()


@pytest.fixture(scope="session")
def ctx(scenario):
    return scenario.ctx


@pytest.fixture(scope="session")
def fock(four_point_modes):
    """Fock space over the two SJ modes of the four-point causet, 40 quanta per mode"""
    from services.fock_oracle import build
    return build(four_point_modes, 40)


@pytest.fixture(scope="session")
def unit_vectors():
    return np.eye(4)
