"""Test configuration"""
import numpy as np
import pytest
import yaml
from modules.spectral.grid import PeriodicGrid

SEED = 20210611


@pytest.fixture(scope="session")
def grid() -> PeriodicGrid:
    """One dimensional grid of 256 points on the 2 pi box

    Returns:
        PeriodicGrid: the grid
    """
    return PeriodicGrid(1, 256)


@pytest.fixture(scope="session")
def small_grid() -> PeriodicGrid:
    """One dimensional grid of 64 points on the 2 pi box, used by the solvers

    Returns:
        PeriodicGrid: the grid
    """
    return PeriodicGrid(1, 64)


@pytest.fixture(scope="session")
def grid_2d() -> PeriodicGrid:
    """Two dimensional grid of 64 points per axis on the 2 pi box

    Returns:
        PeriodicGrid: the grid
    """
    return PeriodicGrid(2, 64)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator, fresh for every test

    Returns:
        np.random.Generator: the generator
    """
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def expected() -> dict:
    """Called at the beginning of the testing session.
    Loads the expected values of the worked examples

    Yields:
        Iterator[dict]: dictionary containing the expected values
    """
    with open("tests/expected_results.yaml", 'r', encoding="utf-8") as yaml_results:
        results = yaml.load(yaml_results, Loader=yaml.SafeLoader)

    yield results
