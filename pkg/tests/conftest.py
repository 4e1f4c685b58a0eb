import numpy as np
import pytest

from motionshape.core import TimeGrid, Trajectory


@pytest.fixture
def grid101():
    return TimeGrid(101)


@pytest.fixture
def grid201():
    return TimeGrid(201)


@pytest.fixture
def wavy101(grid101):
    t = grid101.points
    return Trajectory(grid101, np.sin(2 * np.pi * t) + 0.35 * np.sin(6 * np.pi * t))
