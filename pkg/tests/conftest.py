"""Shared fixtures: standard domains and direction sets."""
import numpy as np
import pytest

from utils.geometry import BallDomain, BoxUnionDomain, PolygonDomain, direction_set
from utils.heisenberg import HDomain


@pytest.fixture
def unit_square():
    return BoxUnionDomain.box([0.0, 0.0], [1.0, 1.0])


@pytest.fixture
def rectangle():
    return BoxUnionDomain.box([0.0, 0.0], [2.0, 1.0])


@pytest.fixture
def unit_disk():
    return BallDomain([0.0, 0.0], 1.0)


@pytest.fixture
def square_polygon():
    return PolygonDomain(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def l_shape():
    return BoxUnionDomain(np.array([[0.0, 0.0], [0.0, 0.0]]), np.array([[2.0, 1.0], [1.0, 2.0]]))


@pytest.fixture
def heisenberg_cube():
    return HDomain(BoxUnionDomain.box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]), 1)


@pytest.fixture
def circle_directions():
    return direction_set(2, 256)
