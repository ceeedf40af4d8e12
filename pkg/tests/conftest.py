import itertools

import pytest

from app.graphs import build_regular_graph
from app.surfaces import build_flat_cylinder, build_fundamental_piece, glue_surface


@pytest.fixture(scope="session")
def k5():
    """Complete graph on 5 vertices: 4-regular, lambda1 = 5."""
    return build_regular_graph(5, 4, itertools.combinations(range(5), 2))


@pytest.fixture(scope="session")
def c4():
    """4-cycle: 2-regular, lambda1 = 2."""
    return build_regular_graph(4, 2, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture(scope="session")
def prism():
    """Triangular prism: 3-regular on 6 vertices, lambda1 = 2."""
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    return build_regular_graph(6, 3, edges)


@pytest.fixture(scope="session")
def unit_cylinder():
    return build_flat_cylinder(16, 8, 1.0, 1.0)


@pytest.fixture(scope="session")
def piece2():
    return build_fundamental_piece(2, 8, 2)


@pytest.fixture(scope="session")
def piece4():
    return build_fundamental_piece(4, 8, 2)


@pytest.fixture(scope="session")
def surface_c4(piece2, c4):
    return glue_surface(piece2, c4)


@pytest.fixture(scope="session")
def surface_k5(piece4, k5):
    return glue_surface(piece4, k5)
