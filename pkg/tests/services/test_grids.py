import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import GridError
from app.services.grids import PGrid, is_power_of_two, make_pgrid, make_uniform_grid


def test_uniform_grid_nodes():
    grid = make_uniform_grid(0, 1, 8)
    assert grid.h == pytest.approx(0.125)
    assert grid.m == 3
    assert_allclose(grid.nodes, np.arange(8) / 8)
    assert_allclose(grid.midpoints, np.arange(8) / 8 + 1 / 16)


@pytest.mark.parametrize("M", [0, 1, 6, 12])
def test_uniform_grid_rejects_non_power_of_two(M):
    with pytest.raises(GridError, match="power of two"):
        make_uniform_grid(0, 1, M)


def test_uniform_grid_rejects_empty_interval():
    with pytest.raises(GridError):
        make_uniform_grid(1, 1, 8)


def test_is_power_of_two():
    assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]


def test_pgrid_frequencies_follow_window_length():
    pgrid = make_pgrid(-math.pi, math.pi, 8)
    assert_allclose(pgrid.frequencies, np.arange(8) - 4)
    assert pgrid.dp == pytest.approx(2 * math.pi / 8)
    assert pgrid.L == pytest.approx(1.0)


def test_pgrid_asymmetric_window():
    pgrid = make_pgrid(-4.2, 5, 1024)
    assert pgrid.length == pytest.approx(9.2)
    assert pgrid.nodes[0] == pytest.approx(-4.2)
    assert pgrid.nodes[-1] < 5


def test_pgrid_symmetric_constructor():
    pgrid = PGrid.symmetric(3, 16)
    assert pgrid.lo == pytest.approx(-3 * math.pi)
    assert pgrid.hi == pytest.approx(3 * math.pi)
    with pytest.raises(GridError):
        PGrid.symmetric(0, 16)


def test_first_index_at_or_above():
    pgrid = make_pgrid(0, 8, 8)
    assert pgrid.first_index_at_or_above(3) == 3
    assert pgrid.first_index_at_or_above(2.5) == 3
    assert pgrid.first_index_at_or_above(-1) == 0
    assert pgrid.first_index_at_or_above(7.5) is None
