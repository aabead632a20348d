"""Tests for finite-difference assembly, inverse iteration and analytic references."""
import math

import numpy as np
import pytest

from utils.bounds import heisenberg_bounds
from utils.eigensolver import (
    assemble,
    dirichlet_reference_ball,
    dirichlet_reference_box,
    richardson,
    robin_reference_box,
    robin_reference_interval,
    smallest_eigenvalue,
    solve,
)
from utils.geometry import BoxUnionDomain
from utils.heisenberg import sup_hyperplane_fraction
from utils.validation import UnsupportedError, ValidationError


@pytest.fixture
def unit_interval():
    return BoxUnionDomain.box([0.0], [1.0])


# ===== Analytic References =====

def test_robin_reference_interval():
    value = robin_reference_interval(1.0, 1.0)
    assert math.sqrt(value) == pytest.approx(1.3065, abs=1e-4)
    assert value == pytest.approx(1.7069, abs=5e-4)


def test_robin_reference_dirichlet_limit():
    assert robin_reference_interval(1.0, 1e9) == pytest.approx(math.pi ** 2, rel=1e-6)


def test_box_and_ball_references():
    assert robin_reference_box([1.0, 1.0], 1.0) == pytest.approx(3.4138, abs=1e-3)
    assert dirichlet_reference_box([1.0, 1.0]) == pytest.approx(2 * math.pi ** 2)
    assert dirichlet_reference_ball(2, 1.0) == pytest.approx(5.78319, abs=1e-5)


def test_richardson():
    assert richardson(1.0, 2.0) == pytest.approx(7 / 3)


# ===== Assembly =====

@pytest.mark.parametrize('kind, extra', [
    ('dirichlet_laplace', {}),
    ('robin_laplace', {'sigma': 1.0}),
    ('bilaplace_clamped', {'m': 2}),
])
def test_operators_are_symmetric(unit_square, kind, extra):
    op = assemble(unit_square, kind, 1 / 8, **extra)
    assert abs(op.matrix - op.matrix.T).max() < 1e-9 * abs(op.matrix).max()


def test_dirichlet_mask_on_disk(unit_disk):
    op = assemble(unit_disk, 'dirichlet_laplace', 1 / 8)
    nodes = op.nodes()
    assert len(nodes) == op.size
    assert np.all(np.sum(nodes ** 2, axis=1) < 1.0)
    assert abs(op.matrix - op.matrix.T).max() == 0


def test_heisenberg_operator_symmetric(heisenberg_cube):
    op = assemble(heisenberg_cube, 'heisenberg_sublaplace', 0.25)
    assert abs(op.matrix - op.matrix.T).max() < 1e-12
    assert op.N == 1


def test_heisenberg_operator_reduces_at_zero_z(heisenberg_cube):
    h = 0.25
    op = assemble(heisenberg_cube, 'heisenberg_sublaplace', h)
    nodes = op.nodes()
    # Interior node with z = 0: the tilt vanishes there and the row is the
    # five-point stencil in z with no coupling in t
    row = int(np.flatnonzero(np.all(np.abs(nodes) < 1e-12, axis=1))[0])
    entries = op.matrix[[row]].toarray().ravel()
    assert entries[row] == pytest.approx(4 / h ** 2)
    t_neighbours = np.flatnonzero(np.all(np.abs(nodes[:, :2]) < 1e-12, axis=1)
                                  & (np.abs(np.abs(nodes[:, 2]) - h) < 1e-12))
    np.testing.assert_allclose(entries[t_neighbours], 0.0, atol=1e-12)


def test_robin_requires_single_box(l_shape):
    with pytest.raises(UnsupportedError):
        assemble(l_shape, 'robin_laplace', 0.25, sigma=1.0)


def test_bilaplace_only_second_order(unit_square):
    with pytest.raises(UnsupportedError):
        assemble(unit_square, 'bilaplace_clamped', 0.25, m=3)


def test_spacing_must_divide_box(unit_square):
    with pytest.raises(ValidationError):
        assemble(unit_square, 'robin_laplace', 0.3, sigma=1.0)


def test_unknown_operator_kind(unit_square):
    with pytest.raises(ValidationError):
        assemble(unit_square, 'wave', 0.25)


# ===== Eigenvalues =====

def test_dirichlet_interval_extrapolated(unit_interval):
    result = solve(unit_interval, 'dirichlet_laplace', 1 / 32, extrapolate=True)
    assert result.extrapolated == pytest.approx(math.pi ** 2, rel=1e-3)
    assert result.value == pytest.approx(math.pi ** 2, rel=1e-2)


def test_dirichlet_unit_square(unit_square):
    result = solve(unit_square, 'dirichlet_laplace', 1 / 32)
    assert result.value == pytest.approx(2 * math.pi ** 2, rel=2e-3)
    assert result.residual < 1e-6 * result.value


def test_dirichlet_matches_discrete_formula(unit_square):
    h = 1 / 16
    result = smallest_eigenvalue(assemble(unit_square, 'dirichlet_laplace', h))
    discrete = 2 * 4 / h ** 2 * math.sin(math.pi * h / 2) ** 2
    assert result.value == pytest.approx(discrete, rel=1e-8)


def test_dirichlet_error_ratio_on_refinement(unit_square):
    exact = 2 * math.pi ** 2
    errors = [exact - solve(unit_square, 'dirichlet_laplace', h).value
              for h in (1 / 8, 1 / 16, 1 / 32)]
    assert all(e > 0 for e in errors)
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 <= coarse / fine <= 4.5


def test_dirichlet_monotone_on_nested_masks(unit_square, rectangle, l_shape):
    # Grids anchored at the origin, so each mask contains the previous one
    h = 1 / 16
    values = [solve(domain, 'dirichlet_laplace', h).value
              for domain in (unit_square, rectangle, l_shape)]
    assert values[0] >= values[1] >= values[2]
    assert values[1] == pytest.approx(dirichlet_reference_box([2.0, 1.0]), rel=1e-2)


def test_robin_interval(unit_interval):
    result = solve(unit_interval, 'robin_laplace', 1 / 64, sigma=1.0)
    assert result.value == pytest.approx(robin_reference_interval(1.0, 1.0), rel=1e-3)


def test_robin_unit_square(unit_square):
    result = solve(unit_square, 'robin_laplace', 1 / 32, sigma=1.0)
    assert result.value == pytest.approx(robin_reference_box([1.0, 1.0], 1.0), rel=1e-2)


def test_clamped_plate_unit_square(unit_square):
    result = solve(unit_square, 'bilaplace_clamped', 1 / 32, m=2, extrapolate=True)
    assert result.extrapolated == pytest.approx(1294.93, rel=2e-2)


@pytest.mark.slow
def test_dirichlet_unit_disk_fine_grid(unit_disk):
    result = solve(unit_disk, 'dirichlet_laplace', 1 / 128)
    assert result.value == pytest.approx(dirichlet_reference_ball(2, 1.0), rel=1e-2)


def test_heisenberg_eigenvalue_above_bounds(heisenberg_cube):
    result = solve(heisenberg_cube, 'heisenberg_sublaplace', 0.125)
    assert result.value > 0
    for r in (1.0, 1.5):
        psi = sup_hyperplane_fraction(heisenberg_cube, r, 'upper_enclosure')
        for report in heisenberg_bounds(1, r, psi):
            assert report.value <= result.value * 1.05
