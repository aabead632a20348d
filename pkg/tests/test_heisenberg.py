"""Tests for the Heisenberg group law, horizontal distances and hyperplane fractions."""
import math

import numpy as np
import pytest

from utils.geometry import BoxUnionDomain, direction_set
from utils.heisenberg import (
    HDomain,
    HPoint,
    davies_hardy_distance,
    davies_hardy_from_distances,
    group_inverse,
    group_mul,
    horizontal_coefficients,
    horizontal_ray_distance,
    horizontal_ray_distances,
    hyperplane_ball_fraction,
    j_matrix,
    left_translate,
    sup_hyperplane_fraction,
    translated_domain,
)
from utils.lemma_core import heisenberg_lemma_rhs1, heisenberg_lemma_rhs2
from utils.validation import DomainError, UnsupportedError, ValidationError


def test_group_law_example():
    product = group_mul(HPoint([1.0, 0.0], 0.0), HPoint([0.0, 1.0], 0.0))
    np.testing.assert_array_equal(product.z, [1.0, 1.0])
    assert product.t == 0.5


def test_group_inverse_and_associativity():
    rng = np.random.default_rng(0)
    p, q, s = (HPoint(rng.normal(size=4), rng.normal()) for _ in range(3))
    identity = group_mul(p, group_inverse(p))
    np.testing.assert_allclose(identity.as_array(), 0.0, atol=1e-12)
    left = group_mul(group_mul(p, q), s)
    right = group_mul(p, group_mul(q, s))
    np.testing.assert_allclose(left.as_array(), right.as_array(), atol=1e-12)


def test_left_translate_matches_group_law():
    q = HPoint([0.5, -1.0], 2.0)
    p = HPoint([0.25, 0.75], -0.5)
    np.testing.assert_allclose(left_translate(q, p.as_array())[0], group_mul(q, p).as_array())


def test_j_matrix_is_symplectic():
    J = j_matrix(2)
    np.testing.assert_array_equal(J.T, -J)
    np.testing.assert_array_equal(J @ J, -np.eye(4))


def test_horizontal_coefficients():
    np.testing.assert_allclose(horizontal_coefficients(np.array([1.0, 2.0])), [-1.0, 0.5])


def test_hpoint_requires_even_z():
    with pytest.raises(ValidationError):
        HPoint([1.0, 2.0, 3.0], 0.0)


def test_hdomain_dimension_mismatch():
    with pytest.raises(ValidationError):
        HDomain(BoxUnionDomain.box([0.0, 0.0], [1.0, 1.0]), 1)


# ===== Horizontal Distances =====

def test_horizontal_distance_at_origin(heisenberg_cube):
    origin = HPoint([0.0, 0.0], 0.0)
    assert horizontal_ray_distance(heisenberg_cube, origin, [1.0, 0.0]) == pytest.approx(1.0)


def test_horizontal_distance_in_slab():
    tau = 0.1
    slab = HDomain(BoxUnionDomain.box([-10.0, -10.0, -tau], [10.0, 10.0, tau]), 1)
    p = HPoint([1.0, 0.0], 0.0)
    # The t-component grows with slope 1/2 z.J omega = 1/2
    assert horizontal_ray_distance(slab, p, [0.0, 1.0]) == pytest.approx(2 * tau)
    assert horizontal_ray_distance(slab, p, [1.0, 0.0]) == pytest.approx(9.0)


def test_horizontal_distance_requires_interior_point(heisenberg_cube):
    with pytest.raises(DomainError):
        horizontal_ray_distance(heisenberg_cube, HPoint([2.0, 0.0], 0.0), [1.0, 0.0])


def test_davies_hardy_from_distances():
    assert davies_hardy_from_distances(1, [1.0, 2.0], [0.5, 0.5]) == pytest.approx(
        (2 * 0.625) ** -0.5)
    assert davies_hardy_from_distances(2, [3.0, 3.0], [0.5, 0.5]) == pytest.approx(3.0 / 2.0)
    assert davies_hardy_from_distances(1, [np.inf], [1.0]) == math.inf


def test_davies_hardy_distance_at_origin(heisenberg_cube):
    dirs = direction_set(2, 256)
    value = davies_hardy_distance(heisenberg_cube, HPoint([0.0, 0.0], 0.0), dirs)
    # At z = 0 the horizontal rays are those of the square (-1, 1)^2
    distances = horizontal_ray_distances(heisenberg_cube, HPoint([0.0, 0.0], 0.0), dirs)
    assert np.all((distances >= 1.0 - 1e-12) & (distances <= math.sqrt(2) + 1e-12))
    assert 1.0 / math.sqrt(2) <= value <= 1.0


def test_left_translation_invariance(heisenberg_cube):
    q = HPoint([0.5, 1.5], -2.0)
    p = HPoint([0.2, -0.3], 0.1)
    moved = translated_domain(heisenberg_cube, q)
    dirs = direction_set(2, 64)
    np.testing.assert_allclose(
        horizontal_ray_distances(moved, group_mul(q, p), dirs),
        horizontal_ray_distances(heisenberg_cube, p, dirs), rtol=1e-9)
    before = hyperplane_ball_fraction(heisenberg_cube, p, 1.2, 4000, seed=9)
    after = hyperplane_ball_fraction(moved, group_mul(q, p), 1.2, 4000, seed=9)
    assert after.value == pytest.approx(before.value, abs=1e-3)


def test_translated_domain_geometry(heisenberg_cube):
    moved = translated_domain(heisenberg_cube, HPoint([0.5, 1.5], -2.0))
    assert moved.domain.volume() == (pytest.approx(8.0), True)
    with pytest.raises(UnsupportedError):
        moved.domain.boundary_distance(np.array([0.5, 1.5, -2.0]))


# ===== Hyperplane Fractions =====

def test_fraction_of_inscribed_disk(heisenberg_cube):
    origin = HPoint([0.0, 0.0], 0.0)
    assert hyperplane_ball_fraction(heisenberg_cube, origin, 0.9, 2000).value == 1.0
    assert hyperplane_ball_fraction(heisenberg_cube, origin, 0.9, mode='upper_enclosure').value == 1.0


def test_fraction_of_large_disk(heisenberg_cube):
    origin = HPoint([0.0, 0.0], 0.0)
    r = 2 * math.sqrt(2)
    enclosure = hyperplane_ball_fraction(heisenberg_cube, origin, r, 0.125, mode='upper_enclosure')
    assert enclosure.value == pytest.approx(1 / (2 * math.pi), rel=1e-9)
    estimate = hyperplane_ball_fraction(heisenberg_cube, origin, r, 20_000, seed=4)
    assert estimate.value == pytest.approx(1 / (2 * math.pi), abs=0.01)


def test_sup_fraction_small_radius(heisenberg_cube):
    enclosure = sup_hyperplane_fraction(heisenberg_cube, 0.5, 'upper_enclosure')
    assert enclosure.value == 1.0
    assert enclosure.certified


def test_sup_enclosure_bounds_estimate(heisenberg_cube):
    enclosure = sup_hyperplane_fraction(heisenberg_cube, 1.5, 'upper_enclosure')
    estimate = sup_hyperplane_fraction(heisenberg_cube, 1.5, 'estimate', h=0.5, samples=2000, seed=3)
    assert estimate.value - 2 * estimate.error_radius <= enclosure.value
    assert enclosure.value < 1.0


@pytest.mark.parametrize('z, t', [([0.3, 0.2], 0.1), ([-0.5, 0.4], -0.3)])
def test_pointwise_lemma_on_hyperplanes(heisenberg_cube, z, t):
    p = HPoint(z, t)
    dirs = direction_set(2, 512)
    average = dirs.average(horizontal_ray_distances(heisenberg_cube, p, dirs) ** -2.0)
    for r in (0.8, 1.5):
        psi = hyperplane_ball_fraction(heisenberg_cube, p, r, r / 32, mode='upper_enclosure').value
        assert average >= 0.98 * heisenberg_lemma_rhs1(1, r, psi)
        assert average >= 0.98 * heisenberg_lemma_rhs2(1, r, psi)
