"""Tests for the pointwise bounds, their oracles and the closed-form constants."""
import math
from fractions import Fraction

import numpy as np
import pytest

from utils.geometry import ball_fraction, direction_set, make_rng, ray_distances
from utils.lemma_core import (
    LemmaParams,
    StepFunction,
    bathtub_extremizer,
    distribution_function,
    distribution_inequality_oracle,
    elementary_bound,
    fraction_lower_bound,
    heisenberg_lemma_rhs1,
    heisenberg_lemma_rhs2,
    layer_cake_average,
    lemma_rhs1,
    lemma_rhs2,
    lemma_rhs3,
    owen_constant,
    owen_constant_exact,
    polyharmonic_constant,
    random_step_function,
    rhs_crossing,
)
from utils.validation import ValidationError


# ===== Pointwise Bounds =====

def test_lemma_rhs1_values():
    assert lemma_rhs1(LemmaParams(2, 2, 1.0), 1.0) == 0.0
    assert lemma_rhs1(LemmaParams(2, 2, 1.0), 0.25) == pytest.approx(3.0)
    assert lemma_rhs1(LemmaParams(2, 2, 2.0), 0.25) == pytest.approx(0.75)
    assert lemma_rhs1(LemmaParams(2, 2, 1.0), 0.0) == math.inf


def test_lemma_rhs2_values():
    params = LemmaParams(2, 2, 1.0)
    assert lemma_rhs2(params, 1.0) == 0.0
    assert lemma_rhs2(params, 0.0) == pytest.approx(4.0)
    assert lemma_rhs2(params, 0.25) == pytest.approx(3.0)


def test_lemma_rhs3_values():
    assert lemma_rhs3(LemmaParams(2, 2, 1.0), 0.0) == pytest.approx(1.0)
    assert lemma_rhs3(LemmaParams(2, 2, 1.0, ell=1.0), 0.5) == pytest.approx(0.125)
    assert lemma_rhs3(LemmaParams(2, 2, 1.0, ell=1e8), 0.5) < 1e-15


def test_lemma_rejects_fraction_above_one():
    with pytest.raises(ValidationError):
        lemma_rhs1(LemmaParams(2, 2, 1.0), 1.5)
    with pytest.raises(ValidationError):
        lemma_rhs2(LemmaParams(2, 2, 1.0), -0.1)


def test_lemma_params_validation():
    with pytest.raises(ValidationError):
        LemmaParams(0.0, 2, 1.0)
    with pytest.raises(ValidationError):
        LemmaParams(2, 2, 1.0, ell=-1.0)


def test_heisenberg_rhs():
    assert heisenberg_lemma_rhs1(1, 1.0, 0.5) == pytest.approx(1.0)
    assert heisenberg_lemma_rhs2(1, 1.0, 0.5) == pytest.approx(2.0)


@pytest.mark.parametrize('alpha, d', [(2, 2), (2, 3), (4, 2), (4, 3), (6, 3)])
def test_rhs_crossing_orders_the_bounds(alpha, d):
    crossing = rhs_crossing(alpha, d)
    params = LemmaParams(alpha, d, 1.0)
    assert 0 < crossing < 1
    assert lemma_rhs1(params, crossing) == pytest.approx(lemma_rhs2(params, crossing), rel=1e-9)
    below, above = crossing / 2, (1 + crossing) / 2
    assert lemma_rhs1(params, below) > lemma_rhs2(params, below)
    assert lemma_rhs1(params, above) < lemma_rhs2(params, above)


def test_rhs_crossing_known_value():
    assert rhs_crossing(2, 2) == pytest.approx(0.25, rel=1e-12)


# ===== Oracles =====

@pytest.mark.parametrize('beta', [0.5, 1.0, 2.0])
def test_elementary_bound_tangency(beta):
    lhs, rhs = elementary_bound(beta / (beta + 1), beta)
    assert lhs == pytest.approx(1 / (beta + 1), abs=1e-12)
    assert rhs == pytest.approx(lhs, abs=1e-12)


def test_elementary_bound_values():
    assert elementary_bound(1.0, 3.0)[0] == 0.0
    assert elementary_bound(2.0, 1.0) == (0.0, pytest.approx(0.125))


def test_elementary_bound_random_pairs():
    rng = make_rng(1)
    for X, beta in zip(np.exp(rng.uniform(-7, 7, 5000)), rng.uniform(0.05, 10, 5000)):
        lhs, rhs = elementary_bound(X, beta)
        assert lhs <= rhs * (1 + 1e-12) + 1e-15


def test_distribution_inequality_zero_function():
    assert distribution_inequality_oracle(StepFunction.zero(), 2, 2) == (0.0, 0.0)


def test_bathtub_extremizer_attains_equality():
    s = bathtub_extremizer(1.0, 2)
    np.testing.assert_allclose(s.breakpoints, [1.0, math.sqrt(2)])
    lhs, rhs = distribution_inequality_oracle(s, 2, 2)
    assert lhs == pytest.approx(1.0, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('alpha', [2, 4, 6])
@pytest.mark.parametrize('d', [2, 3])
def test_distribution_inequality_random_step_functions(alpha, d):
    rng = make_rng(2024, alpha * 10 + d)
    for _ in range(500):
        lhs, rhs = distribution_inequality_oracle(random_step_function(rng, 50), alpha, d)
        assert lhs >= rhs - 1e-12 * max(1.0, abs(rhs))


def test_step_function_validation():
    with pytest.raises(ValidationError):
        StepFunction(np.array([0.0, 1.0]), np.array([1.5]))
    with pytest.raises(ValidationError):
        StepFunction(np.array([1.0, 0.5]), np.array([0.5]))
    with pytest.raises(ValidationError):
        StepFunction(np.array([0.0, 1.0, 2.0]), np.array([0.5]))


# ===== Distribution Functions From Geometry =====

def test_layer_cake_matches_direct_average(unit_square):
    dirs = direction_set(2, 360)
    x, r = [0.3, 0.6], 0.8
    distances = ray_distances(unit_square, x, dirs)
    s = distribution_function(r, distances, dirs.weights)
    for alpha in (2, 4):
        direct = r ** alpha * dirs.average(distances ** -float(alpha))
        assert layer_cake_average(s, alpha) == pytest.approx(direct, rel=1e-10)


def test_fraction_lower_bound_below_fraction(unit_square):
    dirs = direction_set(2, 720)
    x, r = [0.3, 0.6], 0.8
    s = distribution_function(r, ray_distances(unit_square, x, dirs), dirs.weights)
    psi = ball_fraction(unit_square, x, r, 20_000, seed=6)
    assert fraction_lower_bound(s, 2) <= psi.value + psi.error_radius + 1e-2


def test_distribution_function_infinite_distances():
    s = distribution_function(1.0, [np.inf, np.inf], [0.5, 0.5])
    assert layer_cake_average(s, 2) == 0.0


# ===== Constants =====

@pytest.mark.parametrize('d', [2, 3, 4, 5, 6])
def test_owen_constant_first_order(d):
    assert owen_constant_exact(1, d) == Fraction(d, 4)


def test_owen_constant_second_order():
    assert owen_constant_exact(2, 2) == Fraction(3, 2)
    assert owen_constant(2, 3) == 2.8125


def test_polyharmonic_constant():
    assert polyharmonic_constant(1, 2) == pytest.approx(4.0, abs=1e-12)
    assert polyharmonic_constant(2, 2) == pytest.approx(6.75, abs=1e-12)
    assert owen_constant(1, 2) * polyharmonic_constant(1, 2) == pytest.approx(2.0)


def test_constants_reject_bad_order():
    with pytest.raises(ValidationError):
        owen_constant(0, 2)
