"""Pointwise lower bounds for angular averages of ray distances, and oracles.

For x in an open set, r > 0 and alpha > 0, the angular average of
delta_omega(x)^{-alpha} is bounded below in terms of the ball fraction
psi_r(x) in three ways (``lemma_rhs1/2/3``). The oracles below check the
ingredients of the argument on exactly integrable step functions.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from utils.validation import (
    NumericError,
    ValidationError,
    validate_dimension,
    validate_fraction,
    validate_nonnegative,
    validate_positive,
    validate_positive_int,
)

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LemmaParams:
    alpha: float
    d: int
    r: float
    ell: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'alpha', validate_positive(self.alpha, 'alpha'))
        object.__setattr__(self, 'd', validate_dimension(self.d))
        object.__setattr__(self, 'r', validate_positive(self.r, 'r'))
        object.__setattr__(self, 'ell', validate_nonnegative(self.ell, 'ell'))


@dataclass(frozen=True, eq=False)
class StepFunction:
    """s(t) = values[k] on (breakpoints[k], breakpoints[k+1]), zero elsewhere.

    Values lie in [0, 1]; monotonicity is not required.
    """
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if b.size != v.size + 1:
            raise ValidationError('a step function needs exactly one more breakpoint than values')
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise ValidationError('step function breakpoints and values must be finite')
        if b.size and b[0] < 0:
            raise ValidationError('step function breakpoints must be nonnegative')
        if np.any(np.diff(b) <= 0):
            raise ValidationError('step function breakpoints must be strictly increasing')
        if np.any(v < 0) or np.any(v > 1):
            raise ValidationError('step function values must lie in [0, 1]')
        object.__setattr__(self, 'breakpoints', b)
        object.__setattr__(self, 'values', v)

    @classmethod
    def zero(cls) -> 'StepFunction':
        return cls(np.array([0.0, 1.0]), np.array([0.0]))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        index = np.searchsorted(self.breakpoints, t, side='left') - 1
        inside = (index >= 0) & (index < self.values.size)
        return np.where(inside, self.values[np.clip(index, 0, self.values.size - 1)], 0.0)

    def moment(self, alpha: float, lower: float = 0.0) -> float:
        """Integral of s(t) t^{alpha-1} over (lower, inf)."""
        b = np.maximum(self.breakpoints, lower)
        return float(np.sum(self.values * (b[1:] ** alpha - b[:-1] ** alpha)) / alpha)

    def tail(self, d: float) -> float:
        """Integral of s(t) t^{-d-1} over (1, inf)."""
        b = np.maximum(self.breakpoints, 1.0)
        return float(np.sum(self.values * (b[:-1] ** -d - b[1:] ** -d)) / d)


# ===== Pointwise Bounds =====

def lemma_rhs1(params: LemmaParams, psi) -> float:
    """r^{-alpha} (psi^{-alpha/d} - 1); +inf for psi = 0."""
    psi = validate_fraction(psi, 'psi')
    if psi == 0:
        return math.inf
    return params.r ** -params.alpha * (psi ** (-params.alpha / params.d) - 1.0)


def lemma_rhs2(params: LemmaParams, psi) -> float:
    """r^{-alpha} ((d+alpha)/alpha)^{alpha/d} ((d+alpha)/d) (1 - psi)."""
    psi = validate_fraction(psi, 'psi')
    a, d = params.alpha, params.d
    factor = ((d + a) / a) ** (a / d) * (d + a) / d
    return params.r ** -a * factor * (1.0 - psi)


def lemma_rhs3(params: LemmaParams, psi) -> float:
    """(r + ell)^{-alpha} (1 - psi)."""
    psi = validate_fraction(psi, 'psi')
    return (params.r + params.ell) ** -params.alpha * (1.0 - psi)


def heisenberg_lemma_rhs1(N: int, r, psi) -> float:
    """r^{-2} (psi^{-1/N} - 1), the first bound with d = 2N and alpha = 2."""
    N = validate_positive_int(N, 'N')
    return lemma_rhs1(LemmaParams(alpha=2.0, d=2 * N, r=r), psi)


def heisenberg_lemma_rhs2(N: int, r, psi) -> float:
    """(N+1)^{(N+1)/N} / N * r^{-2} (1 - psi)."""
    N = validate_positive_int(N, 'N')
    return lemma_rhs2(LemmaParams(alpha=2.0, d=2 * N, r=r), psi)


def rhs_crossing(alpha, d) -> float:
    """The fraction psi* in (0, 1) at which lemma_rhs1 and lemma_rhs2 agree.

    Below psi* the first bound is larger, above it the second.
    """
    params = LemmaParams(alpha=alpha, d=d, r=1.0)

    def gap(psi):
        return lemma_rhs1(params, psi) - lemma_rhs2(params, psi)

    lo, hi = 1e-12, 1.0 - 1e-9
    if not (gap(lo) > 0 > gap(hi)):
        raise NumericError(f'no sign change of rhs1 - rhs2 for alpha={alpha}, d={d}')
    return float(optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


# ===== Oracles =====

def elementary_bound(X, beta) -> tuple[float, float]:
    """Both sides of (1 - X)_+ <= beta^beta / (beta+1)^{beta+1} X^{-beta}."""
    X = validate_positive(X, 'X')
    beta = validate_positive(beta, 'beta')
    lhs = max(1.0 - X, 0.0)
    rhs = beta ** beta / (beta + 1) ** (beta + 1) * X ** -beta
    return lhs, rhs


def distribution_inequality_oracle(s: StepFunction, alpha, d) -> tuple[float, float]:
    """Both sides of alpha int s t^{alpha-1} >= (1 - d int_1^inf s t^{-d-1})^{-alpha/d} - 1.

    Integrals are evaluated exactly on the pieces.

    Raises:
        NumericError: If the inequality fails beyond rounding
    """
    if not isinstance(s, StepFunction):
        raise ValidationError('s must be a StepFunction')
    alpha = validate_positive(alpha, 'alpha')
    d = validate_dimension(d)
    lhs = alpha * s.moment(alpha)
    mass = 1.0 - d * s.tail(d)
    rhs = math.inf if mass <= 0 else mass ** (-alpha / d) - 1.0
    if lhs < rhs - ORACLE_TOLERANCE * max(1.0, abs(rhs)):
        raise NumericError(f'distribution inequality violated: lhs={lhs!r} < rhs={rhs!r}')
    return lhs, rhs


def bathtub_extremizer(M, alpha) -> StepFunction:
    """Indicator of (1, (M+1)^{1/alpha}), which attains equality for given M."""
    M = validate_positive(M, 'M')
    alpha = validate_positive(alpha, 'alpha')
    return StepFunction(np.array([1.0, (M + 1.0) ** (1.0 / alpha)]), np.array([1.0]))


def random_step_function(rng: np.random.Generator, pieces: int = 50,
                         t_max: float = 4.0) -> StepFunction:
    """Step function with random breakpoints in (0, t_max) and values in [0, 1]."""
    pieces = validate_positive_int(pieces, 'pieces')
    t_max = validate_positive(t_max, 't_max')
    inner = np.sort(rng.uniform(0.0, t_max, size=pieces - 1))
    breakpoints = np.unique(np.concatenate([[0.0], inner, [t_max]]))
    values = rng.uniform(0.0, 1.0, size=breakpoints.size - 1)
    return StepFunction(breakpoints, values)


# ===== Distribution Functions From Geometry =====

def distribution_function(r, distances, weights) -> StepFunction:
    """s(t) = weight of {omega : r / delta_omega >= t} for quadrature data.

    Infinite distances contribute nothing.
    """
    r = validate_positive(r, 'r')
    distances = np.asarray(distances, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if distances.shape != weights.shape:
        raise ValidationError('distances and weights must have the same shape')
    levels = r / distances
    finite = levels > 0
    levels, w = levels[finite], weights[finite]
    if levels.size == 0:
        return StepFunction.zero()
    order = np.argsort(levels)
    levels, w = levels[order], w[order]
    knots, first = np.unique(levels, return_index=True)
    # s on (knots[j-1], knots[j]] is the weight of levels >= knots[j]
    remaining = np.cumsum(w[::-1])[::-1][first]
    return StepFunction(np.concatenate([[0.0], knots]), np.clip(remaining, 0.0, 1.0))


def layer_cake_average(s: StepFunction, alpha) -> float:
    """alpha int s t^{alpha-1} dt, equal to r^alpha times the average of delta^{-alpha}."""
    alpha = validate_positive(alpha, 'alpha')
    return alpha * s.moment(alpha)


def fraction_lower_bound(s: StepFunction, d) -> float:
    """1 - d int_1^inf s t^{-d-1} dt, a lower bound on psi_r(x)."""
    d = validate_dimension(d)
    return 1.0 - d * s.tail(d)


# ===== Closed-Form Constants =====

def owen_constant_exact(m, d) -> Fraction:
    """C_{m,d} = (d+2m-2)(d+2m-4)...d * (2m-1)!! / 4^m as an exact rational."""
    m = validate_positive_int(m, 'm')
    d = validate_dimension(d)
    rising = math.prod(d + 2 * k for k in range(m))
    double_factorial = math.prod(range(1, 2 * m, 2))
    return Fraction(rising * double_factorial, 4 ** m)


def owen_constant(m, d) -> float:
    return float(owen_constant_exact(m, d))


def polyharmonic_constant(m, d) -> float:
    """c_{m,d} = ((d+2m)/(2m))^{2m/d} (d+2m)/d."""
    m = validate_positive_int(m, 'm')
    d = validate_dimension(d)
    return ((d + 2 * m) / (2 * m)) ** (2 * m / d) * (d + 2 * m) / d


__all__ = [
    'LemmaParams',
    'StepFunction',
    'bathtub_extremizer',
    'distribution_function',
    'distribution_inequality_oracle',
    'elementary_bound',
    'fraction_lower_bound',
    'heisenberg_lemma_rhs1',
    'heisenberg_lemma_rhs2',
    'layer_cake_average',
    'lemma_rhs1',
    'lemma_rhs2',
    'lemma_rhs3',
    'owen_constant',
    'owen_constant_exact',
    'polyharmonic_constant',
    'random_step_function',
    'rhs_crossing',
]
