"""Eigenvalue lower bounds, Hardy weights and classical baselines.

Every bound is returned as a ``BoundReport``. A report is ``valid`` only when
all of its inputs are certified: the ball fraction must come from an
upper enclosure on an exact domain, radii and volumes must be exact, and
convexity hypotheses must have been asserted by the caller.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from utils.geometry import (
    DirectionSet,
    Domain,
    FractionEstimate,
    RadiusEstimate,
    ball_volume,
    ray_distances,
    sup_ball_fraction,
)
from utils.heisenberg import HDomain, sup_hyperplane_fraction
from utils.lemma_core import owen_constant, polyharmonic_constant
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

BOUND_IDS = (
    'robin_thm_main', 'poly_eq1', 'poly_eq2', 'heisenberg_eq1', 'heisenberg_eq2', 'lieb',
    'davies_lieb1', 'davies_lieb2', 'rfk_volume', 'hersch_protter', 'kovarik',
    'appendix_meanconvex', 'appendix_convex',
)

# The m = 1 polyharmonic bounds are the Davies-type Dirichlet bounds
POLY_ORDER_ONE_IDS = {'poly_eq1': 'davies_lieb1', 'poly_eq2': 'davies_lieb2'}

BOUNDS_BY_KIND = {
    'dirichlet': ('davies_lieb1', 'davies_lieb2', 'lieb'),
    'robin': ('robin_thm_main',),
    'poly': ('poly_eq1', 'poly_eq2'),
    'heisenberg': ('heisenberg_eq1', 'heisenberg_eq2'),
}

MAX_BESSEL_ORDER = 10.0
BESSEL_SCAN_STEP = 0.05


@dataclass(frozen=True)
class BoundReport:
    bound_id: str
    value: float
    valid: bool
    degenerate: bool = False
    inputs: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.bound_id not in BOUND_IDS:
            raise ValidationError(f'unknown bound id {self.bound_id!r}')
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValidationError(f'bound value must be finite and nonnegative, got {self.value}')


@dataclass(frozen=True)
class HardyWeightSample:
    point: tuple
    value: float
    weight: str
    n_directions: int


@dataclass(frozen=True)
class GeometryData:
    """Scalar geometry feeding the baseline bounds.

    ``convex`` and ``mean_convex`` are hypotheses asserted by the caller.
    """
    d: int
    inradius: float | None = None
    inradius_exact: bool = False
    volume: float | None = None
    volume_exact: bool = False
    convex: bool = False
    mean_convex: bool = False


# ===== Hardy Weights =====

def mu_sigma(domain: Domain, sigma, x, dirs: DirectionSet) -> HardyWeightSample:
    """d * sum_i w_i (delta_i + 1/(2 sigma))^{-2}."""
    sigma = validate_positive(sigma, 'sigma')
    deltas = ray_distances(domain, x, dirs)
    value = domain.dim * dirs.average((deltas + 1.0 / (2.0 * sigma)) ** -2.0)
    return HardyWeightSample(tuple(np.asarray(x, dtype=float).tolist()), value, 'mu_sigma', len(dirs))


def owen_weight(domain: Domain, m, x, dirs: DirectionSet) -> HardyWeightSample:
    """Angular average of delta_omega(x)^{-2m} (no leading factor d)."""
    m = validate_positive_int(m, 'm')
    deltas = ray_distances(domain, x, dirs)
    value = dirs.average(deltas ** (-2.0 * m))
    return HardyWeightSample(tuple(np.asarray(x, dtype=float).tolist()), value, f'owen_m{m}', len(dirs))


# ===== Fraction Handling =====

def _unpack_fraction(psi) -> tuple[float, bool, dict, list]:
    """Value, certification flag, provenance inputs and notes of a fraction."""
    notes = []
    if isinstance(psi, FractionEstimate):
        value = psi.value
        certified = psi.certified
        provenance = {'psi': value, 'psi_mode': psi.mode, 'psi_error': psi.error_radius,
                      'psi_budget': psi.budget}
        if psi.mode == 'upper_enclosure' and not psi.sound:
            notes.append('enclosure computed on an implicit domain is not rigorous')
    else:
        value = validate_nonnegative(psi, 'psi')
        certified = False
        provenance = {'psi': value, 'psi_mode': 'given'}
    if value > 1.0:
        notes.append('psi above 1 clamped to 1')
        value = 1.0
    return value, certified, provenance, notes


def _report(bound_id: str, raw_value: float, certified: bool, inputs: dict, notes: list) -> BoundReport:
    degenerate = False
    value = raw_value
    if not math.isfinite(value):
        notes = [*notes, 'infinite bound (psi = 0) reported as 0']
        value, degenerate = 0.0, True
    elif value <= 0.0:
        value, degenerate = 0.0, True
    if degenerate:
        logger.warning(f'{bound_id}: degenerate bound with inputs {inputs}')
    return BoundReport(bound_id, value, certified, degenerate, inputs, tuple(notes))


def _inverse_power(psi: float, exponent: float) -> float:
    return math.inf if psi == 0 else psi ** -exponent


# ===== Main Bounds =====

def robin_bound(d, sigma, r, psi) -> BoundReport:
    """d sigma^2 / (1 + 2 sigma r)^2 (1 - Psi_r).

    ``sigma`` may be an array of boundary samples of a positive Robin function;
    its minimum is used.
    """
    d = validate_dimension(d)
    notes = ['assumes a uniformly Lipschitz boundary (asserted, not verified)']
    sigma_values = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma_values.size > 1:
        notes.append(f'sigma is the minimum of {sigma_values.size} boundary samples')
    sigma_min = validate_positive(float(sigma_values.min()) if sigma_values.size else float('nan'),
                                  'sigma')
    r = validate_positive(r, 'r')
    value, certified, inputs, fraction_notes = _unpack_fraction(psi)
    raw = d * sigma_min ** 2 / (1.0 + 2.0 * sigma_min * r) ** 2 * (1.0 - value)
    return _report('robin_thm_main', raw, certified,
                   {'d': d, 'sigma': sigma_min, 'r': r, **inputs}, notes + fraction_notes)


def polyharmonic_bounds(d, m, r, psi) -> list[BoundReport]:
    """C_{m,d} r^{-2m} (Psi^{-2m/d} - 1) and c_{m,d} C_{m,d} r^{-2m} (1 - Psi).

    For m = 1 these are the Davies-Lieb type Dirichlet bounds.
    """
    d = validate_dimension(d)
    m = validate_positive_int(m, 'm')
    r = validate_positive(r, 'r')
    value, certified, provenance, notes = _unpack_fraction(psi)
    C = owen_constant(m, d)
    c = polyharmonic_constant(m, d)
    scale = r ** (-2 * m)
    ids = ('davies_lieb1', 'davies_lieb2') if m == 1 else ('poly_eq1', 'poly_eq2')
    inputs = {'d': d, 'm': m, 'r': r, **provenance}
    return [
        _report(ids[0], C * scale * (_inverse_power(value, 2 * m / d) - 1.0), certified, inputs, notes),
        _report(ids[1], c * C * scale * (1.0 - value), certified, inputs, notes),
    ]


def heisenberg_bounds(N, r, psi) -> list[BoundReport]:
    """(N/2) r^{-2} (Psi^{-1/N} - 1) and (N+1)^{(N+1)/N}/2 r^{-2} (1 - Psi)."""
    N = validate_positive_int(N, 'N')
    r = validate_positive(r, 'r')
    value, certified, provenance, notes = _unpack_fraction(psi)
    inputs = {'N': N, 'r': r, **provenance}
    first = N / 2 / r ** 2 * (_inverse_power(value, 1.0 / N) - 1.0)
    second = (N + 1) ** ((N + 1) / N) / 2 / r ** 2 * (1.0 - value)
    return [
        _report('heisenberg_eq1', first, certified, inputs, notes),
        _report('heisenberg_eq2', second, certified, inputs, notes),
    ]


# ===== Bessel Zeros and Baselines =====

def bessel_first_zero(nu) -> float:
    """First positive zero j_{nu,1} of J_nu for 0 <= nu <= 10."""
    nu = validate_nonnegative(nu, 'nu')
    if nu > MAX_BESSEL_ORDER:
        raise ValidationError(f'Bessel order must be at most {MAX_BESSEL_ORDER}, got {nu}')
    lo = max(nu, 1.0)
    upper = nu + 3.0 + 3.0 * nu ** (1.0 / 3.0)
    grid = np.arange(lo, upper + BESSEL_SCAN_STEP, BESSEL_SCAN_STEP)
    values = special.jv(nu, grid)
    changes = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]
    if changes.size == 0:
        raise NumericError(f'no sign change of J_{nu} on [{lo}, {upper}]')
    k = int(changes[0])
    if values[k] == 0.0:
        return float(grid[k])
    return float(optimize.brentq(lambda x: special.jv(nu, x), grid[k], grid[k + 1], xtol=1e-14))


def dirichlet_ball_constant(d) -> float:
    """First Dirichlet eigenvalue of the unit ball, j_{(d-2)/2,1}^2."""
    d = validate_dimension(d)
    return bessel_first_zero((d - 2) / 2) ** 2


def lieb_bound(d, r, psi) -> BoundReport:
    """lambda_B (Psi_r^{-2/d} - 1) r^{-2}, valid for every r > 0."""
    d = validate_dimension(d)
    r = validate_positive(r, 'r')
    value, certified, provenance, notes = _unpack_fraction(psi)
    raw = dirichlet_ball_constant(d) / r ** 2 * (_inverse_power(value, 2 / d) - 1.0)
    return _report('lieb', raw, certified, {'d': d, 'r': r, **provenance}, notes)


def lieb_inradius_bound(d, psi, radius: RadiusEstimate | float) -> BoundReport:
    """lambda_B (psi^{-2/d} - 1) / R_psi^2 with a generalized inradius R_psi.

    The generalized inradius is only ever estimated, so the report is not valid.
    """
    d = validate_dimension(d)
    psi = validate_fraction(psi, 'psi', allow_zero=False, allow_one=False)
    if isinstance(radius, RadiusEstimate):
        if radius.empty:
            return BoundReport('lieb', 0.0, False, True, {'d': d, 'psi': psi},
                               ('no scanned radius reaches the fraction',))
        radius = radius.value
    radius = validate_positive(radius, 'generalized inradius')
    raw = dirichlet_ball_constant(d) * (psi ** (-2 / d) - 1.0) / radius ** 2
    return _report('lieb', raw, False, {'d': d, 'psi': psi, 'R_psi': radius},
                   ['generalized inradius is an estimate'])


def baseline_bounds(geometry: GeometryData, sigma=None, r=None, psi=None) -> list[BoundReport]:
    """Faber-Krahn, Hersch-Protter, Robin inradius bounds and (given r, Psi) Lieb.

    Raises:
        ValidationError: If the inradius or the volume is missing
    """
    d = validate_dimension(geometry.d)
    if geometry.inradius is None or geometry.volume is None:
        raise ValidationError('baseline bounds need both the inradius and the volume')
    R = validate_positive(geometry.inradius, 'inradius')
    volume = validate_positive(geometry.volume, 'volume')

    reports = []
    rfk_constant = dirichlet_ball_constant(d) * ball_volume(d) ** (2 / d)
    reports.append(_report('rfk_volume', rfk_constant * volume ** (-2 / d), geometry.volume_exact,
                           {'d': d, 'volume': volume}, []))

    hersch_ok = geometry.convex or geometry.mean_convex
    reports.append(_report(
        'hersch_protter', math.pi ** 2 / 4 / R ** 2, geometry.inradius_exact and hersch_ok,
        {'d': d, 'R': R}, [] if hersch_ok else ['mean-convexity not asserted']))

    if sigma is not None:
        sigma = validate_positive(sigma, 'sigma')
        inputs = {'d': d, 'sigma': sigma, 'R': R}
        kovarik = sigma / (4 * R * (1 + sigma * R))
        convex_note = [] if geometry.convex else ['convexity not asserted']
        mean_ok = geometry.mean_convex or geometry.convex
        reports.append(_report('kovarik', kovarik, geometry.inradius_exact and geometry.convex,
                               inputs, convex_note))
        reports.append(_report('appendix_meanconvex', kovarik, geometry.inradius_exact and mean_ok,
                               inputs, [] if mean_ok else ['mean-convexity not asserted']))
        reports.append(_report('appendix_convex', 2 * sigma ** 2 / (1 + 2 * sigma * R) ** 2,
                               geometry.inradius_exact and geometry.convex, inputs, convex_note))

    if r is not None and psi is not None:
        reports.append(lieb_bound(d, r, psi))
    return reports


# ===== Sweeps =====

def evaluate_bounds(kind: str, r, psi, *, d: int | None = None, N: int | None = None,
                    sigma=None, m: int = 1) -> list[BoundReport]:
    """All bounds of one problem kind at a single r."""
    if kind == 'dirichlet':
        return [*polyharmonic_bounds(d, 1, r, psi), lieb_bound(d, r, psi)]
    if kind == 'robin':
        if sigma is None:
            raise ValidationError('robin bounds need sigma')
        return [robin_bound(d, sigma, r, psi)]
    if kind == 'poly':
        return polyharmonic_bounds(d, m, r, psi)
    if kind == 'heisenberg':
        return heisenberg_bounds(N, r, psi)
    raise ValidationError(f'unknown problem kind {kind!r}')


def best_bound(domain: Domain | HDomain, kind: str, r_grid, *, bound_id: str | None = None,
               sigma=None, m: int = 1, h=None, certify: bool = True, samples: int = 4000,
               seed: int = 0, executor=None) -> BoundReport:
    """Maximise a bound over a grid of radii.

    Args:
        domain: Euclidean domain, or HDomain for kind 'heisenberg'
        kind: 'dirichlet', 'robin', 'poly' or 'heisenberg'
        r_grid: Radii to scan
        bound_id: Restrict to one bound id of the kind (default: all of them)
        sigma: Robin parameter (kind 'robin')
        m: Polyharmonic order (kind 'poly')
        h: Grid spacing of the fraction computation
        certify: Use upper enclosures (True) or Monte Carlo estimates
        samples: Monte Carlo budget per point in estimate mode
        seed: Monte Carlo seed
        executor: Optional executor; fractions are computed with its ordered map

    Returns:
        The largest report, ties broken toward smaller r
    """
    radii = sorted(validate_positive(r, 'r') for r in r_grid)
    if not radii:
        raise ValidationError('r grid must not be empty')
    if kind not in BOUNDS_BY_KIND:
        raise ValidationError(f'unknown problem kind {kind!r}')
    if bound_id is not None and bound_id not in BOUNDS_BY_KIND[kind]:
        raise ValidationError(f'bound {bound_id!r} does not belong to kind {kind!r}')
    if kind == 'poly' and m == 1 and bound_id is not None:
        bound_id = POLY_ORDER_ONE_IDS[bound_id]

    mode = 'upper_enclosure' if certify else 'estimate'
    if kind == 'heisenberg':
        if not isinstance(domain, HDomain):
            raise ValidationError('heisenberg bounds need a Heisenberg domain')

        def fraction(r):
            return sup_hyperplane_fraction(domain, r, mode, h, samples, seed)
        dims = {'N': domain.N}
    else:
        if isinstance(domain, HDomain):
            domain = domain.domain

        def fraction(r):
            return sup_ball_fraction(domain, r, mode, h, samples, seed)
        dims = {'d': domain.dim}

    mapper = executor.map if executor is not None else map
    fractions = list(mapper(fraction, radii))

    best: BoundReport | None = None
    for r, psi in zip(radii, fractions):
        for report in evaluate_bounds(kind, r, psi, sigma=sigma, m=m, **dims):
            if bound_id is not None and report.bound_id != bound_id:
                continue
            if best is None or (report.value > best.value) or (best.degenerate and not report.degenerate):
                best = report
    if best is None:
        raise ValidationError(f'no {kind} bound {bound_id!r} at the requested parameters')
    logger.info(f'Best {kind} bound: {best.bound_id} = {best.value:.6g} at r = {best.inputs.get("r")}')
    return best


__all__ = [
    'BOUND_IDS',
    'BOUNDS_BY_KIND',
    'BoundReport',
    'GeometryData',
    'HardyWeightSample',
    'baseline_bounds',
    'bessel_first_zero',
    'best_bound',
    'dirichlet_ball_constant',
    'evaluate_bounds',
    'heisenberg_bounds',
    'lieb_bound',
    'lieb_inradius_bound',
    'mu_sigma',
    'owen_weight',
    'polyharmonic_bounds',
    'robin_bound',
]
