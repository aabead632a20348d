"""`oracle` subcommand: property suites for the pointwise lemma and its ingredients."""
import argparse
import logging
from itertools import product

import numpy as np

from components.common import add_run_args, ordered_map, positive_int, resolve_seed, work_pool
from utils import reports
from utils.constants import DEFAULT_DIRECTIONS, DEFAULT_MC_SAMPLES, EXIT_OK, EXIT_VALIDATION_FAILED
from utils.geometry import BoxUnionDomain, ball_fraction, direction_set, make_rng, ray_distances
from utils.lemma_core import (
    ORACLE_TOLERANCE,
    LemmaParams,
    bathtub_extremizer,
    distribution_inequality_oracle,
    elementary_bound,
    lemma_rhs1,
    lemma_rhs2,
    lemma_rhs3,
    random_step_function,
    rhs_crossing,
)
from utils.storage import write_report
from utils.validation import NumericError

logger = logging.getLogger(__name__)

STEP_PAIRS = tuple(product((2, 4, 6), (2, 3)))
BATHTUB_MASSES = (0.25, 1.0, 3.0, 10.0)
TANGENCY_BETAS = (0.5, 1.0, 2.0)
POINTWISE_RADII = (0.6, 1.0)
POINTWISE_ALPHAS = (2, 4)
# Relative slack allowed for quadrature error in the pointwise check
QUADRATURE_SLACK = 0.02


def register(subparsers):
    parser = subparsers.add_parser('oracle', help='run the lemma property suites')
    parser.add_argument('--trials', type=positive_int, default=10_000,
                        help='random step functions per (alpha, d) pair')
    parser.add_argument('--elementary-trials', type=positive_int, default=100_000,
                        help='random (X, beta) pairs for the elementary inequality')
    parser.add_argument('--points', type=positive_int, default=100,
                        help='random interior points of the unit square')
    parser.add_argument('--samples', type=positive_int, default=DEFAULT_MC_SAMPLES,
                        help='Monte Carlo samples per ball fraction')
    parser.add_argument('--directions', type=positive_int, default=DEFAULT_DIRECTIONS,
                        help='quadrature nodes on the circle')
    add_run_args(parser)
    parser.set_defaults(handler=run)
    return parser


def step_function_suite(alpha: int, d: int, trials: int, seed: int, task_index: int) -> dict:
    rng = make_rng(seed, task_index)
    violations = 0
    worst = np.inf
    for _ in range(trials):
        s = random_step_function(rng, pieces=50, t_max=float(rng.uniform(1.5, 6.0)))
        try:
            lhs, rhs = distribution_inequality_oracle(s, alpha, d)
            worst = min(worst, lhs - rhs)
        except NumericError as e:
            violations += 1
            logger.error(f'alpha={alpha}, d={d}: {e}')

    equality_gap = 0.0
    for mass in BATHTUB_MASSES:
        lhs, rhs = distribution_inequality_oracle(bathtub_extremizer(mass, alpha), alpha, d)
        equality_gap = max(equality_gap, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return {'alpha': alpha, 'd': d, 'violations': violations, 'min_slack': float(worst),
            'equality_gap': equality_gap}


def elementary_suite(trials: int, seed: int, task_index: int) -> dict:
    rng = make_rng(seed, task_index)
    X = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=trials))
    betas = rng.uniform(0.05, 10.0, size=trials)
    violations = 0
    for x, beta in zip(X, betas):
        lhs, rhs = elementary_bound(x, beta)
        if lhs > rhs * (1 + ORACLE_TOLERANCE) + ORACLE_TOLERANCE:
            violations += 1
    gap = max(abs(lhs - rhs) for lhs, rhs in
              (elementary_bound(beta / (beta + 1), beta) for beta in TANGENCY_BETAS))
    return {'violations': violations, 'tangency_gap': gap}


def crossing_suite() -> list[dict]:
    out = []
    for alpha, d in product((2, 4), (2, 3)):
        crossing = rhs_crossing(alpha, d)
        params = LemmaParams(alpha=alpha, d=d, r=1.0)
        scan = np.linspace(0.01, 0.99, 99)
        below = [p for p in scan if p < crossing * (1 - 1e-6)]
        above = [p for p in scan if p > crossing * (1 + 1e-6)]
        ordered = (all(lemma_rhs1(params, p) > lemma_rhs2(params, p) for p in below)
                   and all(lemma_rhs1(params, p) < lemma_rhs2(params, p) for p in above))
        out.append({'alpha': alpha, 'd': d, 'crossing': crossing, 'ordered': ordered})
    return out


def pointwise_suite(points: int, samples: int, n_directions: int, seed: int, task_index: int) -> dict:
    """Angular averages of delta^{-alpha} against the three pointwise bounds on the unit square."""
    square = BoxUnionDomain.box([0.0, 0.0], [1.0, 1.0])
    dirs = direction_set(2, n_directions)
    rng = make_rng(seed, task_index)
    centers = rng.uniform(0.02, 0.98, size=(points, 2))
    failures = 0
    checks = 0
    for j, x in enumerate(centers):
        deltas = ray_distances(square, x, dirs)
        for r in POINTWISE_RADII:
            psi = ball_fraction(square, x, r, samples, seed=seed, task_index=task_index * 10_000 + j)
            psi_high = min(1.0, psi.value + psi.error_radius)
            for alpha in POINTWISE_ALPHAS:
                average = dirs.average(deltas ** -float(alpha))
                params = LemmaParams(alpha=alpha, d=2, r=r, ell=0.0)
                bounds = (lemma_rhs1(params, psi_high), lemma_rhs2(params, psi_high),
                          lemma_rhs3(params, psi_high))
                checks += 3
                failures += sum(average < b - QUADRATURE_SLACK * average for b in bounds)
    return {'checks': checks, 'failures': int(failures)}


def run(args: argparse.Namespace) -> int:
    seed = resolve_seed(args)
    rows = []

    with work_pool(args) as executor:
        step_results = ordered_map(
            executor,
            lambda task: step_function_suite(task[1][0], task[1][1], args.trials, seed, task[0]),
            list(enumerate(STEP_PAIRS)))
    failed = False
    for result in step_results:
        ok = result['violations'] == 0 and result['equality_gap'] <= ORACLE_TOLERANCE
        failed |= not ok
        rows.append(reports.summary_row(
            'oracle', 'distribution_inequality', result['min_slack'], ok,
            inputs={'alpha': result['alpha'], 'd': result['d'], 'trials': args.trials,
                    'violations': result['violations'], 'equality_gap': result['equality_gap']}))

    elementary = elementary_suite(args.elementary_trials, seed, len(STEP_PAIRS))
    ok = elementary['violations'] == 0 and elementary['tangency_gap'] <= ORACLE_TOLERANCE
    failed |= not ok
    rows.append(reports.summary_row('oracle', 'elementary_inequality', elementary['tangency_gap'], ok,
                                    inputs={'trials': args.elementary_trials,
                                            'violations': elementary['violations']}))

    for crossing in crossing_suite():
        failed |= not crossing['ordered']
        rows.append(reports.summary_row('oracle', 'rhs_crossing', crossing['crossing'],
                                        crossing['ordered'],
                                        inputs={'alpha': crossing['alpha'], 'd': crossing['d']}))

    pointwise = pointwise_suite(args.points, args.samples, args.directions, seed, len(STEP_PAIRS) + 1)
    ok = pointwise['failures'] == 0
    failed |= not ok
    rows.append(reports.summary_row('oracle', 'pointwise_lemma', float(pointwise['failures']), ok,
                                    domain='unit_square', inputs=pointwise))

    write_report(reports.export(rows, f'oracle seed={seed}', args.format), args.out)
    if failed:
        logger.error('Lemma oracle suite reported failures')
        return EXIT_VALIDATION_FAILED
    return EXIT_OK
