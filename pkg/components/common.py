"""Argument groups and helpers shared across subcommands."""
import argparse
import logging
import os
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager

from utils.constants import (
    DEFAULT_DIRECTIONS,
    DEFAULT_MC_SAMPLES,
    DEFAULT_R_GRID,
    DEFAULT_SEED,
    VALID_FORMATS,
    VALID_KINDS,
    VALID_MODES,
)
from utils.validation import ValidationError, validate_positive, validate_positive_int

logger = logging.getLogger(__name__)


def float_list(text: str) -> list[float]:
    """argparse type for comma-separated positive numbers, e.g. '0.6,1.0,1.5'."""
    try:
        return [validate_positive(part, 'r') for part in text.split(',') if part.strip()]
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def positive_float(text: str) -> float:
    try:
        return validate_positive(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def positive_int(text: str) -> int:
    try:
        return validate_positive_int(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def add_domain_args(parser: argparse.ArgumentParser, kind_required: bool = True):
    """--domain, --kind and the problem parameters."""
    parser.add_argument('--domain', required=True,
                        help='domain spec file (or the name of a shipped spec)')
    parser.add_argument('--kind', choices=VALID_KINDS, required=kind_required, default=None,
                        help='eigenvalue problem')
    parser.add_argument('--sigma', type=positive_float, default=None, help='Robin parameter')
    parser.add_argument('--m', type=positive_int, default=1, help='polyharmonic order')
    parser.add_argument('--N', type=positive_int, default=None,
                        help='Heisenberg dimension (overrides the spec field)')


def add_fraction_args(parser: argparse.ArgumentParser):
    """Radius grid and ball-fraction computation settings."""
    parser.add_argument('--r', type=float_list, default=list(DEFAULT_R_GRID),
                        help='comma-separated radii')
    parser.add_argument('--h', type=positive_float, default=None,
                        help='grid spacing of the fraction computation')
    parser.add_argument('--mode', choices=VALID_MODES, default='certify',
                        help='certify (upper enclosures) or estimate (Monte Carlo)')
    parser.add_argument('--samples', type=positive_int, default=DEFAULT_MC_SAMPLES,
                        help='Monte Carlo samples per point')
    parser.add_argument('--directions', type=positive_int, default=DEFAULT_DIRECTIONS,
                        help='quadrature nodes on the sphere')


def add_eig_args(parser: argparse.ArgumentParser):
    parser.add_argument('--eig-h', type=positive_float, default=None,
                        help='finite-difference grid spacing')
    parser.add_argument('--extrapolate', action='store_true',
                        help='Richardson extrapolation with a second solve at half spacing')


def add_run_args(parser: argparse.ArgumentParser):
    """Seed, workers and output."""
    parser.add_argument('--seed', type=int, default=None,
                        help=f'random seed (default: EIGENBOUND_SEED or {DEFAULT_SEED})')
    parser.add_argument('--workers', type=positive_int, default=None,
                        help='size of the work pool (default: EIGENBOUND_WORKERS or 1)')
    parser.add_argument('--out', default=None, help='output path (default: stdout)')
    parser.add_argument('--format', choices=VALID_FORMATS, default='csv', help='report format')


def resolve_seed(args: argparse.Namespace) -> int:
    """Flag, then EIGENBOUND_SEED, then the published default."""
    if getattr(args, 'seed', None) is not None:
        return int(args.seed)
    env = os.environ.get('EIGENBOUND_SEED', '').strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f'EIGENBOUND_SEED must be an integer, got {env!r}') from None
    return DEFAULT_SEED


def resolve_workers(args: argparse.Namespace) -> int:
    if getattr(args, 'workers', None) is not None:
        return int(args.workers)
    return validate_positive_int(os.environ.get('EIGENBOUND_WORKERS', '1'), 'EIGENBOUND_WORKERS')


@contextmanager
def work_pool(args: argparse.Namespace):
    """Thread pool sized by --workers; None when running single-threaded."""
    workers = resolve_workers(args)
    if workers <= 1:
        yield None
        return
    logger.debug(f'Starting work pool with {workers} workers')
    with ThreadPoolExecutor(max_workers=workers) as executor:
        yield executor


def ordered_map(executor: Executor | None, fn, items) -> list:
    """Map in input order regardless of completion order."""
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))
