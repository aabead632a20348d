"""`validate` subcommand: certified bounds must not exceed the computed eigenvalue."""
import argparse
import logging

from commands.problem import (
    best_value,
    compute_bounds,
    compute_eigenvalue,
    load_problem,
    margin_for,
    reference_eigenvalue,
)
from components.common import (
    add_domain_args,
    add_eig_args,
    add_fraction_args,
    add_run_args,
    resolve_seed,
    work_pool,
)
from utils import reports
from utils.constants import EXIT_OK, EXIT_VALIDATION_FAILED
from utils.storage import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('validate', help='check bounds against finite-difference eigenvalues')
    add_domain_args(parser)
    add_fraction_args(parser)
    add_eig_args(parser)
    add_run_args(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    spec = load_problem(args)
    seed = resolve_seed(args)
    margin = margin_for(args.kind)

    with work_pool(args) as executor:
        bound_reports = compute_bounds(spec, args.kind, args, seed, executor)
    result = compute_eigenvalue(spec, args.kind, args)
    eigenvalue = best_value(result)

    rows = [reports.eigen_row(result, spec.name, args.kind, reference_eigenvalue(spec, args.kind, args))]
    rows.extend(reports.bound_row(report, spec.name, args.kind, section='check',
                                  reference=eigenvalue, margin=margin)
                for report in bound_reports)

    title = (f'validate domain={spec.name} kind={args.kind} mode={args.mode} seed={seed} '
             f'margin={margin}')
    write_report(reports.export(rows, title, args.format), args.out)

    failures = reports.failed_rows(rows)
    for row in failures:
        logger.error(f'Bound exceeds eigenvalue {eigenvalue:.8g} x {margin}: {row}')
    if failures:
        return EXIT_VALIDATION_FAILED
    logger.info(f'All {len(bound_reports)} bounds consistent with lambda = {eigenvalue:.8g}')
    return EXIT_OK
