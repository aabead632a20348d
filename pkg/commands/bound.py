"""`bound` subcommand: evaluate eigenvalue lower bounds on a domain."""
import argparse
import logging

from commands.problem import compute_bounds, load_problem
from components.common import add_domain_args, add_fraction_args, add_run_args, resolve_seed, work_pool
from utils import reports
from utils.constants import EXIT_OK
from utils.storage import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('bound', help='evaluate lower bounds over an r grid')
    add_domain_args(parser)
    add_fraction_args(parser)
    add_run_args(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    spec = load_problem(args)
    seed = resolve_seed(args)
    with work_pool(args) as executor:
        bound_reports = compute_bounds(spec, args.kind, args, seed, executor)

    rows = [reports.bound_row(report, spec.name, args.kind) for report in bound_reports]
    title = f'bound domain={spec.name} kind={args.kind} mode={args.mode} seed={seed}'
    write_report(reports.export(rows, title, args.format), args.out)
    logger.info(f'{len(rows)} bounds evaluated for {spec.name}')
    return EXIT_OK
