"""`sweep` subcommand: best value of each bound over the r grid."""
import argparse
import logging

from commands.problem import load_problem
from components.common import add_domain_args, add_fraction_args, add_run_args, resolve_seed, work_pool
from utils import reports
from utils.bounds import BOUNDS_BY_KIND, best_bound
from utils.constants import EXIT_OK
from utils.storage import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('sweep', help='optimise each bound over the r grid')
    add_domain_args(parser)
    add_fraction_args(parser)
    add_run_args(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    spec = load_problem(args)
    seed = resolve_seed(args)
    domain = spec.heisenberg if args.kind == 'heisenberg' else spec.domain
    rows = []
    with work_pool(args) as executor:
        for bound_id in BOUNDS_BY_KIND[args.kind]:
            report = best_bound(domain, args.kind, args.r, bound_id=bound_id, sigma=args.sigma,
                                m=args.m, h=args.h, certify=args.mode == 'certify',
                                samples=args.samples, seed=seed, executor=executor)
            rows.append(reports.bound_row(report, spec.name, args.kind, section='sweep'))

    title = f'sweep domain={spec.name} kind={args.kind} mode={args.mode} seed={seed}'
    write_report(reports.export(rows, title, args.format), args.out)
    return EXIT_OK
