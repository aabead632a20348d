"""`eig` subcommand: finite-difference smallest eigenvalue."""
import argparse

from commands.problem import compute_eigenvalue, load_problem, reference_eigenvalue
from components.common import add_domain_args, add_eig_args, add_run_args
from utils import reports
from utils.constants import EXIT_OK
from utils.storage import write_report


def register(subparsers):
    parser = subparsers.add_parser('eig', help='finite-difference smallest eigenvalue')
    add_domain_args(parser)
    add_eig_args(parser)
    add_run_args(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    spec = load_problem(args)
    result = compute_eigenvalue(spec, args.kind, args)
    reference = reference_eigenvalue(spec, args.kind, args)
    rows = [reports.eigen_row(result, spec.name, args.kind, reference)]
    write_report(reports.export(rows, f'eig domain={spec.name} kind={args.kind}', args.format), args.out)
    return EXIT_OK
