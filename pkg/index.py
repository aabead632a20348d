"""Eigenbound - command routing and the error boundary."""
import argparse
import json
import logging
import sys

from commands import COMMANDS
from utils.constants import EXIT_INPUT_ERROR, EXIT_VALIDATION_FAILED
from utils.validation import DomainError, NumericError, UnsupportedError, ValidationError

logger = logging.getLogger(__name__)

INPUT_ERRORS = (ValidationError, DomainError, UnsupportedError, json.JSONDecodeError, OSError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='eigenbound',
        description='Certified lower bounds for principal eigenvalues via ball fractions.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse argv, dispatch to the subcommand and map failures to exit codes.

    Returns:
        0 on success, 1 when a validated inequality fails or a computation
        does not converge, 2 for input errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except INPUT_ERRORS as e:
        logger.error(f'{args.command}: {e}')
        return EXIT_INPUT_ERROR
    except NumericError as e:
        logger.error(f'{args.command}: numeric failure: {e}')
        return EXIT_VALIDATION_FAILED


if __name__ == '__main__':
    sys.exit(run())
