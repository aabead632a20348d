"""Subcommand modules of the eigenbound command line."""
from commands import bound, eig, oracle, sweep, validate

COMMANDS = (bound, eig, validate, sweep, oracle)

__all__ = ['COMMANDS', 'bound', 'eig', 'oracle', 'sweep', 'validate']
