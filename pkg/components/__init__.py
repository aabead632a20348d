"""Shared command-line components."""
from components.common import (
    add_domain_args,
    add_eig_args,
    add_fraction_args,
    add_run_args,
    float_list,
    ordered_map,
    resolve_seed,
    resolve_workers,
    work_pool,
)

__all__ = [
    'add_domain_args',
    'add_eig_args',
    'add_fraction_args',
    'add_run_args',
    'float_list',
    'ordered_map',
    'resolve_seed',
    'resolve_workers',
    'work_pool',
]
