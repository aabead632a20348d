"""Problem setup shared by the subcommands: domains, fractions, bounds, eigenvalues."""
import argparse
import logging

import numpy as np

from components.common import ordered_map
from utils.bounds import (
    BoundReport,
    GeometryData,
    baseline_bounds,
    evaluate_bounds,
)
from utils.constants import (
    EIG_CELLS_PER_SIDE,
    EUCLIDEAN_MARGIN,
    HEISENBERG_EIG_CELLS_PER_SIDE,
    HEISENBERG_MARGIN,
)
from utils.eigensolver import (
    EigenResult,
    dirichlet_reference_ball,
    dirichlet_reference_box,
    robin_reference_box,
    solve,
)
from utils.geometry import BallDomain, BoxUnionDomain, exact_inradius, inradius, sup_ball_fraction
from utils.heisenberg import HDomain, sup_hyperplane_fraction
from utils.storage import DomainSpec, load_domain_spec
from utils.validation import ValidationError

logger = logging.getLogger(__name__)

BASELINES_BY_KIND = {
    'dirichlet': ('rfk_volume', 'hersch_protter'),
    'robin': ('kovarik', 'appendix_meanconvex', 'appendix_convex'),
}

OPERATOR_BY_KIND = {
    'dirichlet': 'dirichlet_laplace',
    'robin': 'robin_laplace',
    'heisenberg': 'heisenberg_sublaplace',
}


def load_problem(args: argparse.Namespace) -> DomainSpec:
    """Load the domain spec and check it against the requested kind."""
    spec = load_domain_spec(args.domain)
    N = args.N if getattr(args, 'N', None) is not None else spec.N
    if args.kind == 'heisenberg':
        if N is None:
            raise ValidationError('heisenberg problems need N (spec field or --N)')
        HDomain(spec.domain, N)
        spec = DomainSpec(spec.name, spec.domain, N, spec.convex, spec.mean_convex)
    if args.kind == 'robin' and args.sigma is None:
        raise ValidationError('robin problems need --sigma')
    return spec


def margin_for(kind: str) -> float:
    return HEISENBERG_MARGIN if kind == 'heisenberg' else EUCLIDEAN_MARGIN


def fraction_function(spec: DomainSpec, kind: str, args: argparse.Namespace, seed: int):
    """r -> FractionEstimate of Psi_r (or its Heisenberg analogue)."""
    mode = 'upper_enclosure' if args.mode == 'certify' else 'estimate'
    if kind == 'heisenberg':
        hd = spec.heisenberg

        def fraction(r):
            return sup_hyperplane_fraction(hd, r, mode, args.h, args.samples, seed)
    else:
        def fraction(r):
            return sup_ball_fraction(spec.domain, r, mode, args.h, args.samples, seed)
    return fraction


def geometry_data(spec: DomainSpec) -> GeometryData | None:
    """Inradius and volume for the baselines; None when no inradius is available."""
    domain = spec.domain
    radius = exact_inradius(domain)
    radius_exact = radius is not None
    if radius is None and domain.exact:
        radius = inradius(domain)
    if radius is None:
        logger.warning(f'{spec.name}: no reliable inradius, baselines skipped')
        return None
    volume, volume_exact = domain.volume()
    return GeometryData(d=domain.dim, inradius=radius, inradius_exact=radius_exact,
                        volume=volume, volume_exact=volume_exact,
                        convex=spec.convex, mean_convex=spec.mean_convex)


def compute_bounds(spec: DomainSpec, kind: str, args: argparse.Namespace, seed: int,
                   executor=None) -> list[BoundReport]:
    """Bounds of the kind at every radius of the grid, followed by baselines."""
    radii = sorted(args.r)
    if not radii:
        raise ValidationError('r grid must not be empty')
    fractions = ordered_map(executor, fraction_function(spec, kind, args, seed), radii)
    dims = {'N': spec.N} if kind == 'heisenberg' else {'d': spec.domain.dim}

    reports = []
    for r, psi in zip(radii, fractions):
        reports.extend(evaluate_bounds(kind, r, psi, sigma=args.sigma, m=args.m, **dims))

    if kind in BASELINES_BY_KIND:
        geometry = geometry_data(spec)
        if geometry is not None:
            sigma = args.sigma if kind == 'robin' else None
            reports.extend(report for report in baseline_bounds(geometry, sigma=sigma)
                           if report.bound_id in BASELINES_BY_KIND[kind])
    return reports


def reference_eigenvalue(spec: DomainSpec, kind: str, args: argparse.Namespace) -> float | None:
    """Analytic smallest eigenvalue where one is known."""
    domain = spec.domain
    dirichlet = kind == 'dirichlet' or (kind == 'poly' and args.m == 1)
    if isinstance(domain, BoxUnionDomain) and domain.is_single_box:
        sides = (domain.highs[0] - domain.lows[0]).tolist()
        if dirichlet:
            return dirichlet_reference_box(sides)
        if kind == 'robin':
            return robin_reference_box(sides, args.sigma)
    if isinstance(domain, BallDomain) and dirichlet:
        return dirichlet_reference_ball(domain.dim, domain.radius)
    return None


def compute_eigenvalue(spec: DomainSpec, kind: str, args: argparse.Namespace) -> EigenResult:
    if kind == 'poly':
        operator = 'dirichlet_laplace' if args.m == 1 else 'bilaplace_clamped'
    else:
        operator = OPERATOR_BY_KIND[kind]
    lo, hi = spec.domain.bounding_box
    cells = HEISENBERG_EIG_CELLS_PER_SIDE if kind == 'heisenberg' else EIG_CELLS_PER_SIDE
    h = args.eig_h if args.eig_h is not None else float(np.max(hi - lo)) / cells
    target = spec.heisenberg if kind == 'heisenberg' else spec.domain
    result = solve(target, operator, h, sigma=args.sigma, m=args.m, extrapolate=args.extrapolate)
    logger.info(f'{spec.name}: {operator} lambda = {result.value:.8g} (h = {result.h})')
    return result


def best_value(result: EigenResult) -> float:
    return result.extrapolated if result.extrapolated is not None else result.value
