"""Finite-difference eigenvalue oracles and analytic references.

Operators are assembled with ``scipy.sparse`` on a uniform grid anchored at
the lower corner of the bounding box. The smallest eigenvalue is found by
inverse iteration whose inner solves use conjugate gradients (sparse LU for
the clamped bilaplacian).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import optimize
from scipy.sparse import linalg as spla

from utils.bounds import dirichlet_ball_constant
from utils.constants import CG_MAX_ITERATIONS, DEFAULT_EIG_TOL, RESIDUAL_TARGET
from utils.geometry import BoxUnionDomain, Domain
from utils.heisenberg import HDomain, horizontal_coefficients
from utils.validation import (
    NumericError,
    UnsupportedError,
    ValidationError,
    validate_positive,
    validate_positive_int,
)

logger = logging.getLogger(__name__)

OPERATOR_KINDS = ('dirichlet_laplace', 'robin_laplace', 'bilaplace_clamped', 'heisenberg_sublaplace')

MAX_OUTER_ITERATIONS = 1000
STALL_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class GridOperator:
    kind: str
    h: float
    origin: np.ndarray
    shape: tuple
    mask: np.ndarray
    matrix: sp.csr_matrix
    sigma: float | None = None
    N: int | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def nodes(self) -> np.ndarray:
        """Coordinates of the unknowns, in matrix order."""
        index = np.array(np.unravel_index(np.flatnonzero(self.mask), self.shape)).T
        return self.origin + self.h * index


@dataclass(frozen=True)
class EigenResult:
    value: float
    residual: float
    h: float
    iterations: int
    extrapolated: float | None = None
    kind: str = 'dirichlet_laplace'


# ===== Assembly =====

def _second_difference(n: int) -> sp.csr_matrix:
    """tridiag(-1, 2, -1) of size n (unscaled)."""
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format='csr')


def _kron_sum(blocks: list) -> sp.csr_matrix:
    """sum_i I x ... x B_i x ... x I."""
    sizes = [b.shape[0] for b in blocks]
    total = None
    for i, block in enumerate(blocks):
        term = sp.identity(1, format='csr')
        for j, size in enumerate(sizes):
            term = sp.kron(term, block if i == j else sp.identity(size, format='csr'), format='csr')
        total = term if total is None else total + term
    return total.tocsr()


def _axis_counts(lo: np.ndarray, hi: np.ndarray, h: float, exact: bool) -> np.ndarray:
    ratio = (hi - lo) / h
    counts = np.rint(ratio).astype(int)
    if exact and np.any(np.abs(ratio - counts) > 1e-9 * np.maximum(1.0, ratio)):
        raise ValidationError(f'grid spacing h = {h} must divide the box side lengths {hi - lo}')
    if not exact:
        counts = np.floor(ratio + 1e-9).astype(int)
    if np.any(counts < 2):
        raise ValidationError(f'grid spacing h = {h} is too coarse for the domain')
    return counts


def _single_box(domain: Domain, purpose: str) -> tuple[np.ndarray, np.ndarray]:
    if not (isinstance(domain, BoxUnionDomain) and domain.is_single_box):
        raise UnsupportedError(f'{purpose} is only available on single axis-aligned boxes')
    return domain.lows[0], domain.highs[0]


def _assemble_dirichlet(domain: Domain, h: float) -> GridOperator:
    lo, hi = domain.bounding_box
    counts = _axis_counts(lo, hi, h, exact=False)
    # Interior lattice nodes lo + k h, k = 1..count-1 per axis
    shape = tuple(int(c) - 1 for c in counts)
    origin = lo + h
    grids = np.meshgrid(*[origin[i] + h * np.arange(shape[i]) for i in range(len(shape))], indexing='ij')
    mask = domain.contains(np.stack([g.ravel() for g in grids], axis=1))
    if not np.any(mask):
        raise ValidationError(f'grid spacing h = {h} leaves no grid node in the domain')
    full = _kron_sum([_second_difference(n) for n in shape]) / h ** 2
    index = np.flatnonzero(mask)
    return GridOperator('dirichlet_laplace', h, origin, shape, mask, full[index][:, index].tocsr())


def _assemble_robin(domain: Domain, h: float, sigma: float) -> GridOperator:
    lo, hi = _single_box(domain, 'the Robin Laplacian')
    counts = _axis_counts(lo, hi, h, exact=True)
    blocks = []
    for n in counts:
        # Nodes 0..n; ghost values u_{-1} = u_1 - 2 h sigma u_0 at both ends
        k = _second_difference(n + 1).tolil()
        k[0, 0] = 2 + 2 * h * sigma
        k[0, 1] = -2
        k[n, n] = 2 + 2 * h * sigma
        k[n, n - 1] = -2
        weights = np.ones(n + 1)
        weights[[0, n]] = 0.5
        # M^{1/2} K M^{-1/2} is symmetric and similar to K
        root = sp.diags(np.sqrt(weights))
        inverse_root = sp.diags(1 / np.sqrt(weights))
        blocks.append((root @ k.tocsr() @ inverse_root).tocsr())
    shape = tuple(int(n) + 1 for n in counts)
    mask = np.ones(int(np.prod(shape)), dtype=bool)
    matrix = _kron_sum(blocks) / h ** 2
    return GridOperator('robin_laplace', h, lo.copy(), shape, mask, matrix, sigma=sigma)


def _assemble_bilaplace(domain: Domain, h: float) -> GridOperator:
    lo, hi = _single_box(domain, 'the clamped bilaplacian')
    if domain.dim != 2:
        raise UnsupportedError('the clamped bilaplacian is assembled on rectangles only')
    counts = _axis_counts(lo, hi, h, exact=True)
    d2 = [_second_difference(int(n) - 1) for n in counts]
    fourth = []
    for n, block in zip(counts, d2):
        # Reflection ghost u_{-1} = u_1 with u_0 = 0 adds 2 at both end nodes
        ends = np.zeros(int(n) - 1)
        ends[[0, -1]] = 2.0
        fourth.append((block @ block + sp.diags(ends)).tocsr())
    eye = [sp.identity(int(n) - 1, format='csr') for n in counts]
    matrix = (sp.kron(fourth[0], eye[1]) + 2 * sp.kron(d2[0], d2[1]) + sp.kron(eye[0], fourth[1]))
    shape = tuple(int(n) - 1 for n in counts)
    mask = np.ones(int(np.prod(shape)), dtype=bool)
    return GridOperator('bilaplace_clamped', h, lo + h, shape, mask, (matrix / h ** 4).tocsr())


def _assemble_heisenberg(hd: HDomain, h: float) -> GridOperator:
    lo, hi = hd.domain.bounding_box
    counts = _axis_counts(lo, hi, h, exact=False)
    shape = tuple(int(c) + 1 for c in counts)
    grids = np.meshgrid(*[lo[i] + h * np.arange(shape[i]) for i in range(len(shape))], indexing='ij')
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    mask = hd.domain.contains(nodes)
    if not np.any(mask):
        raise ValidationError(f'grid spacing h = {h} leaves no grid node in the domain')

    def forward(axis: int) -> sp.csr_matrix:
        blocks = []
        for j, n in enumerate(shape):
            if j == axis:
                blocks.append(sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], format='csr') / h)
            else:
                blocks.append(sp.identity(n, format='csr'))
        out = blocks[0]
        for block in blocks[1:]:
            out = sp.kron(out, block, format='csr')
        return out

    index = np.flatnonzero(mask)
    coefficients = horizontal_coefficients(nodes[:, :-1])
    f_t = forward(len(shape) - 1)
    matrix = None
    for n in range(2 * hd.N):
        # Z_n = d/dz_n + b_n(z) d/dt, forward differences, exterior values zero
        d_n = (forward(n) + sp.diags(coefficients[:, n]) @ f_t).tocsc()[:, index]
        term = (d_n.T @ d_n).tocsr()
        matrix = term if matrix is None else matrix + term
    return GridOperator('heisenberg_sublaplace', h, lo.copy(), shape, mask, matrix.tocsr(), N=hd.N)


def assemble(domain: Domain | HDomain, kind: str, h, sigma=None, m: int = 2) -> GridOperator:
    """Assemble a finite-difference operator.

    Args:
        domain: Domain (or HDomain for the sub-Laplacian)
        kind: One of OPERATOR_KINDS
        h: Grid spacing
        sigma: Robin parameter (robin_laplace)
        m: Polyharmonic order (bilaplace_clamped supports m = 2 only)

    Returns:
        GridOperator

    Raises:
        UnsupportedError: Robin or bilaplacian off single boxes, or m != 2
        ValidationError: Bad spacing or parameters
    """
    h = validate_positive(h, 'grid spacing h')
    if kind == 'heisenberg_sublaplace':
        if not isinstance(domain, HDomain):
            raise ValidationError('the sub-Laplacian needs a Heisenberg domain')
        op = _assemble_heisenberg(domain, h)
    else:
        if isinstance(domain, HDomain):
            domain = domain.domain
        if kind == 'dirichlet_laplace':
            op = _assemble_dirichlet(domain, h)
        elif kind == 'robin_laplace':
            op = _assemble_robin(domain, h, validate_positive(sigma, 'sigma'))
        elif kind == 'bilaplace_clamped':
            if validate_positive_int(m, 'm') != 2:
                raise UnsupportedError(f'polyharmonic order m = {m} is not discretized (only m = 2)')
            op = _assemble_bilaplace(domain, h)
        else:
            raise ValidationError(f'operator kind must be one of {", ".join(OPERATOR_KINDS)}')
    logger.debug(f'Assembled {kind}: h={h}, {op.size} unknowns, {op.matrix.nnz} nonzeros')
    return op


# ===== Inverse Iteration =====

def smallest_eigenvalue(op: GridOperator, tol: float = DEFAULT_EIG_TOL) -> EigenResult:
    """Inverse iteration from the all-ones vector.

    Stops once the residual drops below tol relative to the Rayleigh quotient, or when the
    quotient no longer moves in floating point.

    Raises:
        NumericError: If an inner conjugate-gradient solve does not converge
    """
    tol = validate_positive(tol, 'tol')
    matrix = op.matrix
    v = np.ones(op.size) / math.sqrt(op.size)
    factor = spla.splu(matrix.tocsc()) if op.kind == 'bilaplace_clamped' else None

    value = float(v @ (matrix @ v))
    iterations = 0
    for iterations in range(1, MAX_OUTER_ITERATIONS + 1):
        if factor is not None:
            w = factor.solve(v)
        else:
            guess = v / value if value > 0 else None
            w, info = spla.cg(matrix, v, x0=guess, rtol=tol / 10, maxiter=CG_MAX_ITERATIONS)
            if info != 0:
                raise NumericError(
                    f'conjugate gradients did not converge (info={info}, kind={op.kind}, '
                    f'h={op.h}, unknowns={op.size}, outer iteration {iterations})')
        v = w / np.linalg.norm(w)
        previous, value = value, float(v @ (matrix @ v))
        residual = float(np.linalg.norm(matrix @ v - value * v))
        scale = max(1.0, abs(value))
        if residual <= tol * scale or abs(value - previous) <= STALL_TOLERANCE * scale:
            break
    else:
        logger.warning(f'{op.kind}: no convergence after {iterations} iterations')

    if residual > RESIDUAL_TARGET * max(1.0, value):
        logger.warning(f'{op.kind}: residual {residual:.3g} above target at h={op.h}')
    logger.debug(f'{op.kind}: lambda={value:.10g} after {iterations} iterations')
    return EigenResult(value=value, residual=residual, h=op.h, iterations=iterations, kind=op.kind)


def richardson(coarse: float, fine: float) -> float:
    """Second-order extrapolation from spacings h and h/2."""
    return (4.0 * fine - coarse) / 3.0


def solve(domain: Domain | HDomain, kind: str, h, sigma=None, m: int = 2,
          tol: float = DEFAULT_EIG_TOL, extrapolate: bool = False) -> EigenResult:
    """Assemble and solve; optionally extrapolate with a second solve at h/2."""
    coarse = smallest_eigenvalue(assemble(domain, kind, h, sigma, m), tol)
    if not extrapolate:
        return coarse
    fine = smallest_eigenvalue(assemble(domain, kind, h / 2, sigma, m), tol)
    return EigenResult(value=fine.value, residual=fine.residual, h=fine.h,
                       iterations=fine.iterations, extrapolated=richardson(coarse.value, fine.value),
                       kind=kind)


# ===== Analytic References =====

def robin_reference_interval(L, sigma) -> float:
    """Smallest Robin eigenvalue k^2 on (0, L), where k tan(kL/2) = sigma."""
    L = validate_positive(L, 'L')
    sigma = validate_positive(sigma, 'sigma')
    upper = math.pi / L * (1 - 1e-12)
    k = optimize.brentq(lambda k: k * math.tan(k * L / 2) - sigma, 1e-300, upper, xtol=1e-15)
    return k * k


def robin_reference_box(lengths, sigma) -> float:
    return float(sum(robin_reference_interval(L, sigma) for L in lengths))


def dirichlet_reference_box(lengths) -> float:
    return float(sum(math.pi ** 2 / validate_positive(L, 'side length') ** 2 for L in lengths))


def dirichlet_reference_ball(d, R) -> float:
    return dirichlet_ball_constant(d) / validate_positive(R, 'R') ** 2


__all__ = [
    'OPERATOR_KINDS',
    'EigenResult',
    'GridOperator',
    'assemble',
    'dirichlet_reference_ball',
    'dirichlet_reference_box',
    'richardson',
    'robin_reference_box',
    'robin_reference_interval',
    'smallest_eigenvalue',
    'solve',
]
