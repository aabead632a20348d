"""Heisenberg group geometry on top of the Euclidean domain engine.

Points of H^N are stored as (z, t) with z in R^{2N}; a domain of H^N is an
ordinary Euclidean domain in R^{2N+1} whose last coordinate is t. The group
law is (z, t) o (z', t') = (z + z', t + t' + 1/2 z.Jz') with J = [[0, I], [-I, 0]].

A horizontal ray s -> p o (s omega, 0) is the Euclidean line through p with
direction (omega, 1/2 z.J omega), so all ray casting is delegated to
``Domain.exit_parameters`` and stays exact for exact domain variants.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from utils.constants import HEISENBERG_CELLS_PER_SIDE
from utils.geometry import (
    VALID_FRACTION_MODES,
    CellCovering,
    DirectionSet,
    Domain,
    FractionEstimate,
    ball_volume,
    make_rng,
)
from utils.validation import (
    DomainError,
    UnsupportedError,
    ValidationError,
    validate_point,
    validate_positive,
    validate_positive_int,
    validate_unit_vector,
)

logger = logging.getLogger(__name__)

CHUNK_ELEMENTS = 2_000_000


# ===== Points and Domains =====

@dataclass(frozen=True, eq=False)
class HPoint:
    """Element (z, t) of the Heisenberg group H^N."""
    z: np.ndarray
    t: float

    def __post_init__(self):
        z = validate_point(self.z, field_name='z')
        if z.size % 2:
            raise ValidationError(f'z must have even length 2N, got {z.size}')
        t = float(self.t)
        if not math.isfinite(t):
            raise ValidationError('t must be finite')
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 't', t)

    @property
    def N(self) -> int:
        return self.z.size // 2

    def as_array(self) -> np.ndarray:
        return np.append(self.z, self.t)

    @classmethod
    def from_array(cls, coords) -> 'HPoint':
        coords = validate_point(coords, field_name='point')
        return cls(coords[:-1], float(coords[-1]))

    def __repr__(self) -> str:
        return f'HPoint(z={self.z.tolist()}, t={self.t})'


@dataclass(frozen=True, eq=False)
class HDomain:
    """A Euclidean domain in R^{2N+1} read as an open subset of H^N."""
    domain: Domain
    N: int

    def __post_init__(self):
        n = validate_positive_int(self.N, 'N')
        if self.domain.dim != 2 * n + 1:
            raise ValidationError(
                f'Heisenberg domain with N = {n} needs ambient dimension {2 * n + 1}, '
                f'got {self.domain.dim}')
        object.__setattr__(self, 'N', n)

    @property
    def exact(self) -> bool:
        return self.domain.exact

    def contains(self, p: HPoint) -> bool:
        return bool(self.domain.contains(p.as_array()[None])[0])


# ===== Group Law =====

def j_matrix(N: int) -> np.ndarray:
    """Symplectic block matrix [[0, I], [-I, 0]] of size 2N."""
    N = validate_positive_int(N, 'N')
    eye = np.eye(N)
    zero = np.zeros((N, N))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_form(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """z.Jw for stacked vectors (last axis of length 2N)."""
    n = z.shape[-1] // 2
    return np.sum(z[..., :n] * w[..., n:] - z[..., n:] * w[..., :n], axis=-1)


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    """p o q = (z + z', t + t' + 1/2 z.Jz')."""
    if p.N != q.N:
        raise ValidationError(f'cannot multiply points of H^{p.N} and H^{q.N}')
    return HPoint(p.z + q.z, p.t + q.t + 0.5 * float(symplectic_form(p.z, q.z)))


def group_inverse(p: HPoint) -> HPoint:
    return HPoint(-p.z, -p.t)


def left_translate(q: HPoint, points: np.ndarray) -> np.ndarray:
    """q o p for each row p = (z, t) of an (n, 2N+1) array."""
    points = np.atleast_2d(points)
    z, t = points[:, :-1], points[:, -1]
    shear = 0.5 * symplectic_form(np.broadcast_to(q.z, z.shape), z)
    return np.column_stack([z + q.z, t + q.t + shear])


def horizontal_direction(z: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Euclidean direction (omega, 1/2 z.J omega) of the horizontal line through (z, t)."""
    omega = np.atleast_2d(omega)
    tilt = 0.5 * symplectic_form(np.broadcast_to(z, omega.shape), omega)
    return np.column_stack([omega, tilt])


def horizontal_coefficients(z: np.ndarray) -> np.ndarray:
    """Coefficients b_n(z) = 1/2 z.J e_n so that Z_n = d/dz_n + b_n(z) d/dt.

    Accepts a single z or an (n, 2N) array and returns matching shape.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[-1] // 2
    # z.J e_k = -z_{k+N} for k < N and z_{k-N} for k >= N
    return 0.5 * np.concatenate([-z[..., n:], z[..., :n]], axis=-1)


# ===== Left-Translated Domains =====

@dataclass(frozen=True, eq=False)
class LeftTranslatedDomain(Domain):
    """q o base for a domain in R^{2N+1}; left translation is an affine shear."""
    base: Domain
    q: HPoint
    kind = 'left_translated'

    def __post_init__(self):
        if self.base.dim != 2 * self.q.N + 1:
            raise ValidationError('translation and domain live in different Heisenberg groups')
        object.__setattr__(self, 'exact', self.base.exact)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.bounding_box
        d = self.dim
        corners = np.array([[hi[i] if (k >> i) & 1 else lo[i] for i in range(d)]
                            for k in range(2 ** d)])
        image = left_translate(self.q, corners)
        return image.min(axis=0), image.max(axis=0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.base.contains(left_translate(group_inverse(self.q), points))

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        # q^{-1} o (x + s v) is again a line, with base point q^{-1} o x
        inverse = group_inverse(self.q)
        v = np.atleast_2d(directions)
        start = left_translate(inverse, x[None])[0]
        pulled = v.copy()
        pulled[:, -1] += 0.5 * symplectic_form(np.broadcast_to(inverse.z, v[:, :-1].shape), v[:, :-1])
        return self.base.exit_parameters(start, pulled)

    def boundary_distance(self, x: np.ndarray) -> float:
        raise UnsupportedError('left translations do not preserve Euclidean distances')

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # Bounding box of the preimage of each cell under the shear
        inverse = group_inverse(self.q)
        z_lo, z_hi = lo[:, :-1], hi[:, :-1]
        shear_lo, shear_hi = _symplectic_interval(
            np.broadcast_to(inverse.z, z_lo.shape), np.broadcast_to(inverse.z, z_lo.shape), z_lo, z_hi)
        pre_lo = np.column_stack([z_lo + inverse.z, lo[:, -1] + inverse.t + 0.5 * shear_lo])
        pre_hi = np.column_stack([z_hi + inverse.z, hi[:, -1] + inverse.t + 0.5 * shear_hi])
        return self.base.cells_may_intersect(pre_lo, pre_hi)

    def volume(self) -> tuple[float, bool]:
        # The shear has unit Jacobian
        return self.base.volume()


def translated_domain(hd: HDomain, q: HPoint) -> HDomain:
    """The domain q o Omega."""
    return HDomain(LeftTranslatedDomain(hd.domain, q), hd.N)


# ===== Horizontal Distances =====

def _require_inside(hd: HDomain, p: HPoint) -> np.ndarray:
    if p.N != hd.N:
        raise ValidationError(f'point of H^{p.N} given for a domain in H^{hd.N}')
    coords = p.as_array()
    if not hd.domain.contains(coords[None])[0]:
        raise DomainError(f'{p!r} is not in the domain')
    return coords


def horizontal_ray_distance(hd: HDomain, p: HPoint, omega) -> float:
    """inf{|s| : p o (s omega, 0) not in the domain}."""
    coords = _require_inside(hd, p)
    omega = validate_unit_vector(omega, 2 * hd.N)
    return float(hd.domain.exit_parameters(coords, horizontal_direction(p.z, omega))[0])


def horizontal_ray_distances(hd: HDomain, p: HPoint, dirs: DirectionSet) -> np.ndarray:
    coords = _require_inside(hd, p)
    if dirs.dim != 2 * hd.N:
        raise ValidationError(f'directions must live on S^{2 * hd.N - 1}')
    return hd.domain.exit_parameters(coords, horizontal_direction(p.z, dirs.nodes))


def davies_hardy_from_distances(N: int, distances, weights) -> float:
    """(2N sum_i w_i delta_i^{-2})^{-1/2}; inf when every distance is infinite."""
    distances = np.asarray(distances, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mean_inverse_square = float(np.dot(weights, distances ** -2.0))
    if mean_inverse_square == 0.0:
        return math.inf
    return (2 * N * mean_inverse_square) ** -0.5


def davies_hardy_distance(hd: HDomain, p: HPoint, dirs: DirectionSet) -> float:
    """Davies-Hardy distance from horizontal ray distances."""
    return davies_hardy_from_distances(hd.N, horizontal_ray_distances(hd, p, dirs), dirs.weights)


# ===== Hyperplane Ball Fractions =====

def _symplectic_interval(a_lo, a_hi, b_lo, b_hi):
    """Range of z.Jw over boxes z in [a_lo, a_hi], w in [b_lo, b_hi] (last axis 2N)."""
    n = a_lo.shape[-1] // 2

    def product(x_lo, x_hi, y_lo, y_hi):
        candidates = np.stack([x_lo * y_lo, x_lo * y_hi, x_hi * y_lo, x_hi * y_hi])
        return candidates.min(axis=0), candidates.max(axis=0)

    p_lo, p_hi = product(a_lo[..., :n], a_hi[..., :n], b_lo[..., n:], b_hi[..., n:])
    m_lo, m_hi = product(a_lo[..., n:], a_hi[..., n:], b_lo[..., :n], b_hi[..., :n])
    return np.sum(p_lo - m_hi, axis=-1), np.sum(p_hi - m_lo, axis=-1)


def _horizontal_cells(N: int, r: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Cells of spacing h in the z' chart that meet the disk |z'| < r."""
    count = int(math.ceil(r / h - 1e-9))
    edges = h * np.arange(-count, count + 1)
    grids_lo = np.meshgrid(*[edges[:-1]] * (2 * N), indexing='ij')
    grids_hi = np.meshgrid(*[edges[1:]] * (2 * N), indexing='ij')
    lo = np.stack([g.ravel() for g in grids_lo], axis=1)
    hi = np.stack([g.ravel() for g in grids_hi], axis=1)
    gap = np.maximum(np.maximum(lo, -hi), 0.0)
    keep = np.sqrt(np.sum(gap * gap, axis=1)) < r
    return lo[keep], hi[keep]


def _enclosed_measures(hd: HDomain, p_lo: np.ndarray, p_hi: np.ndarray,
                       q_lo: np.ndarray, q_hi: np.ndarray) -> np.ndarray:
    """Upper bound of the hyperplane measure in the z' chart, per p-cell.

    Every image p o (z', 0) with p in the p-cell and z' in a z'-cell lies in a
    box given by interval arithmetic; z'-cells whose box misses the domain
    contribute nothing.
    """
    dim = 2 * hd.N
    cell_volume = float(np.prod(q_hi[0] - q_lo[0]))
    out = np.empty(len(p_lo))
    step = max(1, CHUNK_ELEMENTS // max(1, len(q_lo) * dim))
    for start in range(0, len(p_lo), step):
        sl = slice(start, start + step)
        z_lo, z_hi = p_lo[sl, None, :dim], p_hi[sl, None, :dim]
        t_lo, t_hi = p_lo[sl, None, dim], p_hi[sl, None, dim]
        shear_lo, shear_hi = _symplectic_interval(
            np.broadcast_to(z_lo, (z_lo.shape[0], len(q_lo), dim)),
            np.broadcast_to(z_hi, (z_hi.shape[0], len(q_lo), dim)),
            q_lo[None], q_hi[None])
        box_lo = np.concatenate([z_lo + q_lo[None], (t_lo + 0.5 * shear_lo)[..., None]], axis=-1)
        box_hi = np.concatenate([z_hi + q_hi[None], (t_hi + 0.5 * shear_hi)[..., None]], axis=-1)
        hits = hd.domain.cells_may_intersect(box_lo.reshape(-1, dim + 1), box_hi.reshape(-1, dim + 1))
        out[sl] = np.count_nonzero(hits.reshape(box_lo.shape[:2]), axis=1) * cell_volume
    return out


def _mc_hyperplane_fraction(hd: HDomain, coords: np.ndarray, r: float, samples: int, rng,
                            ) -> FractionEstimate:
    dim = 2 * hd.N
    acceptance = ball_volume(dim) / 2 ** dim
    accepted = []
    total = 0
    while total < samples:
        batch = rng.uniform(-1.0, 1.0, size=(int((samples - total) / acceptance * 1.2) + 16, dim))
        batch = batch[np.sum(batch * batch, axis=1) < 1.0]
        accepted.append(batch)
        total += len(batch)
    offsets = r * np.concatenate(accepted)[:samples]
    z, t = coords[:-1], coords[-1]
    images = np.column_stack([z + offsets,
                              t + 0.5 * symplectic_form(np.broadcast_to(z, offsets.shape), offsets)])
    p_hat = float(np.mean(hd.domain.contains(images)))
    return FractionEstimate(value=p_hat, mode='estimate',
                            error_radius=3.0 * math.sqrt(p_hat * (1 - p_hat) / samples),
                            budget=samples, r=r, sound=hd.exact)


def hyperplane_ball_fraction(hd: HDomain, p: HPoint, r, budget=None, mode: str = 'estimate',
                             seed: int = 0, task_index: int = 0) -> FractionEstimate:
    """Fraction of the horizontal disk {p o (z', 0) : |z'| < r} lying in the domain.

    The surface measure on the disk is a constant multiple of dz', so the
    fraction is a plain 2N-dimensional volume fraction in z'.
    """
    r = validate_positive(r, 'r')
    if p.N != hd.N:
        raise ValidationError(f'point of H^{p.N} given for a domain in H^{hd.N}')
    coords = p.as_array()
    if mode == 'estimate':
        samples = validate_positive_int(budget if budget is not None else 4000, 'sample budget')
        return _mc_hyperplane_fraction(hd, coords, r, samples, make_rng(seed, task_index))
    if mode == 'upper_enclosure':
        h = validate_positive(budget if budget is not None else r / 16, 'grid spacing')
        q_lo, q_hi = _horizontal_cells(hd.N, r, h)
        measure = float(_enclosed_measures(hd, coords[None], coords[None], q_lo, q_hi)[0])
        return FractionEstimate(value=min(1.0, measure / ball_volume(2 * hd.N, r)),
                                mode='upper_enclosure', error_radius=0.0, budget=h, r=r,
                                sound=hd.exact)
    raise ValidationError(f'mode must be one of {", ".join(VALID_FRACTION_MODES)}')


def sup_hyperplane_fraction(hd: HDomain, r, mode: str = 'estimate', h=None,
                            samples: int = 4000, seed: int = 0) -> FractionEstimate:
    """Sup over p in the domain of the hyperplane ball fraction.

    Estimate mode maximises over interior cell centers. Upper-enclosure mode
    covers the domain by cells of spacing h and bounds the fraction uniformly
    over each cell, enclosing the shear term 1/2 z.Jz' by interval arithmetic.
    """
    r = validate_positive(r, 'r')
    lo, hi = hd.domain.bounding_box
    h = validate_positive(h if h is not None else float(np.max(hi - lo)) / HEISENBERG_CELLS_PER_SIDE, 'grid spacing h')
    covering = CellCovering(hd.domain, h)

    if mode == 'estimate':
        samples = validate_positive_int(samples, 'sample budget')
        centers = covering.centers[hd.domain.contains(covering.centers)]
        if len(centers) == 0:
            raise ValidationError(f'grid spacing h = {h} is too coarse: no interior sample points')
        best: FractionEstimate | None = None
        for j, center in enumerate(centers):
            estimate = _mc_hyperplane_fraction(hd, center, r, samples, make_rng(seed, j))
            if best is None or estimate.value > best.value:
                best = estimate
            if best.value == 1.0:
                break
        assert best is not None
        logger.debug(f'Heisenberg Psi_{r} estimate {best.value:.6f} over {len(centers)} points')
        return best

    if mode == 'upper_enclosure':
        q_lo, q_hi = _horizontal_cells(hd.N, r, h)
        measures = _enclosed_measures(hd, covering.lo, covering.hi, q_lo, q_hi)
        value = min(1.0, float(measures.max(initial=0.0)) / ball_volume(2 * hd.N, r))
        logger.debug(f'Heisenberg Psi_{r} enclosure {value:.6f} ({len(covering.lo)} p-cells, '
                     f'{len(q_lo)} z-cells)')
        return FractionEstimate(value=value, mode='upper_enclosure', error_radius=0.0, budget=h,
                                r=r, sound=hd.exact)

    raise ValidationError(f'mode must be one of {", ".join(VALID_FRACTION_MODES)}')


__all__ = [
    'HDomain',
    'HPoint',
    'LeftTranslatedDomain',
    'davies_hardy_distance',
    'davies_hardy_from_distances',
    'group_inverse',
    'group_mul',
    'horizontal_coefficients',
    'horizontal_direction',
    'horizontal_ray_distance',
    'horizontal_ray_distances',
    'hyperplane_ball_fraction',
    'j_matrix',
    'left_translate',
    'sup_hyperplane_fraction',
    'symplectic_form',
    'translated_domain',
]
