"""Euclidean domains and the geometric functionals built on them.

Domains are open sets: boundary points are outside. Every variant provides a
bounding box, vectorised membership, exit parameters of lines through a
point, the distance to the complement, a conservative test whether a cell may
meet the domain, and its volume.

Ray distances are exact for polygons, box unions and balls; implicit domains
march and bisect and are accurate to their resolution ``h_impl`` only.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import optimize, special, stats

from utils.constants import ENCLOSURE_CELLS_PER_SIDE
from utils.validation import (
    UNIT_TOLERANCE,
    DomainError,
    UnsupportedError,
    ValidationError,
    validate_dimension,
    validate_fraction,
    validate_point,
    validate_positive,
    validate_positive_int,
    validate_unit_vector,
)

logger = logging.getLogger(__name__)

VALID_FRACTION_MODES = ('estimate', 'upper_enclosure')

# Points closer than this to a polygon edge count as boundary points
BOUNDARY_EPS = 1e-12

# Elements per chunk in pairwise point/cell computations
CHUNK_ELEMENTS = 2_000_000

IMPLICIT_BISECTION_STEPS = 40


# ===== Result Types =====

@dataclass(frozen=True)
class FractionEstimate:
    """A value of psi_r(x) or Psi_r with its provenance.

    ``sound`` is False when the enclosure was computed on an implicit domain,
    whose cell tests rely on sampling at resolution ``h_impl``.
    """
    value: float
    mode: str
    error_radius: float
    budget: float
    r: float
    sound: bool = True

    def __post_init__(self):
        if self.mode not in VALID_FRACTION_MODES:
            raise ValidationError(f'mode must be one of {", ".join(VALID_FRACTION_MODES)}')
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f'fraction value must lie in [0, 1], got {self.value}')
        if self.error_radius < 0:
            raise ValidationError('error_radius must be nonnegative')

    @property
    def certified(self) -> bool:
        return self.mode == 'upper_enclosure' and self.sound


@dataclass(frozen=True)
class RadiusEstimate:
    """Generalized inradius found on a finite r scan (always an estimate)."""
    value: float
    psi: float
    empty: bool
    mode: str = 'estimate'


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Quadrature rule on the unit sphere, normalised to an angular average."""
    dim: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.dim or nodes.shape[0] != weights.shape[0]:
            raise ValidationError('direction nodes must have shape (n, dim) matching the weights')
        if np.any(np.abs(np.linalg.norm(nodes, axis=1) - 1.0) > UNIT_TOLERANCE):
            raise ValidationError('direction nodes must be unit vectors')
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > UNIT_TOLERANCE:
            raise ValidationError('direction weights must be positive and sum to 1')
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def average(self, values) -> float:
        """Weighted angular average of per-node values."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


# ===== Small Helpers =====

def ball_volume(d: int, r: float = 1.0) -> float:
    """Lebesgue measure of a d-dimensional ball of radius r."""
    return math.pi ** (d / 2) / special.gamma(d / 2 + 1) * r ** d


def sphere_area(d: int) -> float:
    """Surface measure |S^{d-1}| of the unit sphere in R^d."""
    return d * ball_volume(d)


def make_rng(seed: int, task_index: int = 0) -> np.random.Generator:
    """Counter-based generator for one task; streams are split by task index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(task_index)])))


def box_distance(points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Euclidean distance from points to closed axis-aligned boxes (broadcasting)."""
    gap = np.maximum(np.maximum(lo - points, points - hi), 0.0)
    return np.sqrt(np.sum(gap * gap, axis=-1))


def _chunks(n_rows: int, row_cost: int):
    step = max(1, CHUNK_ELEMENTS // max(1, row_cost))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def _cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances (n, m) from n points to m closed segments [a_j, b_j]."""
    edge = b - a
    length_sq = np.maximum(np.sum(edge * edge, axis=1), 1e-300)
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(rel * edge[None], axis=2) / length_sq[None], 0.0, 1.0)
    closest = a[None] + t[..., None] * edge[None]
    diff = points[:, None, :] - closest
    return np.sqrt(np.sum(diff * diff, axis=2))


# ===== Domain Variants =====

class Domain:
    """Base class of the open sets the geometric functionals act on."""

    kind: str = 'abstract'
    # Whether ray distances and cell tests are exact (False for implicit domains)
    exact: bool = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorised strict membership for an (n, dim) array."""
        raise NotImplementedError

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """inf{|s| : x + s v not in the domain} for each row v of ``directions``.

        The directions need not be unit vectors; the result is in units of s.
        """
        raise NotImplementedError

    def boundary_distance(self, x: np.ndarray) -> float:
        """Distance from x to the complement of the domain."""
        raise NotImplementedError

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Conservative test: False only if the closed cell [lo, hi] misses the domain."""
        raise NotImplementedError

    def volume(self) -> tuple[float, bool]:
        """Volume and whether it is exact."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class PolygonDomain(Domain):
    """Planar polygon with holes; outer ring counterclockwise, holes clockwise."""
    outer: np.ndarray
    holes: tuple = ()
    kind = 'polygon2d'

    def __post_init__(self):
        outer = self._as_ring(self.outer, 'outer ring')
        if _signed_area(outer) < 0:
            outer = outer[::-1].copy()
        holes = []
        for i, ring in enumerate(self.holes):
            ring = self._as_ring(ring, f'hole {i}')
            if _signed_area(ring) > 0:
                ring = ring[::-1].copy()
            holes.append(ring)
        object.__setattr__(self, 'outer', outer)
        object.__setattr__(self, 'holes', tuple(holes))
        if _edges_cross(self._edge_starts, self._edge_ends, self._ring_ids):
            raise ValidationError('polygon rings must be simple and must not cross each other')

    @staticmethod
    def _as_ring(vertices, name: str) -> np.ndarray:
        ring = np.asarray(vertices, dtype=float)
        if ring.ndim != 2 or ring.shape[1] != 2 or ring.shape[0] < 3:
            raise ValidationError(f'{name} must be a list of at least 3 (x, y) vertices')
        if not np.all(np.isfinite(ring)):
            raise ValidationError(f'{name} must have finite coordinates')
        if np.allclose(ring[0], ring[-1]):
            ring = ring[:-1]
        return ring

    @cached_property
    def _rings(self) -> list:
        return [self.outer, *self.holes]

    @cached_property
    def _edge_starts(self) -> np.ndarray:
        return np.concatenate(self._rings)

    @cached_property
    def _edge_ends(self) -> np.ndarray:
        return np.concatenate([np.roll(ring, -1, axis=0) for ring in self._rings])

    @cached_property
    def _ring_ids(self) -> np.ndarray:
        return np.concatenate([np.full(len(ring), i) for i, ring in enumerate(self._rings)])

    @property
    def dim(self) -> int:
        return 2

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.outer.min(axis=0), self.outer.max(axis=0)

    def _parity(self, points: np.ndarray) -> np.ndarray:
        # Even-odd ray casting towards +x
        inside = np.zeros(len(points), dtype=bool)
        px, py = points[:, 0:1], points[:, 1:2]
        a, b = self._edge_starts, self._edge_ends
        straddles = (a[None, :, 1] > py) != (b[None, :, 1] > py)
        with np.errstate(divide='ignore', invalid='ignore'):
            cross_x = a[None, :, 0] + (py - a[None, :, 1]) * (b[None, :, 0] - a[None, :, 0]) / (
                b[None, :, 1] - a[None, :, 1])
        crossings = straddles & (px < cross_x)
        inside ^= (np.count_nonzero(crossings, axis=1) % 2).astype(bool)
        return inside

    def _edge_distance(self, points: np.ndarray) -> np.ndarray:
        out = np.empty(len(points))
        for part in _chunks(len(points), len(self._edge_starts)):
            out[part] = _segment_distances(points[part], self._edge_starts, self._edge_ends).min(axis=1)
        return out

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.empty(len(points), dtype=bool)
        for part in _chunks(len(points), len(self._edge_starts)):
            chunk = points[part]
            out[part] = self._parity(chunk) & (self._edge_distance(chunk) > BOUNDARY_EPS)
        return out

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        a, b = self._edge_starts, self._edge_ends
        edge = b - a
        rel = a - x
        v = np.atleast_2d(directions)
        denom = v[:, None, 0] * edge[None, :, 1] - v[:, None, 1] * edge[None, :, 0]
        scale = np.linalg.norm(v, axis=1)[:, None] * np.linalg.norm(edge, axis=1)[None]
        parallel = np.abs(denom) <= 1e-14 * scale
        with np.errstate(divide='ignore', invalid='ignore'):
            s = _cross2(rel, edge)[None, :] / denom
            u = (rel[None, :, 0] * v[:, None, 1] - rel[None, :, 1] * v[:, None, 0]) / denom
        hit = ~parallel & (u >= -1e-12) & (u <= 1 + 1e-12)
        return np.where(hit, np.abs(s), np.inf).min(axis=1)

    def boundary_distance(self, x: np.ndarray) -> float:
        return float(self._edge_distance(np.atleast_2d(x))[0])

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        centers = (lo + hi) / 2
        half_diagonal = np.linalg.norm(hi - lo, axis=1) / 2
        out = np.empty(len(centers), dtype=bool)
        for part in _chunks(len(centers), len(self._edge_starts)):
            chunk = centers[part]
            near_boundary = self._edge_distance(chunk) <= half_diagonal[part] * (1 + 1e-12)
            out[part] = self._parity(chunk) | near_boundary
        return out

    def volume(self) -> tuple[float, bool]:
        return float(sum(_signed_area(ring) for ring in self._rings)), True


@dataclass(frozen=True, eq=False)
class BoxUnionDomain(Domain):
    """Union of open axis-aligned boxes; touching faces are not glued."""
    lows: np.ndarray
    highs: np.ndarray
    kind = 'box_union'

    def __post_init__(self):
        lows = np.atleast_2d(np.asarray(self.lows, dtype=float))
        highs = np.atleast_2d(np.asarray(self.highs, dtype=float))
        if lows.shape != highs.shape or lows.shape[0] == 0:
            raise ValidationError('box corners must come in matching lo/hi pairs')
        if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
            raise ValidationError('box corners must be finite')
        if np.any(lows >= highs):
            raise ValidationError('every box must satisfy lo < hi componentwise')
        object.__setattr__(self, 'lows', lows)
        object.__setattr__(self, 'highs', highs)

    @classmethod
    def box(cls, lo, hi) -> 'BoxUnionDomain':
        return cls(np.asarray([lo], dtype=float), np.asarray([hi], dtype=float))

    @property
    def dim(self) -> int:
        return self.lows.shape[1]

    @property
    def is_single_box(self) -> bool:
        return self.lows.shape[0] == 1

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lows.min(axis=0), self.highs.max(axis=0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.zeros(len(points), dtype=bool)
        for lo, hi in zip(self.lows, self.highs):
            out |= np.all((points > lo) & (points < hi), axis=1)
        return out

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(directions)[:, None, :]
        with np.errstate(divide='ignore', invalid='ignore'):
            t_lo = (self.lows[None] - x) / v
            t_hi = (self.highs[None] - x) / v
        t_min = np.minimum(t_lo, t_hi)
        t_max = np.maximum(t_lo, t_hi)
        zero = np.broadcast_to(v == 0, t_min.shape)
        inside_axis = np.broadcast_to(((self.lows < x) & (x < self.highs))[None], t_min.shape)
        t_min = np.where(zero, np.where(inside_axis, -np.inf, np.inf), t_min)
        t_max = np.where(zero, np.where(inside_axis, np.inf, -np.inf), t_max)
        enter = t_min.max(axis=2)
        leave = t_max.min(axis=2)

        # Connected component of {s : x + s v in union} containing s = 0
        covers_origin = (enter < 0) & (leave > 0)
        right = np.where(covers_origin, leave, -np.inf).max(axis=1)
        left = np.where(covers_origin, enter, np.inf).min(axis=1)
        for _ in range(self.lows.shape[0]):
            grow_right = np.where((enter < right[:, None]) & (leave > right[:, None]), leave, -np.inf)
            grow_left = np.where((enter < left[:, None]) & (leave > left[:, None]), enter, np.inf)
            new_right = np.maximum(right, grow_right.max(axis=1))
            new_left = np.minimum(left, grow_left.min(axis=1))
            if np.array_equal(new_right, right) and np.array_equal(new_left, left):
                break
            right, left = new_right, new_left
        return np.minimum(right, -left)

    @cached_property
    def _complement_pieces(self) -> tuple[np.ndarray, np.ndarray]:
        # The complement is the intersection over boxes of unions of closed half-spaces,
        # i.e. a union of closed (possibly unbounded) axis-aligned boxes.
        d = self.dim
        pieces = [(np.full(d, -np.inf), np.full(d, np.inf))]
        for lo, hi in zip(self.lows, self.highs):
            refined = {}
            for p_lo, p_hi in pieces:
                for axis in range(d):
                    below_hi = p_hi.copy()
                    below_hi[axis] = min(p_hi[axis], lo[axis])
                    above_lo = p_lo.copy()
                    above_lo[axis] = max(p_lo[axis], hi[axis])
                    for cand_lo, cand_hi in ((p_lo, below_hi), (above_lo, p_hi)):
                        if np.all(cand_lo <= cand_hi):
                            refined[(tuple(cand_lo), tuple(cand_hi))] = (cand_lo, cand_hi)
            pieces = _drop_contained(list(refined.values()))
        lo_arr = np.array([p[0] for p in pieces]).reshape(-1, d)
        hi_arr = np.array([p[1] for p in pieces]).reshape(-1, d)
        logger.debug(f'Box union complement split into {len(pieces)} pieces')
        return lo_arr, hi_arr

    def boundary_distance(self, x: np.ndarray) -> float:
        lo, hi = self._complement_pieces
        return float(box_distance(np.asarray(x)[None], lo, hi).min())

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        out = np.zeros(len(lo), dtype=bool)
        for box_lo, box_hi in zip(self.lows, self.highs):
            out |= np.all((lo < box_hi) & (hi > box_lo), axis=1)
        return out

    def volume(self) -> tuple[float, bool]:
        # Exact union volume by coordinate compression
        axes = [np.unique(np.concatenate([self.lows[:, i], self.highs[:, i]])) for i in range(self.dim)]
        widths = [np.diff(a) for a in axes]
        mids = [(a[:-1] + a[1:]) / 2 for a in axes]
        grids = np.meshgrid(*mids, indexing='ij')
        centers = np.stack([g.ravel() for g in grids], axis=1)
        cell_volumes = np.ones(1)
        for w in widths:
            cell_volumes = np.multiply.outer(cell_volumes, w)
        covered = self.contains(centers)
        return float(cell_volumes.ravel()[covered].sum()), True


@dataclass(frozen=True, eq=False)
class BallDomain(Domain):
    """Open Euclidean ball."""
    center: np.ndarray
    radius: float
    kind = 'ball'

    def __post_init__(self):
        object.__setattr__(self, 'center', validate_point(self.center, field_name='center'))
        object.__setattr__(self, 'radius', validate_positive(self.radius, 'radius'))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius

    def contains(self, points: np.ndarray) -> np.ndarray:
        diff = np.atleast_2d(points) - self.center
        return np.sum(diff * diff, axis=1) < self.radius ** 2

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(directions)
        w = x - self.center
        a = np.sum(v * v, axis=1)
        b = v @ w
        c = float(w @ w) - self.radius ** 2
        root = np.sqrt(np.maximum(b * b - a * c, 0.0))
        return np.minimum(np.abs((-b + root) / a), np.abs((-b - root) / a))

    def boundary_distance(self, x: np.ndarray) -> float:
        return float(self.radius - np.linalg.norm(np.asarray(x) - self.center))

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return box_distance(self.center[None], lo, hi) < self.radius

    def volume(self) -> tuple[float, bool]:
        return ball_volume(self.dim, self.radius), True


@dataclass(frozen=True, eq=False)
class ImplicitDomain(Domain):
    """Domain given by a vectorised membership predicate inside a bounding box.

    Geometry on implicit domains is approximate: ray distances are accurate to
    ``h_impl`` and cell tests sample corners and centers only.
    """
    predicate: Callable[[np.ndarray], np.ndarray]
    lo: np.ndarray
    hi: np.ndarray
    h_impl: float
    kind = 'implicit'
    exact = False

    def __post_init__(self):
        lo = validate_point(self.lo, field_name='bounding_box lo')
        hi = validate_point(self.hi, lo.size, field_name='bounding_box hi')
        if np.any(lo >= hi):
            raise ValidationError('bounding box must satisfy lo < hi componentwise')
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)
        object.__setattr__(self, 'h_impl', validate_positive(self.h_impl, 'h_impl'))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lo, self.hi

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        in_box = np.all((points > self.lo) & (points < self.hi), axis=1)
        out = np.zeros(len(points), dtype=bool)
        if np.any(in_box):
            out[in_box] = np.asarray(self.predicate(points[in_box]), dtype=bool)
        return out

    def _one_sided_exit(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        speeds = np.linalg.norm(v, axis=1)
        diagonal = float(np.linalg.norm(self.hi - self.lo))
        n_steps = int(math.ceil(diagonal / self.h_impl)) + 2
        s_step = self.h_impl / speeds
        steps = np.arange(1, n_steps + 1)
        s_grid = s_step[:, None] * steps[None, :]
        points = x[None, None, :] + s_grid[..., None] * v[:, None, :]
        inside = self.contains(points.reshape(-1, self.dim)).reshape(len(v), n_steps)
        first_out = np.argmin(inside, axis=1)
        s_in = np.where(first_out == 0, 0.0, s_step * first_out)
        s_out = s_step * (first_out + 1)
        for _ in range(IMPLICIT_BISECTION_STEPS):
            mid = (s_in + s_out) / 2
            mid_inside = self.contains(x[None] + mid[:, None] * v)
            s_in = np.where(mid_inside, mid, s_in)
            s_out = np.where(mid_inside, s_out, mid)
        return s_out

    def exit_parameters(self, x: np.ndarray, directions: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(directions)
        return np.minimum(self._one_sided_exit(x, v), self._one_sided_exit(x, -v))

    def boundary_distance(self, x: np.ndarray) -> float:
        dirs = direction_set(self.dim, 720 if self.dim == 2 else 2000)
        return float(self.exit_parameters(np.asarray(x, dtype=float), dirs.nodes).min())

    def cells_may_intersect(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo = lo - self.h_impl
        hi = hi + self.h_impl
        d = self.dim
        out = self.contains((lo + hi) / 2)
        for corner in range(2 ** d):
            pick = np.array([(corner >> i) & 1 for i in range(d)], dtype=bool)
            out |= self.contains(np.where(pick, hi, lo))
        return out

    def volume(self, samples: int = 200_000, seed: int = 0) -> tuple[float, bool]:
        rng = make_rng(seed)
        points = rng.uniform(self.lo, self.hi, size=(samples, self.dim))
        box_volume = float(np.prod(self.hi - self.lo))
        return box_volume * float(np.mean(self.contains(points))), False


def _signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _edges_cross(a: np.ndarray, b: np.ndarray, ring_ids: np.ndarray) -> bool:
    """Whether any two non-adjacent edges cross properly."""
    m = len(a)
    idx = np.arange(m)
    o1 = _cross2(b[:, None] - a[:, None], a[None] - a[:, None])
    o2 = _cross2(b[:, None] - a[:, None], b[None] - a[:, None])
    o3 = _cross2(b[None] - a[None], a[:, None] - a[None])
    o4 = _cross2(b[None] - a[None], b[:, None] - a[None])
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    same_ring = ring_ids[:, None] == ring_ids[None, :]
    ring_len = np.bincount(ring_ids)[ring_ids]
    offsets = np.zeros(m, dtype=int)
    for ring in np.unique(ring_ids):
        members = idx[ring_ids == ring]
        offsets[members] = members[0]
    local = idx - offsets
    gap = np.abs(local[:, None] - local[None, :])
    adjacent = same_ring & ((gap <= 1) | (gap == ring_len[:, None] - 1))
    return bool(np.any(proper & ~adjacent))


def _drop_contained(pieces: list) -> list:
    kept = []
    for i, (lo_i, hi_i) in enumerate(pieces):
        inside_other = False
        for j, (lo_j, hi_j) in enumerate(pieces):
            if i == j:
                continue
            if np.all(lo_j <= lo_i) and np.all(hi_i <= hi_j):
                # Keep exactly one of two identical pieces
                identical = np.array_equal(lo_i, lo_j) and np.array_equal(hi_i, hi_j)
                if not identical or j < i:
                    inside_other = True
                    break
        if not inside_other:
            kept.append((lo_i, hi_i))
    return kept


# ===== Directions =====

def direction_set(d: int, n: int) -> DirectionSet:
    """Antipodally symmetric quadrature rule on S^{d-1} with about n nodes.

    d = 2 uses equispaced angles, d = 3 a Gauss-Legendre x uniform-azimuth
    product rule, d >= 4 a scrambled Halton sequence mapped to the sphere and
    symmetrised. Odd node budgets are rounded up to keep the rule antipodal.
    """
    d = validate_dimension(d)
    n = validate_positive_int(n, 'node budget', minimum=2)

    if d == 2:
        n += n % 2
        angles = 2 * np.pi * np.arange(n) / n
        nodes = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        weights = np.full(n, 1.0 / n)
    elif d == 3:
        n_theta = max(1, int(round(math.sqrt(n / 2))))
        n_phi = 2 * n_theta
        cos_theta, w_theta = np.polynomial.legendre.leggauss(n_theta)
        sin_theta = np.sqrt(1 - cos_theta ** 2)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        nodes = np.stack([
            np.outer(sin_theta, np.cos(phi)).ravel(),
            np.outer(sin_theta, np.sin(phi)).ravel(),
            np.repeat(cos_theta, n_phi),
        ], axis=1)
        weights = np.repeat(w_theta / 2, n_phi) / n_phi
    else:
        half = (n + 1) // 2
        sampler = stats.qmc.Halton(d=d, scramble=True, seed=0)
        uniform = np.clip(sampler.random(half), 1e-12, 1 - 1e-12)
        gaussian = stats.norm.ppf(uniform)
        upper = gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)
        nodes = np.concatenate([upper, -upper])
        weights = np.full(2 * half, 1.0 / (2 * half))

    nodes = nodes / np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = weights / weights.sum()
    return DirectionSet(dim=d, nodes=nodes, weights=weights)


# ===== Pointwise Operations =====

def membership(domain: Domain, x) -> bool:
    """Whether x lies in the (open) domain."""
    point = validate_point(x, domain.dim)
    return bool(domain.contains(point[None])[0])


def require_inside(domain: Domain, x, field_name: str = 'x') -> np.ndarray:
    """Validate x and raise DomainError unless it lies in the domain."""
    point = validate_point(x, domain.dim, field_name)
    if not domain.contains(point[None])[0]:
        raise DomainError(f'{field_name} = {point.tolist()} is not in the domain')
    return point


def ray_distance(domain: Domain, x, omega) -> float:
    """delta_omega(x) = inf{|s| : x + s omega not in the domain}; inf if the line stays inside."""
    point = require_inside(domain, x)
    direction = validate_unit_vector(omega, domain.dim)
    return float(domain.exit_parameters(point, direction[None])[0])


def ray_distances(domain: Domain, x, directions: DirectionSet | np.ndarray) -> np.ndarray:
    """delta_omega(x) for every node of a direction set (or rows of an array)."""
    point = require_inside(domain, x)
    nodes = directions.nodes if isinstance(directions, DirectionSet) else np.atleast_2d(directions)
    if nodes.shape[1] != domain.dim:
        raise ValidationError(f'directions must have dimension {domain.dim}')
    return domain.exit_parameters(point, nodes)


def distance_to_complement(domain: Domain, x) -> float:
    """dist(x, complement); exact except for implicit domains."""
    point = require_inside(domain, x)
    return domain.boundary_distance(point)


# ===== Ball Fractions =====

class CellCovering:
    """Cells of a lattice anchored at the bounding box that may meet the domain.

    The union of the kept cells contains the domain, so counting kept cells
    that meet a ball bounds the measure of the domain inside that ball.
    """

    def __init__(self, domain: Domain, h: float):
        self.h = validate_positive(h, 'grid spacing h')
        lo, hi = domain.bounding_box
        counts = np.maximum(1, np.ceil((hi - lo) / self.h - 1e-9)).astype(int)
        edges = [lo[i] + self.h * np.arange(counts[i] + 1) for i in range(domain.dim)]
        lower = np.meshgrid(*[e[:-1] for e in edges], indexing='ij')
        upper = np.meshgrid(*[e[1:] for e in edges], indexing='ij')
        cell_lo = np.stack([g.ravel() for g in lower], axis=1)
        cell_hi = np.stack([g.ravel() for g in upper], axis=1)
        keep = domain.cells_may_intersect(cell_lo, cell_hi)
        self.lo = cell_lo[keep]
        self.hi = cell_hi[keep]
        self.centers = (self.lo + self.hi) / 2
        self.cell_volume = float(np.prod(self.hi[0] - self.lo[0])) if len(self.lo) else 0.0
        self.covering_radius = float(np.max(np.linalg.norm(self.hi - self.lo, axis=1)) / 2) \
            if len(self.lo) else 0.0
        logger.debug(f'Cell covering: h={self.h}, {len(self.lo)} of {len(cell_lo)} cells kept')

    def measure_within(self, centers: np.ndarray, radius: float) -> np.ndarray:
        """Upper bound on |domain within B_radius(c)| for each row c of ``centers``."""
        centers = np.atleast_2d(centers)
        out = np.empty(len(centers))
        for part in _chunks(len(centers), len(self.lo) * centers.shape[1]):
            dist = box_distance(centers[part, None, :], self.lo[None], self.hi[None])
            out[part] = np.count_nonzero(dist < radius, axis=1) * self.cell_volume
        return out


def _sample_unit_ball(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    # Rejection from the cube [-1, 1]^d
    acceptance = ball_volume(d) / 2 ** d
    accepted = []
    total = 0
    while total < n:
        batch = rng.uniform(-1.0, 1.0, size=(int((n - total) / acceptance * 1.2) + 16, d))
        batch = batch[np.sum(batch * batch, axis=1) < 1.0]
        accepted.append(batch)
        total += len(batch)
    return np.concatenate(accepted)[:n]


def _mc_fraction(domain: Domain, x: np.ndarray, r: float, samples: int, rng) -> FractionEstimate:
    points = x + r * _sample_unit_ball(rng, domain.dim, samples)
    p = float(np.mean(domain.contains(points)))
    radius = 3.0 * math.sqrt(p * (1 - p) / samples)
    return FractionEstimate(value=p, mode='estimate', error_radius=radius, budget=samples, r=r,
                            sound=domain.exact)


def ball_fraction(domain: Domain, x, r, budget=None, mode: str = 'estimate',
                  seed: int = 0, task_index: int = 0) -> FractionEstimate:
    """psi_r(x) = |domain within B_r(x)| / |B_r(x)|.

    Args:
        domain: Domain
        x: Center of the ball (any finite point)
        r: Radius
        budget: Sample count (estimate mode) or grid spacing (upper_enclosure mode)
        mode: 'estimate' (Monte Carlo) or 'upper_enclosure' (cell covering)
        seed: Seed of the Monte Carlo stream
        task_index: Index of the stream split off the seed

    Returns:
        FractionEstimate

    Raises:
        ValidationError: If r <= 0, x is not finite or the mode is unknown
    """
    r = validate_positive(r, 'r')
    point = validate_point(x, domain.dim, 'x')
    if mode == 'estimate':
        samples = validate_positive_int(budget if budget is not None else 4000, 'sample budget')
        return _mc_fraction(domain, point, r, samples, make_rng(seed, task_index))
    if mode == 'upper_enclosure':
        h = validate_positive(budget if budget is not None else r / 16, 'grid spacing')
        covering = CellCovering(domain, h)
        measure = float(covering.measure_within(point[None], r)[0])
        value = min(1.0, measure / ball_volume(domain.dim, r))
        return FractionEstimate(value=value, mode='upper_enclosure', error_radius=0.0, budget=h,
                                r=r, sound=domain.exact)
    raise ValidationError(f'mode must be one of {", ".join(VALID_FRACTION_MODES)}')


def sup_ball_fraction(domain: Domain, r, mode: str = 'estimate', h=None,
                      samples: int = 4000, seed: int = 0) -> FractionEstimate:
    """Psi_r = sup over x in the domain of psi_r(x).

    Estimate mode maximises Monte Carlo fractions over the interior cell
    centers of a grid of spacing h, which is a lower estimate of Psi_r.
    Upper-enclosure mode covers the domain by cells of spacing h; a center x
    in the cell of x_j satisfies |x - x_j| <= rho, so
    |domain within B_r(x)| <= |domain within B_{r+rho}(x_j)|, and the maximum
    of the covered measure over j divided by |B_r| bounds Psi_r from above.
    """
    r = validate_positive(r, 'r')
    lo, hi = domain.bounding_box
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnsupportedError('sup_ball_fraction requires a bounded domain')
    h = validate_positive(h if h is not None else float(np.max(hi - lo)) / ENCLOSURE_CELLS_PER_SIDE, 'grid spacing h')
    covering = CellCovering(domain, h)

    if mode == 'estimate':
        samples = validate_positive_int(samples, 'sample budget')
        centers = covering.centers[domain.contains(covering.centers)]
        if len(centers) == 0:
            raise ValidationError(f'grid spacing h = {h} is too coarse: no interior sample points')
        best: FractionEstimate | None = None
        for j, center in enumerate(centers):
            estimate = _mc_fraction(domain, center, r, samples, make_rng(seed, j))
            if best is None or estimate.value > best.value:
                best = estimate
            if best.value == 1.0:
                break
        assert best is not None
        logger.debug(f'Psi_{r} estimate {best.value:.6f} over {len(centers)} points')
        return FractionEstimate(value=best.value, mode='estimate', error_radius=best.error_radius,
                                budget=samples, r=r, sound=domain.exact)

    if mode == 'upper_enclosure':
        rho = covering.covering_radius * (1 + 1e-12)
        measures = covering.measure_within(covering.centers, r + rho)
        value = min(1.0, float(measures.max(initial=0.0)) / ball_volume(domain.dim, r))
        logger.debug(f'Psi_{r} enclosure {value:.6f} (h={h}, rho={rho:.4g})')
        return FractionEstimate(value=value, mode='upper_enclosure', error_radius=0.0, budget=h,
                                r=r, sound=domain.exact)

    raise ValidationError(f'mode must be one of {", ".join(VALID_FRACTION_MODES)}')


# ===== Radii =====

def inradius(domain: Domain, h: float | None = None) -> float:
    """R = sup over x of dist(x, complement), by grid search plus a local polish."""
    lo, hi = domain.bounding_box
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnsupportedError('inradius requires a bounded domain')
    h = validate_positive(h if h is not None else float(np.max(hi - lo)) / 64, 'grid spacing h')

    axes = [lo[i] + h * np.arange(int(math.floor((hi[i] - lo[i]) / h + 1e-9)) + 1)
            for i in range(domain.dim)]
    grids = np.meshgrid(*axes, indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)
    points = points[domain.contains(points)]
    if len(points) == 0:
        raise ValidationError(f'grid spacing h = {h} is too coarse: no grid point in the domain')

    distances = np.array([domain.boundary_distance(p) for p in points])
    best = int(np.argmax(distances))
    radius = float(distances[best])

    if domain.exact:
        def objective(y):
            if not domain.contains(y[None])[0]:
                return 0.0
            return -domain.boundary_distance(y)

        result = optimize.minimize(objective, points[best], method='Nelder-Mead',
                                   options={'xatol': 1e-12, 'fatol': 1e-14, 'maxiter': 4000,
                                            'initial_simplex': points[best] + h / 2 * np.vstack(
                                                [np.zeros(domain.dim), np.eye(domain.dim)])})
        radius = max(radius, -float(result.fun))
    return radius


def exact_inradius(domain: Domain) -> float | None:
    """Closed-form inradius of a ball or a single box; None for other domains."""
    if isinstance(domain, BallDomain):
        return float(domain.radius)
    if isinstance(domain, BoxUnionDomain) and domain.is_single_box:
        return float(np.min(domain.highs[0] - domain.lows[0]) / 2)
    return None


def generalized_inradius(domain: Domain, psi, r_grid, h=None, samples: int = 4000,
                         seed: int = 0) -> RadiusEstimate:
    """Largest scanned r with Psi_r (estimate mode) >= psi."""
    psi = validate_fraction(psi, 'psi', allow_zero=False, allow_one=False)
    radii = sorted(validate_positive(r, 'r') for r in r_grid)
    if not radii:
        raise ValidationError('r grid must not be empty')

    qualifying = [r for r in radii
                  if sup_ball_fraction(domain, r, 'estimate', h, samples, seed).value >= psi]
    if not qualifying:
        return RadiusEstimate(value=0.0, psi=psi, empty=True)
    return RadiusEstimate(value=max(qualifying), psi=psi, empty=False)


__all__ = [
    'BallDomain',
    'BoxUnionDomain',
    'CellCovering',
    'DirectionSet',
    'Domain',
    'FractionEstimate',
    'ImplicitDomain',
    'PolygonDomain',
    'RadiusEstimate',
    'ball_fraction',
    'ball_volume',
    'direction_set',
    'distance_to_complement',
    'exact_inradius',
    'generalized_inradius',
    'inradius',
    'make_rng',
    'membership',
    'ray_distance',
    'ray_distances',
    'sphere_area',
    'sup_ball_fraction',
]

