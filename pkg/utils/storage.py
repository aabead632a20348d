"""Domain-spec loading and report file output.

A domain spec is a JSON document. Lengths are raw floats in user units.

    {"name": "unit_square", "type": "box_union",
     "boxes": [{"lo": [0, 0], "hi": [1, 1]}], "convex": true}

Per type:
    polygon2d  -- "vertices" (outer ring) and optional "holes" (list of rings)
    box_union  -- "boxes": list of {"lo": [...], "hi": [...]}
    ball       -- "center" and "radius"
    implicit   -- "grid": nested 0/1 occupancy array over the required
                  "bounding_box" {"lo": [...], "hi": [...]}; optional "h_impl"

Optional fields: "N" (read the domain as a subset of H^N, ambient dimension
2N+1), "convex" and "mean_convex" (asserted hypotheses), "name".
"""
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from utils.constants import DOMAINS_DIR
from utils.geometry import BallDomain, BoxUnionDomain, Domain, ImplicitDomain, PolygonDomain
from utils.heisenberg import HDomain
from utils.validation import ValidationError, validate_positive, validate_positive_int

logger = logging.getLogger(__name__)

DOMAIN_TYPES = ('polygon2d', 'box_union', 'ball', 'implicit')


@dataclass(frozen=True)
class DomainSpec:
    """A loaded domain with the metadata carried by its spec file."""
    name: str
    domain: Domain
    N: int | None = None
    convex: bool = False
    mean_convex: bool = False

    @property
    def heisenberg(self) -> HDomain:
        if self.N is None:
            raise ValidationError(f'domain {self.name!r} has no Heisenberg dimension N')
        return HDomain(self.domain, self.N)


def _require(spec: dict, key: str, domain_type: str):
    if key not in spec:
        raise ValidationError(f'{domain_type} domain spec is missing field {key!r}')
    return spec[key]


def _bounding_box(spec: dict) -> tuple[np.ndarray, np.ndarray]:
    box = spec.get('bounding_box')
    if not isinstance(box, dict) or 'lo' not in box or 'hi' not in box:
        raise ValidationError('domain spec needs a bounding_box {"lo": [...], "hi": [...]}')
    return np.asarray(box['lo'], dtype=float), np.asarray(box['hi'], dtype=float)


def _occupancy_domain(spec: dict) -> ImplicitDomain:
    lo, hi = _bounding_box(spec)
    grid = np.asarray(_require(spec, 'grid', 'implicit'), dtype=float)
    if grid.ndim != lo.size or grid.ndim < 1:
        raise ValidationError(f'occupancy grid must have {lo.size} axes, got {grid.ndim}')
    occupied = grid > 0.5
    shape = np.array(occupied.shape)
    cell = (hi - lo) / shape
    h_impl = validate_positive(spec.get('h_impl', float(cell.min()) / 4), 'h_impl')

    def predicate(points: np.ndarray) -> np.ndarray:
        index = np.floor((points - lo) / cell).astype(int)
        index = np.clip(index, 0, shape - 1)
        return occupied[tuple(index.T)]

    return ImplicitDomain(predicate, lo, hi, h_impl)


def build_domain(spec: dict) -> Domain:
    """Construct a Domain from a parsed domain-spec document.

    Raises:
        ValidationError: If the type is unknown or a field is missing or malformed
    """
    if not isinstance(spec, dict):
        raise ValidationError('domain spec must be a JSON object')
    domain_type = spec.get('type')
    if domain_type == 'polygon2d':
        vertices = _require(spec, 'vertices', domain_type)
        return PolygonDomain(np.asarray(vertices, dtype=float),
                             tuple(np.asarray(h, dtype=float) for h in spec.get('holes', [])))
    if domain_type == 'box_union':
        boxes = _require(spec, 'boxes', domain_type)
        if not boxes:
            raise ValidationError('box_union domain spec needs at least one box')
        try:
            lows = [box['lo'] for box in boxes]
            highs = [box['hi'] for box in boxes]
        except (KeyError, TypeError):
            raise ValidationError('every box needs "lo" and "hi" corners') from None
        return BoxUnionDomain(np.asarray(lows, dtype=float), np.asarray(highs, dtype=float))
    if domain_type == 'ball':
        return BallDomain(_require(spec, 'center', domain_type), _require(spec, 'radius', domain_type))
    if domain_type == 'implicit':
        return _occupancy_domain(spec)
    raise ValidationError(f'domain type must be one of {", ".join(DOMAIN_TYPES)}, got {domain_type!r}')


def resolve_domain_path(path: str | Path) -> Path:
    """Accept a file path or the name of a shipped domain spec."""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    shipped = DOMAINS_DIR / f'{candidate.stem}.json'
    if shipped.exists():
        return shipped
    raise FileNotFoundError(f'domain spec not found: {path}')


def load_domain_spec(path: str | Path) -> DomainSpec:
    """Read and build a domain spec file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValidationError: If the document is not valid JSON or not a valid spec
    """
    resolved = resolve_domain_path(path)
    try:
        spec = json.loads(resolved.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ValidationError(f'{resolved}: not valid JSON ({e})') from None

    domain = build_domain(spec)
    N = spec.get('N')
    if N is not None:
        N = validate_positive_int(N, 'N')
        HDomain(domain, N)
    loaded = DomainSpec(
        name=str(spec.get('name', resolved.stem)),
        domain=domain,
        N=N,
        convex=bool(spec.get('convex', False)),
        mean_convex=bool(spec.get('mean_convex', False)),
    )
    logger.info(f'Loaded domain {loaded.name!r} ({domain.kind}, d={domain.dim}) from {resolved}')
    return loaded


def write_report(content: str, out: str | Path | None) -> None:
    """Write report text to a file, or to stdout when no path is given."""
    if out is None or str(out) == '-':
        sys.stdout.write(content)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding='utf-8')
    logger.info(f'Report written: {path}')
