"""
Squaring tower

Builds the inverse system Ω_0 ← Ω_1 ← … ← Ω_N (connecting maps z ↦ z²),
per-level derived data, fibers of the inverse limit Δ and the perfectness
classifier.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from config.config import RasterConfig
from raster.raster import (
    CylinderRaster, PlanarRaster, antipodal_set, bounded_complement_components,
    dilate, isolated_cells, rasterize_shape, level_u_range,
)
from spectrum.arcs import ArcSet
from spectrum.spectrum import LevelShape, SpectrumSpec, StripBounds, level_image, strip_bounds
from utils.errors import TowerConsistencyError


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
POINT_TOL = 1e-9
MEMBER_TOL = 1e-11
RANDOM_SEQUENCES = 8
MAX_ISOLATION_POINTS = 4096


@dataclass(frozen=True, eq=False)
class Level:
    """Ω_n with its exact shape, raster (when not finite) and Ext data"""
    n: int
    kind: str
    shape: LevelShape
    omega: Optional[CylinderRaster]
    antipodal: Optional[CylinderRaster]
    ext_rank: int
    component_samples: Tuple[complex, ...]
    origin_enclosed: bool
    sections: Dict[float, ArcSet]
    finite_points: Optional[np.ndarray]
    norm_bound: float
    planar: Optional[PlanarRaster] = None

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def max_modulus(self) -> float:
        return self.shape.max_modulus()

    @property
    def point_count(self) -> Optional[int]:
        return None if self.finite_points is None else int(self.finite_points.size)


@dataclass(frozen=True, eq=False)
class Tower:
    spec: SpectrumSpec
    depth: int
    levels: Tuple[Level, ...]
    bounds: StripBounds
    resolution: RasterConfig
    _shapes: Dict[int, LevelShape] = field(default_factory=dict, repr=False)

    def shape(self, n: int) -> LevelShape:
        """Exact Ω_n, also beyond the tower depth"""
        if n <= self.depth:
            return self.levels[n].shape
        if n not in self._shapes:
            self._shapes[n] = level_image(self.spec, n)
        return self._shapes[n]

    @property
    def kinds(self) -> List[str]:
        return [level.kind for level in self.levels]


# Level construction

def _radii_components(shape: LevelShape) -> Tuple[int, List[complex], bool]:
    """Bounded complement components of a union of circle subsets"""
    radii = shape.radii()
    full = [u for u in radii if shape.section(u, tol=0.0).is_full]
    if not full:
        return 0, [], False
    samples: List[complex] = [0j]
    for inner, outer in zip(full, full[1:]):
        between = [u for u in radii if inner <= u <= outer]
        gap_lo, gap_hi = max(zip(between, between[1:]), key=lambda pair: pair[1] - pair[0])
        samples.append(complex(math.exp((gap_lo + gap_hi) / 2.0), 0.0))
    return len(full), samples, True


def build_level(spec: SpectrumSpec, n: int, resolution: RasterConfig) -> Level:
    """All per-level data for Ω_n"""
    shape = level_image(spec, n)
    bounds = strip_bounds(spec)
    norm_bound = math.exp(math.ldexp(bounds.zeta, -n))
    points = shape.finite_points()

    if points is not None:
        logger.debug(f"Level {n}: finite, {points.size} points")
        return Level(
            n=n, kind="finite", shape=shape, omega=None, antipodal=None,
            ext_rank=0, component_samples=(), origin_enclosed=False,
            sections=shape.sections(), finite_points=points, norm_bound=norm_bound,
        )

    omega = rasterize_shape(shape, level_u_range(spec, n), resolution)
    antipodal = antipodal_set(omega)

    if shape.is_finite_radii:
        rank, samples, enclosed = _radii_components(shape)
        level = Level(
            n=n, kind="radii", shape=shape, omega=omega, antipodal=antipodal,
            ext_rank=rank, component_samples=tuple(samples), origin_enclosed=enclosed,
            sections=shape.sections(), finite_points=None, norm_bound=norm_bound,
        )
    else:
        components = bounded_complement_components(omega, resolution.planar_cells)
        level = Level(
            n=n, kind="region", shape=shape, omega=omega, antipodal=antipodal,
            ext_rank=components.count, component_samples=tuple(components.samples),
            origin_enclosed=components.origin_enclosed, sections={},
            finite_points=None, norm_bound=norm_bound, planar=components.planar,
        )
    logger.debug(f"Level {n}: {level.kind}, ext_rank {level.ext_rank}")
    return level


def _check_finite_squaring(upper: Level, lower: Level):
    squares = upper.finite_points ** 2
    tree_lower = cKDTree(np.column_stack([lower.finite_points.real, lower.finite_points.imag]))
    tree_image = cKDTree(np.column_stack([squares.real, squares.imag]))
    forward, _ = tree_lower.query(np.column_stack([squares.real, squares.imag]))
    backward, _ = tree_image.query(np.column_stack([lower.finite_points.real, lower.finite_points.imag]))
    worst = max(float(forward.max()), float(backward.max()))
    if worst > POINT_TOL:
        raise TowerConsistencyError(
            f"squaring Ω_{upper.n} misses Ω_{lower.n} by {worst:.3g}"
        )


def _squared_grid(upper: CylinderRaster, lower: CylinderRaster) -> np.ndarray:
    """Image of upper's occupied cells under (k, j) ↦ (2k, 2j mod Θ) in lower's grid"""
    ks, js = np.nonzero(upper.grid)
    rows = 2 * (upper.row0 + ks) - lower.row0
    cols = (2 * js) % lower.theta_cells
    rows = np.clip(rows, 0, lower.grid.shape[0] - 1)
    image = np.zeros_like(lower.grid)
    image[rows, cols] = True
    return image


def _check_raster_squaring(upper: Level, lower: Level):
    image = _squared_grid(upper.omega, lower.omega)
    forward = int((image & ~dilate(lower.omega)).sum())
    backward = int((lower.omega.grid & ~dilate(lower.omega.with_grid(image))).sum())
    if forward or backward:
        raise TowerConsistencyError(
            f"squaring Ω_{upper.n} disagrees with Ω_{lower.n} beyond one cell "
            f"({forward} cells outside, {backward} cells uncovered); resolution too coarse?"
        )


def _check_norm_bound(level: Level):
    if level.omega is None:
        top = level.max_modulus
        slack = POINT_TOL
    else:
        rows = np.flatnonzero(level.omega.grid.any(axis=1))
        top = math.exp(level.omega.u_of_row(int(rows[-1]))) if rows.size else 0.0
        slack = 2.0 * level.omega.cell_size
    if top > level.norm_bound * (1.0 + slack):
        raise TowerConsistencyError(
            f"level {level.n}: max |z| = {top:.6g} exceeds exp(2^-n ζ) = {level.norm_bound:.6g}"
        )


def assemble_tower(spec: SpectrumSpec, levels: Sequence[Level], resolution: RasterConfig) -> Tower:
    """Verify squaring consistency and norm bounds, then freeze the tower"""
    levels = tuple(sorted(levels, key=lambda level: level.n))
    for level in levels:
        _check_norm_bound(level)
    for lower, upper in zip(levels, levels[1:]):
        if lower.is_finite and upper.is_finite:
            _check_finite_squaring(upper, lower)
        elif lower.omega is not None and upper.omega is not None:
            _check_raster_squaring(upper, lower)
        else:
            logger.debug(f"Levels {lower.n}/{upper.n}: finite and raster mixed, squaring check skipped")
    return Tower(
        spec=spec,
        depth=len(levels) - 1,
        levels=levels,
        bounds=strip_bounds(spec),
        resolution=resolution,
    )


def build_tower(spec: SpectrumSpec, depth: int, resolution: RasterConfig) -> Tower:
    if depth < 1:
        raise ValueError(f"tower depth must be >= 1, got {depth}")
    logger.info(f"Building tower of depth {depth} at {resolution.theta_cells} x {resolution.u_cells_per_unit}")
    levels = [build_level(spec, n, resolution) for n in range(depth + 1)]
    return assemble_tower(spec, levels, resolution)


# Fibers

@dataclass(frozen=True, eq=False)
class FiberPoint:
    """Compatible sequence x_0, x_1, … with x_{n+1}² = x_n"""
    coords: np.ndarray
    provenance: str
    base: complex
    eps: Tuple[int, ...] = ()
    flips: Tuple[int, ...] = ()
    label: str = ""

    @property
    def depth(self) -> int:
        return self.coords.size - 1

    def distances_to_one(self) -> np.ndarray:
        return np.abs(1.0 - self.coords)

    def tail(self, fraction: float) -> np.ndarray:
        """|1 − x_n| over the last ``fraction`` of the coordinates"""
        d = self.distances_to_one()
        start = min(d.size - 1, int(math.floor(self.depth * (1.0 - fraction))))
        return d[start:]

    def squaring_defect(self) -> float:
        return float(np.max(np.abs(self.coords[1:] ** 2 - self.coords[:-1]))) if self.depth else 0.0


def canonical_fiber(z: complex, depth: int) -> FiberPoint:
    """x_n = exp(2⁻ⁿz)"""
    scales = np.ldexp(1.0, -np.arange(depth + 1))
    coords = np.exp(scales * z.real) * np.exp(1j * np.mod(scales * z.imag, TWO_PI))
    return FiberPoint(coords=coords, provenance="canonical", base=complex(z))


def twisted_fiber(tower: Tower, z: complex, eps: Sequence[int], depth: int, label: str = "") -> FiberPoint:
    """Root-choice fiber from x_0 = exp(z): θ_{n+1} = θ_n/2 + ε_{n+1}π

    A prescribed root that falls outside Ω_{n+1} is replaced by the other root
    and the index is recorded in ``flips``.
    """
    if len(eps) < depth:
        raise ValueError(f"need {depth} root choices, got {len(eps)}")
    u = z.real
    theta = math.fmod(z.imag, TWO_PI) % TWO_PI
    us, thetas, flips = [u], [theta], []
    for n in range(1, depth + 1):
        u = u / 2.0
        shape = tower.shape(n)
        wanted = (theta / 2.0 + eps[n - 1] * math.pi) % TWO_PI
        other = (wanted + math.pi) % TWO_PI
        if shape.contains(u, wanted, MEMBER_TOL):
            theta = wanted
        elif shape.contains(u, other, MEMBER_TOL):
            theta = other
            flips.append(n)
        else:
            section = shape.section(u, MEMBER_TOL)
            theta = wanted if section.distance(wanted) <= section.distance(other) else other
            if theta != wanted:
                flips.append(n)
        us.append(u)
        thetas.append(theta)
    coords = np.exp(np.asarray(us)) * np.exp(1j * np.asarray(thetas))
    return FiberPoint(
        coords=coords, provenance="twisted", base=complex(z),
        eps=tuple(int(e) for e in eps[:depth]), flips=tuple(flips), label=label,
    )


def epsilon_sequences(depth: int, rng: np.random.Generator) -> List[Tuple[str, Tuple[int, ...]]]:
    """Alternating (1,0,1,…), all-ones, then pseudorandom root choices"""
    sequences = [
        ("alternating", tuple(1 - (k % 2) for k in range(depth))),
        ("ones", tuple([1] * depth)),
    ]
    for k in range(RANDOM_SEQUENCES):
        sequences.append((f"random-{k}", tuple(int(e) for e in rng.integers(0, 2, size=depth))))
    return sequences


def _base_points(spec: SpectrumSpec, count: int, rng: np.random.Generator) -> List[complex]:
    points = [a for p in spec.primitives for a in p.anchors()]
    while len(points) < count:
        primitive = spec.primitives[int(rng.integers(len(spec.primitives)))]
        points.append(primitive.sample(rng))
    return points


def sample_fibers(tower: Tower, canonical_count: int, twisted_count: int, seed: int,
                  depth: Optional[int] = None) -> List[FiberPoint]:
    """Deterministic canonical and twisted fibers to ``depth`` (defaults to the tower depth)"""
    depth = tower.depth if depth is None else depth
    rng = np.random.default_rng(seed)
    bases = _base_points(tower.spec, max(canonical_count, 1), rng)

    fibers = [canonical_fiber(z, depth) for z in bases[:canonical_count]]

    twisted_bases = sorted(bases, key=lambda z: abs(1.0 - np.exp(z)))[:1] + bases
    twisted: List[FiberPoint] = []
    for z in twisted_bases:
        if len(twisted) >= twisted_count:
            break
        for name, eps in epsilon_sequences(depth, rng):
            if len(twisted) >= twisted_count:
                break
            twisted.append(twisted_fiber(tower, z, eps, depth, label=name))

    logger.debug(f"Sampled {len(fibers)} canonical and {len(twisted)} twisted fibers to depth {depth}")
    return fibers + twisted


# Perfectness

class Perfectness(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def _preimage_counts(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    squares = upper ** 2
    tree = cKDTree(np.column_stack([lower.real, lower.imag]))
    _, nearest = tree.query(np.column_stack([squares.real, squares.imag]))
    return np.bincount(nearest, minlength=lower.size)


def _isolated_pieces(shape: LevelShape) -> bool:
    """True if some degenerate piece holds a point not met by any other piece"""
    for index, (u_lo, u_hi, arcs) in enumerate(shape.pieces):
        if u_lo != u_hi or not arcs.is_discrete:
            continue
        if arcs.fold * len(arcs.base) > MAX_ISOLATION_POINTS:
            return True
        others = [p for k, p in enumerate(shape.pieces) if k != index
                  and not (p[0] == p[1] and p[2].is_discrete)]
        for theta in arcs.points():
            if not any(lo - MEMBER_TOL <= u_lo <= hi + MEMBER_TOL and a.contains(theta, MEMBER_TOL)
                       for lo, hi, a in others):
                return True
    return False


def is_delta_perfect(tower: Tower) -> Tuple[Perfectness, str]:
    """Perfectness of the inverse limit for the recognised tower classes"""
    kinds = set(tower.kinds)

    if kinds == {"finite"}:
        counts = [
            _preimage_counts(upper.finite_points, lower.finite_points)
            for lower, upper in zip(tower.levels, tower.levels[1:])
        ]
        if all(c.min() >= 2 for c in counts):
            sizes = [level.point_count for level in tower.levels]
            return Perfectness.YES, f"every point branches; |Ω_n| = {sizes}"
        tail = counts[len(counts) // 2:]
        if all(c.max() == 1 for c in tail):
            size = tower.levels[-1].point_count
            return Perfectness.NO, f"branching stops; Ω_n has {size} point(s) for n >= {tower.depth // 2}"
        return Perfectness.UNKNOWN, "finite levels with partial branching"

    if "finite" in kinds:
        return Perfectness.UNKNOWN, "mixed tower of finite and continuum levels"

    for level in tower.levels:
        if _isolated_pieces(level.shape):
            return Perfectness.UNKNOWN, f"level {level.n} has isolated points"
        if isolated_cells(level.omega).any():
            return Perfectness.UNKNOWN, f"level {level.n} has isolated raster cells"
    return Perfectness.YES, "every level is perfect and the projections are onto"
