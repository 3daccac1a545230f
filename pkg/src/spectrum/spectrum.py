"""
Spectrum model: validated primitive unions and exact geometric queries

Everything here works on the symbolic description; nothing is rasterized.
"""

import math
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from spectrum.arcs import ArcSet
from spectrum.primitives import Primitive, LogPiece


logger = logging.getLogger(__name__)

INF = math.inf
FINITE_POINT_CAP = 1 << 16


class SpectrumSpec(BaseModel):
    """Declarative union of primitives describing σ(A)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    primitives: Tuple[Primitive, ...] = Field(min_length=1)
    name: Optional[str] = None


@dataclass(frozen=True)
class StripBounds:
    zeta: float
    eta: float

    @property
    def eta_finite(self) -> bool:
        return math.isfinite(self.eta)


def strip_bounds(spec: SpectrumSpec) -> StripBounds:
    """Exact sup and inf of Re over the primitives"""
    ranges = [p.re_range() for p in spec.primitives]
    return StripBounds(zeta=max(hi for _, hi in ranges), eta=min(lo for lo, _ in ranges))


# Sections

@dataclass(frozen=True)
class SectionSet:
    """Descriptor of {t : s + it ∈ Z} for one abscissa s"""
    intervals: Tuple[Tuple[float, float], ...] = ()
    lattices: Tuple[Tuple[float, float], ...] = ()
    periodic: Tuple[Tuple[Tuple[Tuple[float, float], ...], float], ...] = ()

    @property
    def kind(self) -> str:
        if any(lo == -INF and hi == INF for lo, hi in self.intervals):
            return "full_line"
        if not (self.intervals or self.lattices or self.periodic):
            return "empty"
        if self.intervals and not (self.lattices or self.periodic):
            if len(self.intervals) == 1:
                lo, hi = self.intervals[0]
                if math.isinf(lo) or math.isinf(hi):
                    return "half_line"
            return "intervals"
        if self.lattices and not (self.intervals or self.periodic):
            return "lattice"
        if self.periodic and not (self.intervals or self.lattices):
            return "periodic"
        return "mixed"

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    def contains(self, t: float, tol: float = 1e-12) -> bool:
        if any(lo - tol <= t <= hi + tol for lo, hi in self.intervals):
            return True
        for base, step in self.lattices:
            k = round((t - base) / step)
            if abs(base + k * step - t) <= tol:
                return True
        for intervals, period in self.periodic:
            for lo, hi in intervals:
                k = math.floor((t - lo) / period)
                r = t - k * period
                if lo - tol <= r <= hi + tol or lo - tol <= r - period <= hi + tol:
                    return True
        return False


def _merge_closed(intervals: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged: List[List[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def section_at(spec: SpectrumSpec, s: float) -> SectionSet:
    """Exact vertical section of Z at Re z = s"""
    intervals, lattices, periodic = [], [], []
    for primitive in spec.primitives:
        part = primitive.section(s)
        if part is None:
            continue
        kind, payload = part
        if kind == "interval":
            intervals.append(payload)
        elif kind == "lattice":
            lattices.append(payload)
        else:
            periodic.append(payload)
    return SectionSet(
        intervals=tuple(_merge_closed(intervals)),
        lattices=tuple(sorted(set(lattices))),
        periodic=tuple(periodic),
    )


def re_projection(spec: SpectrumSpec) -> List[Tuple[float, float]]:
    """Merged closed intervals making up Re Z"""
    return _merge_closed([p.re_range() for p in spec.primitives])


def re_projection_kind(spec: SpectrumSpec) -> str:
    """'finite', 'interval' or 'other'"""
    parts = re_projection(spec)
    if all(lo == hi for lo, hi in parts):
        return "finite"
    if len(parts) == 1:
        return "interval"
    return "other"


def im_bound(spec: SpectrumSpec) -> float:
    """sup |Im z| over Z, +inf when unbounded"""
    return max(max(abs(lo), abs(hi)) for lo, hi in (p.im_range() for p in spec.primitives))


def empty_antipodal_from(bound: float) -> Optional[int]:
    """First n with 2⁻ⁿ·bound < π/2, after which Ω_n sits in |Arg z| < π/2"""
    if not math.isfinite(bound):
        return None
    n = 0
    while math.ldexp(bound, -n) >= math.pi / 2:
        n += 1
    return n


def sample_abscissae(spec: SpectrumSpec) -> List[float]:
    """Abscissae at which sections are piecewise constant representatives

    Sections only change at primitive endpoints, so endpoints plus midpoints of
    consecutive endpoints (and one point below an unbounded lower end) suffice.
    """
    breakpoints = sorted({v for p in spec.primitives for v in p.re_range() if math.isfinite(v)})
    candidates = list(breakpoints)
    candidates += [(a + b) / 2.0 for a, b in zip(breakpoints, breakpoints[1:])]
    if any(p.re_range()[0] == -INF for p in spec.primitives):
        candidates.append(breakpoints[0] - 1.0)
    projection = re_projection(spec)
    return sorted(s for s in set(candidates) if any(lo <= s <= hi for lo, hi in projection))


# Level images

@dataclass(frozen=True)
class LevelShape:
    """Exact Ω_n = cl(exp(2⁻ⁿZ)) in log-cylinder coordinates as a union of product pieces"""
    n: int
    pieces: Tuple[LogPiece, ...]

    @property
    def contains_zero(self) -> bool:
        return any(u_lo == -INF for u_lo, _, _ in self.pieces)

    @property
    def u_max(self) -> float:
        return max(u_hi for _, u_hi, _ in self.pieces)

    @property
    def is_finite_radii(self) -> bool:
        return all(u_lo == u_hi for u_lo, u_hi, _ in self.pieces)

    def radii(self) -> List[float]:
        """Log-radii of a level whose pieces are all circle subsets"""
        if not self.is_finite_radii:
            raise ValueError("level has radial extent")
        return sorted({u for u, _, _ in self.pieces})

    def section(self, u: float, tol: float = 1e-12) -> ArcSet:
        """Directions θ with (u, θ) in the level"""
        arcs = ArcSet.empty()
        for u_lo, u_hi, piece_arcs in self.pieces:
            if u_lo - tol <= u <= u_hi + tol:
                arcs = arcs.union(piece_arcs)
        return arcs

    def sections(self) -> Dict[float, ArcSet]:
        return {u: self.section(u, tol=0.0) for u in self.radii()}

    def all_arcs(self) -> ArcSet:
        """Every direction met by a point of the level with r > 0"""
        arcs = ArcSet.empty()
        for _, _, piece_arcs in self.pieces:
            arcs = arcs.union(piece_arcs)
        return arcs

    def contains(self, u: float, theta: float, tol: float = 1e-12) -> bool:
        return any(
            u_lo - tol <= u <= u_hi + tol and arcs.contains(theta, tol)
            for u_lo, u_hi, arcs in self.pieces
        )

    def contains_point(self, z: complex, tol: float = 1e-12) -> bool:
        if z == 0:
            return self.contains_zero
        return self.contains(math.log(abs(z)), math.atan2(z.imag, z.real), tol)

    def finite_points(self) -> Optional[np.ndarray]:
        """Exact point list when the level is a finite set of manageable size"""
        if not self.is_finite_radii:
            return None
        if not all(arcs.is_discrete for _, _, arcs in self.pieces):
            return None
        if sum(arcs.fold * len(arcs.base) for _, _, arcs in self.pieces) > FINITE_POINT_CAP:
            return None
        points = []
        for u, _, arcs in self.pieces:
            points.extend(np.exp(u + 1j * arcs.points()))
        return _unique_points(np.asarray(points, dtype=complex))

    def max_modulus(self) -> float:
        return math.exp(self.u_max)

    def max_abs_one_minus(self) -> float:
        """max |1 − z| over the level, attained on a radial end and the direction nearest π"""
        best = 0.0
        for u_lo, u_hi, arcs in self.pieces:
            if arcs.is_empty:
                continue
            cos_d = math.cos(arcs.distance(math.pi))
            for u in (u_lo, u_hi):
                rho = 0.0 if u == -INF else math.exp(u)
                best = max(best, math.sqrt(max(0.0, 1.0 + 2.0 * rho * cos_d + rho * rho)))
        return best


def _unique_points(points: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Drop duplicates and order by angle, then modulus"""
    if points.size == 0:
        return points
    keys = np.round(points.real, decimals) + 1j * np.round(points.imag, decimals)
    _, index = np.unique(keys, return_index=True)
    points = points[np.sort(index)]
    angles = np.mod(np.angle(points), 2 * math.pi)
    return points[np.lexsort((np.abs(points), angles))]


def level_image(spec: SpectrumSpec, n: int) -> LevelShape:
    """Exact symbolic Ω_n"""
    if n < 0:
        raise ValueError(f"level must be non-negative, got {n}")
    pieces = tuple(p.log_image(n) for p in spec.primitives)
    logger.debug(f"Level {n}: {len(pieces)} pieces")
    return LevelShape(n=n, pieces=pieces)
