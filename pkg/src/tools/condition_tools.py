"""
Geometric sufficient conditions for surjective connecting maps

Every per-level predicate is three-valued. Levels with finitely many radii are
decided from their exact sections; levels with radial extent fall back to the
raster, whose answers are qualified by its resolution.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.spatial import cKDTree

from config.config import RasterConfig, Thresholds
from raster.raster import separation_distance
from spectrum.arcs import ArcSet
from spectrum.spectrum import (
    SpectrumSpec, empty_antipodal_from, im_bound, re_projection_kind,
    sample_abscissae, section_at,
)
from tower.tower import Level


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class Tri(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ConditionResult:
    status: Tri
    witness: Dict[str, Any] = field(default_factory=dict)
    evidence: str = ""

    @property
    def holds(self) -> bool:
        return self.status == Tri.HOLDS

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status.value, "witness": self.witness, "evidence": self.evidence}


@dataclass
class BoundedIm:
    holds: bool
    bound: float
    from_level: Optional[int]


@dataclass
class ConditionReport:
    n: int
    separation: ConditionResult
    empty_direction: ConditionResult
    cross_retract: ConditionResult
    bounded_im: BoundedIm
    halfline_sections: ConditionResult

    @property
    def surjective(self) -> bool:
        """Separation together with one of the two direction conditions"""
        return self.separation.holds and (self.empty_direction.holds or self.cross_retract.holds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "separation": self.separation.to_dict(),
            "empty_direction": self.empty_direction.to_dict(),
            "cross_retract": self.cross_retract.to_dict(),
            "bounded_im": self.bounded_im.holds,
            "halfline_sections": self.halfline_sections.status.value,
        }


class ConditionTools:
    """Antipodal separation, empty direction, cross retract and the global section checks"""

    def __init__(self, thresholds: Thresholds, resolution: RasterConfig):
        self.thresholds = thresholds
        self.resolution = resolution

    @property
    def angular_margin(self) -> float:
        return self.thresholds.angular_margin_cells * TWO_PI / self.resolution.theta_cells

    # Separation

    def check_separation(self, level: Level) -> ConditionResult:
        """cl(Ω∖A(Ω)) ∩ A(Ω) = ∅"""
        if level.kind == "finite":
            return self._separation_finite(level)
        if level.kind == "radii":
            return self._separation_sections(level)
        return self._separation_raster(level)

    def _separation_finite(self, level: Level) -> ConditionResult:
        points = level.finite_points
        mirrored = cKDTree(np.column_stack([-points.real, -points.imag]))
        gaps, _ = mirrored.query(np.column_stack([points.real, points.imag]))
        antipodal = gaps <= 1e-9
        rest, anti = points[~antipodal], points[antipodal]
        if rest.size and anti.size:
            tree = cKDTree(np.column_stack([anti.real, anti.imag]))
            distance, _ = tree.query(np.column_stack([rest.real, rest.imag]))
            gap = float(distance.min())
        else:
            gap = math.inf
        return ConditionResult(
            Tri.HOLDS,
            {"distance": gap, "antipodal_points": int(anti.size)},
            "finite level: every point is isolated",
        )

    def _separation_sections(self, level: Level) -> ConditionResult:
        for u, arcs in level.sections.items():
            antipodal = arcs.antipodal()
            if antipodal.is_empty or arcs.is_discrete:
                continue
            for start, length in arcs.components():
                component = ArcSet([(start, start + length)])
                if not component.intersect(antipodal).is_empty and not antipodal.covers(component):
                    return ConditionResult(
                        Tri.FAILS,
                        {"radius": math.exp(u), "component": [start, start + length]},
                        "a circle-section component is partly antipodal",
                    )
        return ConditionResult(Tri.HOLDS, {}, "exact sections: antipodal parts are whole components")

    def _separation_raster(self, level: Level) -> ConditionResult:
        omega, antipodal = level.omega, level.antipodal
        rest = omega.with_grid(omega.grid & ~antipodal.grid)
        resolution = omega.resolution
        if antipodal.is_empty or rest.is_empty:
            side = "A(Ω)" if antipodal.is_empty else "Ω∖A(Ω)"
            return ConditionResult(Tri.HOLDS, {"distance": math.inf, "resolution": resolution}, f"{side} is empty")

        distance = separation_distance(rest, antipodal)
        witness = {"distance": distance, "resolution": resolution}
        if distance >= self.thresholds.separation_cells * omega.cell_size:
            return ConditionResult(Tri.HOLDS, witness, "separated by at least the cell threshold")
        feature = self.thresholds.feature_cells
        if distance <= omega.cell_diagonal + 1e-12 and rest.count >= feature and antipodal.count >= feature:
            return ConditionResult(Tri.FAILS, witness, "Ω∖A(Ω) touches A(Ω)")
        return ConditionResult(Tri.INCONCLUSIVE, witness, "gap below the separation threshold")

    # Empty direction

    def check_empty_direction(self, level: Level) -> ConditionResult:
        """A direction α whose open ray misses Ω_n"""
        arcs = level.shape.all_arcs()
        if arcs.is_full:
            return ConditionResult(Tri.FAILS, {}, "every direction is met")
        alpha = math.pi if arcs.distance(math.pi) > 0 else arcs.largest_gap_midpoint()
        return ConditionResult(
            Tri.HOLDS,
            {"alpha": alpha, "clearance": arcs.distance(alpha)},
            "direction omitted by every piece",
        )

    # Cross retract

    def check_cross_retract(self, level: Level, spec: SpectrumSpec) -> ConditionResult:
        """Symmetric circle sections whose components are shorter than π"""
        if re_projection_kind(spec) != "finite" or not level.shape.is_finite_radii:
            return ConditionResult(Tri.INCONCLUSIVE, {}, "Re σ(A) is not finite")

        margin = self.angular_margin
        borderline = None
        for u, arcs in level.sections.items():
            if arcs.is_empty:
                continue
            if not arcs.is_symmetric(self.thresholds.symmetry_tol):
                return ConditionResult(Tri.FAILS, {"radius": math.exp(u)}, "section is not π-symmetric")
            longest = arcs.max_component_length()
            if longest >= math.pi:
                return ConditionResult(
                    Tri.FAILS, {"radius": math.exp(u), "length": longest},
                    "section component of length at least π",
                )
            if longest >= math.pi - margin:
                borderline = {"radius": math.exp(u), "length": longest}
        if borderline is not None:
            return ConditionResult(Tri.INCONCLUSIVE, borderline, "component length within the angular margin of π")

        beta = level.shape.all_arcs().largest_gap_midpoint()
        beta = 0.0 if beta is None else beta
        free_points = []
        for u, arcs in level.sections.items():
            upper = arcs.free_point_between(beta, math.pi)
            lower = arcs.free_point_between(beta + math.pi, math.pi)
            if upper is None or lower is None:
                return ConditionResult(Tri.INCONCLUSIVE, {"radius": math.exp(u)}, "no free point on a half circle")
            free_points.append([math.exp(u), upper, lower])
        return ConditionResult(
            Tri.HOLDS,
            {
                "alpha": (2.0 * beta) % TWO_PI,
                "theta": (beta + math.pi / 2.0) % TWO_PI,
                "beta": beta,
                "free_points": free_points,
            },
            "symmetric sections with components shorter than π",
        )

    # Global checks

    def check_bounded_im(self, spec: SpectrumSpec) -> BoundedIm:
        bound = im_bound(spec)
        return BoundedIm(holds=math.isfinite(bound), bound=bound, from_level=empty_antipodal_from(bound))

    def check_halfline_sections(self, spec: SpectrumSpec) -> ConditionResult:
        """Re σ(A) finite or an interval, and every vertical section a half-line"""
        kind = re_projection_kind(spec)
        if kind == "other":
            return ConditionResult(Tri.FAILS, {"re_projection": kind}, "Re σ(A) is neither finite nor an interval")
        for s in sample_abscissae(spec):
            section = section_at(spec, s)
            if section.kind != "half_line":
                return ConditionResult(Tri.FAILS, {"s": s, "section": section.kind}, "section is not a half-line")
        return ConditionResult(Tri.HOLDS, {"re_projection": kind}, "every section is a half-line")

    def evaluate(self, level: Level, spec: SpectrumSpec,
                 bounded_im: Optional[BoundedIm] = None,
                 halfline: Optional[ConditionResult] = None) -> ConditionReport:
        report = ConditionReport(
            n=level.n,
            separation=self.check_separation(level),
            empty_direction=self.check_empty_direction(level),
            cross_retract=self.check_cross_retract(level, spec),
            bounded_im=bounded_im or self.check_bounded_im(spec),
            halfline_sections=halfline or self.check_halfline_sections(spec),
        )
        logger.debug(
            f"Level {level.n}: separation {report.separation.status.value}, "
            f"empty direction {report.empty_direction.status.value}, "
            f"cross retract {report.cross_retract.status.value}"
        )
        return report

    def evaluate_all(self, levels: List[Level], spec: SpectrumSpec) -> List[ConditionReport]:
        bounded_im = self.check_bounded_im(spec)
        halfline = self.check_halfline_sections(spec)
        return [self.evaluate(level, spec, bounded_im, halfline) for level in levels]
