"""
Verdict engine: homotopy classes, Milnor special cases and the decision chain
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config.config import Thresholds
from spectrum.primitives import PeriodicBand, VLattice
from tools.condition_tools import ConditionReport
from tools.continuity_tools import ContinuityReport, Outcome
from tools.index_tools import KernelResult
from tower.tower import Perfectness, Tower
from utils.errors import DepthMismatchError


logger = logging.getLogger(__name__)


class Classification(str, Enum):
    LIFT_EXISTS_C0 = "LIFT_EXISTS_C0"
    LIFT_EXISTS_DYADIC = "LIFT_EXISTS_DYADIC"
    OBSTRUCTED_INDEX = "OBSTRUCTED_INDEX"
    INCONCLUSIVE = "INCONCLUSIVE"


class Route(str, Enum):
    SURJECTIVE = "surjective-connecting-maps"
    MILNOR = "milnor-special-case"
    INDEX = "index-obstruction"
    NONE = "none"


@dataclass(frozen=True)
class HomotopyClass:
    name: str
    m: Optional[int] = None

    def __str__(self) -> str:
        return f"m-circles({self.m})" if self.name == "m-circles" else self.name


def _level_class(pieces) -> HomotopyClass:
    """Class of one level made of full-θ bands, or 'other'"""
    if not all(arcs.is_full for _, _, arcs in pieces):
        return HomotopyClass("other")
    bands: List[List[float]] = []
    for lo, hi in sorted((u_lo, u_hi) for u_lo, u_hi, _ in pieces):
        if bands and lo <= bands[-1][1]:
            bands[-1][1] = max(bands[-1][1], hi)
        else:
            bands.append([lo, hi])
    if bands[0][0] == -math.inf:
        return HomotopyClass("disc") if len(bands) == 1 else HomotopyClass("other")
    if len(bands) == 1 and bands[0][0] < bands[0][1]:
        return HomotopyClass("annulus")
    return HomotopyClass("m-circles", len(bands))


def classify_homotopy(tower: Tower) -> HomotopyClass:
    if all(level.is_finite for level in tower.levels):
        return HomotopyClass("finite-sets")
    classes = {_level_class(level.shape.pieces) for level in tower.levels}
    if len(classes) == 1:
        return classes.pop()
    return HomotopyClass("other")


def milnor_special(hc: HomotopyClass) -> str:
    """ext_zero for the classes whose inverse limit has trivial Ext"""
    if hc.name in ("finite-sets", "m-circles", "annulus", "disc"):
        return "ext_zero"
    return "unknown"


@dataclass
class Verdict:
    classification: Classification
    route: Route
    kernel_status: KernelResult
    per_level: List[ConditionReport]
    continuity: ContinuityReport
    perfectness: Tuple[Perfectness, str]
    homotopy_class: HomotopyClass
    milnor: str
    certified_from_level: Optional[int]
    depth: int
    blocking: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.classification in (Classification.LIFT_EXISTS_C0, Classification.LIFT_EXISTS_DYADIC):
            return 0
        if self.classification == Classification.OBSTRUCTED_INDEX:
            return 2
        return 3

    def to_dict(self) -> Dict[str, Any]:
        perfect, reason = self.perfectness
        certified = None
        if self.certified_from_level is not None:
            certified = f"verified for {self.certified_from_level} <= n <= {self.depth}"
        return {
            "classification": self.classification.value,
            "route": self.route.value,
            "kernel_status": self.kernel_status.status,
            "homotopy_class": str(self.homotopy_class),
            "milnor_special": self.milnor,
            "perfectness": {"status": perfect.value, "reason": reason},
            "certified_from_level": self.certified_from_level,
            "certified_range": certified,
            "blocking": self.blocking,
            "notes": self.notes,
        }


class VerdictTools:
    """Combines tower, condition, kernel and continuity evidence"""

    def __init__(self, thresholds: Thresholds):
        self.thresholds = thresholds

    def certified_from(self, conditions: Sequence[ConditionReport], depth: int) -> Optional[int]:
        """Smallest n₀ with surjectivity conditions at every tested n ≥ n₀"""
        n0 = None
        for report in reversed(conditions):
            if not report.surjective:
                break
            n0 = report.n
        if n0 is None or depth - n0 + 1 < self.thresholds.min_certified_levels:
            return None
        return n0

    def stability_notes(self, tower: Tower, conditions: Sequence[ConditionReport]) -> List[str]:
        notes = []
        bounded = conditions[0].bounded_im if conditions else None
        if bounded is not None and bounded.holds:
            notes.append(
                f"bounded Im (sup |Im z| = {bounded.bound:.17g}): every level n >= {bounded.from_level} "
                f"lies in |Arg z| < π/2, so A(Ω_n) is empty and α = π is omitted beyond the tested depth"
            )
        primitives = tower.spec.primitives
        if any(isinstance(p, VLattice) for p in primitives) and all(level.is_finite for level in tower.levels):
            sizes = [level.point_count for level in tower.levels]
            notes.append(f"lattice halving: finite orbits of sizes {sizes} keep doubling")
        bands = [p for p in primitives if isinstance(p, PeriodicBand)]
        if bands and all(p.log_image(0)[2].is_symmetric(self.thresholds.symmetry_tol) for p in bands):
            notes.append("π-periodic bands: π-rotation symmetry of the sections is inherited at every level")
        return notes

    def decide(self, tower: Tower, conditions: Sequence[ConditionReport], kernel: KernelResult,
               continuity: ContinuityReport, perfectness: Tuple[Perfectness, str]) -> Verdict:
        depth = tower.depth
        if len(conditions) != depth + 1 or continuity.depth != depth:
            raise DepthMismatchError(
                f"tower depth {depth}, {len(conditions)} condition reports, continuity depth {continuity.depth}"
            )

        hc = classify_homotopy(tower)
        milnor = milnor_special(hc)
        n0 = self.certified_from(conditions, depth)
        verdict = Verdict(
            classification=Classification.INCONCLUSIVE,
            route=Route.NONE,
            kernel_status=kernel,
            per_level=list(conditions),
            continuity=continuity,
            perfectness=perfectness,
            homotopy_class=hc,
            milnor=milnor,
            certified_from_level=n0,
            depth=depth,
            notes=self.stability_notes(tower, conditions),
        )

        if kernel.obstructed:
            verdict.classification = Classification.OBSTRUCTED_INDEX
            verdict.route = Route.INDEX
            return verdict

        if not kernel.usable:
            verdict.blocking.append(f"kernel condition {kernel.status}: {kernel.note}")
        elif milnor == "ext_zero":
            verdict.classification = Classification.LIFT_EXISTS_DYADIC
            verdict.route = Route.MILNOR
        elif n0 is not None:
            verdict.classification = Classification.LIFT_EXISTS_DYADIC
            verdict.route = Route.SURJECTIVE
        else:
            verdict.blocking.append(f"homotopy class {hc} has no Milnor special case")
            failing = [r.n for r in conditions if not r.surjective]
            verdict.blocking.append(f"surjectivity conditions fail or are inconclusive at levels {failing}")

        if verdict.classification == Classification.LIFT_EXISTS_DYADIC:
            perfect = perfectness[0] == Perfectness.YES
            necessary_ok = continuity.necessary.status != Outcome.FAILS
            if perfect and necessary_ok:
                verdict.classification = Classification.LIFT_EXISTS_C0
            else:
                if not perfect:
                    verdict.notes.append(f"no C0 upgrade: perfectness {perfectness[0].value} ({perfectness[1]})")
                if not necessary_ok:
                    verdict.notes.append("no C0 upgrade: the necessary continuity condition fails")

        logger.info(f"Verdict: {verdict.classification.value} via {verdict.route.value}")
        return verdict
