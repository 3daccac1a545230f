"""
Report schema and assembly

The JSON report has the keys meta, spec_echo, tower_summary, levels, kernel,
continuity and verdict. Reports are built from pipeline results, normalised by
ReportFormatter and validated against LiftReport before they are written.
"""

import math
import logging
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

from utils.utils import ReportFormatter


logger = logging.getLogger(__name__)

VERSION = "0.1.0"

Real = Union[float, Literal["inf", "-inf", "nan"]]
Pair = List[Real]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ReportMeta(_Strict):
    tool: str
    version: str
    depth: int
    fiber_depth: int
    resolution: Dict[str, int]
    config: Dict[str, Any]


class SpecEcho(_Strict):
    name: Optional[str]
    primitives: List[Dict[str, Any]]
    models: List[Dict[str, Any]]
    probes: List[Dict[str, Any]]


class TowerSummary(_Strict):
    depth: int
    zeta: Real
    eta: Real
    kinds: List[str]
    point_counts: List[Optional[int]]
    ext_ranks: List[int]
    norm_bounds: List[Real]
    homotopy_class: str
    milnor_special: str
    perfectness: Dict[str, str]
    bounded_im: Dict[str, Any]
    halfline_sections: Dict[str, Any]


class ConditionEntry(_Strict):
    status: Literal["holds", "fails", "inconclusive"]
    witness: Dict[str, Any]
    evidence: str


class LevelEntry(_Strict):
    n: int
    kind: Literal["finite", "radii", "region"]
    ext_rank: int
    origin_enclosed: bool
    component_samples: List[Pair]
    point_count: Optional[int]
    max_modulus: Real
    norm_bound: Real
    max_abs_one_minus: Real
    sections: List[Dict[str, Any]]
    separation: ConditionEntry
    empty_direction: ConditionEntry
    cross_retract: ConditionEntry


class KernelEntry(_Strict):
    status: Literal["passes", "obstructed", "assumed", "obstructed-unknown"]
    witness: Optional[Dict[str, Any]]
    samples: List[Dict[str, Any]]
    note: str


class OutcomeEntry(_Strict):
    status: Literal["passes", "fails", "inconclusive"]
    witness: Dict[str, Any]
    evidence: str


class ContinuityEntry(_Strict):
    necessary: OutcomeEntry
    sufficient_O2n: OutcomeEntry
    quasi_uniform: List[OutcomeEntry]
    eta_finite: bool
    depth: int
    fiber_depth: int
    fibers: Dict[str, int]


class VerdictEntry(_Strict):
    classification: Literal["LIFT_EXISTS_C0", "LIFT_EXISTS_DYADIC", "OBSTRUCTED_INDEX", "INCONCLUSIVE"]
    route: Literal["surjective-connecting-maps", "milnor-special-case", "index-obstruction", "none"]
    kernel_status: str
    homotopy_class: str
    milnor_special: str
    perfectness: Dict[str, str]
    certified_from_level: Optional[int]
    certified_range: Optional[str]
    blocking: List[str]
    notes: List[str]


class LiftReport(_Strict):
    meta: ReportMeta
    spec_echo: SpecEcho
    tower_summary: TowerSummary
    levels: List[LevelEntry]
    kernel: KernelEntry
    continuity: ContinuityEntry
    verdict: VerdictEntry


RESULT_CONFIG_KEYS = ("depth", "raster", "fibers", "thresholds", "assume_normal_lifts")


def _sections(level) -> List[Dict[str, Any]]:
    out = []
    for u, arcs in sorted(level.sections.items()):
        entry: Dict[str, Any] = {"radius": math.exp(u), "fold": arcs.fold}
        entry["arcs"] = [[lo, hi] for lo, hi in arcs.base]
        out.append(entry)
    return out


def build_report(result) -> Dict[str, Any]:
    """Plain-data report for a PipelineResult, keys in schema order"""
    config = result.config
    tower = result.tower
    verdict = result.verdict
    config_dict = config.to_dict()

    levels = []
    for level, conditions in zip(tower.levels, result.conditions):
        levels.append({
            "n": level.n,
            "kind": level.kind,
            "ext_rank": level.ext_rank,
            "origin_enclosed": level.origin_enclosed,
            "component_samples": list(level.component_samples),
            "point_count": level.point_count,
            "max_modulus": level.max_modulus,
            "norm_bound": level.norm_bound,
            "max_abs_one_minus": level.shape.max_abs_one_minus(),
            "sections": _sections(level),
            "separation": conditions.separation.to_dict(),
            "empty_direction": conditions.empty_direction.to_dict(),
            "cross_retract": conditions.cross_retract.to_dict(),
        })

    first = result.conditions[0]
    verdict_dict = verdict.to_dict()
    return {
        "meta": {
            "tool": "calkin-lift",
            "version": VERSION,
            "depth": tower.depth,
            "fiber_depth": config.fibers.depth,
            "resolution": {
                "theta_cells": config.raster.theta_cells,
                "u_cells_per_unit": config.raster.u_cells_per_unit,
                "planar_cells": config.raster.planar_cells,
            },
            "config": {key: config_dict[key] for key in RESULT_CONFIG_KEYS},
        },
        "spec_echo": {
            "name": result.document.spec.name,
            "primitives": [p.model_dump() for p in result.document.spec.primitives],
            "models": [m.model_dump() for m in result.document.models],
            "probes": [p.model_dump() for p in result.document.probes],
        },
        "tower_summary": {
            "depth": tower.depth,
            "zeta": tower.bounds.zeta,
            "eta": tower.bounds.eta,
            "kinds": tower.kinds,
            "point_counts": [level.point_count for level in tower.levels],
            "ext_ranks": [level.ext_rank for level in tower.levels],
            "norm_bounds": [level.norm_bound for level in tower.levels],
            "homotopy_class": verdict_dict["homotopy_class"],
            "milnor_special": verdict_dict["milnor_special"],
            "perfectness": verdict_dict["perfectness"],
            "bounded_im": {
                "holds": first.bounded_im.holds,
                "bound": first.bounded_im.bound,
                "from_level": first.bounded_im.from_level,
            },
            "halfline_sections": first.halfline_sections.to_dict(),
        },
        "levels": levels,
        "kernel": result.kernel.to_dict(),
        "continuity": result.continuity.to_dict(),
        "verdict": verdict_dict,
    }


def render_report(result) -> str:
    """Validated, deterministic JSON text of the report"""
    data = ReportFormatter.normalize(build_report(result))
    LiftReport.model_validate(data)
    return ReportFormatter.dumps(data)


def report_schema() -> Dict[str, Any]:
    return LiftReport.model_json_schema()
