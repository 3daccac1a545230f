"""
Lift pipeline: parse, build the tower, evaluate conditions, decide, write artifacts
"""

import asyncio
import os
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from config.config import RunConfig
from raster.raster import to_planar
from spectrum.document import SpectrumDocument, parse_document
from tools.condition_tools import ConditionReport, ConditionTools
from tools.continuity_tools import ContinuityProbe, ContinuityReport, ContinuityTools
from tools.index_tools import IndexTools, KernelResult
from tools.verdict_tools import Verdict, VerdictTools
from tower.tower import FiberPoint, Tower, assemble_tower, build_level, is_delta_perfect, sample_fibers
from utils.plotting import write_level_plots
from utils.report import render_report


logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    config: RunConfig
    document: SpectrumDocument
    tower: Tower
    conditions: List[ConditionReport]
    kernel: KernelResult
    fibers: List[FiberPoint]
    continuity: ContinuityReport
    verdict: Verdict

    @property
    def exit_code(self) -> int:
        return self.verdict.exit_code

    def report_json(self) -> str:
        return render_report(self)


class LiftPipeline:
    """Runs every stage for one spectrum document"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.conditions = ConditionTools(config.thresholds, config.raster)
        self.index = IndexTools(config.thresholds)
        self.continuity = ContinuityTools(config.thresholds)
        self.verdicts = VerdictTools(config.thresholds)
        self._semaphore: Optional[asyncio.Semaphore] = None

    async def _in_thread(self, func, *args):
        async with self._semaphore:
            return await asyncio.to_thread(func, *args)

    def load_document(self) -> SpectrumDocument:
        if not self.config.input_path:
            raise FileNotFoundError("no input document given")
        text = Path(self.config.input_path).read_text(encoding="utf-8")
        return parse_document(text)

    async def build_tower(self, document: SpectrumDocument) -> Tower:
        spec = document.spec
        raster = self.config.raster
        levels = await asyncio.gather(*(
            self._in_thread(build_level, spec, n, raster) for n in range(self.config.depth + 1)
        ))
        tower = await asyncio.to_thread(assemble_tower, spec, levels, raster)
        logger.info(f"Tower built: kinds {tower.kinds}, ext ranks {[l.ext_rank for l in tower.levels]}")
        return tower

    async def evaluate_conditions(self, tower: Tower) -> List[ConditionReport]:
        spec = tower.spec
        bounded_im = self.conditions.check_bounded_im(spec)
        halfline = self.conditions.check_halfline_sections(spec)
        reports = await asyncio.gather(*(
            self._in_thread(self.conditions.evaluate, level, spec, bounded_im, halfline)
            for level in tower.levels
        ))
        return list(reports)

    async def run_document(self, document: SpectrumDocument) -> PipelineResult:
        config = self.config
        self._semaphore = asyncio.Semaphore(config.threads)

        tower = await self.build_tower(document)
        conditions = await self.evaluate_conditions(tower)
        kernel = await asyncio.to_thread(
            self.index.check_kernel_condition, tower, document.models, config.assume_normal_lifts
        )
        logger.info(f"Kernel condition: {kernel.status}")

        fibers = await asyncio.to_thread(
            sample_fibers, tower, config.fibers.canonical, config.fibers.twisted,
            config.fibers.seed, config.fibers.depth,
        )
        probes = [ContinuityProbe.from_decl(p, config.fibers.depth) for p in document.probes]
        continuity = await asyncio.to_thread(self.continuity.evaluate, tower, fibers, probes)
        perfectness = is_delta_perfect(tower)
        logger.info(f"Perfectness of Δ: {perfectness[0].value} ({perfectness[1]})")

        verdict = self.verdicts.decide(tower, conditions, kernel, continuity, perfectness)
        return PipelineResult(
            config=config, document=document, tower=tower, conditions=conditions,
            kernel=kernel, fibers=fibers, continuity=continuity, verdict=verdict,
        )

    async def run(self) -> PipelineResult:
        document = self.load_document()
        return await self.run_document(document)

    def write_artifacts(self, result: PipelineResult) -> str:
        """Write SVG plots, PGM exports and then the report (returned as text too)

        The report lands last, through a temporary file; a failed run leaves none behind.
        """
        report = result.report_json()
        config = self.config
        if config.svg_dir:
            write_level_plots(result.tower, config.svg_dir)
        if config.pgm_dir:
            for level in result.tower.levels:
                if level.omega is None:
                    continue
                planar = level.planar or to_planar(level.omega, config.raster.planar_cells)
                planar.write_pgm(str(Path(config.pgm_dir) / f"level_{level.n}.pgm"))
        if config.report_path:
            target = Path(config.report_path)
            target.parent.mkdir(parents=True, exist_ok=True)
            partial = target.with_name(target.name + ".partial")
            try:
                partial.write_text(report, encoding="utf-8")
                os.replace(partial, target)
            finally:
                partial.unlink(missing_ok=True)
            logger.info(f"Report written to {target}")
        return report
