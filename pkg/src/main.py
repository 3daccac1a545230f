#!/usr/bin/env python3
"""
calkin-lift
Command-line entry point: decide semigroup lifts from a spectrum document
"""

import sys
import json
import asyncio
import logging
import argparse
from typing import List, Optional

from config.config import RunConfig
from pipeline.pipeline import LiftPipeline
from utils.errors import ConfigError
from utils.report import report_schema
from utils.utils import ConfigValidator, ErrorHandler, Logger


logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Decide dyadic and C0 semigroup lifts from the spectrum of a normal generator"
    )
    parser.add_argument("--input", type=str, help="Spectrum document (TOML)")
    parser.add_argument(
        "--config",
        type=str,
        default="../config/config.yaml",
        help="Configuration file path"
    )
    parser.add_argument("--depth", type=int, help="Tower depth N")
    parser.add_argument("--theta-cells", type=int, help="θ cells (power of two)")
    parser.add_argument("--u-cells", type=int, help="u cells per unit")
    parser.add_argument("--fibers", type=str, help="Fiber counts as C or C,T (canonical, twisted)")
    parser.add_argument("--seed", type=int, help="Fiber sampling seed")
    parser.add_argument(
        "--assume-normal-lifts",
        action="store_true",
        help="Assume each q(t) has a normal lift when no operator model is given"
    )
    parser.add_argument("--report", type=str, help="Report JSON path (stdout when omitted)")
    parser.add_argument("--svg-dir", type=str, help="Directory for per-level SVG plots")
    parser.add_argument("--pgm-dir", type=str, help="Directory for planar PGM exports")
    parser.add_argument(
        "--threshold",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a decision threshold (repeatable)"
    )
    parser.add_argument("--log-level", type=str, help="Logging level")
    parser.add_argument("--log-file", type=str, help="Also log to this file")
    parser.add_argument("--schema", action="store_true", help="Print the report JSON schema and exit")
    return parser


def _parse_fibers(value: str):
    parts = value.split(",")
    try:
        counts = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"--fibers expects C or C,T, got {value!r}")
    if len(counts) == 1:
        return counts[0], counts[0]
    if len(counts) == 2:
        return counts[0], counts[1]
    raise ConfigError(f"--fibers expects C or C,T, got {value!r}")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Configuration file first, then command-line overrides"""
    config = RunConfig.load(args.config)
    if args.input is not None:
        config.input_path = args.input
    if args.depth is not None:
        config.depth = args.depth
    if args.theta_cells is not None:
        config.raster.theta_cells = args.theta_cells
    if args.u_cells is not None:
        config.raster.u_cells_per_unit = args.u_cells
    if args.fibers is not None:
        config.fibers.canonical, config.fibers.twisted = _parse_fibers(args.fibers)
    if args.seed is not None:
        config.fibers.seed = args.seed
    if args.assume_normal_lifts:
        config.assume_normal_lifts = True
    if args.report is not None:
        config.report_path = args.report
    if args.svg_dir is not None:
        config.svg_dir = args.svg_dir
    if args.pgm_dir is not None:
        config.pgm_dir = args.pgm_dir
    if args.log_level is not None:
        config.log_level = args.log_level
    if args.log_file is not None:
        config.log_file = args.log_file
    config.apply_threshold_overrides(args.threshold)

    issues = ConfigValidator.validate_run_config(config)
    if issues:
        raise ConfigError("; ".join(issues))
    return config


async def run(config: RunConfig) -> int:
    """Run the pipeline and write its artifacts; returns the exit status"""
    pipeline = LiftPipeline(config)
    result = await pipeline.run()
    report = pipeline.write_artifacts(result)
    if not config.report_path:
        sys.stdout.write(report)
    logger.info(f"Classification {result.verdict.classification.value}, exit status {result.exit_code}")
    return result.exit_code


async def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)

    if args.schema:
        sys.stdout.write(json.dumps(report_schema(), indent=2) + "\n")
        return 0

    try:
        Logger.setup_logging(args.log_level or "INFO")
        config = config_from_args(args)
        Logger.setup_logging(config.log_level, config.log_file)
        return await run(config)
    except Exception as e:
        return ErrorHandler.handle_run_error(e)


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
