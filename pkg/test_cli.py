#!/usr/bin/env python3
"""
Tests for the command-line entry point
"""

import asyncio
import json
import sys
import os
from pathlib import Path

import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from config.config import FiberConfig, RasterConfig, RunConfig
from main import config_from_args, build_parser, main
from utils.errors import ConfigError


SPECS = Path(__file__).parent / "specs"


@pytest.fixture
def config_file(tmp_path):
    config = RunConfig(
        depth=4,
        raster=RasterConfig(theta_cells=256, u_cells_per_unit=64, planar_cells=64),
        fibers=FiberConfig(canonical=4, twisted=4),
        threads=2,
    )
    path = tmp_path / "config.yaml"
    config.save(str(path))
    return str(path)


def run_cli(*argv):
    return asyncio.run(main(list(argv)))


def test_roots_of_unity_exit_zero(config_file, capsys):
    code = run_cli("--input", str(SPECS / "roots_of_unity.toml"), "--config", config_file)
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"]["homotopy_class"] == "finite-sets"
    assert report["meta"]["depth"] == 4


def test_shift_exits_with_obstruction(config_file, tmp_path):
    target = tmp_path / "report.json"
    code = run_cli("--input", str(SPECS / "shift_obstruction.toml"), "--config", config_file,
                   "--report", str(target))
    assert code == 2
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["verdict"]["classification"] == "OBSTRUCTED_INDEX"


def test_malformed_document_exits_one(config_file, tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text('[[primitive]]\nkind = "vline"\nre = \n', encoding="utf-8")
    assert run_cli("--input", str(broken), "--config", config_file) == 1


def test_missing_document_exits_one(config_file, tmp_path):
    assert run_cli("--input", str(tmp_path / "absent.toml"), "--config", config_file) == 1


@pytest.mark.parametrize("override", ["no_such_key=1", "separation_cells", "o2n_window=two"])
def test_bad_threshold_exits_one(config_file, override):
    code = run_cli("--input", str(SPECS / "roots_of_unity.toml"), "--config", config_file,
                   "--threshold", override)
    assert code == 1


def test_schema(capsys):
    assert run_cli("--schema") == 0
    schema = json.loads(capsys.readouterr().out)
    assert set(schema["required"]) == {
        "meta", "spec_echo", "tower_summary", "levels", "kernel", "continuity", "verdict",
    }


def test_command_line_overrides(config_file):
    args = build_parser().parse_args([
        "--config", config_file, "--depth", "6", "--theta-cells", "512", "--fibers", "3,5",
        "--seed", "7", "--assume-normal-lifts", "--threshold", "o2n_window=3",
    ])
    config = config_from_args(args)
    assert config.depth == 6
    assert config.raster.theta_cells == 512
    assert config.raster.u_cells_per_unit == 64
    assert (config.fibers.canonical, config.fibers.twisted, config.fibers.seed) == (3, 5, 7)
    assert config.assume_normal_lifts
    assert config.thresholds.o2n_window == 3


def test_invalid_resolution_exits_one(config_file):
    code = run_cli("--input", str(SPECS / "roots_of_unity.toml"), "--config", config_file,
                   "--theta-cells", "300")
    assert code == 1


def test_failed_plots_leave_no_report(config_file, tmp_path):
    blocker = tmp_path / "svg"
    blocker.write_text("a file where the plot directory should go", encoding="utf-8")
    target = tmp_path / "report.json"
    code = run_cli("--input", str(SPECS / "imaginary_axis.toml"), "--config", config_file,
                   "--report", str(target), "--svg-dir", str(blocker))
    assert code == 1
    assert not target.exists()
    assert not (tmp_path / "report.json.partial").exists()


def test_unknown_log_level_exits_one(config_file):
    code = run_cli("--input", str(SPECS / "roots_of_unity.toml"), "--config", config_file,
                   "--log-level", "BOGUS")
    assert code == 1


def test_unknown_top_level_config_key(tmp_path):
    path = tmp_path / "typo.yaml"
    path.write_text("dept: 4\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(str(path))
    assert run_cli("--input", str(SPECS / "roots_of_unity.toml"), "--config", str(path)) == 1
