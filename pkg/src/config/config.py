"""
Configuration management for calkin-lift
"""

import os
import yaml
from typing import Dict, Any, List, Optional
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path

from utils.errors import ConfigError


THREADS_ENV = "CALKIN_LIFT_THREADS"
SCALAR_KEYS = ('input_path', 'depth', 'assume_normal_lifts', 'report_path',
               'svg_dir', 'pgm_dir', 'log_level', 'log_file', 'threads')
SECTION_KEYS = ('raster', 'fibers', 'thresholds')


@dataclass
class RasterConfig:
    """Grid resolution for the log-cylinder and planar rasters"""
    theta_cells: int = 2048
    u_cells_per_unit: int = 1024
    planar_cells: int = 512


@dataclass
class FiberConfig:
    """Sampling of points of the inverse limit"""
    canonical: int = 16
    twisted: int = 16
    seed: int = 0
    depth: int = 32


@dataclass
class Thresholds:
    """Decision thresholds; every field can be overridden with --threshold key=value"""
    separation_cells: float = 3.0
    angular_margin_cells: float = 2.0
    feature_cells: int = 2
    necessary_fail: float = 0.1
    necessary_pass: float = 0.05
    necessary_tail_fraction: float = 0.25
    o2n_ratio: float = 2.0
    o2n_window: int = 4
    quasi_max_indices: int = 16
    fiber_tol: float = 1e-9
    raster_fiber_cells: int = 2
    refine_max_power: int = 18
    min_certified_levels: int = 2
    symmetry_tol: float = 1e-9


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return min(os.cpu_count() or 1, 8)


@dataclass
class RunConfig:
    """Main configuration class"""
    input_path: Optional[str] = None
    depth: int = 8
    raster: RasterConfig = field(default_factory=RasterConfig)
    fibers: FiberConfig = field(default_factory=FiberConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    assume_normal_lifts: bool = False
    report_path: Optional[str] = None
    svg_dir: Optional[str] = None
    pgm_dir: Optional[str] = None
    log_level: str = "INFO"
    log_file: Optional[str] = None
    threads: int = field(default_factory=default_threads)

    @classmethod
    def load(cls, config_path: str) -> 'RunConfig':
        """Load configuration from YAML file; a missing file yields the defaults"""
        config_file = Path(config_path)
        config = cls()
        if not config_file.exists():
            return config

        with open(config_file, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}

        unknown = set(data) - set(SCALAR_KEYS) - set(SECTION_KEYS)
        if unknown:
            raise ConfigError(f"Unknown keys in {config_file}: {sorted(unknown)}")

        for key in SCALAR_KEYS:
            if key in data:
                setattr(config, key, data[key])

        if 'raster' in data:
            config.raster = _build_section(RasterConfig, data['raster'], 'raster')
        if 'fibers' in data:
            config.fibers = _build_section(FiberConfig, data['fibers'], 'fibers')
        if 'thresholds' in data:
            config.thresholds = _build_section(Thresholds, data['thresholds'], 'thresholds')

        return config

    def save(self, config_path: str):
        """Save configuration to YAML file"""
        config_file = Path(config_path)
        config_file.parent.mkdir(parents=True, exist_ok=True)

        with open(config_file, 'w', encoding='utf-8') as f:
            yaml.dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def apply_threshold_overrides(self, overrides: List[str]):
        """Apply ``key=value`` overrides, coercing to the declared field type"""
        types = {f.name: f.type for f in fields(Thresholds)}
        for item in overrides:
            if '=' not in item:
                raise ConfigError(f"Threshold override must look like key=value, got {item!r}")
            key, raw = (part.strip() for part in item.split('=', 1))
            if key not in types:
                raise ConfigError(f"Unknown threshold: {key}")
            caster = int if types[key] in (int, 'int') else float
            try:
                setattr(self.thresholds, key, caster(raw))
            except ValueError:
                raise ConfigError(f"Threshold {key} expects {caster.__name__}, got {raw!r}")


def _build_section(cls, data: Dict[str, Any], name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown keys in '{name}' section: {sorted(unknown)}")
    return cls(**data)
