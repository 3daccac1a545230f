"""
SVG plots of tower levels

Each level gets one figure: the log-cylinder raster with the antipodal set
overlaid, and the planar view on the fixed window [-1.5e^ζ, 1.5e^ζ]² with the
bounded-component samples marked.
"""

import math
import logging
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from raster.raster import to_planar
from tower.tower import Level, Tower


logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "calkin-lift"

_CYLINDER_COLORS = ListedColormap(["white", "#4c72b0", "#c44e52"])


def _cylinder_panel(ax, level: Level):
    ax.set_title(f"Ω_{level.n} in (θ, u)")
    ax.set_xlabel("θ")
    ax.set_ylabel("u = ln|z|")
    if level.omega is None:
        points = level.finite_points
        ax.scatter(np.mod(np.angle(points), 2 * math.pi), np.log(np.abs(points)), s=6, color="#4c72b0")
        ax.set_xlim(0.0, 2 * math.pi)
        return
    omega = level.omega
    image = omega.grid.astype(np.int8) + level.antipodal.grid.astype(np.int8)
    ax.imshow(
        image,
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        cmap=_CYLINDER_COLORS,
        vmin=0,
        vmax=2,
        extent=(-omega.h / 2, 2 * math.pi - omega.h / 2,
                omega.u_min - omega.delta / 2, omega.u_max + omega.delta / 2),
    )


def _planar_panel(ax, level: Level, half_width: float, planar_cells: int):
    ax.set_title(f"Ω_{level.n} in the plane")
    ax.set_aspect("equal")
    if level.finite_points is not None:
        points = level.finite_points
        ax.scatter(points.real, points.imag, s=6, color="#4c72b0")
    else:
        planar = to_planar(level.omega, planar_cells)
        antipodal = to_planar(level.antipodal, planar_cells)
        image = planar.grid.astype(np.int8) + (antipodal.grid & planar.grid).astype(np.int8)
        ax.imshow(image, origin="lower", interpolation="nearest", cmap=_CYLINDER_COLORS,
                  vmin=0, vmax=2, extent=planar.window)
    samples = np.asarray(level.component_samples, dtype=complex)
    if samples.size:
        ax.scatter(samples.real, samples.imag, marker="x", s=30, color="black")
    ax.set_xlim(-half_width, half_width)
    ax.set_ylim(-half_width, half_width)


def plot_level(level: Level, zeta: float, path: Path, planar_cells: int = 512):
    figure, axes = plt.subplots(1, 2, figsize=(10, 4.5))
    _cylinder_panel(axes[0], level)
    _planar_panel(axes[1], level, 1.5 * math.exp(zeta), planar_cells)
    figure.tight_layout()
    figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)


def write_level_plots(tower: Tower, svg_dir: str) -> List[Path]:
    """One SVG per level, named level_<n>.svg"""
    directory = Path(svg_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for level in tower.levels:
        path = directory / f"level_{level.n}.svg"
        plot_level(level, tower.bounds.zeta, path, tower.resolution.planar_cells)
        written.append(path)
    logger.info(f"Wrote {len(written)} level plots to {directory}")
    return written
