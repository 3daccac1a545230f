"""
Raster geometry engine

Occupancy grids over the log-cylinder (u = ln|z|, θ = arg z) and over planar
windows, with the antipodal map, distances, complement components and circle
sections. Rows sit at integer multiples of δ = 1/u_cells_per_unit and columns
at integer multiples of h = 2π/theta_cells, so squaring maps cell (k, j) to
cell (2k, 2j mod Θ).
"""

import math
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from config.config import RasterConfig
from spectrum.spectrum import LevelShape, SpectrumSpec, level_image, strip_bounds
from utils.errors import GeometryMismatchError, RasterAliasingError


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ROW_PADDING = 3
MARK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CylinderRaster:
    """Boolean occupancy over rows u = (row0 + k)·δ and columns θ = j·h"""
    grid: np.ndarray
    row0: int
    u_cells_per_unit: int
    theta_cells: int
    contains_zero: bool = False
    n: int = 0

    @property
    def delta(self) -> float:
        return 1.0 / self.u_cells_per_unit

    @property
    def h(self) -> float:
        return TWO_PI / self.theta_cells

    @property
    def u_min(self) -> float:
        return self.row0 * self.delta

    @property
    def u_max(self) -> float:
        return (self.row0 + self.grid.shape[0] - 1) * self.delta

    @property
    def cell_size(self) -> float:
        return max(self.delta, self.h)

    @property
    def cell_diagonal(self) -> float:
        return math.hypot(self.delta, self.h)

    @property
    def count(self) -> int:
        return int(self.grid.sum())

    @property
    def is_empty(self) -> bool:
        return not self.grid.any()

    @property
    def resolution(self) -> dict:
        return {"u_cells_per_unit": self.u_cells_per_unit, "theta_cells": self.theta_cells}

    def u_of_row(self, k: int) -> float:
        return (self.row0 + k) * self.delta

    def row_of(self, u: float) -> int:
        return int(round(u / self.delta)) - self.row0

    def same_geometry(self, other: 'CylinderRaster') -> bool:
        return (self.grid.shape == other.grid.shape and self.row0 == other.row0
                and self.u_cells_per_unit == other.u_cells_per_unit
                and self.theta_cells == other.theta_cells)

    def with_grid(self, grid: np.ndarray) -> 'CylinderRaster':
        return replace(self, grid=grid)


@dataclass(frozen=True, eq=False)
class PlanarRaster:
    """Boolean occupancy over the square window [-W, W]²; grid[iy, ix] with y increasing in iy"""
    grid: np.ndarray
    half_width: float

    @property
    def cells(self) -> int:
        return self.grid.shape[0]

    @property
    def cell(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def window(self) -> Tuple[float, float, float, float]:
        w = self.half_width
        return -w, w, -w, w

    def centre(self, iy: int, ix: int) -> complex:
        return complex(-self.half_width + (ix + 0.5) * self.cell, -self.half_width + (iy + 0.5) * self.cell)

    def to_pgm(self) -> bytes:
        """Binary P5 image, occupied cells black, top row = largest y"""
        header = f"P5\n{self.cells} {self.cells}\n255\n".encode('ascii')
        body = np.where(self.grid[::-1], 0, 255).astype(np.uint8)
        return header + body.tobytes()

    def write_pgm(self, path: str):
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(self.to_pgm())


@dataclass(frozen=True)
class ComplementComponents:
    count: int
    samples: List[complex]
    origin_enclosed: bool
    planar: PlanarRaster


def level_u_range(spec: SpectrumSpec, n: int) -> Tuple[float, float]:
    """u-extent covered by the raster of level n"""
    bounds = strip_bounds(spec)
    if math.isfinite(bounds.eta):
        lo = bounds.eta
    else:
        finite = [v for p in spec.primitives for v in p.re_range() if math.isfinite(v)]
        lo = min(finite) - 1.0
    scale = math.ldexp(1.0, -n)
    return scale * lo, scale * bounds.zeta


def _check_aliasing(shape: LevelShape, h: float):
    for u_lo, u_hi, arcs in shape.pieces:
        if arcs.is_discrete and arcs.fold * len(arcs.base) > 1:
            spacing = arcs.min_spacing()
            if spacing < 2.0 * h:
                raise RasterAliasingError(
                    f"level {shape.n}: lattice points {spacing:.3g} rad apart would share "
                    f"cells of width {h:.3g}; increase theta_cells"
                )


def rasterize_shape(shape: LevelShape, u_range: Tuple[float, float], resolution: RasterConfig) -> CylinderRaster:
    """Mark every cell whose centre is within half a cell of the set along both axes"""
    delta = 1.0 / resolution.u_cells_per_unit
    theta_cells = resolution.theta_cells
    h = TWO_PI / theta_cells
    _check_aliasing(shape, h)

    row0 = math.floor(u_range[0] / delta) - ROW_PADDING
    top = math.ceil(u_range[1] / delta) + ROW_PADDING
    grid = np.zeros((top - row0 + 1, theta_cells), dtype=bool)

    for u_lo, u_hi, arcs in shape.pieces:
        columns = arcs.mark_columns(theta_cells)
        if not columns.any():
            continue
        if u_lo == -math.inf:
            k_lo = 0
        else:
            k_lo = max(0, math.ceil((u_lo - delta / 2 - MARK_TOL) / delta) - row0)
        k_hi = min(grid.shape[0] - 1, math.floor((u_hi + delta / 2 + MARK_TOL) / delta) - row0)
        if k_lo <= k_hi:
            grid[k_lo:k_hi + 1] |= columns

    return CylinderRaster(
        grid=grid,
        row0=row0,
        u_cells_per_unit=resolution.u_cells_per_unit,
        theta_cells=theta_cells,
        contains_zero=shape.contains_zero,
        n=shape.n,
    )


def rasterize_level(spec: SpectrumSpec, n: int, resolution: RasterConfig) -> CylinderRaster:
    """Raster of Ω_n = cl(exp(2⁻ⁿZ)) in log-cylinder coordinates"""
    if resolution.theta_cells <= 0 or resolution.u_cells_per_unit <= 0:
        raise ValueError("resolution must be positive")
    raster = rasterize_shape(level_image(spec, n), level_u_range(spec, n), resolution)
    logger.debug(f"Rasterized level {n}: {raster.grid.shape} grid, {raster.count} cells occupied")
    return raster


def antipodal_set(r: CylinderRaster) -> CylinderRaster:
    """Cells (u, θ) with (u, θ + π) also occupied"""
    return r.with_grid(r.grid & np.roll(r.grid, r.theta_cells // 2, axis=1))


def separation_distance(a: CylinderRaster, b: CylinderRaster) -> float:
    """Minimum cylinder distance between occupied cell centres of a and b"""
    if not a.same_geometry(b):
        raise GeometryMismatchError("rasters have different grids")
    if a.is_empty or b.is_empty:
        return math.inf

    rows = np.flatnonzero(a.grid.any(axis=1) | b.grid.any(axis=1))
    lo, hi = rows[0], rows[-1] + 1
    target = b.grid[lo:hi]
    tiled = np.concatenate([target, target, target], axis=1)
    distance = ndimage.distance_transform_edt(~tiled, sampling=(a.delta, a.h))
    theta_cells = a.theta_cells
    middle = distance[:, theta_cells:2 * theta_cells]
    return float(middle[a.grid[lo:hi]].min())


def to_planar(r: CylinderRaster, planar_cells: int) -> PlanarRaster:
    """Planar occupancy: pull-back of cell centres united with the forward image of occupied cells"""
    half_width = 1.25 * math.exp(r.u_max)
    cell = 2.0 * half_width / planar_cells
    centres = -half_width + (np.arange(planar_cells) + 0.5) * cell
    x, y = np.meshgrid(centres, centres)
    rho = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), TWO_PI)

    rows = np.rint(np.log(rho) / r.delta).astype(np.int64) - r.row0
    cols = np.rint(phi / r.h).astype(np.int64) % r.theta_cells
    occupied = np.zeros((planar_cells, planar_cells), dtype=bool)
    inside = (rows >= 0) & (rows < r.grid.shape[0])
    occupied[inside] = r.grid[rows[inside], cols[inside]]
    if r.contains_zero:
        below = rows < 0
        occupied[below] = r.grid[0, cols[below]]

    ks, js = np.nonzero(r.grid)
    radius = np.exp((r.row0 + ks) * r.delta)
    angle = js * r.h
    ix = np.clip(np.floor((radius * np.cos(angle) + half_width) / cell).astype(np.int64), 0, planar_cells - 1)
    iy = np.clip(np.floor((radius * np.sin(angle) + half_width) / cell).astype(np.int64), 0, planar_cells - 1)
    occupied[iy, ix] = True

    if r.contains_zero:
        for iy0, ix0 in _origin_cells(planar_cells):
            occupied[iy0, ix0] = True

    return PlanarRaster(grid=occupied, half_width=half_width)


def _origin_cells(planar_cells: int) -> List[Tuple[int, int]]:
    mid = planar_cells // 2
    if planar_cells % 2:
        return [(mid, mid)]
    return [(mid - 1, mid - 1), (mid - 1, mid), (mid, mid - 1), (mid, mid)]


def bounded_complement_components(r: CylinderRaster, planar_cells: int = 512) -> ComplementComponents:
    """Bounded components of the planar complement, one interior sample each"""
    planar = to_planar(r, planar_cells)
    free = ~planar.grid
    labels, total = ndimage.label(free, structure=ndimage.generate_binary_structure(2, 1))

    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    bounded = [k for k in range(1, total + 1) if k not in border]
    if not bounded:
        return ComplementComponents(count=0, samples=[], origin_enclosed=False, planar=planar)

    clearance = ndimage.distance_transform_edt(free)
    origin_label = None
    if not r.contains_zero:
        around = {labels[iy, ix] for iy, ix in _origin_cells(planar_cells)}
        enclosing = [k for k in bounded if k in around]
        origin_label = enclosing[0] if enclosing else None

    samples = []
    for k in bounded:
        if k == origin_label:
            continue
        masked = np.where(labels == k, clearance, -1.0)
        iy, ix = np.unravel_index(int(np.argmax(masked)), masked.shape)
        samples.append(planar.centre(iy, ix))
    if origin_label is not None:
        samples.insert(0, 0j)

    return ComplementComponents(
        count=len(bounded),
        samples=samples,
        origin_enclosed=origin_label is not None,
        planar=planar,
    )


def circle_section(r: CylinderRaster, u: float) -> List[Tuple[float, float]]:
    """Maximal occupied arcs of the row at u as (θ_lo, θ_hi), θ_hi − θ_lo being the arc length"""
    k = r.row_of(u)
    if k < 0 or k >= r.grid.shape[0]:
        return []
    row = r.grid[k]
    if not row.any():
        return []
    if row.all():
        return [(0.0, TWO_PI)]

    offset = int(np.argmin(row))
    rolled = np.roll(row, -offset).astype(np.int8)
    edges = np.diff(np.concatenate([[0], rolled, [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    arcs = []
    for s, e in zip(starts, ends):
        j = (s + offset) % r.theta_cells
        arcs.append((j * r.h, (j + (e - s)) * r.h))
    return sorted(arcs)


def isolated_cells(r: CylinderRaster) -> np.ndarray:
    """Occupied cells without an occupied 8-neighbour (θ wraps, u does not)"""
    grid = r.grid
    padded = np.zeros((grid.shape[0] + 2, grid.shape[1]), dtype=np.int16)
    padded[1:-1] = grid
    neighbours = np.zeros_like(padded)
    for dk in (-1, 0, 1):
        shifted_rows = np.roll(padded, dk, axis=0)
        for dj in (-1, 0, 1):
            if dk == 0 and dj == 0:
                continue
            neighbours += np.roll(shifted_rows, dj, axis=1)
    return grid & (neighbours[1:-1] == 0)


def dilate(r: CylinderRaster) -> np.ndarray:
    """One-cell (8-neighbourhood) dilation with θ wrap"""
    grid = r.grid
    tiled = np.concatenate([grid[:, -1:], grid, grid[:, :1]], axis=1)
    grown = ndimage.binary_dilation(tiled, structure=np.ones((3, 3), dtype=bool))
    return grown[:, 1:-1]
