#!/usr/bin/env python3
"""
Tests for the raster geometry engine
"""

import math
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from config.config import RasterConfig
from raster.raster import (
    CylinderRaster, antipodal_set, bounded_complement_components, circle_section,
    dilate, isolated_cells, level_u_range, rasterize_level, separation_distance, to_planar,
)
from spectrum.document import parse_spec
from utils.errors import GeometryMismatchError, RasterAliasingError


SMALL = RasterConfig(theta_cells=256, u_cells_per_unit=64, planar_cells=64)

IMAGINARY_AXIS = '[[primitive]]\nkind = "vline"\nre = 0.0\n'
LATTICE = '[[primitive]]\nkind = "vlattice"\nre = 0.0\nim_base = 0.0\nim_step = 6.283185307179586\n'
RECT = ('[[primitive]]\nkind = "rect"\nre_lo = -1.0\nre_hi = 0.0\n'
        'im_lo = -3.141592653589793\nim_hi = 3.141592653589793\n')


def blank(rows=8, theta_cells=16, u_cells=4, row0=0):
    return CylinderRaster(
        grid=np.zeros((rows, theta_cells), dtype=bool),
        row0=row0, u_cells_per_unit=u_cells, theta_cells=theta_cells,
    )


def test_level_u_range():
    assert level_u_range(parse_spec(IMAGINARY_AXIS), 3) == (0.0, 0.0)
    assert level_u_range(parse_spec(RECT), 2) == (-0.25, 0.0)


def test_full_circle_row():
    r = rasterize_level(parse_spec(IMAGINARY_AXIS), 0, SMALL)
    assert r.grid[r.row_of(0.0)].all()
    assert r.count == SMALL.theta_cells
    assert circle_section(r, 0.0) == [(0.0, 2 * math.pi)]
    assert circle_section(r, 1.0) == []
    assert antipodal_set(r).count == r.count


def test_rectangle_rows_cover_the_strip():
    r = rasterize_level(parse_spec(RECT), 1, SMALL)
    rows = np.flatnonzero(r.grid.any(axis=1))
    assert r.u_of_row(int(rows[0])) == pytest.approx(-0.5, abs=r.delta)
    assert r.u_of_row(int(rows[-1])) == pytest.approx(0.0, abs=r.delta)
    # θ ∈ [−π/2, π/2] at level 1
    arcs = circle_section(r, -0.25)
    assert len(arcs) == 1
    lo, hi = arcs[0]
    assert hi - lo == pytest.approx(math.pi, abs=2 * r.h)


def test_lattice_aliasing_is_reported():
    with pytest.raises(RasterAliasingError):
        rasterize_level(parse_spec(LATTICE), 8, SMALL)


def test_antipodal_set_of_two_cells():
    r = blank()
    grid = r.grid.copy()
    grid[2, 1] = grid[2, 9] = True
    grid[5, 3] = True
    anti = antipodal_set(r.with_grid(grid))
    assert set(zip(*np.nonzero(anti.grid))) == {(2, 1), (2, 9)}


def test_separation_distance_wraps_in_theta():
    r = blank()
    a = r.grid.copy()
    b = r.grid.copy()
    a[3, 0] = True
    b[3, 15] = True
    distance = separation_distance(r.with_grid(a), r.with_grid(b))
    assert distance == pytest.approx(r.h)

    b[:] = False
    b[6, 0] = True
    assert separation_distance(r.with_grid(a), r.with_grid(b)) == pytest.approx(3 * r.delta)


def test_separation_distance_empty_and_mismatch():
    r = blank()
    assert separation_distance(r, r) == math.inf
    with pytest.raises(GeometryMismatchError):
        separation_distance(r, blank(theta_cells=32))


def test_isolated_cells_and_dilation():
    r = blank()
    grid = r.grid.copy()
    grid[0, 0] = True
    grid[4, 7] = grid[4, 8] = True
    grid[6, 15] = True
    grid[7, 0] = True
    lonely = isolated_cells(r.with_grid(grid))
    assert set(zip(*np.nonzero(lonely))) == {(0, 0)}

    grown = dilate(r.with_grid(grid))
    assert grown[1, 15] and grown[1, 1]
    assert not grown[2, 0]


def test_circle_encloses_the_origin():
    r = rasterize_level(parse_spec(IMAGINARY_AXIS), 0, SMALL)
    components = bounded_complement_components(r, SMALL.planar_cells)
    assert components.count == 1
    assert components.origin_enclosed
    assert components.samples == [0j]


def test_annulus_with_zero_has_one_hole():
    spec = parse_spec(
        '[[primitive]]\nkind = "hsegment"\nre_lo = -inf\nre_hi = -2.0\nim = 0.0\n'
        '[[primitive]]\nkind = "vline"\nre = 0.0\n'
    )
    r = rasterize_level(spec, 0, SMALL)
    components = bounded_complement_components(r, SMALL.planar_cells)
    # the open disc minus the segment from 0 to e^{-2}
    assert components.count == 1
    assert not components.origin_enclosed
    sample = components.samples[0]
    assert 0.0 < abs(sample) < 1.0


def test_planar_export():
    r = rasterize_level(parse_spec(IMAGINARY_AXIS), 0, SMALL)
    planar = to_planar(r, 32)
    assert planar.cells == 32
    assert planar.half_width == pytest.approx(1.25 * math.exp(r.u_max))
    data = planar.to_pgm()
    assert data.startswith(b"P5\n32 32\n255\n")
    assert len(data) == len(b"P5\n32 32\n255\n") + 32 * 32
    # the centre of the window is free, the circle is not
    assert not planar.grid[16, 16]
    assert planar.grid.any()


def full_band(re_lo, re_hi):
    return (f'[[primitive]]\nkind = "rect"\nre_lo = {re_lo}\nre_hi = {re_hi}\n'
            'im_lo = -inf\nim_hi = inf\n')


THREE_ANNULI = full_band(-0.1, 0.0) + full_band(-0.6, -0.5) + full_band(-1.2, -1.1)
DISC = full_band('-inf', 0.0)
FINE = RasterConfig(theta_cells=512, u_cells_per_unit=128, planar_cells=256)
FINER = RasterConfig(theta_cells=1024, u_cells_per_unit=256, planar_cells=512)


def random_raster(seed, density=0.3):
    rng = np.random.default_rng(seed)
    r = blank(rows=10, theta_cells=32)
    return r.with_grid(rng.random(r.grid.shape) < density)


def test_three_annuli_have_three_holes():
    r = rasterize_level(parse_spec(THREE_ANNULI), 0, FINE)
    components = bounded_complement_components(r, FINE.planar_cells)
    assert components.count == 3
    assert components.origin_enclosed
    assert components.samples[0] == 0j
    radii = sorted(abs(s) for s in components.samples[1:])
    # gaps between the rings: e^{-1.1} < |z| < e^{-0.6} and e^{-0.5} < |z| < e^{-0.1}
    assert math.exp(-1.1) < radii[0] < math.exp(-0.6)
    assert math.exp(-0.5) < radii[1] < math.exp(-0.1)


def test_closed_disc_has_no_holes():
    r = rasterize_level(parse_spec(DISC), 0, FINE)
    assert r.contains_zero
    components = bounded_complement_components(r, FINE.planar_cells)
    assert components.count == 0
    assert components.samples == []
    assert not components.origin_enclosed


@pytest.mark.parametrize("text, expected", [
    (IMAGINARY_AXIS, 1),
    (THREE_ANNULI, 3),
    (DISC, 0),
])
def test_hole_count_survives_doubling(text, expected):
    spec = parse_spec(text)
    for resolution in (FINE, FINER):
        r = rasterize_level(spec, 0, resolution)
        assert bounded_complement_components(r, resolution.planar_cells).count == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_antipodal_set_properties(seed):
    r = random_raster(seed)
    anti = antipodal_set(r)
    assert not (anti.grid & ~r.grid).any()
    assert np.array_equal(antipodal_set(anti).grid, anti.grid)
    assert np.array_equal(np.roll(anti.grid, r.theta_cells // 2, axis=1), anti.grid)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_circle_sections_are_disjoint_arcs(seed):
    r = random_raster(seed, density=0.5)
    for k in range(r.grid.shape[0]):
        arcs = circle_section(r, r.u_of_row(k))
        assert sum(hi - lo for lo, hi in arcs) <= 2 * math.pi + 1e-12
        if len(arcs) > 1:
            for (_, hi), (lo, _) in zip(arcs, arcs[1:]):
                assert hi < lo
            assert arcs[-1][1] < arcs[0][0] + 2 * math.pi


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_separation_distance_is_symmetric(seed):
    a = random_raster(seed, density=0.05)
    b = random_raster(seed + 1, density=0.05)
    assert separation_distance(a, b) == pytest.approx(separation_distance(b, a))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 15)), min_size=3, max_size=3))
def test_separation_distance_triangle_inequality(cells):
    r = blank()
    points = []
    for k, j in cells:
        grid = r.grid.copy()
        grid[k, j] = True
        points.append(r.with_grid(grid))
    a, b, c = points
    assert separation_distance(a, c) <= separation_distance(a, b) + separation_distance(b, c) + 1e-9
