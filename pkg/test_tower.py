#!/usr/bin/env python3
"""
Tests for the squaring tower, fibers and the perfectness classifier
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
from spectrum.document import parse_spec
from tower.tower import (
    Perfectness, assemble_tower, build_level, build_tower, canonical_fiber,
    epsilon_sequences, is_delta_perfect, sample_fibers, twisted_fiber,
)
from utils.errors import TowerConsistencyError


SMALL = RasterConfig(theta_cells=256, u_cells_per_unit=64, planar_cells=64)

IMAGINARY_AXIS = '[[primitive]]\nkind = "vline"\nre = 0.0\n'
LATTICE = '[[primitive]]\nkind = "vlattice"\nre = 0.0\nim_base = 0.0\nim_step = 6.283185307179586\n'
RECT = ('[[primitive]]\nkind = "rect"\nre_lo = -1.0\nre_hi = 0.0\n'
        'im_lo = -3.141592653589793\nim_hi = 3.141592653589793\n')
SINGLE_POINT = '[[primitive]]\nkind = "point"\nre = -1.0\nim = 0.0\n'


def test_roots_of_unity_tower_is_exact():
    tower = build_tower(parse_spec(LATTICE), 3, SMALL)
    assert tower.kinds == ["finite"] * 4
    assert [level.point_count for level in tower.levels] == [1, 2, 4, 8]
    assert [level.ext_rank for level in tower.levels] == [0, 0, 0, 0]
    assert all(level.omega is None for level in tower.levels)


def test_imaginary_axis_tower_has_one_hole_per_level():
    tower = build_tower(parse_spec(IMAGINARY_AXIS), 4, SMALL)
    assert tower.kinds == ["radii"] * 5
    assert [level.ext_rank for level in tower.levels] == [1] * 5
    assert all(level.component_samples == (0j,) for level in tower.levels)
    assert all(level.norm_bound == 1.0 for level in tower.levels)


def test_rectangle_tower_levels():
    tower = build_tower(parse_spec(RECT), 3, SMALL)
    assert tower.kinds == ["region"] * 4
    # Ω_0 is the closed annulus e^{-1} ≤ |z| ≤ 1, later levels are sectors
    assert tower.levels[0].ext_rank == 1
    assert tower.levels[0].origin_enclosed
    assert [level.ext_rank for level in tower.levels[1:]] == [0, 0, 0]


def test_shape_beyond_depth():
    tower = build_tower(parse_spec(LATTICE), 2, SMALL)
    assert tower.shape(10).finite_points().size == 1024


def test_inconsistent_levels_are_rejected():
    lattice = parse_spec(LATTICE)
    point = parse_spec('[[primitive]]\nkind = "point"\nre = 0.0\nim = 1.0\n')
    levels = [build_level(lattice, 0, SMALL), build_level(point, 1, SMALL)]
    with pytest.raises(TowerConsistencyError):
        assemble_tower(lattice, levels, SMALL)


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        build_tower(parse_spec(LATTICE), 0, SMALL)


# Fibers

@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-4.0, max_value=0.0), st.floats(min_value=-50.0, max_value=50.0))
def test_canonical_fibers_are_compatible(re, im):
    fiber = canonical_fiber(complex(re, im), 24)
    assert fiber.depth == 24
    assert fiber.squaring_defect() < 1e-9
    assert fiber.distances_to_one()[-1] < 1e-5 * (1 + abs(complex(re, im)))


def test_alternating_fiber_stays_away_from_one():
    tower = build_tower(parse_spec(IMAGINARY_AXIS), 2, SMALL)
    eps = tuple(1 - (k % 2) for k in range(32))
    fiber = twisted_fiber(tower, 0j, eps, 32, "alternating")
    assert fiber.flips == ()
    assert fiber.squaring_defect() < 1e-9
    tail = fiber.tail(0.5)
    assert tail.min() == pytest.approx(math.sqrt(3.0), abs=1e-3)


def test_twisted_fiber_flips_into_sectors():
    tower = build_tower(parse_spec(RECT), 3, SMALL)
    eps = tuple([1] * 16)
    fiber = twisted_fiber(tower, complex(-0.5, 3.0), eps, 16)
    assert len(fiber.flips) > 0
    assert fiber.distances_to_one()[-1] < 1e-3


def test_epsilon_sequences_are_seeded():
    first = epsilon_sequences(12, np.random.default_rng(7))
    second = epsilon_sequences(12, np.random.default_rng(7))
    assert first == second
    assert [name for name, _ in first[:2]] == ["alternating", "ones"]
    assert len(first) == 10
    assert first[0][1][:4] == (1, 0, 1, 0)


def test_sample_fibers_counts_and_determinism():
    tower = build_tower(parse_spec(IMAGINARY_AXIS), 2, SMALL)
    fibers = sample_fibers(tower, 4, 6, seed=3, depth=20)
    assert sum(f.provenance == "canonical" for f in fibers) == 4
    assert sum(f.provenance == "twisted" for f in fibers) == 6
    assert all(f.depth == 20 for f in fibers)
    again = sample_fibers(tower, 4, 6, seed=3, depth=20)
    assert all(np.array_equal(a.coords, b.coords) for a, b in zip(fibers, again))
    # the first twisted base is the one nearest 1
    assert fibers[4].base == 0j


# Perfectness

def test_cantor_tower_is_perfect():
    status, _ = is_delta_perfect(build_tower(parse_spec(LATTICE), 4, SMALL))
    assert status == Perfectness.YES


def test_single_point_tower_is_not_perfect():
    status, reason = is_delta_perfect(build_tower(parse_spec(SINGLE_POINT), 4, SMALL))
    assert status == Perfectness.NO
    assert "branching stops" in reason


def test_circle_and_region_towers_are_perfect():
    assert is_delta_perfect(build_tower(parse_spec(IMAGINARY_AXIS), 3, SMALL))[0] == Perfectness.YES
    assert is_delta_perfect(build_tower(parse_spec(RECT), 3, SMALL))[0] == Perfectness.YES


def test_circle_with_isolated_point_is_unknown():
    spec = parse_spec(IMAGINARY_AXIS + '[[primitive]]\nkind = "point"\nre = -1.0\nim = 0.0\n')
    status, reason = is_delta_perfect(build_tower(spec, 2, SMALL))
    assert status == Perfectness.UNKNOWN
    assert "isolated" in reason
