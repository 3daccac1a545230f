#!/usr/bin/env python3
"""
Tests for spectrum documents, arc sets and exact level images
"""

import math
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from spectrum.arcs import ArcSet, periodic_image
from spectrum.document import parse_document, parse_spec, serialize_spec
from spectrum.spectrum import (
    SpectrumSpec, empty_antipodal_from, im_bound, level_image, re_projection_kind,
    sample_abscissae, section_at, strip_bounds,
)
from utils.errors import SpecSemanticError, SpecSyntaxError


SPECS = os.path.join(os.path.dirname(__file__), 'specs')


def load(name):
    with open(os.path.join(SPECS, f"{name}.toml"), encoding="utf-8") as f:
        return parse_document(f.read())


# Documents

def test_bundled_documents_parse():
    for name in ("roots_of_unity", "imaginary_axis", "strip_rectangle",
                 "symmetric_bands", "shift_obstruction", "half_line_rect"):
        document = load(name)
        assert document.spec.name == name
        assert document.spec.primitives


def test_document_models_and_probes():
    document = load("imaginary_axis")
    assert [m.kind for m in document.models] == ["multiplication"]
    assert document.probes[0].L == "n"
    assert document.probes[0].epsilon == 0.5

    shift = load("shift_obstruction")
    assert shift.models[0].coefficients() == [0j, 1 + 0j]


def test_syntax_error_carries_position():
    with pytest.raises(SpecSyntaxError) as info:
        parse_document('name = "broken"\n[[primitive]\nkind = "vline"\n')
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    '[[primitive]]\nkind = "hexagon"\n',
    '[[primitive]]\nkind = "rect"\nre_lo = 0.0\nre_hi = -1.0\nim_lo = 0.0\nim_hi = 1.0\n',
    '[[primitive]]\nkind = "vlattice"\nre = 0.0\nim_base = 0.0\nim_step = -1.0\n',
    '[[primitive]]\nkind = "vline"\nre = inf\n',
    'name = "empty"\n',
    '[[primitive]]\nkind = "vline"\nre = 0.0\n[extra]\nkey = 1\n',
])
def test_semantic_errors(text):
    with pytest.raises(SpecSemanticError):
        parse_document(text)


def test_model_declarations_are_checked():
    text = '[[primitive]]\nkind = "vline"\nre = 0.0\n[[model]]\nkind = "toeplitz"\n'
    with pytest.raises(SpecSemanticError):
        parse_document(text)


def test_serialize_round_trip_with_infinite_bounds():
    spec = load("half_line_rect").spec
    assert parse_spec(serialize_spec(spec)) == spec
    bands = load("symmetric_bands").spec
    assert parse_spec(serialize_spec(bands)) == bands


# Exact geometry

def test_strip_bounds_and_im_bound():
    spec = load("strip_rectangle").spec
    bounds = strip_bounds(spec)
    assert (bounds.zeta, bounds.eta) == (0.0, -1.0)
    assert im_bound(spec) == pytest.approx(math.pi)
    assert empty_antipodal_from(math.pi) == 2
    assert empty_antipodal_from(math.inf) is None


POOL = parse_spec(
    '[[primitive]]\nkind = "point"\nre = 0.5\nim = 1.0\n'
    '[[primitive]]\nkind = "vline"\nre = -2.0\n'
    '[[primitive]]\nkind = "rect"\nre_lo = -1.0\nre_hi = 0.0\nim_lo = 0.0\nim_hi = 1.0\n'
    '[[primitive]]\nkind = "hsegment"\nre_lo = -inf\nre_hi = -3.0\nim = 0.0\n'
    '[[primitive]]\nkind = "vsegment"\nre = 1.5\nim_lo = -1.0\nim_hi = 1.0\n'
).primitives


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, len(POOL) - 1), min_size=1, unique=True),
       st.integers(0, len(POOL) - 1))
def test_strip_bounds_widen_with_more_primitives(chosen, extra):
    smaller = strip_bounds(SpectrumSpec(primitives=tuple(POOL[k] for k in chosen)))
    larger = strip_bounds(SpectrumSpec(primitives=tuple(POOL[k] for k in chosen + [extra])))
    assert larger.zeta >= smaller.zeta
    assert larger.eta <= smaller.eta


def test_section_kinds():
    assert section_at(load("imaginary_axis").spec, 0.0).kind == "full_line"
    assert section_at(load("imaginary_axis").spec, -1.0).kind == "empty"
    assert section_at(load("roots_of_unity").spec, 0.0).kind == "lattice"
    assert section_at(load("half_line_rect").spec, -0.5).kind == "half_line"
    assert section_at(load("symmetric_bands").spec, -1.0).kind == "periodic"


def test_lattice_section_membership():
    section = section_at(load("roots_of_unity").spec, 0.0)
    assert section.contains(4 * math.pi)
    assert not section.contains(math.pi)


def test_re_projection_kinds():
    assert re_projection_kind(load("symmetric_bands").spec) == "finite"
    assert re_projection_kind(load("strip_rectangle").spec) == "interval"
    assert sample_abscissae(load("strip_rectangle").spec) == [-1.0, -0.5, 0.0]


def test_roots_of_unity_levels():
    spec = load("roots_of_unity").spec
    for n in range(6):
        points = level_image(spec, n).finite_points()
        assert points.size == 2 ** n
        assert np.allclose(points ** (2 ** n), 1.0)

    angles = np.mod(np.angle(level_image(spec, 2).finite_points()), 2 * math.pi)
    assert np.allclose(angles, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])


def test_imaginary_axis_levels_are_the_circle():
    spec = load("imaginary_axis").spec
    for n in (0, 3, 8):
        shape = level_image(spec, n)
        assert shape.radii() == [0.0]
        assert shape.section(0.0).is_full
        assert shape.finite_points() is None


def test_symmetric_band_sections():
    shape = level_image(load("symmetric_bands").spec, 0)
    arcs = shape.section(0.0)
    assert arcs.component_lengths() == pytest.approx([math.pi / 2, math.pi / 2])
    assert arcs.is_symmetric()
    assert shape.radii() == [-1.0, 0.0]


def test_max_abs_one_minus_closed_form():
    spec = load("strip_rectangle").spec
    for n in (5, 6, 7, 8):
        expected = abs(1 - np.exp(-math.ldexp(1.0, -n) * (1 + 1j * math.pi)))
        assert level_image(spec, n).max_abs_one_minus() == pytest.approx(expected, rel=1e-9)


# Arc sets

def test_periodic_image_irrational_ratio_is_full():
    assert periodic_image([(0.0, 0.0)], 1.0, 0).is_full


def test_periodic_image_fold():
    arcs = periodic_image([(0.0, 0.0)], 2 * math.pi, 3)
    assert arcs.fold == 8
    assert arcs.min_spacing() == pytest.approx(2 * math.pi / 8)


def test_gaps_and_largest_gap():
    arcs = ArcSet([(0.0, 1.0), (2.0, 2.5)])
    assert arcs.largest_gap_midpoint() == pytest.approx((2.5 + 2 * math.pi) / 2)
    assert len(arcs.gaps()) == 2
    assert ArcSet.full().largest_gap_midpoint() is None


arc = st.tuples(
    st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False),
    st.floats(min_value=0.0, max_value=1.5, allow_nan=False),
).map(lambda p: (p[0], p[0] + p[1]))


@settings(max_examples=200, deadline=None)
@given(st.lists(arc, min_size=1, max_size=4), st.lists(arc, min_size=1, max_size=4),
       st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False))
def test_union_and_intersection_membership(a, b, theta):
    first, second = ArcSet(a), ArcSet(b)
    union = first.union(second)
    both = first.intersect(second)
    if first.contains(theta, 0.0) or second.contains(theta, 0.0):
        assert union.contains(theta)
    if both.contains(theta, 0.0):
        assert first.contains(theta, 1e-9) and second.contains(theta, 1e-9)
    assert union.covers(first) and union.covers(second)


@settings(max_examples=200, deadline=None)
@given(st.lists(arc, min_size=1, max_size=4))
def test_antipodal_part_is_symmetric(a):
    arcs = ArcSet(a)
    antipodal = arcs.antipodal()
    assert arcs.covers(antipodal, 1e-9)
    assert antipodal.is_symmetric(1e-9)
