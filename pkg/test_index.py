#!/usr/bin/env python3
"""
Tests for winding numbers, Fredholm indices and the kernel condition
"""

import math
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from config.config import RasterConfig, Thresholds
from spectrum.document import ModelDecl, parse_spec
from spectrum.spectrum import level_image
from tools.index_tools import IndexTools, OperatorModel, SymbolCurve, fredholm_index, winding_number
from tower.tower import build_tower
from utils.errors import EssentialSpectrumError, ModelMismatchError, OnCurveError


SMALL = RasterConfig(theta_cells=256, u_cells_per_unit=64, planar_cells=64)

IMAGINARY_AXIS = '[[primitive]]\nkind = "vline"\nre = 0.0\n'
LATTICE = '[[primitive]]\nkind = "vlattice"\nre = 0.0\nim_base = 0.0\nim_step = 6.283185307179586\n'


def random_polynomial(rng):
    """Coefficients (ascending) of a polynomial whose roots keep 0.05 away from the unit circle"""
    while True:
        degree = int(rng.integers(1, 6))
        coefficients = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
        roots = np.roots(coefficients[::-1])
        if np.all(np.abs(np.abs(roots) - 1.0) > 0.05):
            return coefficients, roots


def test_winding_matches_inside_root_count():
    rng = np.random.default_rng(20240601)
    matches = 0
    for _ in range(20):
        coefficients, roots = random_polynomial(rng)
        inside = int(np.sum(np.abs(roots) < 1.0))
        if winding_number(SymbolCurve.from_polynomial(coefficients)) == inside:
            matches += 1
    assert matches == 20


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=-12, max_value=12))
def test_monomial_winding(k):
    curve = SymbolCurve.from_trigonometric([1.0], offset=k)
    assert winding_number(curve) == k


def test_winding_about_other_points():
    curve = SymbolCurve.from_polynomial([0.0, 2.0])
    assert winding_number(curve, 1.5 + 0.5j) == 1
    assert winding_number(curve, 3.0) == 0


def test_point_on_curve_raises():
    with pytest.raises(OnCurveError):
        winding_number(SymbolCurve.unit_circle(), 1.0)


def test_fixed_sample_curve():
    t = np.linspace(0.0, 2 * math.pi, 400, endpoint=False)
    curve = SymbolCurve.from_samples(np.exp(-2j * t))
    assert winding_number(curve) == -2
    with pytest.raises(ValueError):
        SymbolCurve.from_samples([1.0, 1j, -1.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_winding_is_additive_over_products(seed):
    rng = np.random.default_rng(seed)
    p = SymbolCurve.from_polynomial(random_polynomial(rng)[0])
    q = SymbolCurve.from_polynomial(random_polynomial(rng)[0])
    assert winding_number(p.product(q)) == winding_number(p) + winding_number(q)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=-8, max_value=8), st.integers(min_value=-8, max_value=8))
def test_monomial_products_add_windings(j, k):
    product = SymbolCurve.from_trigonometric([1.0], offset=j).product(
        SymbolCurve.from_trigonometric([2.0], offset=k))
    assert winding_number(product) == j + k


def test_winding_is_locally_constant():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 15:
        coefficients, _ = random_polynomial(rng)
        curve = SymbolCurve.from_polynomial(coefficients)
        clearance = float(np.abs(curve.at(1 << 16)).min())
        if clearance < 0.1:
            continue
        expected = winding_number(curve)
        phase = np.exp(1j * rng.uniform(0.0, 2 * math.pi))

        # moving λ less than a quarter of the clearance keeps it in the same component
        assert winding_number(curve, 0.2 * clearance * phase) == expected

        # adding c·z^m with |c| below the clearance cannot cross the origin
        bumped = np.zeros(max(coefficients.size, 4), dtype=complex)
        bumped[:coefficients.size] = coefficients
        bumped[int(rng.integers(0, bumped.size))] += 0.2 * clearance * phase
        assert winding_number(SymbolCurve.from_polynomial(bumped)) == expected
        checked += 1


def test_omitted_ray_and_powers():
    assert SymbolCurve.unit_circle().omitted_ray() is None
    curve = SymbolCurve.from_polynomial([2.0, 1.0])
    assert curve.omitted_ray() is not None
    root = curve.power(0.5)
    assert np.allclose(root.at(128) ** 2, curve.at(128))
    assert winding_number(root) == 0


def test_fredholm_index_of_models():
    shift = OperatorModel.toeplitz(SymbolCurve.unit_circle())
    adjoint = OperatorModel.toeplitz(SymbolCurve.from_trigonometric([1.0], offset=-1))
    assert fredholm_index(shift, 0j) == -1
    assert fredholm_index(adjoint, 0j) == 1
    assert fredholm_index(OperatorModel.direct_sum([shift, adjoint]), 0j) == 0
    assert fredholm_index(shift, 2.0) == 0
    with pytest.raises(EssentialSpectrumError):
        fredholm_index(shift, 1j)


def test_multiplication_model():
    circle = level_image(parse_spec(IMAGINARY_AXIS), 0)
    normal = OperatorModel.multiplication(circle)
    assert fredholm_index(normal, 0j) == 0
    with pytest.raises(EssentialSpectrumError):
        fredholm_index(normal, -1.0)


# Kernel condition

@pytest.fixture
def index_tools():
    return IndexTools(Thresholds())


@pytest.fixture(scope="module")
def circle_tower():
    return build_tower(parse_spec(IMAGINARY_AXIS), 3, SMALL)


def test_shift_is_obstructed_at_zero(index_tools, circle_tower):
    models = [ModelDecl(kind="toeplitz", poly=(0.0, 1.0))]
    result = index_tools.check_kernel_condition(circle_tower, models)
    assert result.obstructed
    assert result.witness == {"n": 0, "lambda": 0j, "index": -1}


def test_normal_model_passes(index_tools, circle_tower):
    result = index_tools.check_kernel_condition(circle_tower, [ModelDecl(kind="multiplication")])
    assert result.status == "passes"
    assert [row["index"] for row in result.table] == [0, 0, 0, 0]


def test_no_model(index_tools, circle_tower):
    assert index_tools.check_kernel_condition(circle_tower).status == "obstructed-unknown"
    assert index_tools.check_kernel_condition(circle_tower, assume_normal_lifts=True).status == "assumed"
    finite = build_tower(parse_spec(LATTICE), 3, SMALL)
    assert index_tools.check_kernel_condition(finite).status == "passes"
    assert index_tools.check_kernel_condition(finite, assume_normal_lifts=True).status == "passes"
    shift = [ModelDecl(kind="toeplitz", poly=(0.0, 1.0))]
    assert index_tools.check_kernel_condition(finite, shift).status == "passes"


def test_model_must_live_on_the_level(index_tools, circle_tower):
    models = [ModelDecl(kind="toeplitz", poly=(0.0, 2.0))]
    with pytest.raises(ModelMismatchError):
        index_tools.check_kernel_condition(circle_tower, models)


def test_level_specific_models(index_tools, circle_tower):
    # only level 0 is modelled; the rest need the normal-lift assumption
    models = [ModelDecl(kind="multiplication", level=0)]
    assert index_tools.check_kernel_condition(circle_tower, models).status == "obstructed-unknown"
    result = index_tools.check_kernel_condition(circle_tower, models, assume_normal_lifts=True)
    assert result.status == "assumed"
    assert [row["n"] for row in result.table] == [0]
