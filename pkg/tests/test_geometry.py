import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thinwires.geometry import (
    DeformationMap,
    InvalidDeformation,
    WireSpec,
    canonical_gaps,
    make_wire,
    random_smooth_deformation,
    swap_axes,
    validate_deformation,
    wire_included,
)


def test_make_wire_validates():
    with pytest.raises(ValueError):
        make_wire((0.5, 0.5), 0.3, 0.25)
    with pytest.raises(ValueError):
        make_wire((0.2, 0.5), 0.05, 0.25)  # guard ball touches the edge
    with pytest.raises(ValueError):
        make_wire((0.5, 0.5), 0.0, 0.25)
    with pytest.raises(ValueError):
        make_wire((0.5, 0.5), 0.05, 0.25, [(0.1, 0.3), (0.2, 0.4)])
    with pytest.raises(ValueError):
        make_wire((0.5, 0.5), 0.05, 0.25, [(0.0, 1.0)])


def test_log_radius_below_float_range():
    w = make_wire((0.5, 0.5), None, 0.25, log_r=-1e4)
    assert w.r == 0.0 and w.log_r == -1e4


def test_touching_gaps_merge():
    assert canonical_gaps([(0.3, 0.4), (0.1, 0.3)]) == ((0.1, 0.4),)


def test_contains_and_sampling():
    w = make_wire((0.5, 0.5), 0.1, 0.25, [(0.2, 0.3)])
    pts = w.sample_obstacle(500, np.random.default_rng(1))
    assert w.contains(pts).all()
    assert not w.contains([[0.25, 0.5, 0.5]])[0]
    assert w.contains([[0.5, 0.5, 0.59]])[0]
    assert not w.contains([[0.5, 0.5, 0.61]])[0]


def test_dict_roundtrip():
    w = make_wire((0.4, 0.6), 0.05, 0.3, [(0.1, 0.2)])
    assert WireSpec.from_dict(w.to_dict()) == w


def test_swap_axes_involution():
    p = np.random.default_rng(0).random((10, 3))
    np.testing.assert_array_equal(swap_axes(swap_axes(p)), p)
    assert swap_axes([1.0, 2.0, 3.0]).tolist() == [2.0, 1.0, 3.0]


# --- inclusion is a partial order -------------------------------------------

gap_lists = st.lists(st.tuples(st.floats(0.0, 0.9), st.floats(0.01, 0.1)), max_size=3).map(
    lambda items: sorted({(round(a, 3), round(min(a + w, 1.0), 3)) for a, w in items}))


def _disjoint(gaps):
    out = []
    for a, b in gaps:
        if a < b and (not out or a >= out[-1][1]):
            out.append((a, b))
    return out


wires = st.builds(
    lambda lr, gaps: make_wire((0.5, 0.5), None, 0.25, _disjoint(gaps), log_r=lr),
    st.floats(-20.0, math.log(0.25)),
    gap_lists,
)


@settings(max_examples=60, deadline=None)
@given(wires)
def test_inclusion_reflexive(w):
    assert wire_included(w, w)


@settings(max_examples=60, deadline=None)
@given(wires, wires, wires)
def test_inclusion_transitive(a, b, c):
    if wire_included(a, b) and wire_included(b, c):
        assert wire_included(a, c)


@settings(max_examples=60, deadline=None)
@given(wires, wires)
def test_inclusion_antisymmetric(a, b):
    if wire_included(a, b) and wire_included(b, a):
        assert a.log_r == b.log_r
        assert a.gap_measure == pytest.approx(b.gap_measure)


@settings(max_examples=60, deadline=None)
@given(gap_lists)
def test_canonical_gaps_idempotent(gaps):
    g = canonical_gaps(_disjoint(gaps))
    assert canonical_gaps(g) == g


def test_inclusion_matches_membership():
    rng = np.random.default_rng(3)
    small = make_wire((0.5, 0.5), 0.05, 0.25, [(0.1, 0.4)])
    big = make_wire((0.5, 0.5), 0.1, 0.25, [(0.2, 0.3)])
    assert wire_included(small, big) and not wire_included(big, small)
    assert big.contains(small.sample_obstacle(2000, rng)).all()


# --- deformations ------------------------------------------------------------


def test_identity_map_passes():
    rep = validate_deformation(DeformationMap.identity(9))
    assert rep.passed
    assert rep.lipschitz == pytest.approx(1.0) and rep.min_det == pytest.approx(1.0)


def test_folding_map_rejected():
    flip = lambda p: np.column_stack([1.0 - p[:, 0], p[:, 1], p[:, 2]])
    with pytest.raises(InvalidDeformation):
        validate_deformation(DeformationMap.from_function(flip, 9))


def test_too_coarse_rejected():
    with pytest.raises(ValueError):
        validate_deformation(DeformationMap.identity(5))


def test_non_periodic_map_fails_validation():
    shear = lambda p: np.column_stack([p[:, 0], p[:, 1] + 0.05 * p[:, 0] * np.sin(np.pi * p[:, 2]), p[:, 2]])
    rep = validate_deformation(DeformationMap.from_function(shear, 9))
    assert not rep.passed and rep.periodicity_residual > 1e-3


def test_random_maps_are_valid():
    rng = np.random.default_rng(11)
    for _ in range(5):
        rep = validate_deformation(DeformationMap.from_function(random_smooth_deformation(rng), 12))
        assert rep.passed and rep.min_det > 0.2


def test_map_interpolation_and_roundtrip():
    fn = random_smooth_deformation(np.random.default_rng(2))
    m = DeformationMap.from_function(fn, 9)
    np.testing.assert_allclose(m(m.grid[[1, 2, 3]][:, None].repeat(3, axis=1)),
                               fn(m.grid[[1, 2, 3]][:, None].repeat(3, axis=1)), atol=1e-12)
    m2 = DeformationMap.from_dict(m.to_dict())
    np.testing.assert_array_equal(m2.samples, m.samples)
