import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyforge import trig
from polyforge.errors import StepReductionError, TriangleError


def test_near_degenerate_angle_sum():
    ang = trig.euclidean_angles(1.0, 1.0, 1.9)
    assert abs(ang.total - math.pi) <= 1e-12


def test_equilateral():
    ang = trig.euclidean_angles(2.5, 2.5, 2.5)
    assert ang.alpha == pytest.approx(math.pi / 3, abs=1e-15)
    assert ang.beta == pytest.approx(ang.alpha, abs=1e-15)
    assert ang.gamma == pytest.approx(ang.alpha, abs=1e-15)


def test_right_triangle():
    ang = trig.euclidean_angles(5.0, 4.0, 3.0)
    assert ang.alpha == pytest.approx(math.pi / 2, abs=1e-14)
    assert math.sin(ang.beta) == pytest.approx(4.0 / 5.0, abs=1e-14)


def test_spherical_octant():
    ang = trig.spherical_angles(math.pi / 2, math.pi / 2, math.pi / 2)
    for a in ang.as_tuple():
        assert a == pytest.approx(math.pi / 2, abs=1e-14)


def test_spherical_equilateral_closed_form():
    # cos(alpha) = (cos a - cos^2 a) / sin^2 a for the equilateral case
    a = math.pi / 3
    ang = trig.spherical_angles(a, a, a)
    expect = math.acos((math.cos(a) - math.cos(a) ** 2) / math.sin(a) ** 2)
    assert ang.alpha == pytest.approx(expect, abs=1e-14)
    assert ang.alpha == pytest.approx(ang.beta, abs=1e-15)
    assert ang.alpha > math.pi / 3


def test_invalid_sides_raise():
    with pytest.raises(TriangleError):
        trig.euclidean_angles(1.0, 1.0, 2.0)
    with pytest.raises(TriangleError):
        trig.euclidean_angles(1.0, -1.0, 1.0)
    with pytest.raises(TriangleError):
        trig.euclidean_angles(0.0, 1.0, 1.0)
    with pytest.raises(TriangleError):
        trig.spherical_angles(3.2, 1.0, 3.0)  # side >= pi
    with pytest.raises(TriangleError):
        trig.spherical_angles(2.5, 2.5, 1.5)  # perimeter >= 2*pi


def test_opposite_side_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(200):
        b, c = rng.uniform(0.1, 5.0, size=2)
        alpha = rng.uniform(0.05, math.pi - 0.05)
        a = trig.euclidean_opposite_side(b, c, alpha)
        assert trig.euclidean_angles(a, b, c).alpha == pytest.approx(alpha, abs=1e-12)


def test_spherical_opposite_side_roundtrip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        b, c = rng.uniform(0.2, 1.4, size=2)
        alpha = rng.uniform(0.1, math.pi - 0.1)
        a = trig.spherical_opposite_side(b, c, alpha)
        assert trig.spherical_angles(a, b, c).alpha == pytest.approx(alpha, abs=1e-10)


def test_unit_equilateral_derivative_value():
    # d(alpha)/da = 1/(b sin gamma) = 1/sin(60 deg) = 2/sqrt(3)
    rows = trig.euclidean_angle_derivatives(1.0, 1.0, 1.0)
    assert rows[0][0] == pytest.approx(2.0 / math.sqrt(3.0), rel=1e-14)


def _fd_matrix(fn, a, b, c, h=1e-6):
    out = np.empty((3, 3))
    for j, (da, db, dc) in enumerate(np.eye(3) * h):
        hi = fn(a + da, b + db, c + dc).as_tuple()
        lo = fn(a - da, b - db, c - dc).as_tuple()
        out[:, j] = (np.array(hi) - np.array(lo)) / (2.0 * h)
    return out


def test_euclidean_derivatives_match_fd():
    rng = np.random.default_rng(2)
    checked = 0
    while checked < 1000:
        a, b, c = rng.uniform(0.2, 3.0, size=3)
        try:
            ang = trig.euclidean_angles(a, b, c)
        except TriangleError:
            continue
        if min(min(ang.as_tuple()), math.pi - max(ang.as_tuple())) < 0.05:
            continue  # slivers exceed the FD oracle's truncation error
        rows = np.array(trig.euclidean_angle_derivatives(a, b, c))
        fd = _fd_matrix(trig.euclidean_angles, a, b, c)
        np.testing.assert_allclose(rows, fd, atol=1e-6)
        # angle sum is constant, so each column must sum to zero
        np.testing.assert_allclose(rows.sum(axis=0), 0.0, atol=1e-11)
        checked += 1


def test_spherical_derivatives_match_fd():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 300:
        a, b, c = rng.uniform(0.2, 1.5, size=3)
        try:
            rows = np.array(trig.spherical_angle_derivatives(a, b, c))
        except (TriangleError, StepReductionError):
            continue
        fd = _fd_matrix(trig.spherical_angles, a, b, c)
        np.testing.assert_allclose(rows, fd, atol=1e-6)
        checked += 1


def test_derivative_floor_raises():
    # a needle triangle has an angle too close to 0 to differentiate
    with pytest.raises(StepReductionError):
        trig.euclidean_angle_derivatives(1e-11, 1.0, 1.0)


@given(
    st.floats(0.05, 10.0),
    st.floats(0.05, 10.0),
    st.floats(0.05, 10.0),
)
def test_angle_sum_property(a, b, c):
    try:
        ang = trig.euclidean_angles(a, b, c)
    except TriangleError:
        return
    assert abs(ang.total - math.pi) <= 1e-10
    assert min(ang.as_tuple()) > 0.0


@given(st.floats(0.1, 1.5), st.floats(0.1, 1.5), st.floats(0.1, 1.5))
def test_spherical_excess_property(a, b, c):
    try:
        ang = trig.spherical_angles(a, b, c)
    except TriangleError:
        return
    # spherical triangles have positive angular excess
    assert ang.total > math.pi
