import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyforge import catalog
from polyforge.errors import PyramidError
from polyforge.polytope import (
    GeneralizedPolytope,
    cayley_menger,
    cayley_menger_face,
    solve_pyramid,
    solve_pyramids,
)
from polyforge.triangulation import CornerMesh

TETRA_EDGE = 2.0 * math.sqrt(2.0)
TETRA_CIRCUM = math.sqrt(3.0)
TETRA_DIHEDRAL = math.acos(1.0 / 3.0)


# -- Cayley-Menger ----------------------------------------------------------


def test_cayley_menger_regular_tetrahedron():
    # unit base, unit apex distances: 288 * (sqrt(2)/12)^2 = 4
    assert cayley_menger(1, 1, 1, 1, 1, 1) == pytest.approx(4.0, rel=1e-12)


def test_cayley_menger_sign_flip_at_circumradius():
    # apex over the circumcenter of a unit equilateral base goes flat at
    # q = 1/3
    assert cayley_menger(1, 1, 1, 1 / 3 + 1e-3, 1 / 3 + 1e-3, 1 / 3 + 1e-3) > 0
    assert cayley_menger(1, 1, 1, 1 / 3 - 1e-3, 1 / 3 - 1e-3, 1 / 3 - 1e-3) < 0
    assert cayley_menger(1, 1, 1, 1 / 3, 1 / 3, 1 / 3) == pytest.approx(0.0, abs=1e-12)


def test_cayley_menger_face_convention():
    assert cayley_menger_face((1.0, 1.0, 1.0), (1.0, 1.0, 1.0)) == pytest.approx(
        4.0, rel=1e-12
    )


# -- single pyramids ----------------------------------------------------------


def test_unit_regular_pyramid_angles():
    geom = solve_pyramid((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    assert geom.altitude**2 == pytest.approx(2.0 / 3.0, rel=1e-12)
    np.testing.assert_allclose(geom.gamma, math.pi / 3.0, atol=1e-12)
    np.testing.assert_allclose(geom.phi, math.pi / 3.0, atol=1e-12)
    np.testing.assert_allclose(geom.rho_t, math.pi / 3.0, atol=1e-12)
    np.testing.assert_allclose(geom.rho_h, math.pi / 3.0, atol=1e-12)
    np.testing.assert_allclose(geom.alpha, TETRA_DIHEDRAL, atol=1e-12)
    np.testing.assert_allclose(geom.omega, TETRA_DIHEDRAL, atol=1e-12)


def test_apex_triangle_angle_sums():
    geom = solve_pyramid((1.3, 0.9, 1.1), (1.2, 1.0, 1.4))
    sums = geom.phi + geom.rho_t + geom.rho_h
    np.testing.assert_allclose(sums, math.pi, atol=1e-12)


def test_no_pyramid_below_circumradius():
    with pytest.raises(PyramidError, match="no apex pyramid"):
        solve_pyramid((1.0, 1.0, 1.0), (0.5, 0.5, 0.5))


def test_near_flat_pyramid_refined():
    # squared altitude 1e-10 sits inside the double-precision refinement
    # band; the row must come back solved at high precision
    r = math.sqrt(1.0 / 3.0 + 1e-10)
    batch = solve_pyramids(np.array([[1.0, 1.0, 1.0]]), np.full((1, 3), r))
    assert batch.refined[0]
    assert batch.alt2[0] == pytest.approx(1e-10, rel=1e-6)


def test_barely_missing_pyramid_refined_then_rejected():
    r = math.sqrt(1.0 / 3.0 - 1e-10)
    with pytest.raises(PyramidError):
        solve_pyramids(np.array([[1.0, 1.0, 1.0]]), np.full((1, 3), r))


@st.composite
def _pyramids(draw):
    # a genuine 3D apex over a well-shaped planar base
    x1 = draw(st.floats(0.7, 2.5))
    x2 = draw(st.floats(-0.5, 2.5))
    y2 = draw(st.floats(0.5, 2.5))
    ax = draw(st.floats(-0.5, 2.5))
    ay = draw(st.floats(-0.5, 2.5))
    az = draw(st.floats(0.3, 2.0))
    base = np.array([[0.0, 0.0, 0.0], [x1, 0.0, 0.0], [x2, y2, 0.0]])
    return base, np.array([ax, ay, az])


def _dihedral(p, q, w1, w2):
    e = q - p
    e = e / np.linalg.norm(e)
    a = w1 - p
    b = w2 - p
    a = a - (a @ e) * e
    b = b - (b @ e) * e
    return math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b))


@given(_pyramids())
@settings(max_examples=150, deadline=None)
def test_pyramid_matches_explicit_coordinates(data):
    base, apex = data
    lengths = [
        np.linalg.norm(base[2] - base[1]),
        np.linalg.norm(base[0] - base[2]),
        np.linalg.norm(base[1] - base[0]),
    ]
    radii = np.linalg.norm(base - apex, axis=1)
    geom = solve_pyramid(lengths, radii)
    assert geom.altitude == pytest.approx(apex[2], rel=1e-8, abs=1e-10)
    for s in range(3):
        t, h = (s + 1) % 3, (s + 2) % 3
        want = _dihedral(base[t], base[h], base[s], apex)
        assert geom.alpha[s] == pytest.approx(want, abs=1e-8)
    for c in range(3):
        u, v = (c + 1) % 3, (c + 2) % 3
        want = _dihedral(apex, base[c], base[u], base[v])
        assert geom.omega[c] == pytest.approx(want, abs=1e-8)


# -- generalized polytopes ----------------------------------------------------


def tetra_polytope(r):
    mesh = CornerMesh.from_development(catalog.tetrahedron())
    return GeneralizedPolytope(mesh, np.full(4, float(r)))


def test_tetra_at_circumradius_closes_up():
    P = tetra_polytope(TETRA_CIRCUM)
    np.testing.assert_allclose(P.kappa, 0.0, atol=1e-9)
    rep = P.curvature_report()
    np.testing.assert_allclose(rep.theta, TETRA_DIHEDRAL, atol=1e-9)
    want = 6.0 * TETRA_EDGE * (math.pi - TETRA_DIHEDRAL)
    assert rep.total_height == pytest.approx(want, rel=1e-9)


def test_tetra_inflated_has_positive_curvature():
    P = tetra_polytope(2.0 * TETRA_CIRCUM)
    assert np.all(P.kappa > 0.0)
    assert np.all(P.kappa < math.pi)  # below the cone deficit


def test_cube_at_circumradius_closes_up(cube_metric):
    mesh = CornerMesh.from_metric(cube_metric)
    P = GeneralizedPolytope(mesh, np.full(8, math.sqrt(3.0) / 2.0))
    np.testing.assert_allclose(P.kappa, 0.0, atol=1e-9)
    rep = P.curvature_report()
    # 12 cube edges at pi/2, 6 face diagonals exactly flat
    sharp = np.isclose(rep.theta, math.pi / 2.0, atol=1e-9).sum()
    flat = np.isclose(rep.theta, math.pi, atol=1e-9).sum()
    assert (sharp, flat) == (12, 6)


def test_solid_angle_excess_balance():
    for r in (TETRA_CIRCUM, 1.5 * TETRA_CIRCUM, 3.0 * TETRA_CIRCUM):
        P = tetra_polytope(r)
        lhs = P.solid_angle_excess().sum()
        rhs = 4.0 * math.pi - P.kappa.sum()
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_total_height_gradient_is_kappa():
    mesh = CornerMesh.from_development(catalog.tetrahedron())
    r0 = TETRA_CIRCUM * np.array([1.25, 1.31, 1.22, 1.27])
    kappa = GeneralizedPolytope(mesh, r0).kappa
    h = 1e-6
    for i in range(4):
        rp, rm = r0.copy(), r0.copy()
        rp[i] += h
        rm[i] -= h
        hp = GeneralizedPolytope(mesh, rp).curvature_report().total_height
        hm = GeneralizedPolytope(mesh, rm).curvature_report().total_height
        assert (hp - hm) / (2.0 * h) == pytest.approx(kappa[i], abs=1e-6)


def test_rejects_non_delaunay_triangulation(cube_metric):
    mesh = CornerMesh.from_metric(cube_metric)
    mesh.flip(0, 0)  # flipping a strictly good edge leaves a bad diagonal
    with pytest.raises(PyramidError, match="weighted-Delaunay"):
        GeneralizedPolytope(mesh, np.full(8, 4.0))


def test_rejects_bad_radii():
    mesh = CornerMesh.from_development(catalog.tetrahedron())
    with pytest.raises(ValueError):
        GeneralizedPolytope(mesh, np.ones(3))
    with pytest.raises(PyramidError):
        GeneralizedPolytope(mesh, np.array([1.0, 1.0, 1.0, -0.5]))


def test_weights_are_squared_radii():
    P = tetra_polytope(2.0)
    np.testing.assert_allclose(P.weights, 4.0)
    assert P.n_vertices == 4


def test_report_is_cached():
    P = tetra_polytope(2.0)
    assert P.curvature_report() is P.curvature_report()
