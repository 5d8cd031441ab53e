import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypercurrents.boundary import (
    RoundCircle,
    circle_through,
    dist_point_plane,
    geodesic_plane_intersection,
    hausdorff_distance,
    intersection_points,
    linking,
)
from hypercurrents.errors import DegenerateError, TangencyError
from hypercurrents.lorentz import ORIGIN, GeodesicLine, as_boundary, mdot

from strategies import boundary_points, isometries, points, unit3

EQUATOR = RoundCircle([0.0, 0.0, 0.0, 1.0])


def test_circle_through_example():
    c = circle_through([1, 1, 0, 0], [1, -1, 0, 0], [1, 0, 1, 0])
    assert np.allclose(np.abs(c.v), [0, 0, 0, 1], atol=1e-12)


def test_circle_through_collinear():
    with pytest.raises(DegenerateError):
        circle_through([1, 1, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0])


@given(boundary_points(), boundary_points(), boundary_points())
def test_circle_through_contains_points(a, b, c):
    try:
        s = circle_through(a, b, c)
    except DegenerateError:
        return
    assert np.all(s.contains_points(np.array([a, b, c]), tol=1e-8))


def test_linking_examples():
    lk, deg = linking(EQUATOR, as_boundary([0, 0, 1.0]), as_boundary([0, 0, -1.0]))
    assert lk == 1 and not deg
    lk, deg = linking(EQUATOR, as_boundary([0, 0.6, 0.8]), as_boundary([0.6, 0, 0.8]))
    assert lk == 0 and not deg
    lk, deg = linking(EQUATOR, as_boundary([1.0, 0, 0]), as_boundary([0, 0, 1.0]))
    assert lk == 0 and deg


def test_linking_equals_intersection(rng):
    xi = as_boundary(rng.standard_normal((10000, 3)))
    eta = as_boundary(rng.standard_normal((10000, 3)))
    v = RoundCircle.at(0.4, [0.2, 0.5, 1.0]).v
    lk, _ = linking(v, xi, eta)
    x, linked = intersection_points(v, xi, eta)
    assert np.array_equal(lk.astype(bool), linked)
    hit = x[linked]
    assert np.max(np.abs(mdot(hit, v))) < 1e-9
    assert np.max(np.abs(mdot(hit, hit) + 1)) < 1e-8


@given(boundary_points(), boundary_points(), unit3(), st.floats(-1.5, 1.5))
def test_intersection_lies_on_geodesic(xi, eta, u, t):
    if np.linalg.norm(xi - eta) < 1e-2:
        return
    sigma = RoundCircle.at(t, u)
    try:
        x = geodesic_plane_intersection(GeodesicLine(xi, eta), sigma)
    except TangencyError:
        return
    if x is None:
        return
    line = GeodesicLine(xi, eta)
    assert line.distance_to(x) < 1e-5
    assert dist_point_plane(x, sigma) < 1e-8


@given(isometries(), boundary_points(), boundary_points())
def test_linking_invariant(A, xi, eta):
    sigma = RoundCircle.at(0.3, [1.0, 0.2, -0.4])
    lk, deg = linking(sigma, xi, eta)
    if deg:
        return
    lk2, deg2 = linking(sigma.transformed(A), A.apply_boundary(xi), A.apply_boundary(eta))
    if not deg2:
        assert lk == lk2


def test_tangency():
    line = GeodesicLine([1, 1, 0, 0], [1, -1, 0, 0])
    with pytest.raises(TangencyError):
        geodesic_plane_intersection(line, EQUATOR)


def test_dist_point_plane():
    s = RoundCircle.at(0.8, [1.0, 0.0, 0.0])
    assert abs(dist_point_plane(ORIGIN, s) - 0.8) < 1e-14
    x = np.array([np.cosh(0.8), np.sinh(0.8), 0.0, 0.0])
    assert dist_point_plane(x, s) < 1e-12


def test_hausdorff_tilt():
    # tilting a great circle by 0.1 rad moves it by 0.1 in the round metric
    tilted = RoundCircle([0.0, 0.0, np.sin(0.1), np.cos(0.1)])
    d = hausdorff_distance(EQUATOR, tilted, n=1024)
    assert abs(d - 0.1) <= 0.01
    assert hausdorff_distance(EQUATOR, EQUATOR) < 1e-12


@given(unit3(), st.floats(-1, 1), unit3(), st.floats(-1, 1))
def test_hausdorff_symmetric(u1, t1, u2, t2):
    a, b = RoundCircle.at(t1, u1), RoundCircle.at(t2, u2)
    assert hausdorff_distance(a, b, 64) == hausdorff_distance(b, a, 64)


def test_hausdorff_rejects_small_n():
    with pytest.raises(ValueError):
        hausdorff_distance(EQUATOR, EQUATOR, n=4)


def test_round_circle_sign_free():
    assert RoundCircle([0, 0, 0, 1.0]) == RoundCircle([0, 0, 0, -1.0])


def test_spherical_radius():
    c, th = RoundCircle.at(1.0, [0, 0, 1.0]).spherical()
    # plane at distance t bounds a cap of angular radius acos(tanh t)
    assert abs(th - np.arccos(np.tanh(1.0))) < 1e-12
    np.testing.assert_allclose(c, [0, 0, 1])
