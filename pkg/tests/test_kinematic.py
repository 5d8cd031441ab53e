import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypercurrents.errors import WindowError
from hypercurrents.kinematic import (
    GeodesicSampler,
    PlaneSampler,
    calibrate_liouville,
    calibrate_nu,
    circle_polyline,
    coarea_check,
    crofton_length,
    fiber_crofton_check,
    geodesic_mass,
    liouville_crossings,
    plane_mass,
    random_tangent_units,
    sample_ball_volume,
    santalo_area,
    santalo_volume,
    unit_segment,
)
from hypercurrents.lorentz import ORIGIN, Isometry, dist, mdot
from hypercurrents.shapes import BallRegion, EmptyPatch, EmptyRegion, GeodesicDisk

from strategies import unit3


def close(est, target, rtol):
    return abs(est.value - target) <= max(rtol * abs(target), 3 * est.stderr)


@pytest.fixture(scope="module")
def c0():
    return calibrate_nu(3, 10**6)[0]


@pytest.fixture(scope="module")
def c1():
    return calibrate_liouville(3, 10**6)[0]


def test_calibration_constants(c0, c1):
    # the kernels are normalized so that c0 = 1/2 and c1 = 2 exactly
    assert abs(c0 - 0.5) < 0.005
    assert abs(c1 - 2.0) < 0.02


def test_calibration_needs_samples():
    with pytest.raises(ValueError):
        calibrate_nu(0, 1000)


def test_plane_mass_closed_form():
    # planes meeting B_r(o) have mass proportional to sinh(2r)/2 + r
    s = PlaneSampler(1.5, 1.0, 0)
    est = plane_mass((ORIGIN, 1.0), s, 200000, seed=1)
    t = 1.0
    exact = s.mass * (np.sinh(2 * t) / 2 + t) / (np.sinh(3.0) / 2 + 1.5)
    assert close(est, exact, 0.01)


def test_geodesic_mass_closed_form():
    s = GeodesicSampler(1.5, 1.0, 0)
    est = geodesic_mass((ORIGIN, 1.0), s, 200000, seed=1)
    assert close(est, np.pi**2 * np.sinh(1.0) ** 2, 0.01)


def test_empty_curve(c0):
    est = crofton_length(np.array([ORIGIN]), PlaneSampler(1.0, c0), 1000, seed=0)
    assert est.value == 0.0 and est.stderr == 0.0


@pytest.mark.slow
def test_circle_length(c0):
    circle = circle_polyline(1.0, k=512)
    est = crofton_length(circle, PlaneSampler(1.1, c0), 200000, seed=2)
    assert close(est, 2 * np.pi * np.sinh(1.0), 0.02)


def test_recalibration_with_longer_segment(c0):
    c0b, se = calibrate_nu(4, 10**6, length=2.0)
    assert abs(c0b / c0 - 1) < 0.01


@given(u=unit3(), t=st.floats(0.0, 1.0))
@settings(max_examples=8)
def test_crofton_translation_invariance(u, t, c0):
    A = Isometry.boost(u, t)
    seg = A.apply_point(unit_segment(1.0))
    R = float(np.max(dist(ORIGIN, seg))) + 0.1
    est = crofton_length(seg, PlaneSampler(R, c0), 200000, seed=5)
    assert close(est, 1.0, 0.02)


def test_window_error(c0):
    with pytest.raises(WindowError):
        crofton_length(unit_segment(3.0), PlaneSampler(1.0, c0), 1000, seed=0)


def test_variance_halves_with_four_times_samples(c0):
    seg = unit_segment(1.0)
    a = crofton_length(seg, PlaneSampler(0.6, c0), 50000, seed=1)
    b = crofton_length(seg, PlaneSampler(0.6, c0), 200000, seed=1)
    assert 0.4 < b.stderr / a.stderr < 0.6


def test_shards_change_stream_not_estimate(c0):
    seg = unit_segment(1.0)
    a = crofton_length(seg, PlaneSampler(0.6, c0), 100000, seed=1, shards=1)
    b = crofton_length(seg, PlaneSampler(0.6, c0), 100000, seed=1, shards=4)
    c = crofton_length(seg, PlaneSampler(0.6, c0), 100000, seed=1, shards=4)
    assert b == c
    assert abs(a.value - b.value) < 4 * np.hypot(a.stderr, b.stderr)


@pytest.mark.slow
def test_santalo_volume(c0):
    ball = BallRegion(ORIGIN, 1.0)
    assert abs(ball.volume() - np.pi * (np.sinh(2.0) - 2.0)) < 1e-12
    est = santalo_volume(ball, PlaneSampler(1.05, c0), 50000, m=32, seed=1)
    assert close(est, ball.volume(), 0.02)


def test_santalo_area(c0):
    disk = GeodesicDisk(radius=1.0)
    assert abs(disk.area() - 2 * np.pi * (np.cosh(1.0) - 1)) < 1e-12
    est = santalo_area(disk, PlaneSampler(1.05, c0), 200000, seed=1)
    assert close(est, disk.area(), 0.02)


def test_santalo_empty(c0):
    assert santalo_volume(EmptyRegion(), PlaneSampler(1.0, c0), 100).value == 0.0
    assert santalo_area(EmptyPatch(), PlaneSampler(1.0, c0), 100).value == 0.0


def test_liouville_disk(c1):
    disk = GeodesicDisk(radius=0.5)
    est = liouville_crossings(disk, GeodesicSampler(0.55, c1), 300000, seed=1)
    assert close(est, np.pi * disk.area(), 0.02)


def test_liouville_translated_disk(c1):
    A = Isometry.boost([1.0, 1.0, 0.0], 0.4)
    disk = GeodesicDisk(radius=0.5).transformed(A)
    est = liouville_crossings(disk, GeodesicSampler(1.0, c1), 300000, seed=2)
    assert close(est, np.pi * disk.area(), 0.02)


@pytest.mark.slow
def test_coarea(c0):
    def psi(x, v):
        r = dist(ORIGIN, x)
        return np.where(r < 0.8, (1 - (r / 0.8) ** 2) ** 2, 0.0) * (1.0 + x[:, 1] ** 2)

    lhs, rhs = coarea_check(psi, PlaneSampler(0.85, 0.5), 50000, m=24, support_radius=0.8, seed=1)
    tol = max(0.02 * abs(lhs.value), 3 * np.hypot(lhs.stderr, rhs.stderr))
    assert abs(lhs.value - rhs.value) <= tol


def test_fiber_crofton(c1):
    disk = GeodesicDisk(radius=0.7)

    def F(xi, eta):
        return 1.0 + (xi[:, 1] + eta[:, 1]) ** 2

    lhs, rhs = fiber_crofton_check(disk, F, GeodesicSampler(0.75, c1), 200000, seed=1)
    tol = max(0.02 * abs(rhs.value), 3 * np.hypot(lhs.stderr, rhs.stderr))
    assert abs(lhs.value - rhs.value) <= tol


def test_volume_and_tangent_samplers(rng):
    x = sample_ball_volume(rng, 20000, 1.0)
    assert np.all(dist(ORIGIN, x) <= 1.0 + 1e-12)
    assert np.max(np.abs(mdot(x, x) + 1)) < 1e-10
    # fraction inside radius 1/2 matches the volume ratio
    frac = np.mean(dist(ORIGIN, x) < 0.5)
    ratio = (np.sinh(1.0) - 1.0) / (np.sinh(2.0) - 2.0)
    assert abs(frac - ratio) < 4 * np.sqrt(ratio * (1 - ratio) / 20000)
    w = random_tangent_units(rng, x)
    assert np.max(np.abs(mdot(w, x))) < 1e-10
    assert np.max(np.abs(mdot(w, w) - 1)) < 1e-10
