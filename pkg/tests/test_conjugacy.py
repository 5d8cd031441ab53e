import math

import numpy as np
import pytest

from hypercurrents.conjugacy import (
    TimeChange,
    bar_flow,
    bar_state,
    bounded_distance_check,
    chi,
    chi_pair,
    cocycle_residual,
    conjugacy_residual,
    geodesic_endpoints,
    holder_probe,
    phase_distance,
    psi_length_identity,
    sample_states,
    time_change,
)
from hypercurrents.lorentz import ORIGIN, Isometry, busemann, dist, mdot
from hypercurrents.metrics import Bump, ConformalMetric
from hypercurrents.rng import generator

FLAT = ConformalMetric()
TWO = ConformalMetric([Bump((0.1, 0.0, 0.0), 1.0, 0.1), Bump((-0.2, 0.2, 0.0), 1.2, -0.08)])
V0 = (ORIGIN, np.array([0.0, 0.6, 0.0, 0.8]))


@pytest.fixture(scope="module")
def states():
    return sample_states(generator(7, "test"), 8, 1.0)


def test_flat_time_change_is_identity():
    tc = TimeChange(FLAT, V0, 1.0, 3.0)
    t = np.linspace(0, 3, 7)
    assert np.max(np.abs(tc.T(t) - t)) < 1e-10
    assert abs(tc.psi() - 1.0) < 1e-10
    assert abs(tc.r0 - 0.5) < 1e-12


def test_scaled_time_change():
    tc = TimeChange(ConformalMetric.scaled(2.0), V0, 1.0, 3.0)
    t = np.linspace(0, 3, 7)
    assert np.max(np.abs(tc.T(t) - t / 2)) < 1e-10
    assert abs(tc.psi() - 0.5) < 1e-10
    assert abs(tc.r0 - 0.25) < 1e-12


def test_flat_chi_is_shift_by_r():
    # r(v) = tau / 2 for gbar, so chi moves v forward by half the averaging window
    X, W = chi_pair(FLAT, V0)
    assert phase_distance((X, W), bar_flow(*V0, 0.5)) < 1e-10
    s = chi(FLAT, V0)
    assert s.metric == "gbar"


def test_endpoints_flat():
    minus, plus = geodesic_endpoints(FLAT, *V0)
    np.testing.assert_allclose(plus[1:], [0.6, 0, 0.8], atol=1e-15)
    np.testing.assert_allclose(minus[1:], [-0.6, 0, -0.8], atol=1e-15)


def test_bar_state_on_horosphere():
    X, W = V0
    minus, plus = geodesic_endpoints(TWO, X, W)
    Y, U = bar_state(X, minus, plus)
    assert abs(busemann(plus, X, Y)) < 1e-12
    assert abs(mdot(Y, Y) + 1) < 1e-12 and abs(mdot(U, U) - 1) < 1e-12
    Y2, _ = bar_state(X, minus, plus, 0.7)
    assert abs(busemann(plus, Y, Y2) - 0.7) < 1e-12


def test_tabulated_grids_increase():
    tc = time_change(TWO, V0, np.linspace(0, 2, 5))
    minus, plus = tc.endpoints
    assert tc.s_grid[0] == 0.0
    # s grows at most at gbar speed e^{-phi}, which is close to 1 here
    assert np.all(np.diff(tc.s_grid) > 0)
    assert np.all(np.diff(tc.T_grid) > 0)


def test_conjugacy_identity(states):
    X, W = states
    for x, w in zip(X[:4], W[:4]):
        for t in (0.0, 1.0, 3.0):
            assert conjugacy_residual(TWO, (x, w), t) <= 1e-4


def test_cocycle(states):
    X, W = states
    grid = np.linspace(0, 2, 5)
    assert cocycle_residual(TWO, (X[0], W[0]), grid, grid) <= 1e-5


def test_chi_equivariant_under_symmetry():
    # a rotation about the center of a single centered bump is a g-isometry
    g = ConformalMetric([Bump((0.0, 0.0, 0.0), 1.0, 0.1)])
    A = Isometry.rotation([0.2, 0.5, 1.0], 0.9)
    X = Isometry.boost([1, 0, 0], 0.3).apply_point(ORIGIN)
    W = np.array([0.0, 0.0, 0.6, 0.8])
    W = W + mdot(X, W) * X
    W /= math.sqrt(mdot(W, W))
    Y, U = chi_pair(g, (X, W))
    Y2, U2 = chi_pair(g, (A.apply_point(X), A.apply_tangent(W)))
    assert phase_distance((A.apply_point(Y), A.apply_tangent(U)), (Y2, U2)) < 1e-9


def test_psi_length_identity(states):
    X, W = states
    lhs, s, bound = psi_length_identity(TWO, (X[1], W[1]), 5.0)
    assert abs(lhs - s) <= bound + 1e-6


def test_bounded_distance():
    a = bounded_distance_check(TWO, 40, 3.0, seed=1)
    b = bounded_distance_check(TWO, 40, 5.0, seed=1)
    assert a < 1.0 and b < 1.0


def test_phase_distance_basic():
    assert phase_distance(V0, V0) == 0.0
    X, W = V0
    Y, U = bar_flow(X, W, 0.5)
    assert abs(phase_distance(V0, (Y, U)) - 0.5) < 1e-12
    assert abs(phase_distance(V0, (X, -W)) - math.pi) < 1e-12


@pytest.mark.slow
def test_holder_probe_reports():
    L, alpha, ds, dp = holder_probe(TWO, 3, 1.0, seed=1)
    assert len(ds) == 12 and np.all(np.isfinite(dp))
    assert alpha > 0.5


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        TimeChange(FLAT, V0, -1.0)
