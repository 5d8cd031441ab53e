"""The thirteen acceptance criteria at their stated tolerances.

Run with `pytest tests/test_acceptance.py -v`; a summary with one PASS/FAIL
line per criterion is printed at the end of the session.
"""

import io
import json
import math
import time
import warnings

import numpy as np
import pytest

from hypercurrents import cli
from hypercurrents.conjugacy import TimeChange, cocycle_residual, conjugacy_residual, sample_states
from hypercurrents.currents import (
    AXIS,
    check_fixture,
    elementary_fixtures,
    intersection_nu_geodesic,
    intersection_plane_liouville,
    windowed_thm1_ii,
)
from hypercurrents.entropy import CountingFamily, area_from_defect, entropy_limit, gauss_bonnet_defect
from hypercurrents.kinematic import (
    GeodesicSampler,
    PlaneSampler,
    calibrate_liouville,
    calibrate_nu,
    crofton_length,
    liouville_crossings,
    santalo_area,
    santalo_volume,
    unit_segment,
)
from hypercurrents.lorentz import ORIGIN, GeodesicLine, ball_to_hyperboloid, dist
from hypercurrents.metrics import Bump, ConformalMetric, FlowState, flow, flow_path, g_unit_chart, geodesic_stretch
from hypercurrents.rng import generator
from hypercurrents.shapes import BallRegion, GeodesicDisk, bent_patch

pytestmark = pytest.mark.slow

SEED = 1
CAL_SEED = 0


def rel(est, target):
    return abs(est - target) / abs(target)


@pytest.fixture(scope="module")
def c0_run():
    """c0 from the criterion-1 calibration, with its wall time."""
    t = time.perf_counter()
    c0, se = calibrate_nu(CAL_SEED, 10**6)
    return c0, se, time.perf_counter() - t


@pytest.fixture(scope="module")
def c1():
    return calibrate_liouville(CAL_SEED, 10**6, radius=1.0)[0]


def test_01_crofton_length(c0_run, criterion):
    c0, se0, t_cal = c0_run
    t = time.perf_counter()
    est = crofton_length(unit_segment(1.0), PlaneSampler(0.6, c0), 10**6, SEED)
    elapsed = t_cal + time.perf_counter() - t
    ratio = est.value / 1.0
    se = math.hypot(est.stderr, est.value * se0 / c0)
    ok = abs(ratio - 1) <= max(0.01, 3 * se) and elapsed <= 60
    criterion(1, ok, f"Crofton length/pi = {ratio:.5f} +- {se:.5f} (1%), {elapsed:.1f}s <= 60s")
    assert ok


def test_02_santalo_volume(c0_run, criterion):
    c0 = c0_run[0]
    ball = BallRegion(ORIGIN, 1.0)
    target = math.pi * (math.sinh(2.0) - 2.0)
    assert abs(ball.volume() - target) < 1e-12
    t = time.perf_counter()
    est = santalo_volume(ball, PlaneSampler(1.05, c0), 2 * 10**5, 48, SEED)
    elapsed = time.perf_counter() - t
    ok = rel(est.value, target) <= 0.02 and elapsed <= 120
    criterion(2, ok, f"Santalo volume {est.value:.4f} vs {target:.4f} (2%), {elapsed:.1f}s <= 120s")
    assert ok


def test_03_santalo_area(c0_run, criterion):
    c0 = c0_run[0]
    disk = GeodesicDisk(radius=1.0)
    target = 2 * math.pi * (math.cosh(1.0) - 1.0)
    est = santalo_area(disk, PlaneSampler(1.05, c0), 2 * 10**5, SEED)
    ok = rel(est.value, target) <= 0.02
    criterion(3, ok, f"Santalo area {est.value:.4f} vs {target:.4f} (2%)")
    assert ok


def test_04_liouville_crofton(c1, criterion):
    disk = GeodesicDisk(radius=0.5)
    target = math.pi * disk.area()
    est = liouville_crossings(disk, GeodesicSampler(0.55, c1), 10**6, SEED)
    ok = rel(est.value, target) <= 0.02
    criterion(4, ok, f"Liouville crossings r=0.5: {est.value:.4f} vs pi*area {target:.4f} (2%), c1 = {c1:.4f}")
    assert ok


def test_05_length_form(c0_run, criterion):
    c0 = c0_run[0]
    axis = GeodesicLine(*AXIS)
    vals = []
    for ell in (1.0, 2.0):
        est = intersection_nu_geodesic(axis, ell, PlaneSampler(0.5 * ell + 0.1, c0), 10**6, SEED)
        vals.append((ell, est.value, rel(est.value, math.pi * ell)))
    ok = all(r <= 0.02 for _, _, r in vals)
    criterion(5, ok, "length form " + ", ".join(f"l={l:g}: {v:.4f}/{math.pi * l:.4f}" for l, v, _ in vals) + " (2%)")
    assert ok


def test_06_equality_case(c1, criterion):
    disk = GeodesicDisk(radius=1.0)
    bent = bent_patch(disk.area())
    out = []
    for patch in (disk, bent):
        R = float(dist(ORIGIN, patch.bounding_center)) + patch.bounding_radius + 0.05
        linked, _, _ = intersection_plane_liouville(patch, GeodesicSampler(R, c1), 10**6, SEED)
        out.append(linked)
    target = math.pi * disk.area()
    flat_ok = abs(out[0].value - target) <= 3 * out[0].stderr
    gap = (target - out[1].value) / out[1].stderr
    ok = flat_ok and gap > 3
    criterion(6, ok, f"flat patch {out[0].value:.4f} vs {target:.4f} (3 sigma); "
                     f"bent patch below by {gap:.1f} sigma (> 3)")
    assert ok


def test_07_windowed_volume(c0_run, c1, criterion):
    c0 = c0_run[0]
    region = BallRegion(ORIGIN, 0.8)
    est, target = windowed_thm1_ii(region, PlaneSampler(0.8, c0), GeodesicSampler(0.8, c1), 2 * 10**5, SEED)
    ok = rel(est.value, target) <= 0.03
    criterion(7, ok, f"nested pair integral {est.value:.3f} vs 2 pi^2 vol {target:.3f} (3%)")
    assert ok


def test_08_intersection_engine(criterion):
    rows = []
    for fx in elementary_fixtures():
        eng, orc = check_fixture(fx)
        rows.append((fx.name, eng, orc, fx.expected))
    ok = all(e == o == x and float(e).is_integer() for _, e, o, x in rows)
    criterion(8, ok, "engine == oracle: " + ", ".join(f"{n} {int(e)}={int(o)}" for n, e, o, _ in rows))
    assert ok


def test_09_geodesic_flow(criterion):
    s = FlowState(np.zeros(3), np.array([0.5, 0.0, 0.0]))
    xs, _, _ = flow_path(ConformalMetric(), s, 5.0, 1e-3)
    t = np.linspace(0.0, 5.0, len(xs))
    exact = np.column_stack([np.cosh(t), np.sinh(t), 0 * t, 0 * t])
    err = float(np.max(np.abs(ball_to_hyperboloid(xs) - exact)))
    g = ConformalMetric([Bump((0.0, 0.0, 0.0), 1.0, 0.1)])
    x = np.array([0.0, 0.1, 0.0])
    s = FlowState(x, g_unit_chart(g, x, np.array([1.0, 0.2, 0.0])))
    ref = flow(g, s, 2.0, 1e-2 / 32).position
    e1 = np.max(np.abs(flow(g, s, 2.0, 1e-2).position - ref))
    e2 = np.max(np.abs(flow(g, s, 2.0, 5e-3).position - ref))
    order = math.log2(e1 / e2)
    ok = err <= 1e-8 and 3.5 <= order <= 4.5
    criterion(9, ok, f"closed-form error {err:.2e} (<= 1e-8), observed order {order:.3f}")
    assert ok


def test_10_geodesic_stretch(criterion):
    flat = geodesic_stretch(ConformalMetric(), 3.0, 20.0, 2000, SEED)
    scaled = geodesic_stretch(ConformalMetric.scaled(2.0), 3.0, 20.0, 2000, SEED)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        bump = geodesic_stretch(ConformalMetric([Bump((0.0, 0.0, 0.0), 1.0, 0.1)]), 3.0, 20.0, 2000, SEED)
    ok = (abs(flat.value - 1) <= 1e-6 and abs(scaled.value - 0.5) <= 1e-3
          and bump.value <= 1 + 3 * bump.stderr)
    criterion(10, ok, f"i(gbar,gbar) = {flat.value:.9f}, i(4gbar,gbar) = {scaled.value:.6f}, "
                      f"bump {bump.value:.6f} <= 1 + 3*{bump.stderr:.1e}")
    assert ok


def test_11_conjugacy(criterion):
    g = ConformalMetric([Bump((0.1, 0.0, 0.0), 1.0, 0.1), Bump((-0.2, 0.2, 0.0), 1.2, -0.08)])
    X, W = sample_states(generator(SEED, "conjugacy"), 100, 1.0)
    ts = np.linspace(0.0, 3.0, 4)
    worst = max(conjugacy_residual(g, (x, w), t) for x, w in zip(X, W) for t in ts)
    grid = np.linspace(0.0, 2.0, 5)
    coc = max(cocycle_residual(g, (x, w), grid, grid) for x, w in zip(X[:3], W[:3]))
    tc = TimeChange(ConformalMetric(), (X[0], W[0]), 1.0, 3.0)
    tt = np.linspace(0.0, 3.0, 7)
    flat = max(float(np.max(np.abs(tc.T(tt) - tt))), abs(tc.psi() - 1.0))
    ok = worst <= 1e-4 and coc <= 1e-5 and flat <= 1e-6
    criterion(11, ok, f"conjugacy residual {worst:.1e} (1e-4), cocycle {coc:.1e} (1e-5), gbar T/Psi {flat:.1e} (1e-6)")
    assert ok


def test_12_entropy(criterion):
    L = np.logspace(6, 8, 9)
    lims = {A: entropy_limit(CountingFamily(1.0, A, 0.1), L)[1] for A in (1.0, 2.0)}
    exact = all(area_from_defect(g, gauss_bonnet_defect(g, a)) == a
                for g in range(2, 12) for a in np.linspace(2 * math.pi * (g - 1), 4 * math.pi * (g - 1), 17))
    ok = rel(lims[1.0], 2.0) <= 0.05 and rel(lims[2.0], 1.0) <= 0.05 and exact
    criterion(12, ok, f"A=1: {lims[1.0]:.6f} (2), A=2: {lims[2.0]:.6f} (1), Gauss-Bonnet round trip exact: {exact}")
    assert ok


def _stripped(lines):
    out = []
    for line in lines:
        d = json.loads(line)
        d.pop("elapsed")
        out.append(json.dumps(d))
    return out


def test_13_reproducible(tmp_path, criterion):
    cfg = cli.load_config()
    runs, times = [], []
    for name in ("a", "b"):
        t = time.perf_counter()
        code, _ = cli.run("all", cfg, str(tmp_path / name), io.StringIO())
        times.append(time.perf_counter() - t)
        assert code == cli.EXIT_OK
        runs.append(_stripped(open(tmp_path / name / "reports.jsonl", encoding="utf-8")))
    cfg["run"]["shards"] = 3
    sharded = []
    for name in ("c", "d"):
        cli.run("verify-crofton", cfg, str(tmp_path / name), io.StringIO())
        sharded.append(_stripped(open(tmp_path / name / "reports.jsonl", encoding="utf-8")))
    ok = runs[0] == runs[1] and sharded[0] == sharded[1] and max(times) <= 900
    criterion(13, ok, f"{len(runs[0])} reports byte-identical across re-runs (also with 3 shards); "
                      f"full suite {max(times):.0f}s <= 900s")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
