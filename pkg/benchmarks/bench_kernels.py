"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from hypercurrents import kernels
from hypercurrents.kinematic import PlaneSampler, _disk_frames, _rmax, circle_polyline
from hypercurrents.lorentz import ORIGIN
from hypercurrents.metrics import CHART_R, DRIFT_TOL, Bump, ConformalMetric, g_unit_chart


def cases():
    rng = np.random.default_rng(0)
    g = ConformalMetric([Bump((0.1, 0.0, 0.0), 1.0, 0.1), Bump((-0.2, 0.2, 0.0), 1.2, -0.08)])
    x = rng.uniform(-0.3, 0.3, (200, 3))
    v = g_unit_chart(g, x, rng.standard_normal((200, 3)))
    budget = np.full(200, 2.0)

    def rk4(be):
        be.rk4_batch(x.copy(), v.copy(), budget, 1e-2, g.table, g.constant, False, CHART_R**2, DRIFT_TOL)

    def path(be):
        be.rk4_path(x[0], v[0], 2000, 1e-3, g.table, g.constant, False, CHART_R**2, DRIFT_TOL)

    planes = np.ascontiguousarray(PlaneSampler(1.1).sample(rng, 20000))
    poly = np.ascontiguousarray(circle_polyline(1.0, 256))

    def cross(be):
        be.polyline_crossings(planes, poly)

    vv = PlaneSampler(1.05).sample(rng, 2000)
    f, e1, e2, chd = _disk_frames(vv, ORIGIN)
    args = [np.ascontiguousarray(a) for a in (f, e1, e2)] + [
        np.ascontiguousarray(_rmax(chd, 1.0)), ORIGIN[None, :].copy(), np.array([np.cosh(1.0)]), 48]

    def area(be):
        be.disk_union_area(*args)

    return {"rk4_batch (200 x 200 steps)": rk4, "rk4_path (2000 steps)": path,
            "polyline_crossings (2e4 x 256)": cross, "disk_union_area (2000, m=48)": area}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if kernels.compiled_backend is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':34s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(kernels.python_backend), number=1, repeat=args.repeat))
        if kernels.compiled_backend is None:
            print(f"{name:34s} {tp:10.4f} {'-':>11s} {'-':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(kernels.compiled_backend), number=1, repeat=args.repeat))
        print(f"{name:34s} {tp:10.4f} {tc:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
