"""Batch driver: `hypercurrents <subcommand> [--config FILE] [--seed N] [--out DIR] ...`.

Every job returns Report records, printed as one JSON object per line and,
with --out, appended to DIR/reports.jsonl.
"""

import argparse
import configparser
import csv
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import CalibrationError, ConfigError, HyperError
from .lorentz import ORIGIN, dist

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CALIBRATION, EXIT_NUMERICAL = 0, 1, 2, 3, 4

REPORT_KEYS = ("task", "estimate", "target", "abs_err", "rel_err", "standard_error",
               "n_samples", "seed", "shards", "elapsed", "passed")

# section -> key -> type; defaults live in data/default.ini
SCHEMA = {
    "run": {"seed": int, "shards": int, "calibration": str, "csv": bool},
    "calibrate": {"n_nu": int, "n_lambda": int, "length": float, "disk_radius": float},
    "crofton": {"n": int, "length": float, "rtol": float},
    "santalo": {"n": int, "m": int, "ball_radius": float, "disk_radius": float, "rtol": float},
    "liouville": {"n": int, "disk_radius": float, "rtol": float, "g_n": int, "g_disk_radius": float,
                  "g_rtol_flat": float, "g_rtol_bump": float, "g_bumps": str},
    "length_form": {"n": int, "lengths": str, "rtol": float},
    "thm1": {"n_i": int, "patch_radius": float, "n_ii": int, "region_radius": float, "rtol_ii": float},
    "intersect": {"length": float, "word_length": int, "fixtures": str},
    "flow": {"t": float, "dt": float, "atol": float},
    "stretch": {"n": int, "window": float, "horizon": float, "c": float, "bumps": str, "atol_flat": float,
                "atol_scaled": float},
    "conjugacy": {"n": int, "tau": float, "t": float, "window": float, "bumps": str, "atol": float,
                  "cocycle_atol": float, "flat_atol": float, "n_bounded": int, "windows": str,
                  "bounded_rtol": float},
    "entropy": {"areas": str, "c": float, "l_min": float, "l_max": float, "points": int, "rtol": float},
}
POSITIVE = ("rtol", "atol", "n", "m", "dt", "tau", "shards")

CAL_KEYS = ("c0", "c1", "seed", "n", "se_c0", "se_c1")


# -- configuration -----------------------------------------------------------------


def _coerce(section, key, raw):
    typ = SCHEMA[section][key]
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if typ is int:
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        return typ(raw.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {typ.__name__}") from None


def load_config(path=None, overrides=None):
    """Defaults merged with an optional user file; validated against SCHEMA."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(resources.files("hypercurrents").joinpath("data/default.ini").read_text())
    if path is not None:
        user = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                user.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for sec in user.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown section [{sec}]")
            for key, val in user[sec].items():
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key [{sec}] {key}")
                parser[sec][key] = val
    cfg = {}
    for sec, keys in SCHEMA.items():
        if sec not in parser:
            raise ConfigError(f"missing section [{sec}]")
        cfg[sec] = {}
        for key in keys:
            if key not in parser[sec]:
                raise ConfigError(f"missing key [{sec}] {key}")
            val = _coerce(sec, key, parser[sec][key])
            if any(key == p or key.startswith(p + "_") for p in POSITIVE) and val <= 0:
                raise ConfigError(f"[{sec}] {key} must be positive")
            cfg[sec][key] = val
    if cfg["flow"]["dt"] > 1e-2:
        raise ConfigError("[flow] dt must be <= 1e-2")
    for sec, keys in SCHEMA.items():
        for key in keys:
            if key.endswith("bumps"):
                parse_bumps(cfg[sec][key])
    if any(b.amplitude < 0 for b in parse_bumps(cfg["stretch"]["bumps"])):
        raise ConfigError("[stretch] bumps must be nonnegative")
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg["run"][key] = val
    if cfg["run"]["seed"] < 0 or cfg["run"]["shards"] < 1:
        raise ConfigError("seed must be >= 0 and shards >= 1")
    return cfg


def parse_bumps(text):
    """'x y z radius amplitude; ...' -> list of Bump, checked against the metric caps."""
    from .errors import DomainError
    from .metrics import Bump, ConformalMetric

    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        vals = parse_floats(chunk)
        if len(vals) != 5:
            raise ConfigError(f"bump needs 5 numbers, got {chunk!r}")
        out.append(Bump(tuple(vals[:3]), vals[3], vals[4]))
    try:
        ConformalMetric(out)
    except DomainError as exc:
        raise ConfigError(f"bad bump: {exc}") from None
    return out


def parse_floats(text):
    try:
        return [float(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected numbers, got {text!r}") from None


# -- calibration fixture --------------------------------------------------------------


def read_calibration(path):
    from .kinematic import Calibration

    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError:
        raise CalibrationError(f"calibration file {path} not found; run `hypercurrents calibrate`") from None
    vals = {}
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (s.strip() for s in line.partition("="))
        if not sep or key not in CAL_KEYS:
            raise CalibrationError(f"bad calibration line {line!r}")
        vals[key] = val
    missing = [k for k in CAL_KEYS if k not in vals]
    if missing:
        raise CalibrationError(f"calibration file lacks {', '.join(missing)}")
    return Calibration(float(vals["c0"]), float(vals["c1"]), float(vals["se_c0"]), float(vals["se_c1"]),
                       int(vals["seed"]), int(vals["n"]))


def write_calibration(path, cal):
    with open(path, "w", encoding="utf-8") as fh:
        for key in CAL_KEYS:
            fh.write(f"{key} = {getattr(cal, key)!r}\n")


def calibration_path(cfg):
    p = cfg["run"]["calibration"]
    if p:
        return p
    return str(resources.files("hypercurrents").joinpath("data/calibration.txt"))


# -- reports ---------------------------------------------------------------------------


@dataclass
class Report:
    task: str
    estimate: float
    target: float
    abs_err: float
    rel_err: float
    standard_error: float
    n_samples: int
    seed: int
    shards: int
    elapsed: float
    passed: bool

    def to_json(self):
        def clean(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (int, np.integer)):
                return int(v)
            if isinstance(v, str):
                return v
            v = float(v)
            return v if math.isfinite(v) else None

        return json.dumps({k: clean(getattr(self, k)) for k in REPORT_KEYS})


def passes(estimate, target, se=0.0, rtol=0.0, atol=0.0):
    tol = max(atol, rtol * abs(target), 3.0 * se)
    return bool(abs(estimate - target) <= tol)


class Context:
    """Per-run state handed to each job."""

    def __init__(self, cfg, out=None):
        self.cfg = cfg
        self.seed = cfg["run"]["seed"]
        self.shards = cfg["run"]["shards"]
        self.out = out
        self._cal = None
        self._t = time.perf_counter()

    @property
    def calibration(self):
        if self._cal is None:
            self._cal = read_calibration(calibration_path(self.cfg))
        return self._cal

    def start(self):
        self._t = time.perf_counter()

    def report(self, task, estimate, target, se=0.0, n=0, rtol=0.0, atol=0.0, passed=None):
        estimate, target, se = float(estimate), float(target), float(se)
        err = abs(estimate - target)
        rel = err / abs(target) if target != 0 else (0.0 if err == 0 else math.inf)
        if passed is None:
            passed = passes(estimate, target, se, rtol, atol)
        r = Report(task, estimate, target, err, rel, se, int(n), self.seed, self.shards,
                   round(time.perf_counter() - self._t, 3), bool(passed))
        self._t = time.perf_counter()
        return r

    def write_csv(self, name, header, rows):
        if self.out is None or not self.cfg["run"]["csv"]:
            return
        with open(os.path.join(self.out, f"{name}.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def _combined_se(est, rel_cal):
    """Standard error including the relative uncertainty of a calibration constant."""
    return math.hypot(est.stderr, abs(est.value) * rel_cal)


# -- jobs ------------------------------------------------------------------------------


def job_calibrate(ctx):
    from .kinematic import Calibration, calibrate_liouville, calibrate_nu

    c = ctx.cfg["calibrate"]
    c0, se0 = calibrate_nu(ctx.seed, c["n_nu"], ctx.shards, c["length"])
    r0 = ctx.report("calibrate-c0", c0, 0.5, se0, c["n_nu"], rtol=0.01)
    c1, se1 = calibrate_liouville(ctx.seed, c["n_lambda"], ctx.shards, c["disk_radius"])
    r1 = ctx.report("calibrate-c1", c1, 2.0, se1, c["n_lambda"], rtol=0.01)
    cal = Calibration(c0, c1, se0, se1, ctx.seed, min(c["n_nu"], c["n_lambda"]))
    if ctx.out is not None:
        write_calibration(os.path.join(ctx.out, "calibration.txt"), cal)
    return [r0, r1]


def job_crofton(ctx):
    from .kinematic import PlaneSampler, crofton_length, unit_segment

    c, cal = ctx.cfg["crofton"], ctx.calibration
    seg = unit_segment(c["length"])
    R = float(np.max(dist(ORIGIN, seg))) + 0.1
    est = crofton_length(seg, PlaneSampler(R, cal.c0, ctx.seed), c["n"], ctx.seed, ctx.shards)
    ratio = est.scaled(1.0 / c["length"])
    return [ctx.report("crofton-length-over-pi", ratio.value, 1.0, _combined_se(ratio, cal.se_c0 / cal.c0),
                       c["n"], rtol=c["rtol"])]


def job_santalo(ctx):
    from .kinematic import PlaneSampler, santalo_area, santalo_volume
    from .shapes import BallRegion, GeodesicDisk

    c, cal = ctx.cfg["santalo"], ctx.calibration
    rel = cal.se_c0 / cal.c0
    ball = BallRegion(ORIGIN, c["ball_radius"])
    vol = santalo_volume(ball, PlaneSampler(c["ball_radius"] + 0.05, cal.c0, ctx.seed), c["n"], c["m"],
                         ctx.seed, ctx.shards)
    out = [ctx.report("santalo-volume", vol.value, ball.volume(), _combined_se(vol, rel), c["n"], rtol=c["rtol"])]
    disk = GeodesicDisk(radius=c["disk_radius"])
    area = santalo_area(disk, PlaneSampler(c["disk_radius"] + 0.05, cal.c0, ctx.seed), c["n"], ctx.seed,
                        ctx.shards)
    out.append(ctx.report("santalo-area", area.value, disk.area(), _combined_se(area, rel), c["n"],
                          rtol=c["rtol"]))
    return out


def job_liouville(ctx):
    from .kinematic import GeodesicSampler, liouville_crossings
    from .metrics import ConformalMetric, g_crofton_check
    from .shapes import GeodesicDisk

    c, cal = ctx.cfg["liouville"], ctx.calibration
    rel = cal.se_c1 / cal.c1
    disk = GeodesicDisk(radius=c["disk_radius"])
    est = liouville_crossings(disk, GeodesicSampler(c["disk_radius"] + 0.05, cal.c1, ctx.seed), c["n"],
                              ctx.seed, ctx.shards)
    out = [ctx.report("liouville-crossings", est.value, math.pi * disk.area(), _combined_se(est, rel), c["n"],
                      rtol=c["rtol"])]
    big = GeodesicDisk(radius=c["g_disk_radius"])
    for name, g, rtol in (("g-crofton-flat", ConformalMetric(), c["g_rtol_flat"]),
                          ("g-crofton-bump", ConformalMetric(parse_bumps(c["g_bumps"])), c["g_rtol_bump"])):
        res = g_crofton_check(g, big, c["g_n"], ctx.seed, cal.c1, shards=ctx.shards)
        out.append(ctx.report(name, res.lhs.value, res.rhs, _combined_se(res.lhs, rel), c["g_n"], rtol=rtol))
    return out


def job_length_form(ctx):
    from .currents import AXIS, intersection_nu_geodesic
    from .kinematic import PlaneSampler
    from .lorentz import GeodesicLine

    c, cal = ctx.cfg["length_form"], ctx.calibration
    axis = GeodesicLine(*AXIS)
    out = []
    for ell in parse_floats(c["lengths"]):
        R = 0.5 * ell + 0.1
        est = intersection_nu_geodesic(axis, ell, PlaneSampler(R, cal.c0, ctx.seed), c["n"], ctx.seed, ctx.shards)
        out.append(ctx.report(f"length-form-l{ell:g}", est.value, math.pi * ell,
                              _combined_se(est, cal.se_c0 / cal.c0), c["n"], rtol=c["rtol"]))
    return out


def job_thm1(ctx):
    from .currents import intersection_plane_liouville, windowed_thm1_ii
    from .kinematic import GeodesicSampler, PlaneSampler
    from .shapes import BallRegion, GeodesicDisk, bent_patch

    c, cal = ctx.cfg["thm1"], ctx.calibration
    rel1 = cal.se_c1 / cal.c1
    disk = GeodesicDisk(radius=c["patch_radius"])
    bent = bent_patch(disk.area())
    out = []
    for name, patch in (("thm1-i-flat", disk), ("thm1-i-bent", bent)):
        R = float(dist(ORIGIN, patch.bounding_center)) + patch.bounding_radius + 0.05
        linked, _, _ = intersection_plane_liouville(patch, GeodesicSampler(R, cal.c1, ctx.seed), c["n_i"],
                                                    ctx.seed, ctx.shards)
        se = _combined_se(linked, rel1)
        target = math.pi * patch.area()
        if name.endswith("flat"):
            out.append(ctx.report(name, linked.value, target, se, c["n_i"]))
        else:
            # strictly below by more than 3 sigma
            out.append(ctx.report(name, linked.value, target, se, c["n_i"],
                                  passed=target - linked.value > 3.0 * se))
    r = c["region_radius"]
    region = BallRegion(ORIGIN, r)
    est, target = windowed_thm1_ii(region, PlaneSampler(r, cal.c0, ctx.seed), GeodesicSampler(r, cal.c1, ctx.seed),
                                   c["n_ii"], ctx.seed, ctx.shards)
    se = math.hypot(est.stderr, est.value * math.hypot(cal.se_c0 / cal.c0, rel1))
    out.append(ctx.report("thm1-ii-window", est.value, target, se, c["n_ii"], rtol=c["rtol_ii"]))
    return out


def job_intersect(ctx):
    from .currents import check_fixture, elementary_fixtures, load_group_fixture

    c = ctx.cfg["intersect"]
    out, rows = [], []
    for fx in elementary_fixtures(c["length"], c["word_length"]):
        eng, orc = check_fixture(fx)
        ok = eng == orc == fx.expected
        rows.append((fx.name, eng, orc, fx.expected))
        out.append(ctx.report(f"intersect-{fx.name}", eng, orc, 0.0, 0, passed=ok))
    for path in c["fixtures"].split():
        gamma, info = load_group_fixture(path)
        out.append(ctx.report(f"intersect-file-{os.path.basename(path)}", len(gamma.elements()),
                              float(info.get("expected", len(gamma.elements()))), 0.0, 0))
    ctx.write_csv("intersect", ("fixture", "engine", "oracle", "expected"), rows)
    return out


def job_stretch(ctx):
    from .lorentz import ball_to_hyperboloid
    from .metrics import Bump, ConformalMetric, FlowState, flow, flow_path, g_unit_chart, geodesic_stretch

    f = ctx.cfg["flow"]
    g0 = ConformalMetric()
    s = FlowState(np.zeros(3), np.array([0.5, 0.0, 0.0]))
    xs, _, _ = flow_path(g0, s, f["t"], f["dt"])
    t = np.linspace(0.0, f["t"], len(xs))
    exact = np.column_stack([np.cosh(t), np.sinh(t), 0 * t, 0 * t])
    err = float(np.max(np.abs(ball_to_hyperboloid(xs) - exact)))
    out = [ctx.report("flow-closed-form", err, 0.0, 0.0, len(xs), atol=f["atol"])]

    g = ConformalMetric([Bump((0.0, 0.0, 0.0), 1.0, 0.1)])
    x = np.array([0.0, 0.1, 0.0])
    s = FlowState(x, g_unit_chart(g, x, np.array([1.0, 0.2, 0.0])))
    ref = flow(g, s, 2.0, 1e-2 / 32).position
    e1 = np.max(np.abs(flow(g, s, 2.0, 1e-2).position - ref))
    e2 = np.max(np.abs(flow(g, s, 2.0, 5e-3).position - ref))
    order = math.log2(e1 / e2)
    out.append(ctx.report("flow-order", order, 4.0, 0.0, 3, passed=abs(e1 / e2 / 16 - 1) <= 1.0 and order > 3))

    c = ctx.cfg["stretch"]
    args = (c["window"], c["horizon"], c["n"], ctx.seed)
    est = geodesic_stretch(g0, *args, shards=ctx.shards)
    out.append(ctx.report("stretch-flat", est.value, 1.0, 0.0, c["n"], atol=c["atol_flat"]))
    est = geodesic_stretch(ConformalMetric.scaled(c["c"]), *args, shards=ctx.shards)
    out.append(ctx.report("stretch-scaled", est.value, 1.0 / c["c"], 0.0, c["n"], atol=c["atol_scaled"]))
    bump = ConformalMetric(parse_bumps(c["bumps"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = geodesic_stretch(bump, *args, shards=ctx.shards)
    out.append(ctx.report("stretch-bump-upper", est.value, 1.0, est.stderr, c["n"],
                          passed=est.value <= 1.0 + 3.0 * est.stderr))
    return out


def job_conjugacy(ctx):
    from .conjugacy import (
        TimeChange,
        bounded_distance_check,
        cocycle_residual,
        conjugacy_residual,
        psi_length_identity,
        sample_states,
    )
    from .metrics import ConformalMetric
    from .rng import generator

    c = ctx.cfg["conjugacy"]
    tau = c["tau"]
    g = ConformalMetric(parse_bumps(c["bumps"]))
    X, W = sample_states(generator(ctx.seed, "conjugacy"), c["n"], c["window"])
    g0 = ConformalMetric()
    tc = TimeChange(g0, (X[0], W[0]), tau, c["t"])
    grid = np.linspace(0.0, c["t"], 7)
    flat_err = max(float(np.max(np.abs(tc.T(grid) - grid))), abs(tc.psi() - 1.0))
    out = [ctx.report("conjugacy-flat-T-psi", flat_err, 0.0, 0.0, 1, atol=c["flat_atol"])]

    ts = np.linspace(0.0, c["t"], 4)
    rows, worst = [], 0.0
    for i, (x, w) in enumerate(zip(X, W)):
        res = max(conjugacy_residual(g, (x, w), t, tau) for t in ts)
        rows.append((i, res))
        worst = max(worst, res)
    ctx.write_csv("conjugacy", ("sample", "residual"), rows)
    out.append(ctx.report("conjugacy-residual", worst, 0.0, 0.0, c["n"], atol=c["atol"]))

    grid5 = np.linspace(0.0, 2.0, 5)
    coc = max(cocycle_residual(g, (x, w), grid5, grid5, tau) for x, w in zip(X[:3], W[:3]))
    out.append(ctx.report("conjugacy-cocycle", coc, 0.0, 0.0, 3, atol=c["cocycle_atol"]))

    gap, slack = 0.0, math.inf
    for x, w in zip(X, W):
        lhs, rhs, bound = psi_length_identity(g, (x, w), 5.0, tau)
        gap = max(gap, abs(lhs - rhs))
        slack = min(slack, bound + 1e-4 - abs(lhs - rhs))
    out.append(ctx.report("conjugacy-psi-length", gap, 0.0, 0.0, c["n"], passed=slack >= 0))

    radii = parse_floats(c["windows"])
    maxima = [bounded_distance_check(g, c["n_bounded"], r, tau, ctx.seed) for r in radii]
    out.append(ctx.report("conjugacy-bounded-distance", maxima[-1], maxima[0], 0.0, c["n_bounded"],
                          rtol=c["bounded_rtol"]))
    return out


def job_entropy(ctx):
    from .entropy import CountingFamily, entropy_limit, gauss_bonnet_defect, area_from_defect

    c = ctx.cfg["entropy"]
    L = np.logspace(math.log10(c["l_min"]), math.log10(c["l_max"]), c["points"])
    out, rows = [], []
    for A in parse_floats(c["areas"]):
        vals, lim = entropy_limit(CountingFamily(c["c"], A, 0.1), L)
        rows.extend((A, l, v) for l, v in zip(L, vals))
        out.append(ctx.report(f"entropy-A{A:g}", lim, 2.0 / A, 0.0, len(L), rtol=c["rtol"]))
    worst = 0.0
    for g in range(2, 12):
        top = 4 * math.pi * (g - 1)
        for a in np.linspace(0.5 * top, top, 17):
            worst = max(worst, abs(area_from_defect(g, gauss_bonnet_defect(g, a)) - a))
    out.append(ctx.report("gauss-bonnet-roundtrip", worst, 0.0, 0.0, 170, passed=worst == 0.0))
    ctx.write_csv("entropy", ("A", "L", "value"), rows)
    return out


JOBS = {
    "calibrate": job_calibrate,
    "verify-crofton": job_crofton,
    "verify-santalo": job_santalo,
    "verify-liouville": job_liouville,
    "verify-length-form": job_length_form,
    "verify-thm1": job_thm1,
    "intersect": job_intersect,
    "stretch": job_stretch,
    "conjugacy": job_conjugacy,
    "entropy-asymptotics": job_entropy,
}
ALL_ORDER = [k for k in JOBS if k != "calibrate"]


def run(subcommand, cfg, out=None, stream=sys.stdout):
    """Run one subcommand (or `all`); returns (exit code, reports)."""
    if subcommand != "all" and subcommand not in JOBS:
        return EXIT_CONFIG, []
    ctx = Context(cfg, out)
    if out is not None:
        os.makedirs(out, exist_ok=True)
    names = ALL_ORDER if subcommand == "all" else [subcommand]
    reports, code = [], EXIT_OK
    for name in names:
        ctx.start()
        try:
            rs = JOBS[name](ctx)
        except ConfigError as exc:
            print(f"{name}: config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG, reports
        except CalibrationError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            code = max(code, EXIT_CALIBRATION)
            rs = [ctx.report(name, math.nan, math.nan, passed=False)]
        except (HyperError, FloatingPointError, np.linalg.LinAlgError) as exc:
            print(f"{name}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = max(code, EXIT_NUMERICAL)
            rs = [ctx.report(name, math.nan, math.nan, passed=False)]
        for r in rs:
            line = r.to_json()
            print(line, file=stream, flush=True)
            if out is not None:
                with open(os.path.join(out, "reports.jsonl"), "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
        reports.extend(rs)
    if code == EXIT_OK and not all(r.passed for r in reports):
        code = EXIT_FAIL
    return code, reports


def build_parser():
    p = argparse.ArgumentParser(prog="hypercurrents", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=list(JOBS) + ["all"])
    p.add_argument("--config", help="INI file overriding the packaged defaults")
    p.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
    p.add_argument("--out", help="directory for reports.jsonl, CSV diagnostics and calibration output")
    p.add_argument("--check", action="store_true", help="exit nonzero if any report fails (always on)")
    p.add_argument("--shards", type=int, help="number of RNG shards (overrides [run] shards)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "shards": args.shards})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, _ = run(args.subcommand, cfg, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
