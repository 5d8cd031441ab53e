"""Atomic currents from group orbits and the intersection form.

The quotient pair count I(mu, lambda) is computed literally: enumerate the
orbits of circle atoms and geodesic atoms, keep linked pairs, and count those
whose intersection point lies in a fundamental domain of the group. An
independent oracle counts orbit translates of a disk crossing one period of
an invariant axis by solving for the crossing parameter along the axis.
"""

from dataclasses import dataclass, field

import numpy as np

from . import boundary
from .errors import DegeneratePairError, EnumerationInstabilityError, NonTransversalError
from .kinematic import check_window, crofton_count, geodesic_segment
from .lorentz import ORIGIN, GeodesicLine, Isometry, as_boundary, busemann, mdot
from .rng import Estimate, sharded_moments

DEDUP_TOL = 1e-8
DOMAIN_TOL = 1e-9


@dataclass
class GroupAction:
    """Finitely generated group acting on H^3, enumerated by word length."""

    generators: list
    max_word_length: int = 6
    domain: object = None

    def elements(self, n=None):
        """Distinct elements of word length <= n, in breadth-first order."""
        n = self.max_word_length if n is None else n
        gens = []
        for g in self.generators:
            gens += [g, g.inverse()]
        found = [Isometry.identity()]
        frontier = list(found)
        for _ in range(n):
            nxt = []
            for a in frontier:
                for g in gens:
                    b = a @ g
                    if any(b.distance(c) <= DEDUP_TOL for c in found):
                        continue
                    found.append(b)
                    nxt.append(b)
            frontier = nxt
        return found

    def conjugated(self, A):
        dom = None
        if self.domain is not None:
            inv = A.inverse()
            base = self.domain
            dom = lambda x: base(inv.apply_point(x))  # noqa: E731
        return GroupAction([g.conjugate(A) for g in self.generators], self.max_word_length, dom)


@dataclass
class AtomicConformalCurrent:
    """Weighted circle atoms and the group whose orbits they generate."""

    seeds: list  # (RoundCircle, weight)
    orbit: GroupAction = None

    def atoms(self, n):
        return _orbit_atoms(
            [(s.v, w) for s, w in self.seeds], self.orbit, n, lambda A, v: A.apply_normal(v)
        )


@dataclass
class AtomicGeodesicCurrent:
    """Weighted boundary-pair atoms and the group whose orbits they generate."""

    seeds: list  # ((xi, eta), weight)
    orbit: GroupAction = None

    def atoms(self, n):
        def act(A, pair):
            return np.concatenate([A.apply_boundary(pair[:4]), A.apply_boundary(pair[4:])])

        seeds = [(_pair_key(np.concatenate([as_boundary(a), as_boundary(b)])), w) for (a, b), w in self.seeds]
        return _orbit_atoms(seeds, self.orbit, n, lambda A, p: _pair_key(act(A, p)))


def _pair_key(p):
    """Lexicographic order of the two endpoints, so pairs are unordered."""
    a, b = p[:4], p[4:]
    return p if tuple(a) <= tuple(b) else np.concatenate([b, a])


def _orbit_atoms(seeds, orbit, n, act):
    """Distinct orbit images of the seeds with their weights (arrays).

    Images are grown one generator at a time. Applying a long word directly to
    an atom near its repelling fixed point cancels catastrophically, while each
    single step stays well conditioned.
    """
    gens = []
    for g in (orbit.generators if orbit is not None else []):
        gens += [g, g.inverse()]
    atoms, weights = [], []
    for vec, w in seeds:
        if w <= 0:
            raise ValueError("weights must be positive")
        imgs = [np.asarray(vec, dtype=float)]
        frontier = list(imgs)
        for _ in range(n):
            nxt = []
            for y0 in frontier:
                for g in gens:
                    y = act(g, y0)
                    if not any(np.max(np.abs(y - z)) <= DEDUP_TOL for z in imgs):
                        imgs.append(y)
                        nxt.append(y)
            frontier = nxt
        atoms += imgs
        weights += [w] * len(imgs)
    dim = len(seeds[0][0]) if seeds else 4
    return np.array(atoms).reshape(-1, dim), np.array(weights, dtype=float)


def _pair_count(gamma, mu, lam, n):
    v, wv = mu.atoms(n)
    pairs, wl = lam.atoms(n)
    if len(v) == 0 or len(pairs) == 0:
        return 0.0
    xi, eta = pairs[:, :4], pairs[:, 4:]
    V = v[:, None, :]
    _, deg = boundary.linking(V, xi[None], eta[None])
    x, linked = boundary.intersection_points(V, xi[None], eta[None])
    total = 0.0
    for i, j in zip(*np.nonzero(linked)):
        if gamma.domain(x[i, j]):
            total += wv[i] * wl[j]
    if np.any(deg):
        # conservative: any enumerated pair in the band invalidates the count
        raise DegeneratePairError("a (circle, geodesic) pair sits in the linking degeneracy band")
    return total


def intersection_form_atomic(gamma, mu, lam, check_stability=True):
    """Weighted count of linked (circle, geodesic) pairs meeting in the fundamental domain."""
    if gamma.domain is None:
        raise ValueError("a fundamental-domain predicate is required")
    n = gamma.max_word_length
    a = _pair_count(gamma, _with_default(mu, gamma), _with_default(lam, gamma), n)
    if check_stability:
        b = _pair_count(gamma, _with_default(mu, gamma), _with_default(lam, gamma), n + 2)
        if a != b:
            raise EnumerationInstabilityError(f"count {a} at N={n} but {b} at N={n + 2}")
    return a


def _with_default(current, gamma):
    if current.orbit is None:
        return type(current)(current.seeds, gamma)
    return current


# -- fixtures and the axis oracle ----------------------------------------------------


AXIS = (np.array([1.0, 0.0, 0.0, -1.0]), np.array([1.0, 0.0, 0.0, 1.0]))


def horoslab_domain(eta, length, base=ORIGIN, offset=0.0, tol=DOMAIN_TOL):
    """{x : offset - tol <= B_eta(base, x) < offset + length - tol}, a fundamental
    domain for translation by `length` along an axis ending at eta."""
    n = as_boundary(eta)

    def inside(x):
        b = busemann(n, base, x)  # grows toward eta
        return bool(offset - tol <= b < offset + length - tol)

    return inside


def crossing_parameter(axis, v):
    """Parameter t where the axis crosses the plane v (tanh t = -<p,v>/<w,v>)."""
    pv = mdot(axis.p, v)
    wv = mdot(axis.w, v)
    if abs(wv) <= boundary.TAU_DEG and abs(pv) <= boundary.TAU_DEG:
        raise NonTransversalError("axis lies in the plane")
    r = -pv / wv if wv != 0 else np.inf
    if not abs(r) < 1.0:
        return None
    return float(np.arctanh(r))


def geometric_intersection_oracle(disks, disk_orbit, axis, length, t0=0.0, n=None, check_stability=True):
    """Translates of disks (RoundCircle seeds) crossing one period [t0, t0 + length) of the axis."""
    tol = DOMAIN_TOL

    def count(nw):
        elems = disk_orbit.elements(nw)
        seen, c = [], 0
        for s in disks:
            for A in elems:
                v = A.apply_normal(s.v)
                if any(np.max(np.abs(v - u)) <= 1e-8 for u in seen):
                    continue
                seen.append(v)
                t = crossing_parameter(axis, v)
                if t is not None and t0 - tol <= t < t0 + length - tol:
                    c += 1
        return c

    nw = disk_orbit.max_word_length if n is None else n
    a = count(nw)
    if check_stability and count(nw + 2) != a:
        raise EnumerationInstabilityError("oracle count not stable")
    return a


@dataclass
class Fixture:
    name: str
    gamma: GroupAction
    mu: AtomicConformalCurrent
    lam: AtomicGeodesicCurrent
    disk_orbit: GroupAction
    axis: GeodesicLine
    length: float
    expected: int
    notes: dict = field(default_factory=dict)


def elementary_fixtures(length=1.0, n=4):
    """The cyclic-group fixtures: orthogonal disk (1), disjoint disk (0), index-2 cover (2)."""
    xi, eta = AXIS
    axis = GeodesicLine(xi, eta)
    h = Isometry.loxodromic(length, 0.3)
    equator = boundary.RoundCircle([0.0, 0.0, 0.0, 1.0])
    # plane at distance 2 from o, foot in direction e1: misses the axis (a line through o along e3)
    far = boundary.RoundCircle.at(2.0, [1.0, 0.0, 0.0])
    line = ((xi, eta), 1.0)
    g1 = GroupAction([h], n, horoslab_domain(eta, length))
    g2 = GroupAction([h @ h], n, horoslab_domain(eta, 2 * length))
    orbit1 = GroupAction([h], n)
    return [
        Fixture("orthogonal", g1, AtomicConformalCurrent([(equator, 1.0)]),
                AtomicGeodesicCurrent([line]), orbit1, axis, length, 1),
        Fixture("disjoint", g1, AtomicConformalCurrent([(far, 1.0)]),
                AtomicGeodesicCurrent([line]), orbit1, axis, length, 0),
        Fixture("double-cover", g2, AtomicConformalCurrent([(equator, 1.0)], orbit1),
                AtomicGeodesicCurrent([line]), orbit1, axis, 2 * length, 2),
    ]


def check_fixture(fx):
    """(engine count, oracle count) for a fixture."""
    eng = intersection_form_atomic(fx.gamma, fx.mu, fx.lam)
    orc = geometric_intersection_oracle([s for s, _ in fx.mu.seeds], fx.disk_orbit, fx.axis, fx.length)
    return eng, orc


def load_group_fixture(path):
    """Read generator matrices from a fixture file.

    Format: lines `generator = a00 a01 ... a33` (row-major decimals), plus
    optional `word_length = N` and `expected = k`. Returns (GroupAction, info).
    """
    gens, info = [], {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = (s.strip() for s in line.partition("="))
            if key == "generator":
                gens.append(Isometry(np.array(val.split(), dtype=float).reshape(4, 4)))
            else:
                info[key] = val
    return GroupAction(gens, int(info.get("word_length", 6))), info


# -- Monte Carlo pieces ----------------------------------------------------------------


def intersection_nu_geodesic(axis, length, sampler, n, seed=None, shards=1):
    """nu-mass of planes crossing one period of length `length` centered on the axis
    foot nearest o; converges to pi * length."""
    if length == 0:
        return Estimate(0.0, 0.0, int(n))
    tc = float(axis.foot_parameter(ORIGIN))
    a, b = axis(tc - 0.5 * length), axis(tc + 0.5 * length)
    seg = geodesic_segment(a, b)
    return crofton_count(seg, sampler, n, seed, shards, "length_form")


def intersection_plane_liouville(patch, sampler, n, seed=None, shards=1):
    """(lambda-mass of geodesics meeting the patch, lambda-integral of crossing counts, moments)."""
    if patch.bounding_radius == 0.0:
        z = Estimate(0.0, 0.0, int(n))
        return z, z, None
    check_window(patch.bounding_center, patch.bounding_radius, sampler.radius, 0.0, "patch")
    s = sampler.seed if seed is None else seed

    def fn(rng, k):
        xi, eta = sampler.sample(rng, k)
        c = patch.geodesic_crossings(xi, eta)
        return np.column_stack([(c > 0).astype(float), c])

    mom = sharded_moments(fn, n, s, "thm1_i", shards, ncols=2)
    return mom.column(0, sampler.mass), mom.column(1, sampler.mass), mom


def windowed_thm1_ii(region, plane_sampler, geo_sampler, n, seed=None, shards=1):
    """(pair-sampled estimate of the nu x lambda mass of linked pairs meeting in the
    region, 2 pi^2 vol(region))."""
    target = 2 * np.pi**2 * region.volume()
    if region.bounding_radius == 0.0:
        return Estimate(0.0, 0.0, int(n)), 0.0
    for smp in (plane_sampler, geo_sampler):
        check_window(region.bounding_center, region.bounding_radius, smp.radius, 0.0, "region")
    s = plane_sampler.seed if seed is None else seed

    def fn(rng, k):
        v = plane_sampler.sample(rng, k)
        xi, eta = geo_sampler.sample(rng, k)
        x, linked = boundary.intersection_points(v, xi, eta)
        out = np.zeros(k)
        if np.any(linked):
            out[linked] = region.contains(x[linked])
        return out

    est = sharded_moments(fn, n, s, "thm1_ii", shards)
    return est.estimate(scale=plane_sampler.mass * geo_sampler.mass), target


def conjugate_data(A, gamma, mu, lam):
    """Conjugate a configuration by A (for invariance checks)."""
    g2 = gamma.conjugated(A)
    mu2 = AtomicConformalCurrent([(s.transformed(A), w) for s, w in mu.seeds],
                                 None if mu.orbit is None else mu.orbit.conjugated(A))
    lam2 = AtomicGeodesicCurrent(
        [((A.apply_boundary(a), A.apply_boundary(b)), w) for (a, b), w in lam.seeds],
        None if lam.orbit is None else lam.orbit.conjugated(A))
    return g2, mu2, lam2

