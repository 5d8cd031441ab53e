"""Surface-count arithmetic: Gauss-Bonnet defect, cover genus and the 2/A growth limit.

Counts are handled as logarithms throughout; N(L) itself overflows long before
the grid reaches interesting scales.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ALPHAS = (0.1, 0.05, 0.025)


def _genus(g):
    if isinstance(g, bool) or int(g) != g or g < 2:
        raise DomainError(f"genus must be an integer >= 2, got {g!r}")
    return int(g)


def gauss_bonnet_defect(g, a):
    """Total squared second fundamental form of a minimal surface of genus g and area a."""
    g = _genus(g)
    if not a > 0:
        raise DomainError("area must be positive")
    top = 4 * math.pi * (g - 1)
    if a > top:
        raise DomainError(f"area {a} exceeds 4 pi (g - 1) = {top}")
    return 2.0 * (top - a)


def area_from_defect(g, d):
    g = _genus(g)
    if d < 0:
        raise DomainError("defect must be nonnegative")
    return 4 * math.pi * (g - 1) - 0.5 * d


def cover_genus(g, k):
    """Genus of a degree-k cover of a closed genus-g surface."""
    g = _genus(g)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"degree must be an integer >= 1, got {k!r}")
    return int(k) * (g - 1) + 1


@dataclass(frozen=True)
class SurfaceRecord:
    genus: int
    area: float
    defect: float = None

    def __post_init__(self):
        _genus(self.genus)
        if not self.area > 0:
            raise DomainError("area must be positive")
        d = gauss_bonnet_defect(self.genus, self.area)
        if self.defect is None:
            object.__setattr__(self, "defect", d)
        elif not math.isclose(self.defect, d, rel_tol=1e-12, abs_tol=1e-9):
            raise DomainError(f"defect {self.defect} inconsistent with area (expected {d})")

    def cover(self, k):
        """Degree-k cover: genus by the cover formula, area and defect scale by k."""
        return SurfaceRecord(cover_genus(self.genus, k), k * self.area, k * self.defect)


@dataclass(frozen=True)
class CountingFamily:
    """Synthetic counts N(L) = (c h)^{2h} with h = (1 + alpha) L / (4 pi A) + 1."""

    c: float = 1.0
    A: float = 1.0
    alpha: float = 0.1

    def __post_init__(self):
        if not (self.c > 0 and self.A > 0 and self.alpha > 0):
            raise DomainError("c, A and alpha must be positive")

    def h(self, L):
        return (1.0 + self.alpha) * np.asarray(L, dtype=float) / (4 * math.pi * self.A) + 1.0

    def log_count(self, L):
        h = self.h(L)
        return 2.0 * h * np.log(self.c * h)

    def with_alpha(self, alpha):
        return CountingFamily(self.c, self.A, alpha)

    @property
    def limit(self):
        return 2.0 * (1.0 + self.alpha) / self.A


def growth_values(log_count, L_grid):
    """4 pi ln N(L) / (L ln L) on the grid, given ln N as a callable."""
    L = np.asarray(L_grid, dtype=float)
    return 4 * math.pi * np.asarray(log_count(L), dtype=float) / (L * np.log(L))


def _tail_limit(L, vals):
    """Remove the leading 1/ln L term using the last two grid values."""
    l1, l2 = math.log(L[-2]), math.log(L[-1])
    return (vals[-1] * l2 - vals[-2] * l1) / (l2 - l1)


def entropy_limit(family, L_grid, extrapolate=True):
    """Growth values of `family` on L_grid.

    Returns (values, tail) where tail is the 1/ln L extrapolated limit; with
    extrapolate=True and an alpha-family, tail is further Richardson
    extrapolated over ALPHAS toward alpha = 0.
    """
    L = np.asarray(L_grid, dtype=float)
    if np.any(np.diff(L) <= 0):
        raise DomainError("L_grid must be increasing")
    if L[-1] < 1e6:
        raise DomainError("L_grid must reach 1e6")
    vals = growth_values(family.log_count, L)
    if not extrapolate or not isinstance(family, CountingFamily):
        return vals, _tail_limit(L, vals)
    tails = [_tail_limit(L, growth_values(family.with_alpha(a).log_count, L)) for a in ALPHAS]
    return vals, richardson_alpha(ALPHAS, tails)


def richardson_alpha(alphas, values):
    """Polynomial extrapolation in alpha to alpha = 0."""
    a = np.asarray(alphas, dtype=float)
    v = np.asarray(values, dtype=float)
    coef = np.polyfit(a, v, len(a) - 1)
    return float(np.polyval(coef, 0.0))


class TrivialFamily:
    """N(L) = 1."""

    def log_count(self, L):
        return np.zeros_like(np.asarray(L, dtype=float))


def is_monotone_toward(values, target):
    """True if |values - target| is nonincreasing along the grid."""
    err = np.abs(np.asarray(values) - target)
    return bool(np.all(np.diff(err) <= 1e-12 * np.maximum(1.0, err[:-1])))
