import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypercurrents.entropy import (
    CountingFamily,
    SurfaceRecord,
    TrivialFamily,
    area_from_defect,
    cover_genus,
    entropy_limit,
    gauss_bonnet_defect,
    growth_values,
    is_monotone_toward,
    richardson_alpha,
)
from hypercurrents.errors import DomainError

GRID = np.logspace(6, 8, 9)


def test_defect_examples():
    assert gauss_bonnet_defect(2, 4 * math.pi) == 0.0
    assert gauss_bonnet_defect(3, 4 * math.pi) == pytest.approx(8 * math.pi)
    assert area_from_defect(2, 0.0) == 4 * math.pi


@pytest.mark.parametrize("g,a", [(1, 1.0), (2.5, 1.0), (2, 0.0), (2, 13.0)])
def test_defect_domain(g, a):
    with pytest.raises(DomainError):
        gauss_bonnet_defect(g, a)


@given(st.integers(2, 40), st.floats(0.5, 1.0))
def test_round_trip_exact(g, frac):
    top = 4 * math.pi * (g - 1)
    a = frac * top
    assert area_from_defect(g, gauss_bonnet_defect(g, a)) == a


@given(st.integers(2, 40), st.floats(0.01, 1.0))
def test_round_trip_close(g, frac):
    a = frac * 4 * math.pi * (g - 1)
    assert area_from_defect(g, gauss_bonnet_defect(g, a)) == pytest.approx(a, rel=1e-13)


@given(st.integers(2, 50), st.integers(1, 50))
def test_cover_genus_euler(g, k):
    # Euler characteristic multiplies by the degree
    assert 2 - 2 * cover_genus(g, k) == k * (2 - 2 * g)


def test_cover_scales_record():
    rec = SurfaceRecord(2, 10.0)
    c = rec.cover(3)
    assert c.genus == 4 and c.area == 30.0
    assert c.defect == pytest.approx(3 * rec.defect)
    assert c.defect == pytest.approx(gauss_bonnet_defect(4, 30.0))


def test_record_validates_defect():
    with pytest.raises(DomainError):
        SurfaceRecord(2, 10.0, defect=1.0)
    with pytest.raises(DomainError):
        cover_genus(2, 0)


@pytest.mark.parametrize("A,target", [(1.0, 2.0), (2.0, 1.0)])
def test_limit(A, target):
    vals, lim = entropy_limit(CountingFamily(1.0, A, 0.1), GRID)
    assert abs(lim - target) <= 0.05 * target
    # raw values approach the alpha-shifted limit monotonically
    assert is_monotone_toward(vals, CountingFamily(1.0, A, 0.1).limit)


@given(st.floats(0.5, 5.0), st.floats(0.5, 3.0))
def test_limit_scales_inverse_area(A, c):
    _, lim = entropy_limit(CountingFamily(c, A, 0.1), GRID)
    assert lim == pytest.approx(2.0 / A, rel=0.05)


def test_trivial_family_zero():
    vals, lim = entropy_limit(TrivialFamily(), GRID)
    assert np.all(vals == 0) and lim == 0


def test_grid_validation():
    with pytest.raises(DomainError):
        entropy_limit(CountingFamily(), GRID[::-1])
    with pytest.raises(DomainError):
        entropy_limit(CountingFamily(), np.logspace(3, 5, 5))


def test_richardson_exact_on_polynomials():
    a = (0.1, 0.05, 0.025)
    assert richardson_alpha(a, [3 + 2 * x - x * x for x in a]) == pytest.approx(3.0, abs=1e-12)


def test_growth_values_formula():
    L = np.array([1e6])
    v = growth_values(lambda x: np.full_like(x, 10.0), L)
    assert v[0] == pytest.approx(4 * math.pi * 10 / (1e6 * math.log(1e6)))


def test_cover_genus_examples():
    assert cover_genus(2, 1) == 2
    assert cover_genus(2, 3) == 4


@given(st.integers(2, 30), st.integers(1, 12), st.integers(1, 12))
def test_cover_genus_multiplicative(g, k1, k2):
    assert cover_genus(cover_genus(g, k1), k2) == cover_genus(g, k1 * k2)
