"""Shared hypothesis strategies."""

import numpy as np
from hypothesis import strategies as st

from hypercurrents.lorentz import Isometry, as_boundary

finite = dict(allow_nan=False, allow_infinity=False)


def unit3():
    return st.tuples(*[st.floats(-1, 1, **finite)] * 3).filter(
        lambda v: 0.2 < np.linalg.norm(v)).map(lambda v: np.array(v) / np.linalg.norm(v))


def points(max_r=2.0):
    """Points of H^3 within distance max_r of o."""
    return st.tuples(unit3(), st.floats(0, max_r, **finite)).map(
        lambda a: np.concatenate([[np.cosh(a[1])], np.sinh(a[1]) * a[0]]))


def boundary_points():
    return unit3().map(as_boundary)


def isometries(scale=1.5):
    return st.tuples(unit3(), st.floats(0, scale, **finite), unit3(), st.floats(-np.pi, np.pi, **finite)).map(
        lambda a: Isometry.boost(a[0], a[1]) @ Isometry.rotation(a[2], a[3]))
