"""Integral geometry of hyperbolic 3-space: measures, currents, conformal metrics."""

from .boundary import RoundCircle, intersection_points, linking
from .conjugacy import TimeChange, chi, conjugacy_residual, time_change
from .currents import (
    AtomicConformalCurrent,
    AtomicGeodesicCurrent,
    GroupAction,
    geometric_intersection_oracle,
    intersection_form_atomic,
)
from .entropy import CountingFamily, SurfaceRecord, cover_genus, entropy_limit, gauss_bonnet_defect
from .kernels import BACKEND
from .kinematic import GeodesicSampler, PlaneSampler, crofton_length, santalo_area, santalo_volume
from .lorentz import GeodesicLine, Isometry, busemann, dist
from .metrics import Bump, ConformalMetric, FlowState, area_ratio_pointwise, flow, g_crofton_check, geodesic_stretch
from .rng import Estimate

__version__ = "0.1.0"

__all__ = [
    "AtomicConformalCurrent", "AtomicGeodesicCurrent", "BACKEND", "Bump", "ConformalMetric",
    "CountingFamily", "Estimate", "FlowState", "GeodesicLine", "GeodesicSampler", "GroupAction",
    "Isometry", "PlaneSampler", "RoundCircle", "SurfaceRecord", "TimeChange", "area_ratio_pointwise",
    "busemann", "chi", "conjugacy_residual", "cover_genus", "crofton_length", "dist", "entropy_limit",
    "flow", "g_crofton_check", "gauss_bonnet_defect", "geodesic_stretch", "geometric_intersection_oracle",
    "intersection_form_atomic", "intersection_points", "linking", "santalo_area", "santalo_volume",
    "time_change",
]
