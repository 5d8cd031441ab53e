"""Exception types raised across the package."""


class HyperError(Exception):
    """Base class for package errors."""


class DomainError(HyperError, ValueError):
    """Input outside the model (not a point, not on the quadric, outside the chart)."""


class DegenerateError(HyperError, ValueError):
    """Degenerate configuration (coincident endpoints, rank-deficient circle data)."""


class TangencyError(DegenerateError):
    """Geodesic lies in, or is tangent to, the plane."""


class WindowError(HyperError, ValueError):
    """Object does not fit inside the sampler window."""


class CalibrationError(HyperError, RuntimeError):
    """Calibration could not reach the required precision, or is missing."""


class ChartExitError(HyperError, RuntimeError):
    """Integrated trajectory left the admissible ball-chart radius."""


class StepRejectionError(HyperError, RuntimeError):
    """Integrator local error proxy exceeded its bound."""


class EnumerationInstabilityError(HyperError, RuntimeError):
    """Orbit count changed when the word-length bound grew."""


class DegeneratePairError(HyperError, RuntimeError):
    """A contributing (circle, geodesic) pair sits in the degeneracy band."""


class NonTransversalError(HyperError, ValueError):
    """Axis lies inside a plane of the configuration."""


class ShootingError(HyperError, RuntimeError):
    """Boundary-value geodesic search failed for too many samples."""


class EndpointResolutionError(HyperError, RuntimeError):
    """Boundary endpoints of a trajectory could not be resolved."""


class ConfigError(HyperError, ValueError):
    """Configuration failed schema validation."""
