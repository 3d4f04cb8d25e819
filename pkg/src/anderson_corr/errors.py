"""Exception types shared across the package."""


class AndersonCorrError(Exception):
    """Base class for all errors raised by this library."""


class StripViolation(AndersonCorrError):
    """Evaluation requested outside the strip of analyticity."""


class RealAxisInput(AndersonCorrError):
    """Off-axis integral requested at a real point; use the boundary-value routines."""


class CoincidentPoints(AndersonCorrError):
    """Gap-power formula requested at coincident points."""


class ConvexHullViolation(AndersonCorrError):
    """Simplex pole identity requested with the pole inside the convex hull."""


class ResourceLimit(AndersonCorrError):
    """Enumeration budget exceeded."""


class RadiusViolation(AndersonCorrError):
    """Certified tail bound requested outside the geometric convergence regime."""


class MissingPotential(AndersonCorrError):
    """Matrix element needs a site potential that was not supplied."""


class SolverFailure(AndersonCorrError):
    """Linear solver did not converge to the requested tolerance."""


class ToleranceNotMet(AndersonCorrError):
    """Adaptive quadrature could not reach the target tolerance."""


class DensityConstructionError(AndersonCorrError):
    """Supplied density fails a construction-time check (positivity, normalization, pole location)."""
