"""Exception types raised by the supertoroid library."""


class SupertoroidError(Exception):
    """Base class for all library errors."""


class DegenerateMeanSuperellipse(SupertoroidError):
    """Mean superellipse collapses to a point (a4 = 0)."""


class OnAxis(SupertoroidError):
    """Point projects onto the hole axis; polar angle undefined."""


class OnMeanSuperellipse(SupertoroidError):
    """Point sits on the tube centerline; minor ratio diverges."""


class SeamSingularity(SupertoroidError):
    """Expression indeterminate at a parameter seam."""


class CuspPoint(SupertoroidError):
    """Surface normal undefined (normalizer vanishes at a cusp)."""


class DegenerateMetric(SupertoroidError):
    """First fundamental form is singular (EG - F^2 ~ 0)."""


class EmptyCloud(SupertoroidError):
    """Operation requires a non-empty point cloud."""


class MissingNormals(SupertoroidError):
    """Operation requires per-point normals."""


class EmptyResult(SupertoroidError):
    """View culling removed every point."""


class TooFewPoints(SupertoroidError):
    """Not enough points to initialize a fit."""


class OptimizerFailure(SupertoroidError):
    """Local optimizer failed to produce a usable model."""


class AllStartsFailed(OptimizerFailure):
    """Every multi-start attempt failed."""


class ParseError(SupertoroidError):
    """Malformed point-cloud file.

    Carries the 1-based line number of the offending row.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedFormat(SupertoroidError):
    """Unknown point-cloud file format."""
