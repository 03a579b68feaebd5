"""Exception types shared across the library.

Numerical failures get their own classes so callers (and the CLI) can
distinguish bad input from a computation that left its domain of validity.
"""


class LandgeoError(Exception):
    """Base class for all library errors."""


class ValidationError(LandgeoError):
    """Malformed input: wrong shapes, non-finite data, schema violations.

    ``field`` optionally carries a path like ``"landmarks[2][1]"`` pointing
    at the offending entry of a problem file.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class NearSingular(LandgeoError):
    """Kernel Gram matrix is numerically singular (landmarks nearly coincide
    relative to the kernel width)."""


class Collision(LandgeoError):
    """Landmark trajectory fell below the minimum-separation floor."""


class EnergyDrift(LandgeoError):
    """Relative energy drift along an integrated path exceeded its bound."""


class DegeneratePlane(LandgeoError):
    """Sectional curvature requested for a (numerically) degenerate 2-plane."""


class LineSearchFailed(LandgeoError):
    """Backtracking line search found no decrease."""


class InvalidDiffeo(LandgeoError):
    """Grid function does not define an increasing map (f' <= -1 somewhere)."""


class BoundaryHit(LandgeoError):
    """Chart value reached the -2 boundary: the point lies in the monotone
    completion, not in the diffeomorphism group."""


class DegenerateDirection(LandgeoError):
    """Two chart points coincide; the quantity needs a nonzero direction."""
