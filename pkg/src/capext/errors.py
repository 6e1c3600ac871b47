"""Error types raised by the geometry pipeline.

The command-line driver maps these onto exit codes: degenerate input
conditions exit with 1, violated structural invariants exit with 2.
"""


class GeometryError(Exception):
    """Base class for all geometric failures."""


class DegenerateGeometry(GeometryError):
    """Input collapses below the dimension an operation requires."""


class VerticalPlane(GeometryError):
    """A plane has no z = ax + by + c form (normal horizontal)."""


class DegenerateHull(GeometryError):
    """Hull input has fewer than 4 points or is coplanar/collinear."""


class EmptyCap(GeometryError):
    """No face normal lies strictly inside the angular threshold."""


class NoBoundary(GeometryError):
    """Every face was selected, leaving the cap without a rim."""


class LemmaViolation(GeometryError):
    """Cap boundary is not a single simple cycle."""


class DegenerateExtension(GeometryError):
    """Boundary planes are too few or too aligned to bound a cone."""


class DegenerateLimitAngle(GeometryError):
    """Fewer than three ray directions; no solid cone exists."""


class BoundaryVertex(GeometryError):
    """Curvature requested at a vertex with an incomplete face fan."""


class InvariantViolation(GeometryError):
    """A structural postcondition failed; indicates an internal bug."""


class OffParseError(GeometryError):
    """Malformed OFF input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SceneParseError(GeometryError):
    """Malformed JSON scene document."""
