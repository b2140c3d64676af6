"""Exception types shared across the package."""


class PanelFieldError(Exception):
    """Base class for all panelfield errors."""


class EdgeSingularity(PanelFieldError):
    """Evaluation point lies within the geometric tolerance of a panel edge segment.

    The potential is finite on an edge but the closed form degenerates to
    0 * log(0) there; callers that need edge values should offset the point
    explicitly.
    """


class OnSurfaceAmbiguity(PanelFieldError):
    """Normal force requested exactly on the panel surface inside its extent.

    The normal component jumps across the surface, so its value is undefined.
    The tangential components are still well defined and are attached to the
    exception as ``fx`` and ``fz``.
    """

    def __init__(self, message, fx=None, fz=None):
        super().__init__(message)
        self.fx = fx
        self.fz = fz


class NonFinite(PanelFieldError):
    """An intermediate quantity overflowed or produced a non-finite result."""


class ToleranceNotMet(PanelFieldError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the best estimate and its error estimate so callers can decide
    whether the partial result is usable.
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class CoincidentSource(PanelFieldError):
    """Evaluation point coincides with one of the comparator point sources."""


class InvalidGrading(PanelFieldError):
    """Mesh grading parameters are out of range."""


class SingularMatrix(PanelFieldError):
    """The influence matrix could not be factorized."""
