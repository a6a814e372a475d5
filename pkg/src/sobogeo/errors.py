"""Exception types raised by sobogeo."""


class SobogeoError(Exception):
    """Base class for all library errors."""


class BadShape(SobogeoError, ValueError):
    """Sample count is odd, too small, or arrays have the wrong layout."""


class ShapeMismatch(SobogeoError, ValueError):
    """Field and curve live on different grids."""


class ImmersionViolation(SobogeoError):
    """Curve speed dropped to (or below) the immersion floor."""

    def __init__(self, message, time=None, min_speed=None, index=None,
                 trajectory=None):
        super().__init__(message)
        self.time = time
        self.min_speed = min_speed
        self.index = index
        self.trajectory = trajectory


class OrderTooHigh(SobogeoError, ValueError):
    """Requested derivative order exceeds the spectral guard n_samples/4."""


class OrderTooLow(SobogeoError, ValueError):
    """Operation needs a metric of order >= 2."""


class SingularOperator(SobogeoError):
    """Inertia operator has a kernel (a_0 = 0 without translation quotient)."""


class NoConvergence(SobogeoError):
    """Iterative solver hit its iteration cap."""


class IntegrationAborted(SobogeoError):
    """Base for errors raised by the geodesic integrator.

    ``trajectory`` holds everything recorded up to the last good state.
    """

    def __init__(self, message, time=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class EnergyDriftExceeded(IntegrationAborted):
    pass


class StepUnstable(IntegrationAborted):
    """A non-finite value appeared during a time step."""


class BlowUpDetected(IntegrationAborted):
    """Curve length left the admissible range: finite-time escape to infinity."""


class StallWarning(UserWarning):
    """Path minimisation made no progress for a while (returned, not raised)."""
