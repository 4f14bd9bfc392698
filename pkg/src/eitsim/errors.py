"""Exception hierarchy for the simulator."""


class EitsimError(Exception):
    """Base class for all simulator errors."""


class DomainError(EitsimError):
    """An input is outside its physical domain."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverError(EitsimError):
    """The linear steady-state solve failed (singular system)."""


class QuadratureError(EitsimError):
    """A quadrature did not converge within the configured node budget.

    Carries both the coarse and refined estimates so callers can inspect
    how far apart they are.
    """

    def __init__(self, message, coarse=None, fine=None):
        self.coarse = coarse
        self.fine = fine
        super().__init__(message)


class DerivativeError(EitsimError):
    """A finite-difference derivative failed to stabilize under refinement."""


class ResonanceError(EitsimError):
    """No transparency-window minimum was found inside the search bracket."""


class MeasurementError(EitsimError):
    """A pulse measurement could not be made (e.g. flat signal)."""


class ConfigError(EitsimError):
    """A run configuration document is malformed or inconsistent."""
