"""Exception and warning taxonomy shared across the package."""


class WqedError(Exception):
    """Base class for all package errors."""


class UnsupportedTruncationError(WqedError):
    """Requested excitation truncation is not supported (only 1 or 2)."""


class DimensionMismatchError(WqedError):
    """State, basis or operator dimensions do not agree."""


class StepSizeError(WqedError):
    """Fixed-step integration detected an unstable or inaccurate step size."""


class SteadyStateError(WqedError):
    """Iterative steady-state solve failed to reach the residual target."""


class SingularCoefficientError(WqedError):
    """Scattering coefficient or transfer-matrix cell is singular."""


class IllegalBranchError(WqedError):
    """Gate / probe branch combination outside the model's validity."""


class ValidityError(WqedError):
    """Closed-form expression evaluated outside its stated validity range."""


class UndefinedStateError(WqedError):
    """Operation on a zero-norm or otherwise undefined state."""


class GridMismatchError(WqedError):
    """Two trajectories do not share a common time grid."""


class WindowTooShortError(WqedError):
    """Recorded window too short to extract the requested decay time."""


class InsufficientDataError(WqedError):
    """Not enough data points for the requested fit."""


class BudgetExceededError(WqedError):
    """Projected resource cost of a scenario exceeds the configured budget."""


class ConfigError(WqedError):
    """Scenario configuration failed validation."""


class DispersiveRegimeWarning(UserWarning):
    """Parameters leave the dispersive regime the perturbation theory assumes."""


class PerturbativeValidityWarning(UserWarning):
    """A first- or second-order expansion is evaluated near its edge."""


class BoundaryOptimumWarning(UserWarning):
    """A 1-D optimization ended on the search boundary (non-unimodal trace)."""


class NegativeIntegrandWarning(UserWarning):
    """Background-subtracted intensity went negative beyond tolerance."""
