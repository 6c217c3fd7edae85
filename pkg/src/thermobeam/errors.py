"""Exception hierarchy shared across the solver package.

The split mirrors the CLI exit codes: configuration problems (bad input),
numerical failures at runtime (blow-up, singular solves), and I/O.
"""


class ThermobeamError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ThermobeamError):
    """Invalid configuration: bad parameter, grid, preset, or config file."""


class UnknownPresetError(ConfigError):
    """Requested a scenario preset that does not exist."""


class NumericsError(ThermobeamError):
    """Numerical failure during a run."""


class SingularMatrixError(NumericsError):
    """A linear solve hit a (near-)zero pivot."""

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class BlowUpError(NumericsError):
    """A field became non-finite or explosively large during time stepping."""

    def __init__(self, message: str, step: int, field: str):
        super().__init__(message)
        self.step = step
        self.field = field


class DegenerateOrderError(NumericsError):
    """A convergence-order estimate is undefined (errors at round-off level)."""


class FitError(NumericsError):
    """A decay-law fit cannot be performed on the given series."""


class NonPositiveEnergyError(FitError):
    """Log-space fitting needs strictly positive energies in the window."""


class InsufficientPointsError(FitError):
    """Too few samples fall inside the fit window."""
