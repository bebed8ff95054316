"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, DataFormatError -> 3,
SolverNonConvergence -> 4.
"""


class RadioTwinError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RadioTwinError):
    """Invalid configuration value or inconsistent parameter combination."""


class DataFormatError(RadioTwinError):
    """Malformed or unreadable dataset / model / config file."""


class DegenerateGeometryError(RadioTwinError):
    """Geometry that the propagation model cannot evaluate (d <= 0)."""


class NotPositiveDefiniteError(RadioTwinError):
    """Covariance matrix not factorizable even after the jitter ladder."""


class SolverNonConvergence(RadioTwinError):
    """Dual solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
