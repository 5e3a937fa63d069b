"""Exception hierarchy shared across the package."""


class ZenoLabError(Exception):
    """Base class for all package errors."""


class DimensionError(ZenoLabError, ValueError):
    """Two states (or a state and an operator) have incompatible shapes."""


class ZeroVectorError(ZenoLabError, ValueError):
    """A state's norm is too small to define a ray."""


class GridTooSmallError(ZenoLabError, ValueError):
    """A localized profile does not decay to the tail guard inside the grid."""


class NumericsError(ZenoLabError, ArithmeticError):
    """A computation produced non-finite or inconsistent values."""


class ConsistencyError(NumericsError):
    """An internal identity failed beyond roundoff (e.g. negative squared speed)."""


class DivergenceError(NumericsError):
    """Time integration produced a non-finite state."""

    def __init__(self, message: str, step: int, time: float):
        super().__init__(f"{message} (step {step}, t={time:.17g})")
        self.step = step
        self.time = time


class UnsupportedProtocolError(ZenoLabError, ValueError):
    """The requested measurement protocol does not apply to the given model."""


class ConfigError(ZenoLabError, ValueError):
    """Invalid scenario configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
