"""Exception types shared across the package."""


class OpaError(Exception):
    """Base class for every error raised by opazeros."""


class DomainError(OpaError, ValueError):
    """An argument lies outside the domain of the operation."""


class WeightRangeError(OpaError, IndexError):
    """A tabulated weight was requested beyond the end of its table."""

    def __init__(self, index: int, length: int):
        self.index = index
        self.required_length = index + 1
        self.length = length
        super().__init__(
            f"weight table has {length} entries but index {index} was requested; "
            f"a table of length >= {index + 1} is required"
        )


class ConfigError(OpaError, ValueError):
    """Invalid experiment configuration. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(OpaError, ArithmeticError):
    """A computation could not be carried out reliably at working precision."""


class IllConditionedError(NumericalError):
    """A linear system is numerically singular; extended precision is advised."""


class ConsistencyError(NumericalError):
    """An internal cross-check failed beyond its tolerance."""


class RootFindingError(NumericalError):
    def __init__(self, message: str, worst_residual: float):
        self.worst_residual = worst_residual
        super().__init__(f"{message} (worst relative residual {worst_residual:.3e})")


class SubsequenceRequired(NumericalError):
    """The leading residual coefficient vanished at this n; pick another index."""
