"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An input parameter is outside its allowed domain.

    The offending field name and value are kept on the instance so that
    callers (the CLI in particular) can report them.
    """

    def __init__(self, field, value, reason):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r}: {reason}")


class UnsupportedOrderError(ParameterError):
    """Polynomial order above the supported cap."""


class ZeroProbabilityError(ArithmeticError):
    """The heralding event has zero probability, so no conditional state exists."""

    def __init__(self, field, value, reason):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r}: {reason}")


class UndefinedQError(ArithmeticError):
    """Mandel Q requested for a state with zero mean photon number."""


class DegreeOverflowError(ParameterError):
    """Requested moment order exceeds the series truncation cap."""
