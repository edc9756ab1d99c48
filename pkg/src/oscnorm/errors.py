"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all oscnorm errors."""


class InvalidCubeError(ToolkitError):
    """Cube does not fit inside the grid, or belongs to a different grid."""


class UnsupportedCubeError(ToolkitError):
    """Operation requires a power-of-two cube side."""


class UnsupportedDilationError(ToolkitError):
    """Function support leaves the base cube under the requested dilation."""


class IncompatibleSpaceError(ToolkitError):
    """Function space carries grid-valued fields from a different grid."""


class NumericError(ToolkitError):
    """Iteration failed to converge or produced an unusable value."""


class NumericOverflowError(NumericError):
    """A norm evaluation produced a non-finite result."""


class UndefinedRatioError(ToolkitError):
    """Ratio requested with a vanishing denominator."""


class ContractError(ToolkitError):
    """Caller violated a documented precondition."""


class SpecFormatError(ToolkitError):
    """Malformed descriptor string, config file, or data file."""
