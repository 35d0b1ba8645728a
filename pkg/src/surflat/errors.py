"""Exception types shared across the package."""


class RangeError(ValueError):
    """A point, region, or support violates a window bound or margin."""


class UnsupportedOrderError(ValueError):
    """A derivative or expansion order above the configured maximum."""


class TruncationError(ArithmeticError):
    """A field meets the window boundary where the construction needs decay."""


class InvalidJetError(ValueError):
    """A jet fails a structural precondition of the requested operation."""


class ConfigError(ValueError):
    """An experiment configuration is inconsistent or incomplete."""
