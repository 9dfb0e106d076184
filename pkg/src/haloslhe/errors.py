"""Exception hierarchy shared across the package."""


class SlheError(Exception):
    """Base class for all errors raised by haloslhe."""


class PnmError(SlheError, ValueError):
    """Malformed or unsupported PNM data."""


class PnmFormatError(PnmError):
    pass


class PnmDimensionError(PnmError):
    pass


class PnmTruncationError(PnmError):
    pass


class PnmDepthError(PnmError):
    pass


class DimensionMismatchError(SlheError, ValueError):
    pass


class ParameterError(SlheError, ValueError):
    pass


class ConfigError(SlheError, ValueError):
    """Bad configuration value; ``key`` names the offending setting."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
