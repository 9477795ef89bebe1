"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, graph specs or experiment configs."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class EdgeListParseError(ValueError):
    """Malformed edge-list file. ``lineno`` is 1-based."""

    def __init__(self, message, lineno):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class KernelError(RuntimeError):
    """Internal consistency failure in the transition kernel or stepper."""


class NonMonotoneError(RuntimeError):
    """Outbreak size did not respond monotonically across a search bracket."""
