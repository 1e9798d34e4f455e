class ConfigError(ValueError):
    """Invalid run configuration (bad key, value, or schedule)."""


class MeshError(ValueError):
    """Invalid mesh geometry or topology."""


class MeshParseError(MeshError):
    """Malformed mesh text file; carries the offending line number."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class NumericalError(RuntimeError):
    """A root solve or kernel failed in a way that should be unreachable."""


class SimulationAborted(RuntimeError):
    """Raised by the stepping loop on NaN or velocity blow-up."""

    def __init__(self, message, t=None, cell=None):
        super().__init__(message)
        self.t = t
        self.cell = cell
