"""Exception hierarchy shared by every stage of the toolkit."""


class MimuError(Exception):
    """Base class for all toolkit errors."""


class InvalidAnglesError(MimuError, ValueError):
    """Euler angles contain NaN or infinite values."""


class InvalidRotationError(MimuError, ValueError):
    """A matrix is not a proper rotation within tolerance."""


class ConfigError(MimuError, ValueError):
    """A configuration value violates its contract."""


class InvalidSegmentsError(MimuError, ValueError):
    """Motion segments overlap, are unordered, or fall outside the sequence."""


class IngestError(MimuError, ValueError):
    """Sample timing is unusable, e.g. jitter beyond tolerance."""


class ParseError(MimuError, ValueError):
    """A text input could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    line : int, optional
        1-based line number of the offending record.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
