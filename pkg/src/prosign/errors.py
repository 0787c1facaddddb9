"""Exception hierarchy shared across the toolkit."""


class ProsignError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ProsignError):
    """A file does not follow its documented format."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class ValidationError(ProsignError):
    """A value violates a documented invariant."""


class CoverageError(ProsignError):
    """Required records or tokens are missing."""


class ProtocolError(ProsignError):
    """A scoring backend returned data violating the wire contract."""


class TransportError(ProsignError):
    """A remote backend stayed unreachable after retries."""


class JoinError(ProsignError):
    """Joining word-level tables lost more rows than allowed."""


class ConfigError(ProsignError):
    """A configuration value is missing or out of range."""


class StageError(ProsignError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
