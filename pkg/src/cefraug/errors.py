"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all cefraug errors."""


class CorpusFormatError(ToolkitError):
    """A corpus file violates the JSON-lines schema.

    Carries the 1-based line number and the offending field so CLI error
    messages can point at the exact record.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}"
        if field is not None:
            prefix += f"{', ' if prefix else ''}field '{field}'"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class GatewayError(ToolkitError):
    """The LLM gateway could not produce a response."""


class AuthenticationError(GatewayError):
    """Credentials are missing or rejected by the provider."""


class RateLimitExhausted(GatewayError):
    """Transient failures persisted past the configured retry cap."""
