"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """Raised when an input breaks a documented precondition or data contract."""


class CacheFormatError(ValueError):
    """Raised when an embedding cache file contains an unreadable line.

    The message names the file and the 1-based line number of the first
    offending line.
    """

    def __init__(self, path, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = path
        self.line_number = line_number


class RemoteError(RuntimeError):
    """Transport-level failure talking to a remote service.

    ``retriable`` distinguishes transient faults (connection errors, 429,
    5xx) from permanent ones (other 4xx, malformed payloads).
    """

    def __init__(self, message: str, *, retriable: bool):
        super().__init__(message)
        self.retriable = retriable
