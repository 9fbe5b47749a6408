"""Exception hierarchy shared by the package."""


class FlowSvmError(Exception):
    """Base class for all errors raised by flowsvm."""


class SchemaError(FlowSvmError):
    """CSV header does not match the expected columns."""


class RowError(FlowSvmError):
    """A data row failed to parse or validate."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class LabelError(RowError):
    """A label token is not a known flow pattern."""

    def __init__(self, row: int, token: str):
        super().__init__(row, f"unknown label {token!r}")
        self.token = token


class DataError(FlowSvmError):
    """Dataset-level precondition violated (too few classes/samples, etc.)."""


class ConvergenceError(FlowSvmError):
    """SMO failed to reach the KKT tolerance within its iteration budget."""

    def __init__(self, message: str, violation: float, pair=None):
        super().__init__(message)
        self.violation = violation
        self.pair = pair


class CorruptModelError(FlowSvmError):
    """Model file failed its integrity check or could not be decoded."""
