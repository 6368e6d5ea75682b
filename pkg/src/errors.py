"""
Exception hierarchy
Every error raised on purpose carries an error code and the process exit code
the command line maps it to
"""

from typing import Any, Dict, Optional


class Ae1SvmError(Exception):
    """Base class for all expected failures"""

    code: str = "INTERNAL_ERROR"
    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        body: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            body["details"] = self.details
        return body


class ArgumentError(Ae1SvmError, ValueError):
    code = "INVALID_ARGUMENT"
    exit_code = 2


class ConfigError(Ae1SvmError):
    """Configuration rejected; ``violations`` lists every problem found"""

    code = "INVALID_CONFIG"
    exit_code = 2

    def __init__(self, message: str, violations: Optional[list] = None):
        self.violations = list(violations or [])
        super().__init__(message, {"violations": self.violations} if self.violations else None)


class DataError(Ae1SvmError):
    code = "DATA_ERROR"
    exit_code = 3


class DataFileNotFoundError(DataError):
    code = "FILE_NOT_FOUND"


class EmptyDataError(DataError):
    code = "EMPTY_FILE"


class CellParseError(DataError):
    code = "UNPARSEABLE_CELL"

    def __init__(self, row: int, column: str, value: str, path: str = ""):
        super().__init__(
            f"Cannot parse value {value!r} at row {row}, column {column!r}"
            + (f" in {path}" if path else ""),
            {"row": row, "column": column, "value": value},
        )


class LabelValueError(DataError):
    code = "UNKNOWN_LABEL"

    def __init__(self, row: int, value: str, known: list):
        super().__init__(
            f"Unknown label value {value!r} at row {row}",
            {"row": row, "value": value, "known": known},
        )


class WidthMismatchError(DataError):
    code = "WIDTH_MISMATCH"

    def __init__(self, expected: int, found: int):
        super().__init__(
            f"Feature width mismatch: model expects {expected} columns, found {found}",
            {"expected": expected, "found": found},
        )


class MetricError(DataError):
    code = "METRIC_ERROR"


class TrainingError(Ae1SvmError):
    code = "TRAINING_ERROR"
    exit_code = 4


class ContractError(Ae1SvmError):
    code = "CONTRACT_VIOLATION"
    exit_code = 4
