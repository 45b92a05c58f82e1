"""Exception hierarchy and process exit codes for the HDDS tools."""

from __future__ import annotations

from enum import Enum

# Process exit codes (hdds_cli maps every HddsError onto one of these)
EXIT_CODES = {
    "OK": 0,
    "USAGE": 1,
    "INPUT": 2,
    "DATA": 3,
}


class ReasonCode(Enum):
    BAD_PARAMETER = "BAD_PARAMETER"
    BAD_USAGE = "BAD_USAGE"
    UNKNOWN_COLUMN = "UNKNOWN_COLUMN"
    MISSING_FILE = "MISSING_FILE"
    NO_RECORDS = "NO_RECORDS"
    WRITE_FAILED = "WRITE_FAILED"
    DEGENERATE_SUPPORT = "DEGENERATE_SUPPORT"
    DEGENERATE_DENSITY = "DEGENERATE_DENSITY"
    DEGENERATE_CONTEXT = "DEGENERATE_CONTEXT"
    DEGENERATE_BINNING = "DEGENERATE_BINNING"
    EMPTY_TARGET = "EMPTY_TARGET"
    LEVEL_MISMATCH = "LEVEL_MISMATCH"


class HddsError(Exception):
    """Base error. `exit_code` is what the CLI returns for it."""

    exit_code = EXIT_CODES["USAGE"]
    default_reason = ReasonCode.BAD_USAGE

    def __init__(self, message: str, reason: ReasonCode | None = None):
        super().__init__(message)
        self.reason = reason or self.default_reason


class ParameterError(HddsError, ValueError):
    """An argument lies outside its documented range."""

    exit_code = EXIT_CODES["USAGE"]
    default_reason = ReasonCode.BAD_PARAMETER


class UsageError(HddsError):
    exit_code = EXIT_CODES["USAGE"]
    default_reason = ReasonCode.BAD_USAGE


class InputError(HddsError):
    """Unreadable input, unwritable output, or nothing usable in a file."""

    exit_code = EXIT_CODES["INPUT"]
    default_reason = ReasonCode.MISSING_FILE


class DataError(HddsError, ValueError):
    """The data are valid but cannot support the requested estimate."""

    exit_code = EXIT_CODES["DATA"]
    default_reason = ReasonCode.DEGENERATE_SUPPORT
