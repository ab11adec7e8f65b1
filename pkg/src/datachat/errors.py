"""Error types shared across the package.

Every error carries a short machine-readable ``code`` (the class name unless
overridden) so failures can be surfaced in response bundles and traces without
string matching on messages.
"""

from __future__ import annotations


class DataChatError(Exception):
    """Base class for all package errors."""

    code = "DataChatError"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def __str__(self) -> str:
        return self.message


# --- workflow-core ---------------------------------------------------------

class MissingNode(DataChatError):
    code = "MissingNode"


class DigestMismatch(DataChatError):
    code = "DigestMismatch"


# --- providers --------------------------------------------------------------

class AdapterUnavailable(DataChatError):
    code = "AdapterUnavailable"


class Timeout(DataChatError):
    code = "Timeout"


class SchemaViolation(DataChatError):
    code = "SchemaViolation"


# --- sql agent ---------------------------------------------------------------

class ConnectionFailed(DataChatError):
    code = "ConnectionFailed"


class PermissionDenied(DataChatError):
    code = "PermissionDenied"


class NoConnection(DataChatError):
    code = "NoConnection"


class NoTables(DataChatError):
    code = "NoTables"


class NoUsableColumns(DataChatError):
    code = "NoUsableColumns"


class GenerationFailed(DataChatError):
    code = "GenerationFailed"


class ParseError(DataChatError):
    code = "ParseError"


class MultipleStatements(DataChatError):
    code = "MultipleStatements"


class ReadOnlyViolation(DataChatError):
    code = "ReadOnlyViolation"

    def __init__(self, keyword: str, message: str = ""):
        super().__init__(message or f"statement is not read-only: {keyword}")
        self.keyword = keyword


class UnknownTable(DataChatError):
    code = "UnknownTable"

    def __init__(self, name: str):
        super().__init__(f"unknown table: {name}")
        self.name = name


class UnknownColumn(DataChatError):
    code = "UnknownColumn"

    def __init__(self, name: str):
        super().__init__(f"unknown column: {name}")
        self.name = name


class ExecutionTimeout(DataChatError):
    code = "ExecutionTimeout"


class ExecutionFailed(DataChatError):
    code = "ExecutionFailed"


# --- viz agent ---------------------------------------------------------------

class EmptyAfterCleaning(DataChatError):
    code = "EmptyAfterCleaning"


class NotPlottable(DataChatError):
    code = "NotPlottable"


class ChannelUnsatisfiable(DataChatError):
    code = "ChannelUnsatisfiable"


# --- analysis agent ----------------------------------------------------------

class NothingToAnalyze(DataChatError):
    code = "NothingToAnalyze"


# --- explanation agent -------------------------------------------------------

class NoFindings(DataChatError):
    code = "NoFindings"


# --- customizer ---------------------------------------------------------------

class Unparseable(DataChatError):
    code = "Unparseable"


class IllegalPath(DataChatError):
    code = "IllegalPath"


class BadValue(DataChatError):
    code = "BadValue"


class IncompatibleMark(DataChatError):
    code = "IncompatibleMark"


# --- service ------------------------------------------------------------------

class UnknownSession(DataChatError):
    code = "UnknownSession"


class TurnInProgress(DataChatError):
    code = "TurnInProgress"


class UnknownChart(DataChatError):
    code = "UnknownChart"


class UnsupportedFormat(DataChatError):
    code = "UnsupportedFormat"


class StorageFailure(DataChatError):
    code = "StorageFailure"


class WriteAccessRequested(DataChatError):
    code = "WriteAccessRequested"
