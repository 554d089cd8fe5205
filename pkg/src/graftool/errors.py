"""Exception types and diagnostics shared across the toolchain."""

from __future__ import annotations

from dataclasses import dataclass


class GraftoolError(Exception):
    """Base class for every error raised by this package."""


class SourceError(GraftoolError):
    """Error tied to a position in some source text."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 filename: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        where = ""
        if filename is not None:
            where += filename
        if line is not None:
            where += f":{line}"
            if col is not None:
                where += f":{col}"
        super().__init__(f"{where}: {message}" if where else message)


class ModelError(SourceError):
    """Bad type graph: syntax error, unknown supertype, cycle, duplicate attribute."""


class EcoreError(GraftoolError):
    """Ecore/XMI document outside the supported subset, or not well-formed."""


class GraphError(GraftoolError):
    """Illegal graph-store operation: dead element, kind mismatch, unknown type."""


class RuleError(SourceError):
    """Rule source rejected; carries all collected diagnostics."""

    def __init__(self, message, line=None, col=None, filename=None, diagnostics=None):
        super().__init__(message, line, col, filename)
        self.diagnostics: list[Diagnostic] = list(diagnostics or [])


class EvalError(GraftoolError):
    """Runtime expression failure (division by zero, bad operand)."""


class MatchError(GraftoolError):
    """Bad arguments to the matcher: kind mismatch or dead input element."""


class RewriteError(GraftoolError):
    """Rewrite could not be applied: stale match or illegal retype."""


class SequenceError(GraftoolError):
    """Sequence execution failure that is an error, not a false result."""


class SequenceSyntaxError(SourceError):
    """Malformed rewrite sequence text."""


class IterationCapError(SequenceError):
    """A * or + iteration exceeded the configured cap."""


class SequenceAborted(GraftoolError):
    """Debug session aborted by the user; the sequence result is failure."""


class ShellError(GraftoolError):
    """Script command failed; carries the script line number."""

    def __init__(self, message: str, filename: str | None = None, line: int | None = None):
        self.filename = filename
        self.line = line
        where = f"{filename}:{line}: " if filename and line else ""
        super().__init__(f"{where}{message}")


class DebugTransportError(GraftoolError):
    """Debug client connection failed or closed mid-session."""


@dataclass(frozen=True)
class Diagnostic:
    """One located finding from rule checking."""

    severity: str  # "error" | "warning"
    message: str
    line: int | None = None
    col: int | None = None

    def __str__(self) -> str:
        where = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{where}{self.severity}: {self.message}"
