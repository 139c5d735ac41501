from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import SourceSpan


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


# Stable code table; docs/diagnostics.md mirrors it.
CODES: dict[str, str] = {
    "P001": "unexpected token",
    "P002": "unknown keyword",
    "P003": "unterminated block or string",
    "P004": "flow not bracketed by takeoff/touchdown",
    "M001": "duplicate node, filter or parallel name",
    "M002": "edge or until target names an unknown node",
    "M003": "mission needs exactly one takeoff",
    "M004": "mission needs exactly one touchdown",
    "M005": "result label defined more than once",
    "M006": "malformed node or declaration",
    "S001": "node unreachable from takeoff",
    "S002": "touchdown unreachable from node",
    "R001": "unknown action",
    "R002": "result reference not in scope",
    "R003": "unknown filter",
    "R004": "unknown parallel block",
    "R005": "until target is not a routing element",
    "R006": "action used in the wrong category",
    "T001": "processing action input type mismatch",
    "T002": "reference value type does not match condition type",
    "T003": "ordering comparator on a non-number value",
    "T004": "parameter value has the wrong kind",
    "T005": "unknown parameter",
    "T006": "missing required parameter",
    "T007": "parameter value out of range",
    "W001": "declaration never attached",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    message: str
    line: int = 1
    column: int = 1

    @classmethod
    def at(cls, code: str, message: str, span: SourceSpan | None,
           severity: Severity | None = None) -> "Diagnostic":
        if severity is None:
            severity = Severity.WARNING if code.startswith("W") else Severity.ERROR
        line, col = (span.line, span.column) if span is not None else (1, 1)
        return cls(code, severity, message, line, col)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self):
        return (self.line, self.column, self.code, self.message)

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: {self.code} {self.severity.value}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "message": self.message,
            "line": self.line,
            "column": self.column,
        }


def sort_diagnostics(diags) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)
