from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

# Stable diagnostic codes.
LEXICAL = "lexical-error"
SYNTAX = "syntax-error"
DUPLICATE_DEFINITION = "duplicate-definition"
UNKNOWN_UNITARY = "unknown-unitary"
UNKNOWN_OBSERVABLE = "unknown-observable"
UNITARY_ARITY = "unitary-arity"
OBSERVABLE_ARITY = "observable-arity"
UNRESOLVED_CALL = "unresolved-call"
CALL_ARITY = "call-arity"
DUPLICATE_VARIABLE = "duplicate-variable"
DUPLICATE_QUBIT = "duplicate-qubit"
DUPLICATE_FORMAL = "duplicate-formal"
RESERVED_NAME = "reserved-name"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    pos: Optional[tuple] = None

    def located(self, filename: str = "<input>") -> str:
        if self.pos is None:
            return f"{filename}: {self.code}: {self.message}"
        line, col = self.pos
        return f"{filename}:{line}:{col}: {self.code}: {self.message}"

    def to_json(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.pos is not None:
            out["line"], out["col"] = self.pos
        return out


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.located())
        self.diagnostic = diagnostic
