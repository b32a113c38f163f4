"""Exception types shared across modules.

ValidationError covers bad data and broken contracts (CLI exit code 2).
Anything else that escapes is a runtime failure (CLI exit code 3).
"""

from __future__ import annotations


class ValidationError(Exception):
    pass


class ParseError(ValidationError):
    """Malformed input file; carries the offending path and 1-based line."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}: "
        super().__init__(prefix + message)
