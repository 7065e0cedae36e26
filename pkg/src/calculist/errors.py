"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class CalcuListError(Exception):
    """Base class for all errors reported to the REPL user."""


class LexError(CalcuListError):
    def __init__(self, message: str, pos: int = -1, incomplete: bool = False):
        super().__init__(message)
        self.pos = pos
        self.incomplete = incomplete


class ParseError(CalcuListError):
    """Syntax error.

    ``incomplete`` is set when the error was caused by running out of input,
    which the REPL uses to ask for a continuation line.
    """

    def __init__(self, message: str, pos: int = -1, incomplete: bool = False):
        super().__init__(message)
        self.pos = pos
        self.incomplete = incomplete


class CompileError(CalcuListError):
    pass


class AsmError(CalcuListError):
    pass


# runtime error kinds
TYPE_ERROR = "type-error"
EMPTY_LIST = "empty-list-tail"
INDEX_RANGE = "index-out-of-range"
DIV_ZERO = "division-by-zero"
USER_EXCEPTION = "user-exception"
UNRESOLVED = "unresolved-name"
ARITY = "arity-mismatch"
STACK_OVERFLOW = "stack-overflow"
PURITY = "purity-violation"
IO_ERROR = "io-error"


class CLRuntimeError(CalcuListError):
    """Error raised while the virtual machine executes a program."""

    def __init__(self, kind: str, message: str, function: str | None = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.function = function

    def __str__(self) -> str:
        if self.kind == USER_EXCEPTION:
            head = "exception"
        else:
            head = f"runtime error ({self.kind})"
        where = f" in {self.function}" if self.function else ""
        return f"{head}{where}: {self.message}"


def type_error(message: str) -> CLRuntimeError:
    return CLRuntimeError(TYPE_ERROR, message)
