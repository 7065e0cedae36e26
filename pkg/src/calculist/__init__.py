"""CalcuList: a functional list language with controlled side effects,
compiled to bytecode for the CalcuList Virtual Machine (CLVM)."""

from .assembler import assemble, disassemble
from .clvm import Machine
from .errors import CalcuListError, CLRuntimeError, CompileError, LexError, ParseError
from .session import Session, transcript

__all__ = [
    "CLRuntimeError",
    "CalcuListError",
    "CompileError",
    "LexError",
    "Machine",
    "ParseError",
    "Session",
    "assemble",
    "disassemble",
    "transcript",
]
