from .lexer import Token, tokenize
from .parser import (
    Parser,
    is_complete,
    literal_value,
    parse_expression,
    parse_program,
    parse_statement,
    read_literal,
)
from .unparse import statement as unparse

__all__ = [
    "Parser",
    "Token",
    "is_complete",
    "literal_value",
    "parse_expression",
    "parse_program",
    "parse_statement",
    "read_literal",
    "tokenize",
    "unparse",
]
