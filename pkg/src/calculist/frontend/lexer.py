"""Tokenizer for CalcuList input.

Besides ordinary tokens it recognises a few line-oriented forms that only make
sense at the start of a statement:

* ``!name args``: a service command running to ``;`` or end of line;
* ``>>(path)``: output redirection;
* a bare ``>>`` prompt, which is skipped so transcripts can be pasted back in.

``<<(path)`` (read a value from a file) may appear anywhere an expression can.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset(
    {
        "lambda",
        "true",
        "false",
        "null",
        "double",
        "int",
        "char",
        "bool",
        "nullType",
        "type",
        "string",
        "list",
        "json",
        "function",
    }
)

# longest first
_OPERATORS = (
    "{!", "!}", "{^", "^}",
    "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "//",
    "+", "-", "*", "/", "%", "<", ">", "!", "=", "(", ")", "[", "]",
    "{", "}", ",", ":", ";", "?", ".", "|", "^", "@",
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'", '"': '"'}


@dataclass(frozen=True)
class Token:
    kind: str  # ident kw int double char string op service redirect readfile eof
    text: str
    pos: int
    value: object = None

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.text in ops

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}@{self.pos})"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def line_col(source: str, pos: int) -> tuple[int, int]:
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    stmt_start = True

    def error(msg: str, at: int, incomplete: bool = False) -> LexError:
        line, col = line_col(source, at)
        return LexError(f"{msg} at line {line}, column {col}", at, incomplete)

    def read_escape(j: int) -> tuple[str, int]:
        # source[j] is the char after the backslash
        if j >= n:
            raise error("unterminated escape", j, True)
        c = source[j]
        if c == "u":
            digits = source[j + 1 : j + 5]
            if len(digits) != 4 or any(d not in "0123456789abcdefABCDEF" for d in digits):
                raise error("bad \\u escape", j)
            return chr(int(digits, 16)), j + 5
        if c not in _ESCAPES:
            raise error(f"unknown escape \\{c}", j)
        return _ESCAPES[c], j + 1

    def read_path(j: int) -> tuple[str, int]:
        # source[j] is just after "(" ; path runs to ")"
        end = source.find(")", j)
        if end < 0:
            raise error("missing ) after file name", j, True)
        path = source[j:end].strip()
        if len(path) >= 2 and path[0] == path[-1] and path[0] in "\"'":
            path = path[1:-1]
        return path, end + 1

    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise error("unterminated comment", i, True)
            i = end + 2
            continue
        start = i
        if stmt_start:
            if c == "!" and i + 1 < n and _is_ident_start(source[i + 1]):
                end = i + 1
                while end < n and source[end] not in ";\n":
                    end += 1
                tokens.append(Token("service", source[i:end].strip(), start))
                i = end + 1 if end < n and source[end] == ";" else end
                continue
            if source.startswith(">>", i):
                j = i + 2
                while j < n and source[j] in " \t":
                    j += 1
                if j < n and source[j] == "(":
                    path, i = read_path(j + 1)
                    tokens.append(Token("redirect", source[start:i], start, path))
                    stmt_start = False
                else:
                    i += 2  # echoed prompt
                continue
        stmt_start = False
        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(source[j]):
                j += 1
            word = source[i:j]
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, start))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_double = False
            if j + 1 < n and source[j] == "." and source[j + 1].isdigit():
                is_double = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_double = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            if is_double:
                tokens.append(Token("double", text, start, float(text)))
            else:
                tokens.append(Token("int", text, start, int(text)))
            i = j
            continue
        if c == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n or source[j] == "\n":
                    raise error("unterminated string literal", start)
                ch = source[j]
                if ch == '"':
                    j += 1
                    break
                if ch == "\\":
                    s, j = read_escape(j + 1)
                    buf.append(s)
                else:
                    buf.append(ch)
                    j += 1
            tokens.append(Token("string", source[i:j], start, "".join(buf)))
            i = j
            continue
        if c == "'":
            j = i + 1
            if j >= n or source[j] == "\n":
                raise error("unterminated char literal", start)
            if source[j] == "\\":
                ch, j = read_escape(j + 1)
            else:
                ch = source[j]
                j += 1
            if j >= n or source[j] != "'":
                raise error("unterminated char literal", start)
            j += 1
            tokens.append(Token("char", source[i:j], start, ch))
            i = j
            continue
        if source.startswith("<<", i):
            j = i + 2
            while j < n and source[j] in " \t":
                j += 1
            if j < n and source[j] == "(":
                path, i = read_path(j + 1)
                tokens.append(Token("readfile", source[start:i], start, path))
                continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, start))
                i += len(op)
                if op == ";":
                    stmt_start = True
                break
        else:
            raise error(f"unexpected character {c!r}", i)
    tokens.append(Token("eof", "", n))
    return tokens
