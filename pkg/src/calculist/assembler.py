"""Textual CLVM assembly.

Syntax, one item per line, ``;`` starts a comment::

    .func name          ; open a unit (nested .func blocks are its lambdas)
    .params x f/1       ; parameter names with optional arity
    .ret 1              ; return arity
    .star               ; star function
    .captures 2         ; captured values (lambdas)
    .locals 3           ; local slots
    .const k 4.2        ; named constant, usable as ``PUSHC k``
    L3:                 ; label
        PUSHC 2         ; operands: literal, label, name, int
        JZ L3
    .end

Instructions outside any ``.func`` form the entry program (a star unit
ending in HALT); top-level ``.func`` units are attached to it as callable
functions.  A file holding a single ``.func`` block and no entry code
assembles to that unit, which is what :func:`disassemble` produces.
"""

from __future__ import annotations

import math
import re
from typing import Any

from .errors import AsmError, LexError, ParseError
from .frontend import read_literal
from .frontend.unparse import const_text
from .values import NIL, Char, CLType
from .isa import ADDR, CONST, INT, KEYS, NAME, OPERANDS, CompileUnit, Op

_TOKEN_RE = re.compile(r""""(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*'|;.*|[^\s;]+""")
_LABEL_RE = re.compile(r"^([A-Za-z_$][\w$.]*):$")
_SPECIAL_FLOATS = {"Infinity": math.inf, "-Infinity": -math.inf, "NaN": math.nan}


def _split(line: str) -> list[str]:
    out = []
    for tok in _TOKEN_RE.findall(line):
        if tok.startswith(";"):
            break
        out.append(tok)
    return out


def _literal(text: str, fail) -> Any:
    if text in _SPECIAL_FLOATS:
        return _SPECIAL_FLOATS[text]
    try:
        v = read_literal(text)
    except (LexError, ParseError) as exc:
        raise fail(f"bad constant {text}: {exc}") from None
    if not isinstance(v, (bool, int, float, str, Char, CLType)) and v is not None and v is not NIL:
        # lists and jsons are built at run time by NEWLIST and NEWJSON
        raise fail(f"constant {text} is not a scalar")
    return v


class _Block:
    def __init__(self, unit: CompileUnit, line: int):
        self.unit = unit
        self.line = line
        self.labels: dict[str, int] = {}
        self.fixups: list[tuple[int, str, int]] = []  # (instr index, label, line)
        self.named: dict[str, Any] = {}


def assemble(text: str) -> CompileUnit:
    main = _Block(CompileUnit("$main", star=True), 0)
    stack = [main]
    toplevel: list[CompileUnit] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _split(raw)
        if not toks:
            continue
        blk = stack[-1]

        def fail(msg: str) -> AsmError:
            return AsmError(f"line {lineno}: {msg}")

        head = toks[0]
        m = _LABEL_RE.match(head)
        if m:
            if m.group(1) in blk.labels:
                raise fail(f"duplicate label {m.group(1)}")
            blk.labels[m.group(1)] = len(blk.unit.code)
            toks = toks[1:]
            if not toks:
                continue
            head = toks[0]
        args = toks[1:]
        if head.startswith("."):
            _directive(head, args, stack, toplevel, lineno, fail)
            continue
        try:
            op = Op[head.upper()]
        except KeyError:
            raise fail(f"unknown opcode {head}") from None
        kinds = OPERANDS.get(op, ())
        if op == Op.NEWJSON:
            operands: list[Any] = [tuple(_key(a, fail) for a in args)]
        else:
            if len(args) != len(kinds):
                raise fail(f"{op.name} takes {len(kinds)} operand(s), got {len(args)}")
            operands = [_operand(k, a, blk, lineno, fail) for k, a in zip(kinds, args)]
        operands += [None] * (2 - len(operands))
        blk.unit.code.append((int(op), operands[0], operands[1]))

    if len(stack) > 1:
        raise AsmError(f"line {stack[-1].line}: .func {stack[-1].unit.name} is not closed by .end")
    _resolve(main)
    if not main.unit.code and len(toplevel) == 1:
        return toplevel[0]
    if not main.unit.code or main.unit.code[-1][0] != Op.HALT:
        main.unit.code.append((int(Op.HALT), None, None))
    main.unit.lambdas.extend(toplevel)
    return main.unit


def _key(arg: str, fail) -> str:
    v = _literal(arg, fail) if arg[0] in "\"'" else arg
    if not isinstance(v, str):
        raise fail(f"json key must be a string: {arg}")
    return v


def _operand(kind: str, arg: str, blk: _Block, lineno: int, fail) -> Any:
    if kind == INT:
        try:
            return int(arg)
        except ValueError:
            raise fail(f"expected an integer operand, got {arg}") from None
    if kind == NAME:
        return _literal(arg, fail) if arg[0] in "\"'" else arg
    if kind == ADDR:
        blk.fixups.append((len(blk.unit.code), arg, lineno))
        return arg
    if kind == CONST:
        value = blk.named[arg] if arg in blk.named else _literal(arg, fail)
        return blk.unit.const_index(value)
    raise AssertionError(kind)


def _directive(head: str, args: list[str], stack: list[_Block], toplevel: list, lineno: int, fail) -> None:
    blk = stack[-1]
    u = blk.unit
    if head == ".func":
        if len(args) != 1:
            raise fail(".func takes a name")
        sub = _Block(CompileUnit(args[0]), lineno)
        stack.append(sub)
        return
    if head == ".end":
        if len(stack) == 1:
            raise fail(".end without .func")
        stack.pop()
        _resolve(blk)
        if len(stack) == 1:
            toplevel.append(u)
        else:
            stack[-1].unit.lambdas.append(u)
        return
    if head == ".const":
        if len(args) != 2:
            raise fail(".const takes a name and a value")
        blk.named[args[0]] = _literal(args[1], fail)
        return
    if head == ".star":
        u.star = True
        return
    if head == ".params":
        names, arities = [], []
        for a in args:
            name, _, ar = a.partition("/")
            names.append(name)
            arities.append(int(ar) if ar else 0)
        u.params, u.arities = tuple(names), tuple(arities)
        return
    fields = {".ret": "ret_arity", ".captures": "ncaptures", ".locals": "nlocals"}
    if head in fields:
        if len(args) != 1 or not args[0].isdigit():
            raise fail(f"{head} takes a non-negative integer")
        setattr(u, fields[head], int(args[0]))
        return
    raise fail(f"unknown directive {head}")


def _resolve(blk: _Block) -> None:
    code = blk.unit.code
    for at, label, lineno in blk.fixups:
        if label not in blk.labels:
            raise AsmError(f"line {lineno}: undefined label {label}")
        op, _, b = code[at]
        code[at] = (op, blk.labels[label], b)


def _const_repr(v: Any) -> str:
    if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
        return "NaN" if v != v else ("Infinity" if v > 0 else "-Infinity")
    return const_text(v)


def _name_repr(name: str) -> str:
    return name if re.fullmatch(r"[^\s;\"']+", name) else const_text(name)


def disassemble(unit: CompileUnit, indent: str = "") -> str:
    lines = [f"{indent}.func {unit.name}"]
    if unit.params:
        ps = " ".join(p + (f"/{a}" if a else "") for p, a in zip(unit.params, unit.arities))
        lines.append(f"{indent}.params {ps}")
    if unit.ret_arity:
        lines.append(f"{indent}.ret {unit.ret_arity}")
    if unit.star:
        lines.append(f"{indent}.star")
    if unit.ncaptures:
        lines.append(f"{indent}.captures {unit.ncaptures}")
    if unit.nlocals:
        lines.append(f"{indent}.locals {unit.nlocals}")
    targets = sorted({a for op, a, _ in unit.code if OPERANDS.get(Op(op), ()) == (ADDR,)})
    names = {t: f"L{t}" for t in targets}
    for i, (op, a, b) in enumerate(unit.code):
        if i in names:
            lines.append(f"{indent}{names[i]}:")
        o = Op(op)
        kinds = OPERANDS.get(o, ())
        parts = [o.name]
        for kind, val in zip(kinds, (a, b)):
            if kind == CONST:
                parts.append(_const_repr(unit.consts[val]))
            elif kind == ADDR:
                parts.append(names[val])
            elif kind == NAME:
                parts.append(_name_repr(val))
            elif kind == KEYS:
                parts.extend(const_text(k) for k in val)
            else:
                parts.append(str(val))
        lines.append(f"{indent}    {' '.join(parts)}")
    if len(unit.code) in names:
        lines.append(f"{indent}{names[len(unit.code)]}:")
    for lam in unit.lambdas:
        lines.append(disassemble(lam, indent + "  ").rstrip("\n"))
    lines.append(f"{indent}.end")
    return "\n".join(lines) + "\n"
