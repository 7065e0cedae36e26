"""CLVM instruction set and compiled-code containers.

An instruction is a tuple ``(opcode, a, b)``; unused operands are ``None``.
Every opcode has a base clops cost (fetch + decode + execute micro-ops).
Heap-walking instructions add one clop per cell they visit; see
``docs/ISA.md`` for the full table.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Any

Instr = tuple  # (opcode, a, b)


class Op(IntEnum):
    HALT = 0
    PUSHC = 1  # a: constant pool index
    LOADP = 2  # a: parameter/capture slot
    LOADL = 3  # a: local slot
    LOADG = 4  # a: global name
    STOREP = 5
    STOREL = 6
    STOREG = 7
    POP = 8
    DUP2 = 9
    ADD = 10
    SUB = 11
    MUL = 12
    DIV = 13
    IDIV = 14
    MOD = 15
    NEG = 16
    POS = 17
    NOT = 18
    EQ = 19
    NE = 20
    LT = 21
    LE = 22
    GT = 23
    GE = 24
    JMP = 25  # a: address
    JZ = 26  # a: address; pops a bool, jumps when false
    CALL = 27  # a: function name, b: argc
    TAILCALL = 28  # a: function name, b: argc
    CALLIND = 29  # a: argc; callee closure below the arguments
    RET = 30
    NEWLIST = 31  # a: element count
    CONS = 32  # a: element count prepended to the list on top
    HEAD = 33
    TAIL = 34
    SUFFIX = 35
    SLICE = 36  # a: bit 1 = low bound present, bit 2 = high bound present
    INDEX = 37
    NEWJSON = 38  # a: tuple of keys
    SETIDX = 39
    MKCLOSURE = 40  # a: function name, b: number of captured values
    LEN = 41
    TYPEOF = 42
    EXC = 43
    PRINT = 44  # a: 1 to print null values
    FREAD = 45  # a: file name


# operand kinds, used by the assembler
NONE, INT, NAME, CONST, ADDR, KEYS = "none", "int", "name", "const", "addr", "keys"

OPERANDS: dict[Op, tuple[str, ...]] = {
    Op.PUSHC: (CONST,),
    Op.LOADP: (INT,),
    Op.LOADL: (INT,),
    Op.LOADG: (NAME,),
    Op.STOREP: (INT,),
    Op.STOREL: (INT,),
    Op.STOREG: (NAME,),
    Op.JMP: (ADDR,),
    Op.JZ: (ADDR,),
    Op.CALL: (NAME, INT),
    Op.TAILCALL: (NAME, INT),
    Op.CALLIND: (INT,),
    Op.NEWLIST: (INT,),
    Op.CONS: (INT,),
    Op.SLICE: (INT,),
    Op.NEWJSON: (KEYS,),
    Op.MKCLOSURE: (NAME, INT),
    Op.PRINT: (INT,),
    Op.FREAD: (NAME,),
}

# base clops per instruction
COST: dict[Op, int] = {
    Op.HALT: 2,
    Op.PUSHC: 3,
    Op.LOADP: 3,
    Op.LOADL: 3,
    Op.LOADG: 4,
    Op.STOREP: 3,
    Op.STOREL: 3,
    Op.STOREG: 4,
    Op.POP: 2,
    Op.DUP2: 4,
    Op.ADD: 4,
    Op.SUB: 4,
    Op.MUL: 4,
    Op.DIV: 4,
    Op.IDIV: 4,
    Op.MOD: 4,
    Op.NEG: 3,
    Op.POS: 3,
    Op.NOT: 3,
    Op.EQ: 4,
    Op.NE: 4,
    Op.LT: 4,
    Op.LE: 4,
    Op.GT: 4,
    Op.GE: 4,
    Op.JMP: 2,
    Op.JZ: 3,
    Op.CALL: 6,
    Op.TAILCALL: 5,
    Op.CALLIND: 6,
    Op.RET: 5,
    Op.NEWLIST: 3,
    Op.CONS: 3,
    Op.HEAD: 3,
    Op.TAIL: 3,
    Op.SUFFIX: 3,
    Op.SLICE: 4,
    Op.INDEX: 3,
    Op.NEWJSON: 3,
    Op.SETIDX: 4,
    Op.MKCLOSURE: 4,
    Op.LEN: 3,
    Op.TYPEOF: 3,
    Op.EXC: 2,
    Op.PRINT: 3,
    Op.FREAD: 4,
}

COST_TABLE: list[int] = [COST[op] for op in sorted(Op)]

# extra clops, charged on top of COST
VARIABLE_COST = {
    Op.NEWLIST: "+1 per element",
    Op.CONS: "+1 per element",
    Op.NEWJSON: "+1 per field",
    Op.INDEX: "+i cells walked (lists)",
    Op.SETIDX: "+i cells walked (lists)",
    Op.SUFFIX: "+i+1 cells walked",
    Op.SLICE: "+cells walked and cloned",
    Op.ADD: "+len(lhs) for list concatenation",
    Op.LEN: "+len for lists",
    Op.CALL: "+1 per local slot",
    Op.TAILCALL: "+1 per local slot",
    Op.CALLIND: "+1 per captured value and local slot",
    Op.MKCLOSURE: "+1 per captured value",
    Op.PRINT: "+1 per printed value",
    Op.FREAD: "+1 per cell read",
}


@dataclass
class CallSite:
    """A call whose static checks must wait until link time."""

    callee: str
    argc: int
    arg_arities: tuple[int | None, ...]  # expected arity of function-valued args
    from_star: bool
    caller: str


@dataclass
class CompileUnit:
    """Compiled code for a function, lambda, query or assembled program."""

    name: str
    code: list[Instr] = field(default_factory=list)
    consts: list[Any] = field(default_factory=list)
    params: tuple[str, ...] = ()
    arities: tuple[int, ...] = ()
    ret_arity: int = 0
    star: bool = False
    ncaptures: int = 0
    nlocals: int = 0
    lambdas: list["CompileUnit"] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    source: str = ""

    @property
    def nparams(self) -> int:
        return len(self.params)

    def const_index(self, value: Any) -> int:
        key = _const_key(value)
        for i, c in enumerate(self.consts):
            if _const_key(c) == key:
                return i
        self.consts.append(value)
        return len(self.consts) - 1

    def all_units(self) -> list["CompileUnit"]:
        out = [self]
        for lam in self.lambdas:
            out.extend(lam.all_units())
        return out

    def same_code(self, other: "CompileUnit") -> bool:
        """Bytecode identity: instructions, constants and frame layout."""
        return (
            self.name == other.name
            and self.code == other.code
            and len(self.consts) == len(other.consts)
            and all(_const_same(a, b) for a, b in zip(self.consts, other.consts))
            and self.params == other.params
            and self.arities == other.arities
            and self.ret_arity == other.ret_arity
            and self.star == other.star
            and self.ncaptures == other.ncaptures
            and self.nlocals == other.nlocals
            and len(self.lambdas) == len(other.lambdas)
            and all(a.same_code(b) for a, b in zip(self.lambdas, other.lambdas))
        )


def _const_key(v: Any) -> tuple:
    if type(v) is float:
        return (float, repr(v))
    return (type(v), v)


def _const_same(a: Any, b: Any) -> bool:
    if type(a) is not type(b):
        return False
    if type(a) is float and a != a:
        return b != b
    return a is b or a == b


def tail_call_optimize(unit: CompileUnit) -> CompileUnit:
    """Turn self-calls in tail position into frame-reusing TAILCALLs.

    A call is in tail position when the next instruction, after following
    unconditional jumps, is RET.
    """
    code = unit.code
    new = list(code)
    for i, (op, a, b) in enumerate(code):
        if op != Op.CALL or a != unit.name:
            continue
        j = i + 1
        hops = 0
        while j < len(code) and code[j][0] == Op.JMP and hops < len(code):
            j = code[j][1]
            hops += 1
        if j < len(code) and code[j][0] == Op.RET:
            new[i] = (int(Op.TAILCALL), a, b)
    if new == code:
        return unit
    return replace(unit, code=new)
