"""The CalcuList Virtual Machine.

Memories: the STACK (a list of value slots plus a frame list), the HEAP
(Python objects: :class:`~calculist.values.Cell`, ``Json``, ``Closure`` and
strings), CODE (the linked function table) and OUTPUT (a sink receiving
printed lines).  Every executed instruction adds its cost from
:data:`~calculist.isa.COST_TABLE` to the clops counter, plus one clop per
heap cell walked by the instructions that walk lists.

A frame occupies ``stack[bp:]``: parameters, then captured values (lambdas),
then locals, then the operand stack of the call.
"""

from __future__ import annotations

from collections import Counter
from typing import Any, Callable, TextIO

from . import values as V
from .errors import (
    ARITY,
    PURITY,
    STACK_OVERFLOW,
    TYPE_ERROR,
    UNRESOLVED,
    USER_EXCEPTION,
    CLRuntimeError,
)
from .isa import COST_TABLE, CompileUnit, Op

DEFAULT_STACK_LIMIT = 10**6

_ARITH_SYM = {Op.ADD: "+", Op.SUB: "-", Op.MUL: "*", Op.DIV: "/", Op.IDIV: "//", Op.MOD: "%"}
_REL_SYM = {Op.LT: "<", Op.LE: "<=", Op.GT: ">", Op.GE: ">="}

# plain ints for the dispatch loop
(HALT, PUSHC, LOADP, LOADL, LOADG, STOREP, STOREL, STOREG, POP, DUP2,
 ADD, SUB, MUL, DIV, IDIV, MOD, NEG, POS, NOT,
 EQ, NE, LT, LE, GT, GE,
 JMP, JZ, CALL, TAILCALL, CALLIND, RET,
 NEWLIST, CONS, HEAD, TAIL, SUFFIX, SLICE, INDEX, NEWJSON, SETIDX, MKCLOSURE,
 LEN, TYPEOF, EXC, PRINT, FREAD) = range(46)  # fmt: skip

assert FREAD == Op.FREAD and CALLIND == Op.CALLIND


def _find_unit(unit: CompileUnit, name: str) -> CompileUnit | None:
    for u in unit.all_units():
        if u.name == name:
            return u
    return None


def _display_name(name: str) -> str:
    if name.startswith("$"):
        name = name[1:]
    return name.split("$", 1)[0] if "$lambda" in name else name


class Machine:
    """Executes linked CLVM code against a global store.

    ``globals`` maps global names (``x``, ``LABEL.name``) to values and is
    updated in place.  ``sink`` receives each printed line; ``reader`` maps
    a file name to a value for ``<<(file)``.
    """

    def __init__(
        self,
        globals: dict[str, Any] | None = None,
        *,
        sink: Callable[[str], None] | None = None,
        reader: Callable[[str], Any] | None = None,
        stack_limit: int = DEFAULT_STACK_LIMIT,
        trace: TextIO | None = None,
    ):
        self.globals = {} if globals is None else globals
        self.output: list[str] = []
        self.sink = sink if sink is not None else self.output.append
        self.reader = reader
        self.stack_limit = stack_limit
        self.trace = trace
        self.last_clops = 0
        self.max_depth = 0
        self.stack_size = 0
        self.heap = Counter()  # allocations by kind, for the whole session

    def execute(self, entry: CompileUnit, table: dict[str, CompileUnit]) -> int:
        """Run ``entry`` to HALT and return its clops.

        On a runtime error the stack is unwound, ``last_clops`` keeps the
        cost spent so far and the error is re-raised.
        """
        self.max_depth = 0
        clops = [0]
        try:
            self._run(entry, table, clops)
        finally:
            self.last_clops = clops[0]
            self.stack_size = 0
        return clops[0]

    def _run(self, entry: CompileUnit, table: dict[str, CompileUnit], clops_out: list[int]) -> None:
        cost = COST_TABLE
        g = self.globals
        heap = self.heap
        trace = self.trace
        sink = self.sink
        limit = self.stack_limit
        arith = V.arith
        wrap = V.wrap32
        Cell = V.Cell
        NIL = V.NIL

        stack: list[Any] = [None] * entry.nlocals
        frames: list[tuple] = []
        unit = entry
        code = unit.code
        consts = unit.consts
        pc = 0
        bp = 0
        clops = 0
        max_depth = 0
        try:
            while True:
                op, a, b = code[pc]
                clops += cost[op]
                if trace is not None:
                    self._trace_line(trace, unit, pc, op, a, b, clops, len(frames))
                pc += 1
                if op == LOADP or op == LOADL:
                    stack.append(stack[bp + a])
                elif op == PUSHC:
                    stack.append(consts[a])
                elif op == JZ:
                    v = stack.pop()
                    if v is False:
                        pc = a
                    elif v is not True:
                        raise V.type_error(f"condition must be a bool, got {V.type_name(v)}")
                elif op == JMP:
                    pc = a
                elif op == EQ:
                    y = stack.pop()
                    stack[-1] = V.equal(stack[-1], y)
                elif op == NE:
                    y = stack.pop()
                    stack[-1] = not V.equal(stack[-1], y)
                elif op == ADD:
                    y = stack.pop()
                    x = stack[-1]
                    if type(x) is int and type(y) is int:
                        stack[-1] = wrap(x + y)
                    elif type(x) is Cell and type(y) is Cell:
                        stack[-1], n = V.concat(x, y)
                        clops += n
                        heap["cell"] += n
                    else:
                        r = arith("+", x, y)
                        if type(r) is str:
                            heap["string"] += 1
                        stack[-1] = r
                elif op == SUB:
                    y = stack.pop()
                    x = stack[-1]
                    if type(x) is int and type(y) is int:
                        stack[-1] = wrap(x - y)
                    else:
                        stack[-1] = arith("-", x, y)
                elif op == HEAD:
                    stack[-1] = V.head(stack[-1])
                elif op == TAIL:
                    stack[-1] = V.tail(stack[-1])
                elif op == CONS:
                    rest = stack.pop()
                    if type(rest) is not Cell:
                        raise V.type_error(f"the operand after | must be a list, got {V.type_name(rest)}")
                    n = a
                    for _ in range(n):
                        rest = Cell(stack.pop(), rest)
                    stack.append(rest)
                    clops += n
                    heap["cell"] += n
                elif op == CALL or op == TAILCALL:
                    fn = table[a]
                    if op == TAILCALL:
                        base = len(stack) - b
                        stack[bp:base] = []
                        if fn.nlocals:
                            stack.extend([None] * fn.nlocals)
                        clops += fn.nlocals
                        pc = 0
                        continue
                    if len(frames) >= limit:
                        raise CLRuntimeError(STACK_OVERFLOW, f"more than {limit} nested calls")
                    frames.append((unit, code, consts, pc, bp))
                    if len(frames) > max_depth:
                        max_depth = len(frames)
                    bp = len(stack) - b
                    if fn.nlocals:
                        stack.extend([None] * fn.nlocals)
                    clops += fn.nlocals
                    unit = fn
                    code = fn.code
                    consts = fn.consts
                    pc = 0
                elif op == RET:
                    result = stack.pop()
                    del stack[bp:]
                    stack.append(result)
                    unit, code, consts, pc, bp = frames.pop()
                elif op == MUL:
                    y = stack.pop()
                    x = stack[-1]
                    if type(x) is int and type(y) is int:
                        stack[-1] = wrap(x * y)
                    else:
                        stack[-1] = arith("*", x, y)
                elif op == LT or op == LE or op == GT or op == GE:
                    y = stack.pop()
                    x = stack[-1]
                    if type(x) is int and type(y) is int:
                        if op == LT:
                            stack[-1] = x < y
                        elif op == LE:
                            stack[-1] = x <= y
                        elif op == GT:
                            stack[-1] = x > y
                        else:
                            stack[-1] = x >= y
                    else:
                        stack[-1] = V.compare(_REL_SYM[op], x, y)
                elif op == DIV or op == IDIV or op == MOD:
                    y = stack.pop()
                    stack[-1] = arith(_ARITH_SYM[op], stack[-1], y)
                elif op == INDEX:
                    k = stack.pop()
                    stack[-1], walked = V.index(stack[-1], k)
                    clops += walked
                elif op == SUFFIX:
                    i = stack.pop()
                    stack[-1], walked = V.suffix(stack[-1], i)
                    clops += walked
                elif op == STOREL or op == STOREP:
                    stack[bp + a] = stack.pop()
                elif op == LOADG:
                    try:
                        stack.append(g[a])
                    except KeyError:
                        raise CLRuntimeError(UNRESOLVED, f"global variable {a} is not defined") from None
                elif op == STOREG:
                    g[a] = stack.pop()
                elif op == NEWLIST:
                    lst = NIL
                    for _ in range(a):
                        lst = Cell(stack.pop(), lst)
                    stack.append(lst)
                    clops += a
                    heap["cell"] += a
                elif op == CALLIND:
                    argc = a
                    base = len(stack) - argc
                    clo = stack[base - 1]
                    if type(clo) is not V.Closure:
                        raise V.type_error(f"a value of type {V.type_name(clo)} is not a function")
                    fn = clo.fn
                    if fn.nparams != argc:
                        raise CLRuntimeError(
                            ARITY, f"{_display_name(fn.name)} expects {fn.nparams} arguments, got {argc}"
                        )
                    if fn.star and not unit.star:
                        raise CLRuntimeError(
                            PURITY, f"star function {fn.name} cannot be called by non-star {unit.name}"
                        )
                    if len(frames) >= limit:
                        raise CLRuntimeError(STACK_OVERFLOW, f"more than {limit} nested calls")
                    del stack[base - 1]
                    frames.append((unit, code, consts, pc, bp))
                    if len(frames) > max_depth:
                        max_depth = len(frames)
                    bp = base - 1
                    if clo.captures:
                        stack.extend(clo.captures)
                    if fn.nlocals:
                        stack.extend([None] * fn.nlocals)
                    clops += len(clo.captures) + fn.nlocals
                    unit = fn
                    code = fn.code
                    consts = fn.consts
                    pc = 0
                elif op == MKCLOSURE:
                    fn = table.get(a) or _find_unit(unit, a)
                    if fn is None:
                        raise CLRuntimeError(UNRESOLVED, f"function {a} is not defined")
                    if b:
                        caps = tuple(stack[-b:])
                        del stack[-b:]
                    else:
                        caps = ()
                    stack.append(V.Closure(fn, caps))
                    clops += b
                    heap["closure"] += 1
                elif op == SLICE:
                    hi = stack.pop() if a & 2 else None
                    lo = stack.pop() if a & 1 else None
                    r, visited = V.slice_value(stack[-1], lo, hi)
                    stack[-1] = r
                    clops += visited
                    heap[V.type_name(r)] += 1
                elif op == SETIDX:
                    v = stack.pop()
                    k = stack.pop()
                    t = stack.pop()
                    clops += V.set_index(t, k, v)
                elif op == DUP2:
                    stack.extend(stack[-2:])
                elif op == POP:
                    stack.pop()
                elif op == NEWJSON:
                    n = len(a)
                    vals = stack[len(stack) - n :]
                    del stack[len(stack) - n :]
                    stack.append(V.make_json(a, vals))
                    clops += n
                    heap["json"] += 1
                elif op == NEG:
                    stack[-1] = V.negate(stack[-1])
                elif op == POS:
                    stack[-1] = V.positive(stack[-1])
                elif op == NOT:
                    stack[-1] = V.logical_not(stack[-1])
                elif op == LEN:
                    n, walked = V.length(stack[-1])
                    stack[-1] = n
                    clops += walked
                elif op == TYPEOF:
                    stack[-1] = V.type_of(stack[-1])
                elif op == PRINT:
                    v = stack.pop()
                    if v is not None or a:
                        clops += V.count_atoms(v)
                        sink(V.show(v))
                elif op == EXC:
                    msg = stack.pop()
                    raise CLRuntimeError(USER_EXCEPTION, msg if type(msg) is str else V.show(msg))
                elif op == FREAD:
                    if self.reader is None:
                        raise CLRuntimeError(UNRESOLVED, "reading files is not available")
                    v = self.reader(a)
                    stack.append(v)
                    clops += V.count_atoms(v)
                elif op == HALT:
                    return
                else:
                    raise CLRuntimeError(TYPE_ERROR, f"bad opcode {op}")
        except CLRuntimeError as exc:
            if exc.function is None:
                exc.function = _display_name(unit.name)
            raise
        finally:
            clops_out[0] = clops
            self.max_depth = max_depth

    @staticmethod
    def _trace_line(out: TextIO, unit: CompileUnit, pc: int, op: int, a: Any, b: Any, clops: int, depth: int) -> None:
        operands = " ".join(repr(x) if isinstance(x, str) else str(x) for x in (a, b) if x is not None)
        if op == PUSHC:
            operands = f"{a} ({V.show(unit.consts[a], top=False)})"
        out.write(f"{unit.name}:{pc:<4d} {'  ' * min(depth, 20)}{Op(op).name:<9} {operands:<24} clops={clops}\n")


def run(entry: CompileUnit, table: dict[str, CompileUnit] | None = None, **kwargs: Any) -> tuple[list[str], int]:
    """Convenience wrapper: execute and return (printed lines, clops)."""
    m = Machine(**kwargs)
    clops = m.execute(entry, table or {u.name: u for u in entry.all_units()})
    return m.output, clops
