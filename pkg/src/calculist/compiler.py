"""AST to CLVM bytecode.

Functions are compiled when they are defined. Calls to functions that do not
exist yet are allowed inside bodies and checked when a query links the
program.  Static checks:

* type errors between constant operands;
* call arity whenever the callee is known, including function-valued
  arguments against ``f/n`` parameter annotations and ``g(...)/n`` results;
* star functions may only be called from star functions or from the top level;
* labeled globals are only visible to star functions that list their label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Protocol

from . import values as V
from .errors import CLRuntimeError, CompileError, TYPE_ERROR
from .frontend import ast as A
from .isa import CallSite, CompileUnit, Op, tail_call_optimize

BUILTINS = ("_len", "exc")

_ARITH = {"+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "/": Op.DIV, "//": Op.IDIV, "%": Op.MOD}
_REL = {"==": Op.EQ, "!=": Op.NE, "<": Op.LT, "<=": Op.LE, ">": Op.GT, ">=": Op.GE}
_UNARY = {"-": Op.NEG, "+": Op.POS, "!": Op.NOT}
_COMPOUND = {"+=": Op.ADD, "-=": Op.SUB, "*=": Op.MUL, "/=": Op.DIV}
_COMPOUND_SYM = {"+=": "+", "-=": "-", "*=": "*", "/=": "/"}


class State(Protocol):
    globals: dict[str, Any]
    labels: dict[str, list[str]]
    functions: dict[str, CompileUnit]


@dataclass
class _Scope:
    kind: str  # function | lambda | top
    star: bool
    params: dict[str, tuple[int, int]] = field(default_factory=dict)  # name -> (slot, arity)
    captures: dict[str, tuple[int, int]] = field(default_factory=dict)
    locals: dict[str, int] = field(default_factory=dict)
    labelvars: dict[str, str] = field(default_factory=dict)  # name -> "LABEL.name"


class _Counter:
    def __init__(self) -> None:
        self.n = 0

    def next(self) -> int:
        self.n += 1
        return self.n - 1


class _Gen:
    def __init__(self, unit: CompileUnit, scope: _Scope, state: State, counter: _Counter, root: str):
        self.unit = unit
        self.scope = scope
        self.state = state
        self.counter = counter
        self.root = root  # name prefix for lambdas

    # -- emission ------------------------------------------------------------

    def emit(self, op: Op, a: Any = None, b: Any = None) -> int:
        self.unit.code.append((int(op), a, b))
        return len(self.unit.code) - 1

    def patch(self, at: int) -> None:
        op, _, b = self.unit.code[at]
        self.unit.code[at] = (op, len(self.unit.code), b)

    def const(self, v: Any) -> None:
        self.emit(Op.PUSHC, self.unit.const_index(v))

    # -- name resolution --------------------------------------------------------

    def lookup(self, name: str) -> tuple[str, Any, int]:
        """Classify ``name`` as (kind, operand, arity).

        kinds: local, param, global, function, unknown.
        """
        s = self.scope
        if name in s.locals:
            return "local", s.locals[name], 0
        if name in s.params:
            slot, arity = s.params[name]
            return "param", slot, arity
        if name in s.captures:
            slot, arity = s.captures[name]
            return "param", slot, arity
        if name in s.labelvars:
            return "global", s.labelvars[name], 0
        if s.kind == "top" and name in self.state.globals and "." not in name:
            return "global", name, 0
        fn = self.function_info(name)
        if fn is not None:
            return "function", name, fn.nparams
        return "unknown", name, 0

    def function_info(self, name: str) -> CompileUnit | None:
        if self.scope.kind == "function" and name == self.root:
            return self.unit
        return self.state.functions.get(name)

    def load(self, kind: str, operand: Any) -> None:
        if kind == "local":
            self.emit(Op.LOADL, operand)
        elif kind == "param":
            self.emit(Op.LOADP, operand)
        elif kind == "global":
            self.emit(Op.LOADG, operand)
        else:
            raise AssertionError(kind)

    def store(self, kind: str, operand: Any) -> None:
        if kind == "local":
            self.emit(Op.STOREL, operand)
        elif kind == "param":
            self.emit(Op.STOREP, operand)
        elif kind == "global":
            self.emit(Op.STOREG, operand)
        else:
            raise AssertionError(kind)

    # -- expressions -----------------------------------------------------------

    def expr(self, e: A.Expr) -> None:
        method = getattr(self, "_" + type(e).__name__)
        method(e)

    def _Const(self, e: A.Const) -> None:
        if type(e.value) is int and not V.INT_MIN <= e.value <= V.INT_MAX:
            raise CompileError(f"integer constant {e.value} out of range")
        self.const(e.value)

    def _Name(self, e: A.Name) -> None:
        if e.name in BUILTINS:
            raise CompileError(f"built-in {e.name} can only be called")
        kind, operand, _ = self.lookup(e.name)
        if kind == "function":
            self.emit(Op.MKCLOSURE, operand, 0)
        elif kind == "unknown":
            if self.scope.kind == "top":
                raise CompileError(f"unknown identifier {e.name}")
            # forward reference to a function; checked at link time
            self.emit(Op.MKCLOSURE, operand, 0)
        else:
            self.load(kind, operand)

    def _LabeledName(self, e: A.LabeledName) -> None:
        key = f"{e.label}.{e.name}"
        if self.scope.kind == "top":
            if e.name not in self.state.labels.get(e.label, ()):
                raise CompileError(f"unknown labeled variable {key}")
        elif self.scope.labelvars.get(e.name) != key:
            raise CompileError(f"{key} is not accessible here: list {e.label}* in a star function")
        self.emit(Op.LOADG, key)

    def _Unary(self, e: A.Unary) -> None:
        if isinstance(e.operand, A.Const):
            fn = {"-": V.negate, "+": V.positive, "!": V.logical_not}[e.op]
            _static(lambda: fn(e.operand.value))  # type: ignore[union-attr]
        self.expr(e.operand)
        self.emit(_UNARY[e.op])

    def _Binary(self, e: A.Binary) -> None:
        if e.op in ("&&", "||"):
            self._logical(e)
            return
        if isinstance(e.left, A.Const) and isinstance(e.right, A.Const):
            x, y = e.left.value, e.right.value
            if e.op in _ARITH:
                _static(lambda: V.arith(e.op, x, y))
            else:
                _static(lambda: V.compare(e.op, x, y))
        self.expr(e.left)
        self.expr(e.right)
        self.emit(_ARITH.get(e.op) or _REL[e.op])

    def _logical(self, e: A.Binary) -> None:
        for side in (e.left, e.right):
            if isinstance(side, A.Const) and type(side.value) is not bool:
                raise CompileError(f"operand of {e.op} must be a bool, got {V.type_name(side.value)}")
        self.expr(e.left)
        jz = self.emit(Op.JZ)
        if e.op == "&&":
            self.expr(e.right)
            jend = self.emit(Op.JMP)
            self.patch(jz)
            self.const(False)
        else:
            self.const(True)
            jend = self.emit(Op.JMP)
            self.patch(jz)
            self.expr(e.right)
        self.patch(jend)

    def _Conditional(self, e: A.Conditional) -> None:
        if isinstance(e.cond, A.Const) and type(e.cond.value) is not bool:
            raise CompileError(f"condition must be a bool, got {V.type_name(e.cond.value)}")
        self.expr(e.cond)
        jz = self.emit(Op.JZ)
        self.expr(e.then)
        jend = self.emit(Op.JMP)
        self.patch(jz)
        self.expr(e.else_)
        self.patch(jend)

    def _Decorated(self, e: A.Decorated) -> None:
        for b in e.pre:
            self.block(b)
        self.expr(e.core)
        for b in e.post:
            self.block(b)

    def _ListLit(self, e: A.ListLit) -> None:
        for item in e.items:
            self.expr(item)
        if e.rest is None:
            self.emit(Op.NEWLIST, len(e.items))
        else:
            if isinstance(e.rest, A.Const) and type(e.rest.value) is not V.Cell:
                raise CompileError(f"the operand after | must be a list, got {V.type_name(e.rest.value)}")
            self.expr(e.rest)
            self.emit(Op.CONS, len(e.items))

    def _JsonLit(self, e: A.JsonLit) -> None:
        keys = tuple(k for k, _ in e.fields)
        if len(set(keys)) != len(keys):
            raise CompileError("duplicate key in json literal")
        for _, v in e.fields:
            self.expr(v)
        self.emit(Op.NEWJSON, keys)

    def _check_indexable(self, target: A.Expr, what: str, kinds: tuple[type, ...]) -> None:
        if isinstance(target, A.Const) and type(target.value) not in kinds:
            raise CompileError(f"{what} not defined on {V.type_name(target.value)}")

    def _Index(self, e: A.Index) -> None:
        self._check_indexable(e.target, "indexing", (V.Cell, str))
        self.expr(e.target)
        self.expr(e.index)
        self.emit(Op.INDEX)

    def _Head(self, e: A.Head) -> None:
        self._check_indexable(e.target, "[.]", (V.Cell,))
        self.expr(e.target)
        self.emit(Op.HEAD)

    def _Tail(self, e: A.Tail) -> None:
        self._check_indexable(e.target, "[>]", (V.Cell,))
        self.expr(e.target)
        self.emit(Op.TAIL)

    def _Suffix(self, e: A.Suffix) -> None:
        self._check_indexable(e.target, "[>i]", (V.Cell,))
        self.expr(e.target)
        self.expr(e.index)
        self.emit(Op.SUFFIX)

    def _Slice(self, e: A.Slice) -> None:
        self._check_indexable(e.target, "slicing", (V.Cell, str))
        self.expr(e.target)
        mask = 0
        if e.lo is not None:
            self.expr(e.lo)
            mask |= 1
        if e.hi is not None:
            self.expr(e.hi)
            mask |= 2
        self.emit(Op.SLICE, mask)

    def _TypeOf(self, e: A.TypeOf) -> None:
        self.expr(e.operand)
        self.emit(Op.TYPEOF)

    def _ReadFile(self, e: A.ReadFile) -> None:
        self.emit(Op.FREAD, e.path)

    # -- calls -------------------------------------------------------------------

    def _Call(self, e: A.Call) -> None:
        callee = e.callee
        argc = len(e.args)
        if isinstance(callee, A.Name):
            name = callee.name
            if name in BUILTINS:
                self._builtin(name, e.args)
                return
            kind, operand, arity = self.lookup(name)
            if kind == "function" or (kind == "unknown" and self.scope.kind != "top"):
                self._direct_call(name, e.args)
                return
            if kind == "unknown":
                raise CompileError(f"unknown function {name}")
            if kind == "param":
                if arity == 0:
                    raise CompileError(f"parameter {name} is not a function parameter (declare it as {name}/n)")
                if arity != argc:
                    raise CompileError(f"{name} has arity {arity} but is called with {argc} arguments")
            self.load(kind, operand)
        else:
            if isinstance(callee, A.Call) and isinstance(callee.callee, A.Name):
                inner = callee.callee.name
                kind, _, _ = self.lookup(inner)
                fn = self.function_info(inner) if kind == "function" else None
                if fn is not None:
                    if fn.ret_arity == 0:
                        raise CompileError(f"{inner} does not return a function")
                    if fn.ret_arity != argc:
                        raise CompileError(
                            f"{inner} returns a function of arity {fn.ret_arity}, called with {argc} arguments"
                        )
            if isinstance(callee, A.Lambda) and len(callee.params) != argc:
                raise CompileError(f"lambda of arity {len(callee.params)} called with {argc} arguments")
            if isinstance(callee, A.Const):
                raise CompileError(f"a {V.type_name(callee.value)} is not a function")
            self.expr(callee)
        for arg in e.args:
            self.expr(arg)
        self.emit(Op.CALLIND, argc)

    def _builtin(self, name: str, args: tuple[A.Expr, ...]) -> None:
        if len(args) != 1:
            raise CompileError(f"{name} takes exactly one argument")
        arg = args[0]
        if name == "_len":
            if isinstance(arg, A.Const) and type(arg.value) not in (str, V.Cell):
                raise CompileError(f"_len not defined on {V.type_name(arg.value)}")
            self.expr(arg)
            self.emit(Op.LEN)
        else:
            if isinstance(arg, A.Const) and type(arg.value) is not str:
                raise CompileError("exc requires a string message")
            self.expr(arg)
            self.emit(Op.EXC)

    def provided_arity(self, arg: A.Expr) -> int | None:
        """Arity of a function-valued argument: 0 when surely not a function,
        None when unknown until run time."""
        if isinstance(arg, A.Lambda):
            return len(arg.params)
        if isinstance(arg, (A.Const, A.ListLit, A.JsonLit)):
            return 0
        if isinstance(arg, A.Name):
            kind, _, arity = self.lookup(arg.name)
            if kind == "param":
                return arity or None
            if kind == "function":
                return arity
        return None

    def _direct_call(self, name: str, args: tuple[A.Expr, ...]) -> None:
        argc = len(args)
        provided = tuple(self.provided_arity(a) for a in args)
        fn = self.function_info(name)
        caller_star = self.scope.star
        if fn is None:
            self.unit.calls.append(CallSite(name, argc, provided, caller_star, self.unit.name))
        else:
            check_call(fn, argc, provided, caller_star, self.unit.name)
        for arg in args:
            self.expr(arg)
        self.emit(Op.CALL, name, argc)

    def _Lambda(self, e: A.Lambda) -> None:
        bound = {p.name for p in e.params}
        if len(bound) != len(e.params):
            raise CompileError("duplicate lambda parameter")
        captures: list[tuple[str, str, Any, int]] = []
        for name in free_names(e.body, bound):
            kind, operand, arity = self.lookup(name)
            if kind in ("local", "param"):
                captures.append((name, kind, operand, arity))
            elif kind == "global":
                if self.scope.kind != "top":
                    raise CompileError(f"a lambda cannot use the global variable {name}")
                captures.append((name, kind, operand, 0))
        lname = f"{self.root}$lambda{self.counter.next()}"
        sub = CompileUnit(
            lname,
            params=tuple(p.name for p in e.params),
            arities=tuple(p.arity for p in e.params),
            ncaptures=len(captures),
        )
        scope = _Scope("lambda", star=False)
        for i, p in enumerate(e.params):
            scope.params[p.name] = (i, p.arity)
        for j, (name, _, _, arity) in enumerate(captures):
            scope.captures[name] = (len(e.params) + j, arity)
        gen = _Gen(sub, scope, self.state, self.counter, self.root)
        gen.expr(e.body)
        gen.emit(Op.RET)
        self.unit.lambdas.append(sub)
        for _, kind, operand, _ in captures:
            self.load(kind, operand)
        self.emit(Op.MKCLOSURE, lname, len(captures))

    # -- setting and printing blocks ----------------------------------------------

    def block(self, b: A.Block) -> None:
        if isinstance(b, A.PrintBlock):
            if not self.scope.star:
                raise CompileError("printing commands are only allowed in star functions")
            self.expr(b.expr)
            self.emit(Op.PRINT, 1)
            return
        t = b.target
        kind, operand, _ = self.lookup(t.name)
        if kind not in ("local", "param", "global"):
            raise CompileError(f"cannot set {t.name}: not a local, parameter or labeled variable")
        if not self.scope.star and (kind != "local" or t.selectors):
            raise CompileError(f"setting {t.name} has side effects: only star functions may do it")
        if not t.selectors:
            if b.op != "=":
                self.load(kind, operand)
            self.expr(b.value)
            if b.op != "=":
                self.emit(_COMPOUND[b.op])
            self.store(kind, operand)
            return
        self.load(kind, operand)
        for sel in t.selectors[:-1]:
            self.expr(sel)
            self.emit(Op.INDEX)
        self.expr(t.selectors[-1])
        if b.op != "=":
            self.emit(Op.DUP2)
            self.emit(Op.INDEX)
        self.expr(b.value)
        if b.op != "=":
            self.emit(_COMPOUND[b.op])
        self.emit(Op.SETIDX)


def _static(thunk) -> None:
    try:
        thunk()
    except CLRuntimeError as exc:
        if exc.kind == TYPE_ERROR:
            raise CompileError(f"type error: {exc.message}") from None


def check_call(fn: CompileUnit, argc: int, provided: tuple[int | None, ...], caller_star: bool, caller: str) -> None:
    if fn.star and not caller_star:
        raise CompileError(f"star function {fn.name} cannot be called by non-star function {caller}")
    if fn.nparams != argc:
        raise CompileError(f"{fn.name} expects {fn.nparams} arguments, got {argc}")
    for i, (got, want) in enumerate(zip(provided, fn.arities)):
        if got is None:
            continue
        if want and got != want:
            if got == 0:
                raise CompileError(f"argument {i + 1} of {fn.name} must be a function of arity {want}")
            raise CompileError(f"argument {i + 1} of {fn.name} must have arity {want}, got arity {got}")
        if not want and got:
            raise CompileError(f"argument {i + 1} of {fn.name} is not a function parameter")


def _children(e: A.Expr) -> Iterator[A.Expr]:
    if isinstance(e, A.Decorated):
        for b in e.pre + e.post:
            if isinstance(b, A.SetBlock):
                yield from b.target.selectors
                yield b.value
            else:
                yield b.expr
        yield e.core
        return
    for name in e.__dataclass_fields__:
        v = getattr(e, name)
        if isinstance(v, tuple):
            for x in v:
                if isinstance(x, tuple):  # json fields
                    yield x[1]
                elif not isinstance(x, A.Param):
                    yield x
        elif v is not None and hasattr(v, "__dataclass_fields__"):
            yield v


def free_names(e: A.Expr, bound: set[str]) -> list[str]:
    """Names used in ``e`` that are not bound by an enclosing lambda, in
    order of first appearance."""
    out: list[str] = []

    def walk(node: A.Expr, bound: set[str]) -> None:
        if isinstance(node, A.Name):
            if node.name not in bound and node.name not in out:
                out.append(node.name)
            return
        if isinstance(node, A.Lambda):
            walk(node.body, bound | {p.name for p in node.params})
            return
        for child in _children(node):
            walk(child, bound)

    walk(e, bound)
    return out


# -- entry points ------------------------------------------------------------------


def compile_function(fd: A.FunctionDef, state: State) -> CompileUnit:
    if fd.name in BUILTINS:
        raise CompileError(f"{fd.name} is a built-in function")
    prev = state.functions.get(fd.name)
    if prev is not None and prev.star != fd.star:
        was = "a star" if prev.star else "a non-star"
        raise CompileError(f"{fd.name} was defined as {was} function; this cannot be changed")
    scope = _Scope("function", star=fd.star)
    for i, p in enumerate(fd.params):
        scope.params[p.name] = (i, p.arity)
    for j, name in enumerate(fd.locals):
        scope.locals[name] = len(fd.params) + j
    ambiguous: set[str] = set()
    for label in fd.labels:
        if label not in state.labels:
            raise CompileError(f"unknown label {label}")
        for name in state.labels[label]:
            if name in scope.labelvars:
                ambiguous.add(name)
            scope.labelvars[name] = f"{label}.{name}"
    for name in ambiguous:
        del scope.labelvars[name]
    unit = CompileUnit(
        fd.name,
        params=tuple(p.name for p in fd.params),
        arities=tuple(p.arity for p in fd.params),
        ret_arity=fd.ret_arity,
        star=fd.star,
        nlocals=len(fd.locals),
        source=fd.source,
    )
    gen = _Gen(unit, scope, state, _Counter(), fd.name)
    try:
        gen.expr(fd.body)
    except CompileError as exc:
        raise CompileError(f"in {fd.name}: {exc}") from None
    if fd.ret_arity and isinstance(fd.body, A.Lambda) and len(fd.body.params) != fd.ret_arity:
        raise CompileError(f"{fd.name} must return a function of arity {fd.ret_arity}")
    gen.emit(Op.RET)
    return unit


def _top_unit(name: str, state: State) -> tuple[CompileUnit, _Gen]:
    # the top level may call star functions
    unit = CompileUnit(name, star=True)
    return unit, _Gen(unit, _Scope("top", star=True), state, _Counter(), name)


def compile_query(expr: A.Expr, state: State, show_null: bool = False) -> CompileUnit:
    unit, gen = _top_unit("$query", state)
    gen.expr(expr)
    gen.emit(Op.PRINT, int(show_null))
    gen.emit(Op.HALT)
    return unit


def compile_assignment(stmt: A.Assign | A.LabelDecl, state: State) -> CompileUnit:
    unit, gen = _top_unit("$assign", state)
    if isinstance(stmt, A.LabelDecl):
        for name in stmt.names:
            gen.const(None)
            gen.emit(Op.STOREG, f"{stmt.label}.{name}")
        gen.emit(Op.HALT)
        return unit
    if stmt.label is not None:
        key = f"{stmt.label}.{stmt.name}"
        if stmt.name not in state.labels.get(stmt.label, ()):
            raise CompileError(f"unknown labeled variable {key}")
    else:
        key = stmt.name
    if stmt.op != "=":
        if key not in state.globals:
            raise CompileError(f"{key} is not defined")
        gen.emit(Op.LOADG, key)
    gen.expr(stmt.expr)
    if stmt.op != "=":
        if isinstance(stmt.expr, A.Const):
            _static(lambda: V.arith(_COMPOUND_SYM[stmt.op], state.globals[key], stmt.expr.value))  # type: ignore[union-attr]
        gen.emit(_COMPOUND[stmt.op])
    gen.emit(Op.STOREG, key)
    gen.emit(Op.HALT)
    return unit


def link(entry: CompileUnit, functions: dict[str, CompileUnit], tail_opt: bool = True) -> dict[str, CompileUnit]:
    """Resolve every function reachable from ``entry``.

    Returns the runtime function table (lambdas included), with tail calls
    optimized when ``tail_opt`` is set.  Raises :class:`CompileError` on
    undefined functions or on call sites that fail their deferred checks.
    """
    table: dict[str, CompileUnit] = {}
    for fn in functions.values():
        for u in fn.all_units():
            table[u.name] = u
    for u in entry.all_units()[1:]:
        table[u.name] = u

    seen: set[str] = set()
    todo = entry.all_units()
    while todo:
        unit = todo.pop()
        for site in unit.calls:
            callee = table.get(site.callee)
            if callee is None:
                raise CompileError(f"undefined function {site.callee} (called from {site.caller})")
            check_call(callee, site.argc, site.arg_arities, site.from_star, site.caller)
        for op, a, b in unit.code:
            if op in (Op.CALL, Op.TAILCALL, Op.MKCLOSURE):
                if a not in table:
                    raise CompileError(
                        f"{a} used in {unit.name} is not a function, parameter or local variable"
                    )
                if op != Op.MKCLOSURE and table[a].nparams != b:
                    # the callee was redefined after the caller was compiled
                    raise CompileError(
                        f"{unit.name} calls {a} with {b} arguments but {a} now takes {table[a].nparams}"
                    )
                if a not in seen:
                    seen.add(a)
                    todo.extend(table[a].all_units())
    if tail_opt:
        table = {name: tail_call_optimize(u) for name, u in table.items()}
    return table
