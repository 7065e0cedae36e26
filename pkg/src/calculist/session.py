"""The interactive session: state, statement dispatch and service commands."""

from __future__ import annotations

import io
import os
import sys
from dataclasses import dataclass, field
from typing import Any, TextIO

from . import compiler
from . import values as V
from .assembler import disassemble
from .clvm import DEFAULT_STACK_LIMIT, Machine
from .errors import IO_ERROR, CalcuListError, CLRuntimeError, CompileError, LexError, ParseError
from .frontend import Parser, ast as A, is_complete, read_literal
from .isa import CompileUnit, tail_call_optimize

SERVICES = ("clops", "vars", "funcs", "history", "memory", "debug", "opt", "save", "import", "code", "help")


@dataclass
class SessionState:
    globals: dict[str, Any] = field(default_factory=dict)
    labels: dict[str, list[str]] = field(default_factory=dict)
    functions: dict[str, CompileUnit] = field(default_factory=dict)
    defs: dict[str, A.FunctionDef] = field(default_factory=dict)
    history: list[str] = field(default_factory=list)
    tail_opt: bool = True
    debug: bool = False
    redirect: str | None = None
    last_clops: int = 0


def error_text(exc: CalcuListError) -> str:
    if isinstance(exc, (LexError, ParseError)):
        return f"syntax error: {exc}"
    if isinstance(exc, CompileError):
        return f"static error: {exc}"
    return str(exc)


def write_value(path: str, v: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(V.show(v, top=False) + "\n")


def read_value(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise CLRuntimeError(IO_ERROR, f"cannot read {path}: {exc.strerror}") from None
    try:
        return read_literal(text.strip())
    except (LexError, ParseError) as exc:
        raise CLRuntimeError(IO_ERROR, f"{path} does not contain a value: {exc}") from None


class Session:
    """One REPL session.

    :meth:`eval_input` runs a chunk of source (one or more statements) and
    returns everything that would be shown on the console.  Output of
    queries and printing commands goes to the redirect file when one is set.
    """

    def __init__(
        self,
        *,
        tail_opt: bool = True,
        debug: bool = False,
        stack_limit: int = DEFAULT_STACK_LIMIT,
        base_dir: str | None = None,
        diag: TextIO | None = None,
    ):
        self.state = SessionState(tail_opt=tail_opt, debug=debug)
        self.base_dir = base_dir or os.getcwd()
        self.diag = diag if diag is not None else sys.stderr
        self._console: list[str] = []
        self.machine = Machine(
            self.state.globals,
            sink=self._emit,
            reader=lambda p: read_value(self._path(p)),
            stack_limit=stack_limit,
        )
        self.errors = 0  # number of failed statements so far
        self._pending = ""

    # -- output ---------------------------------------------------------------

    def _path(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def _emit(self, line: str) -> None:
        if self.state.redirect:
            with open(self._path(self.state.redirect), "a", encoding="utf-8") as f:
                f.write(line + "\n")
        else:
            self._console.append(line)

    # -- input ----------------------------------------------------------------

    def eval_input(self, text: str) -> str:
        """Evaluate ``text`` statement by statement and return console output.

        A statement that fails prints its error; later statements still run.
        A syntax error stops the rest of the chunk.
        """
        start = len(self._console)
        parser = Parser(text) if text.strip() else None
        while parser is not None:
            try:
                while parser.accept(";"):
                    pass
                if parser.tok.kind == "eof":
                    break
                stmt = parser.parse_statement()
            except (LexError, ParseError) as exc:
                self._fail(exc)
                break
            self.execute(stmt)
        out = self._console[start:]
        del self._console[start:]
        return "\n".join(out)

    def feed(self, line: str) -> tuple[bool, str]:
        """Accumulate physical lines until a statement is complete.

        Returns (complete, output).
        """
        self._pending += line if not self._pending else "\n" + line
        if not is_complete(self._pending):
            return False, ""
        text, self._pending = self._pending, ""
        return True, self.eval_input(text)

    @property
    def pending(self) -> bool:
        return bool(self._pending)

    def run_source(self, text: str) -> str:
        return self.eval_input(text)

    def _fail(self, exc: CalcuListError) -> None:
        self.errors += 1
        self._console.append(error_text(exc))

    # -- statements -------------------------------------------------------------

    def execute(self, stmt: A.Statement) -> bool:
        try:
            if isinstance(stmt, A.Service):
                self.service(stmt.name, stmt.arg)
                return True
            if isinstance(stmt, A.Redirect):
                self.state.redirect = stmt.path or None
                return True
            if isinstance(stmt, A.FunctionDef):
                self.define(stmt)
            elif isinstance(stmt, A.Query):
                unit = compiler.compile_query(stmt.expr, self.state, stmt.show_null)
                self.run(unit)
            elif isinstance(stmt, A.LabelDecl):
                unit = compiler.compile_assignment(stmt, self.state)
                old = self.state.labels.get(stmt.label, [])
                for name in old:
                    if name not in stmt.names:
                        self.state.globals.pop(f"{stmt.label}.{name}", None)
                self.state.labels[stmt.label] = list(stmt.names)
                self.run(unit)
            else:
                unit = compiler.compile_assignment(stmt, self.state)
                self.run(unit)
        except CalcuListError as exc:
            self._fail(exc)
            return False
        line = " ".join(stmt.source.split("\n")).strip()
        # the final statement of an input may omit its ';'
        self.state.history.append(line if line.endswith(";") else line + ";")
        return True

    def define(self, fd: A.FunctionDef) -> None:
        unit = compiler.compile_function(fd, self.state)
        self.state.functions[fd.name] = unit
        self.state.defs[fd.name] = fd

    def run(self, unit: CompileUnit) -> None:
        table = compiler.link(unit, self.state.functions, self.state.tail_opt)
        self.machine.trace = self.diag if self.state.debug else None
        try:
            self.machine.execute(unit, table)
        finally:
            self.state.last_clops = self.machine.last_clops

    # -- service commands ---------------------------------------------------------

    def service(self, name: str, arg: str) -> None:
        if name not in SERVICES:
            raise CompileError(f"unknown service command !{name} (try !help)")
        getattr(self, "_svc_" + name)(arg.strip().strip("\"'"))

    def _say(self, text: str) -> None:
        self._console.extend(text.split("\n") if text else [])

    def _svc_help(self, arg: str) -> None:
        self._say("service commands: " + ", ".join("!" + s for s in SERVICES))

    def _svc_clops(self, arg: str) -> None:
        self._say(str(self.state.last_clops))

    def _svc_vars(self, arg: str) -> None:
        self._say("\n".join(self.vars_listing()))

    def vars_listing(self) -> list[str]:
        return [f"{k}: {V.type_name(v)} = {V.show(v, top=False)}" for k, v in self.state.globals.items()]

    def _svc_funcs(self, arg: str) -> None:
        self._say("\n".join(fd.signature for fd in self.state.defs.values()))

    def _svc_history(self, arg: str) -> None:
        self._say("\n".join(f"{i + 1}: {s}" for i, s in enumerate(self.state.history)))

    def _svc_memory(self, arg: str) -> None:
        m = self.machine
        heap = ", ".join(f"{n} {k}s" for k, n in sorted(m.heap.items())) or "empty"
        self._say(
            f"stack: {m.stack_size} slots in use, max call depth {m.max_depth} in the last execution\n"
            f"heap allocations: {heap}\n"
            f"globals: {len(self.state.globals)}, functions: {len(self.state.functions)}"
        )

    def _toggle(self, arg: str, attr: str, label: str) -> None:
        if arg in ("on", "off"):
            setattr(self.state, attr, arg == "on")
        elif arg:
            raise CompileError(f"!{label} expects on or off")
        self._say(f"{label} {'on' if getattr(self.state, attr) else 'off'}")

    def _svc_debug(self, arg: str) -> None:
        self._toggle(arg, "debug", "debug")

    def _svc_opt(self, arg: str) -> None:
        self._toggle(arg, "tail_opt", "opt")

    def _svc_save(self, arg: str) -> None:
        if not arg:
            raise CompileError("!save needs a file name")
        try:
            with open(self._path(arg), "w", encoding="utf-8") as f:
                f.writelines(s + "\n" for s in self.state.history)
        except OSError as exc:
            raise CLRuntimeError(IO_ERROR, f"cannot write {arg}: {exc.strerror}") from None

    def _svc_import(self, arg: str) -> None:
        if not arg:
            raise CompileError("!import needs a file name")
        try:
            with open(self._path(arg), encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise CLRuntimeError(IO_ERROR, f"cannot read {arg}: {exc.strerror}") from None
        out = self.eval_input(text)
        self._say(out)

    def _svc_code(self, arg: str) -> None:
        if arg not in self.state.functions:
            raise CompileError(f"unknown function {arg}")
        unit = self.state.functions[arg]
        if self.state.tail_opt:
            unit = tail_call_optimize(unit)
        self._say(disassemble(unit).rstrip("\n"))


def transcript(source: str, **kwargs: Any) -> str:
    """Run ``source`` in a fresh session and return the console output."""
    return Session(diag=io.StringIO(), **kwargs).eval_input(source)
