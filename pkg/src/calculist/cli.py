"""Command line entry point: ``calculist [run FILE | asm FILE]``."""

from __future__ import annotations

import argparse
import sys

from . import assembler
from .clvm import DEFAULT_STACK_LIMIT, Machine
from .errors import CalcuListError
from .session import Session, error_text

PROMPT = ">> "
CONTINUATION = ".. "


def repl(session: Session) -> int:
    print("CalcuList. Statements end with ';'. Type !help for service commands, Ctrl-D to quit.")
    while True:
        try:
            line = input(CONTINUATION if session.pending else PROMPT)
        except EOFError:
            print()
            return 0
        except KeyboardInterrupt:
            print()
            continue
        _, out = session.feed(line)
        if out:
            print(out)


def run_file(session: Session, path: str) -> int:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"cannot read {path}: {exc.strerror}", file=sys.stderr)
        return 2
    out = session.eval_input(text)
    if out:
        print(out)
    return 1 if session.errors else 0


def run_asm(path: str, trace: bool, listing: bool, stack_limit: int = DEFAULT_STACK_LIMIT) -> int:
    try:
        with open(path, encoding="utf-8") as f:
            unit = assembler.assemble(f.read())
    except OSError as exc:
        print(f"cannot read {path}: {exc.strerror}", file=sys.stderr)
        return 2
    except CalcuListError as exc:
        print(f"assembly error: {exc}", file=sys.stderr)
        return 1
    if listing:
        print(assembler.disassemble(unit), end="")
        return 0
    m = Machine(sink=print, stack_limit=stack_limit, trace=sys.stderr if trace else None)
    try:
        m.execute(unit, {u.name: u for u in unit.all_units()})
    except CalcuListError as exc:
        print(error_text(exc), file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="calculist", description="CalcuList compiler, virtual machine and REPL")
    ap.add_argument("--no-opt", action="store_true", help="disable the tail recursion optimizer")
    ap.add_argument("--stack-limit", type=int, default=DEFAULT_STACK_LIMIT, help="maximum call depth")
    ap.add_argument("--trace", action="store_true", help="trace every executed instruction on stderr")
    sub = ap.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run a session file and print its output")
    p_run.add_argument("file")
    p_asm = sub.add_parser("asm", help="assemble and run a CLVM assembly file")
    p_asm.add_argument("file")
    p_asm.add_argument("--list", action="store_true", help="print the assembled code instead of running it")
    args = ap.parse_args(argv)

    if args.command == "asm":
        return run_asm(args.file, args.trace, args.list, args.stack_limit)
    session = Session(tail_opt=not args.no_opt, debug=args.trace, stack_limit=args.stack_limit)
    if args.command == "run":
        return run_file(session, args.file)
    return repl(session)


if __name__ == "__main__":
    sys.exit(main())
