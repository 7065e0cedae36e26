"""Recursive-descent parser.

Binding strength, loosest first::

    ?:  ||  &&  == !=  < <= > >=  + -  * / // %  unary + - !  postfix

Postfix forms are calls, ``[i]``, ``[.]``, ``[>]``, ``[>i]``, slices and
``@type``.  Setting blocks ``{! ... !}`` / ``{^ ... ^}`` are only accepted in
function bodies, before or after the body expression and before or after
each branch of a conditional.
"""

from __future__ import annotations

import re
from typing import Any, Iterator

from ..errors import LexError, ParseError
from ..values import INT_MAX, NIL, TYPE_NAMES, Char, Json, from_iter
from . import ast as A
from .lexer import Token, line_col, tokenize

_ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=")
_SERVICE_RE = re.compile(r"^(\w+)\s*(?:\((.*)\)|(.*))$", re.S)


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        j = min(self.i + k, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, *ops: str) -> bool:
        return self.tok.is_op(*ops)

    def accept(self, *ops: str) -> Token | None:
        if self.at(*ops):
            return self.advance()
        return None

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "eof":
            return ParseError(f"{msg}: unexpected end of input", tok.pos, incomplete=True)
        line, col = line_col(self.source, tok.pos)
        return ParseError(f"{msg} at line {line}, column {col} (found {tok.text!r})", tok.pos)

    def expect(self, op: str, what: str | None = None) -> Token:
        if not self.at(op):
            raise self.error(f"expected {what or repr(op)}")
        return self.advance()

    def expect_ident(self, what: str = "a name") -> str:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.advance().text

    def expect_int(self, what: str) -> int:
        if self.tok.kind != "int":
            raise self.error(f"expected {what}")
        return self.advance().value  # type: ignore[return-value]

    # -- statements ----------------------------------------------------------

    def parse_program(self) -> list[A.Statement]:
        out = []
        while True:
            while self.accept(";"):
                pass
            if self.tok.kind == "eof":
                return out
            out.append(self.parse_statement())

    def parse_statement(self) -> A.Statement:
        start = self.tok
        stmt = self._statement()
        end = self.tokens[self.i - 1]
        text = self.source[start.pos : end.pos + len(end.text)].strip()
        return _with_source(stmt, text)

    def _statement(self) -> A.Statement:
        tok = self.tok
        if tok.kind == "service":
            self.advance()
            m = _SERVICE_RE.match(tok.text[1:])
            if not m:
                raise self.error("malformed service command", tok)
            arg = m.group(2) if m.group(2) is not None else m.group(3)
            return A.Service(m.group(1), (arg or "").strip())
        if tok.kind == "redirect":
            self.advance()
            self.end_statement(optional=True)
            return A.Redirect(tok.value)  # type: ignore[arg-type]
        if tok.is_op("^"):
            self.advance()
            expr = self.parse_expr()
            show_null = False
            if self.at("%") and (self.peek().kind == "eof" or self.peek().is_op(";")):
                self.advance()
                show_null = True
            self.end_statement(optional=True)
            return A.Query(expr, show_null)
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.is_op("(") or (nxt.is_op("*") and self.peek(2).is_op("(")):
                return self.parse_function()
            if nxt.is_op("."):
                label = self.advance().text
                self.advance()
                name = self.expect_ident("a labeled variable name")
                op = self.assign_op()
                expr = self.parse_expr()
                self.end_statement()
                return A.Assign(name, op, expr, label)
            if nxt.kind == "op" and nxt.text in _ASSIGN_OPS:
                name = self.advance().text
                op = self.advance().text
                expr = self.parse_expr()
                self.end_statement()
                return A.Assign(name, op, expr)
            if nxt.is_op(":"):
                label = self.advance().text
                self.advance()
                names = [self.expect_ident("a variable name")]
                while self.accept(","):
                    names.append(self.expect_ident("a variable name"))
                self.end_statement()
                return A.LabelDecl(label, tuple(names))
            self.advance()
            raise self.error("expected '=', ':' or a parameter list after a name")
        if tok.kind == "kw":
            raise self.error(f"{tok.text!r} is a reserved word")
        raise self.error("expected a statement")

    def assign_op(self) -> str:
        if self.tok.kind == "op" and self.tok.text in _ASSIGN_OPS:
            return self.advance().text
        raise self.error("expected an assignment operator")

    def end_statement(self, optional: bool = False) -> None:
        if self.accept(";"):
            return
        if optional and self.tok.kind == "eof":
            return
        raise self.error("expected ';'")

    def parse_function(self) -> A.FunctionDef:
        name = self.advance().text
        star = bool(self.accept("*"))
        self.expect("(")
        params = self.param_list(")")
        self.expect(")")
        ret_arity = 0
        if self.accept("/"):
            ret_arity = self.expect_int("a return arity")
        if self.at("="):
            raise self.error("function bodies are introduced by ':'")
        self.expect(":", "':' before the function body")
        local_names: list[str] = []
        labels: list[str] = []
        if self.accept("<"):
            while True:
                item = self.expect_ident("a local variable or label")
                if self.accept("*"):
                    labels.append(item)
                else:
                    local_names.append(item)
                if not self.accept(","):
                    break
            self.expect(">")
        body = self.parse_body()
        self.end_statement()
        fd = A.FunctionDef(name, star, tuple(params), ret_arity, tuple(local_names), tuple(labels), body)
        validate_function(fd)
        return fd

    def param_list(self, closer: str) -> list[A.Param]:
        params: list[A.Param] = []
        if self.at(closer):
            return params
        while True:
            pname = self.expect_ident("a parameter name")
            arity = 0
            if self.accept("/"):
                arity = self.expect_int("a parameter arity")
                if arity < 1:
                    raise self.error("a function parameter needs arity >= 1")
            params.append(A.Param(pname, arity))
            if not self.accept(","):
                return params

    # -- function bodies with setting blocks -------------------------------

    def blocks(self) -> tuple[A.Block, ...]:
        out: list[A.Block] = []
        while True:
            tok = self.tok
            if self.accept("{!"):
                target = self.target()
                op = self.assign_op()
                value = self.parse_expr()
                self.expect("!}", "'!}'")
                out.append(A.SetBlock(target, op, value, tok.pos))
            elif self.accept("{^"):
                expr = self.parse_expr()
                self.expect("^}", "'^}'")
                out.append(A.PrintBlock(expr, tok.pos))
            else:
                return tuple(out)

    def target(self) -> A.Target:
        tok = self.tok
        name = self.expect_ident("a variable to set")
        sels: list[A.Expr] = []
        while self.accept("["):
            if self.accept("."):
                sels.append(A.Const(0))
            else:
                sels.append(self.parse_expr())
            self.expect("]")
        return A.Target(name, tuple(sels), tok.pos)

    def parse_body(self) -> A.Expr:
        pos = self.tok.pos
        pre = self.blocks()
        if self.tok.kind == "kw" and self.tok.text == "lambda":
            core: A.Expr = self.parse_lambda()
        else:
            core = self.parse_or()
            if self.accept("?"):
                then = self.parse_body()
                self.expect(":", "':' in conditional expression")
                else_ = self.parse_body()
                node = A.Conditional(core, then, else_, pos)
                return A.Decorated(pre, node, (), pos) if pre else node
        post = self.blocks()
        if pre or post:
            return A.Decorated(pre, core, post, pos)
        return core

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        if self.tok.kind == "kw" and self.tok.text == "lambda":
            return self.parse_lambda()
        pos = self.tok.pos
        cond = self.parse_or()
        if self.accept("?"):
            then = self.parse_expr()
            self.expect(":", "':' in conditional expression")
            else_ = self.parse_expr()
            return A.Conditional(cond, then, else_, pos)
        if self.at("{!", "{^"):
            raise self.error("setting and printing commands are only allowed in function bodies")
        return cond

    def parse_lambda(self) -> A.Lambda:
        pos = self.advance().pos
        params = self.param_list(":")
        self.expect(":", "':' after lambda parameters")
        body = self.parse_expr()
        return A.Lambda(tuple(params), body, pos)

    def _binary(self, ops: tuple[str, ...], sub) -> A.Expr:
        left = sub()
        while self.tok.kind == "op" and self.tok.text in ops:
            if self.tok.text == "%" and (self.peek().kind == "eof" or self.peek().is_op(";")):
                break  # null display flag of a query
            op = self.advance()
            right = sub()
            left = A.Binary(op.text, left, right, op.pos)
        return left

    def parse_or(self) -> A.Expr:
        return self._binary(("||",), self.parse_and)

    def parse_and(self) -> A.Expr:
        return self._binary(("&&",), self.parse_eq)

    def parse_eq(self) -> A.Expr:
        return self._binary(("==", "!="), self.parse_rel)

    def parse_rel(self) -> A.Expr:
        return self._binary(("<", "<=", ">", ">="), self.parse_add)

    def parse_add(self) -> A.Expr:
        return self._binary(("+", "-"), self.parse_mul)

    def parse_mul(self) -> A.Expr:
        return self._binary(("*", "/", "//", "%"), self.parse_unary)

    def parse_unary(self) -> A.Expr:
        tok = self.tok
        if tok.is_op("-", "+", "!"):
            self.advance()
            if tok.text == "-" and self.tok.kind in ("int", "double"):
                lit = self.tok
                after = self.peek()
                # fold negative literals unless a postfix operator follows
                if not (after.is_op("(", "[", "@")):
                    self.advance()
                    if lit.kind == "int" and lit.value > INT_MAX + 1:  # type: ignore[operator]
                        raise self.error("integer constant out of range", lit)
                    return A.Const(-lit.value, tok.pos)  # type: ignore[operator]
            operand = self.parse_unary()
            return A.Unary(tok.text, operand, tok.pos)
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        node = self.parse_primary()
        while True:
            tok = self.tok
            if self.accept("("):
                args: list[A.Expr] = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.accept(","):
                        args.append(self.parse_expr())
                self.expect(")")
                node = A.Call(node, tuple(args), tok.pos)
            elif self.accept("["):
                node = self.index_form(node, tok.pos)
            elif self.accept("@"):
                if not (self.tok.kind == "kw" and self.tok.text == "type"):
                    raise self.error("expected 'type' after '@'")
                self.advance()
                node = A.TypeOf(node, tok.pos)
            else:
                return node

    def index_form(self, target: A.Expr, pos: int) -> A.Expr:
        if self.accept("."):
            self.expect("]")
            return A.Head(target, pos)
        if self.accept(">"):
            if self.accept("]"):
                return A.Tail(target, pos)
            idx = self.parse_expr()
            self.expect("]")
            return A.Suffix(target, idx, pos)
        lo = None
        if not self.at(":"):
            lo = self.parse_expr()
            if self.accept("]"):
                return A.Index(target, lo, pos)
        self.expect(":", "']' or ':'")
        hi = None
        if not self.at("]"):
            hi = self.parse_expr()
        self.expect("]")
        return A.Slice(target, lo, hi, pos)

    def parse_primary(self) -> A.Expr:
        tok = self.tok
        k = tok.kind
        if k == "int":
            self.advance()
            if tok.value > INT_MAX:  # type: ignore[operator]
                raise self.error("integer constant out of range", tok)
            return A.Const(tok.value, tok.pos)
        if k == "double":
            self.advance()
            return A.Const(tok.value, tok.pos)
        if k == "string":
            self.advance()
            return A.Const(tok.value, tok.pos)
        if k == "char":
            self.advance()
            return A.Const(Char.of(tok.value), tok.pos)  # type: ignore[arg-type]
        if k == "readfile":
            self.advance()
            return A.ReadFile(tok.value, tok.pos)  # type: ignore[arg-type]
        if k == "kw":
            if tok.text == "lambda":
                return self.parse_lambda()
            self.advance()
            if tok.text == "true":
                return A.Const(True, tok.pos)
            if tok.text == "false":
                return A.Const(False, tok.pos)
            if tok.text == "null":
                return A.Const(None, tok.pos)
            return A.Const(TYPE_NAMES[tok.text], tok.pos)
        if k == "ident":
            self.advance()
            if self.at(".") and self.peek().kind == "ident":
                self.advance()
                name = self.advance().text
                return A.LabeledName(tok.text, name, tok.pos)
            return A.Name(tok.text, tok.pos)
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.accept("["):
            if self.accept("]"):
                return A.Const(NIL, tok.pos)
            items = [self.parse_expr()]
            while self.accept(","):
                items.append(self.parse_expr())
            rest = None
            if self.accept("|"):
                rest = self.parse_expr()
            self.expect("]", "']' closing the list")
            return A.ListLit(tuple(items), rest, tok.pos)
        if self.accept("{"):
            fields: list[tuple[str, A.Expr]] = []
            seen: set[str] = set()
            if not self.at("}"):
                while True:
                    ktok = self.tok
                    if ktok.kind != "string":
                        raise self.error("json keys must be strings")
                    self.advance()
                    if ktok.value in seen:
                        raise self.error(f"duplicate json key {ktok.text}", ktok)
                    seen.add(ktok.value)  # type: ignore[arg-type]
                    self.expect(":")
                    fields.append((ktok.value, self.parse_expr()))  # type: ignore[arg-type]
                    if not self.accept(","):
                        break
            self.expect("}", "'}' closing the json")
            return A.JsonLit(tuple(fields), tok.pos)
        raise self.error("expected an expression")


def _with_source(stmt: A.Statement, text: str) -> A.Statement:
    import dataclasses

    return dataclasses.replace(stmt, source=text)


# -- structural checks on function definitions ---------------------------------


def iter_blocks(body: A.Expr) -> Iterator[tuple[A.Block, str]]:
    """Yield every setting/printing block of a body with its placement."""
    if isinstance(body, A.Decorated):
        for b in body.pre:
            yield b, "before"
        yield from iter_blocks(body.core)
        for b in body.post:
            yield b, "after"
    elif isinstance(body, A.Conditional):
        yield from iter_blocks(body.then)
        yield from iter_blocks(body.else_)


def validate_function(fd: A.FunctionDef) -> None:
    pnames = [p.name for p in fd.params]
    if len(set(pnames)) != len(pnames):
        raise ParseError(f"duplicate parameter name in {fd.name}")
    if len(set(fd.locals)) != len(fd.locals):
        raise ParseError(f"duplicate local variable in {fd.name}")
    clash = set(fd.locals) & set(pnames)
    if clash:
        raise ParseError(f"local variable {sorted(clash)[0]} shadows a parameter of {fd.name}")
    if fd.labels and not fd.star:
        raise ParseError(f"{fd.name} uses global labels {', '.join(fd.labels)}: only star functions may")
    for block, placement in iter_blocks(fd.body):
        if isinstance(block, A.PrintBlock):
            if not fd.star:
                raise ParseError(f"printing command in non-star function {fd.name}")
            continue
        t = block.target
        if fd.star:
            continue
        if t.name not in fd.locals:
            raise ParseError(
                f"setting command on {t.name} in non-star function {fd.name}: "
                "only declared local variables can be set"
            )
        if t.selectors:
            raise ParseError(f"element assignment in non-star function {fd.name}")
        if placement == "after":
            raise ParseError(f"local setting command after an expression in non-star function {fd.name}")


# -- entry points -------------------------------------------------------------


def parse_program(source: str) -> list[A.Statement]:
    return Parser(source).parse_program()


def parse_statement(source: str) -> A.Statement:
    p = Parser(source)
    stmts = p.parse_program()
    if len(stmts) != 1:
        raise ParseError(f"expected one statement, found {len(stmts)}")
    return stmts[0]


def parse_expression(source: str) -> A.Expr:
    p = Parser(source)
    e = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.error("unexpected text after expression")
    return e


def is_complete(source: str) -> bool:
    """False when ``source`` ends in the middle of a statement."""
    try:
        parse_program(source)
    except (ParseError, LexError) as exc:
        return not exc.incomplete
    return True


def literal_value(node: A.Expr) -> Any:
    """Evaluate a literal expression (scalars, lists, jsons) to a value."""
    if isinstance(node, A.Const):
        return node.value
    if isinstance(node, A.Unary) and node.op in "+-":
        v = literal_value(node.operand)
        if type(v) in (int, float):
            return -v if node.op == "-" else v
    if isinstance(node, A.ListLit):
        rest = NIL if node.rest is None else literal_value(node.rest)
        if rest is not NIL:
            raise ParseError("not a literal value")
        return from_iter([literal_value(x) for x in node.items])
    if isinstance(node, A.JsonLit):
        return Json({k: literal_value(v) for k, v in node.fields})
    raise ParseError("not a literal value")


def read_literal(text: str) -> Any:
    return literal_value(parse_expression(text))
