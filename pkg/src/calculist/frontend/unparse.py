"""Render syntax trees back to source text.

Output is fully parenthesised, so re-parsing it gives the same tree.
"""

from __future__ import annotations

from ..values import NIL, Char, CLType, format_double, quote_char, quote_string
from . import ast as A


def const_text(v: object) -> str:
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if v is NIL:
        return "[]"
    if type(v) is int:
        return str(v)
    if type(v) is float:
        return format_double(v)
    if type(v) is str:
        return quote_string(v)
    if type(v) is Char:
        return quote_char(v)
    if type(v) is CLType:
        return v.value
    raise TypeError(f"not a constant: {v!r}")


def _params(ps: tuple[A.Param, ...]) -> str:
    return ", ".join(p.name + (f"/{p.arity}" if p.arity else "") for p in ps)


def _target(t: A.Target) -> str:
    return t.name + "".join(f"[{expr(s)}]" for s in t.selectors)


def _block(b: A.Block) -> str:
    if isinstance(b, A.PrintBlock):
        return "{^ " + expr(b.expr) + " ^}"
    return "{! " + _target(b.target) + f" {b.op} " + expr(b.value) + " !}"


def expr(e: A.Expr) -> str:
    if isinstance(e, A.Const):
        text = const_text(e.value)
        return f"({text})" if text.startswith("-") else text
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.LabeledName):
        return f"{e.label}.{e.name}"
    if isinstance(e, A.Unary):
        return f"({e.op}{expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, A.Conditional):
        return f"({expr(e.cond)} ? {body(e.then)} : {body(e.else_)})"
    if isinstance(e, A.Call):
        return f"{expr(e.callee)}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Lambda):
        return f"(lambda {_params(e.params)}: {expr(e.body)})"
    if isinstance(e, A.ListLit):
        items = ", ".join(expr(x) for x in e.items)
        rest = "" if e.rest is None else f" | {expr(e.rest)}"
        return f"[{items}{rest}]"
    if isinstance(e, A.JsonLit):
        if not e.fields:
            return "{}"
        return "{ " + ", ".join(f"{quote_string(k)}: {expr(v)}" for k, v in e.fields) + " }"
    if isinstance(e, A.Index):
        return f"{expr(e.target)}[{expr(e.index)}]"
    if isinstance(e, A.Head):
        return f"{expr(e.target)}[.]"
    if isinstance(e, A.Tail):
        return f"{expr(e.target)}[>]"
    if isinstance(e, A.Suffix):
        return f"{expr(e.target)}[>{expr(e.index)}]"
    if isinstance(e, A.Slice):
        lo = "" if e.lo is None else expr(e.lo)
        hi = "" if e.hi is None else expr(e.hi)
        return f"{expr(e.target)}[{lo}:{hi}]"
    if isinstance(e, A.TypeOf):
        return f"{expr(e.operand)}@type"
    if isinstance(e, A.ReadFile):
        return f"<<({e.path})"
    if isinstance(e, A.Decorated):
        raise ValueError("setting blocks only appear in function bodies")
    raise TypeError(f"unknown node {e!r}")


def body(e: A.Expr) -> str:
    """Like :func:`expr` but keeps setting blocks (function-body context)."""
    if isinstance(e, A.Decorated):
        parts = [_block(b) for b in e.pre]
        parts.append(body(e.core))
        parts.extend(_block(b) for b in e.post)
        return " ".join(parts)
    if isinstance(e, A.Conditional):
        # branches are bodies; no parentheses so blocks stay in place
        return f"{expr(e.cond)} ? {body(e.then)} : {body(e.else_)}"
    return expr(e)


def statement(s: A.Statement) -> str:
    if isinstance(s, A.Assign):
        name = f"{s.label}.{s.name}" if s.label else s.name
        return f"{name} {s.op} {expr(s.expr)};"
    if isinstance(s, A.LabelDecl):
        return f"{s.label}: {', '.join(s.names)};"
    if isinstance(s, A.FunctionDef):
        header_items = list(s.locals) + [f"{lab}*" for lab in s.labels]
        header = f"<{', '.join(header_items)}> " if header_items else ""
        ret = f"/{s.ret_arity}" if s.ret_arity else ""
        star = "*" if s.star else ""
        return f"{s.name}{star}({_params(s.params)}){ret}: {header}{body(s.body)};"
    if isinstance(s, A.Query):
        return f"^{expr(s.expr)}{' %' if s.show_null else ''};"
    if isinstance(s, A.Service):
        return f"!{s.name}" + (f" {s.arg}" if s.arg else "")
    if isinstance(s, A.Redirect):
        return f">>({s.path});"
    raise TypeError(f"unknown statement {s!r}")
