"""Syntax tree for statements and expressions.

Nodes are frozen dataclasses so two parses of the same text compare equal;
source positions are excluded from comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union


@dataclass(frozen=True)
class Const:
    value: Any
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class LabeledName:
    label: str
    name: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # + - !
    operand: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, relational, && ||
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Conditional:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call:
    callee: "Expr"
    args: tuple["Expr", ...]
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Param:
    name: str
    arity: int = 0


@dataclass(frozen=True)
class Lambda:
    params: tuple[Param, ...]
    body: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]
    rest: "Expr | None" = None  # the list after `|`
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class JsonLit:
    fields: tuple[tuple[str, "Expr"], ...]
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Index:
    target: "Expr"
    index: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Head:
    target: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Tail:
    target: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Suffix:
    """``L[>i]``"""

    target: "Expr"
    index: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Slice:
    target: "Expr"
    lo: "Expr | None"
    hi: "Expr | None"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class TypeOf:
    operand: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class ReadFile:
    path: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Target:
    """Left side of a setting command: ``name`` or ``name[e1][e2]...``."""

    name: str
    selectors: tuple["Expr", ...] = ()
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class SetBlock:
    """``{! target op= value !}``; an LSC when the target is a plain local,
    otherwise a GSC."""

    target: Target
    op: str  # = += -= *= /=
    value: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class PrintBlock:
    """``{^ expr ^}``"""

    expr: "Expr"
    pos: int = field(default=-1, compare=False)


Block = Union[SetBlock, PrintBlock]


@dataclass(frozen=True)
class Decorated:
    pre: tuple[Block, ...]
    core: "Expr"
    post: tuple[Block, ...]
    pos: int = field(default=-1, compare=False)


Expr = Union[
    Const, Name, LabeledName, Unary, Binary, Conditional, Call, Lambda, ListLit,
    JsonLit, Index, Head, Tail, Suffix, Slice, TypeOf, ReadFile, Decorated,
]


# statements


@dataclass(frozen=True)
class Assign:
    name: str
    op: str
    expr: Expr
    label: str | None = None
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class LabelDecl:
    label: str
    names: tuple[str, ...]
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    star: bool
    params: tuple[Param, ...]
    ret_arity: int
    locals: tuple[str, ...]
    labels: tuple[str, ...]
    body: Expr
    source: str = field(default="", compare=False)

    @property
    def signature(self) -> str:
        ps = ", ".join(p.name + (f"/{p.arity}" if p.arity else "") for p in self.params)
        ret = f"/{self.ret_arity}" if self.ret_arity else ""
        return f"{self.name}{'*' if self.star else ''}({ps}){ret}"


@dataclass(frozen=True)
class Query:
    expr: Expr
    show_null: bool = False
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class Service:
    name: str
    arg: str = ""
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class Redirect:
    path: str  # "" resets to the console
    source: str = field(default="", compare=False)


Statement = Union[Assign, LabelDecl, FunctionDef, Query, Service, Redirect]
