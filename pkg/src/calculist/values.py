"""Runtime value model.

CalcuList values map onto Python objects as follows:

=========  ===============================================
double     ``float``
int        ``int`` (kept in 32-bit two's complement range)
char       :class:`Char`
bool       ``bool``
null       ``None``
type       :class:`CLType`
string     ``str`` (immutable, compared by content)
list       :class:`Cell` chain ending at :data:`NIL`
json       :class:`Json`
function   :class:`Closure`
=========  ===============================================

Since ``bool`` is a subclass of ``int`` in Python, tag tests always use
``type(v) is int`` rather than ``isinstance``.

Lists, jsons and closures are heap objects: assignment, append ``|``,
tail ``[>]``, suffix ``[>i]`` and list ``+`` share cells, while slices clone
the selected cells (one level deep).  Heap-walking helpers return the number
of cells they visited so the VM can charge clops for them.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Any, Iterable, Iterator

from .errors import (
    DIV_ZERO,
    EMPTY_LIST,
    INDEX_RANGE,
    CLRuntimeError,
    type_error,
)

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1


class CLType(Enum):
    DOUBLE = "double"
    INT = "int"
    CHAR = "char"
    BOOL = "bool"
    NULL = "nullType"
    TYPE = "type"
    STRING = "string"
    LIST = "list"
    JSON = "json"
    FUNCTION = "function"

    def __str__(self) -> str:
        return self.value


TYPE_NAMES = {t.value: t for t in CLType}


class Char:
    """A UNICODE character, kept distinct from one-character strings."""

    __slots__ = ("code",)

    def __init__(self, code: int):
        self.code = code

    @classmethod
    def of(cls, s: str) -> "Char":
        return cls(ord(s))

    def __eq__(self, other: object) -> bool:
        return type(other) is Char and other.code == self.code

    def __hash__(self) -> int:
        return hash((Char, self.code))

    def __repr__(self) -> str:
        return f"Char({chr(self.code)!r})"


class Cell:
    __slots__ = ("head", "tail")

    def __init__(self, head: Any, tail: "Cell"):
        self.head = head
        self.tail = tail

    def __repr__(self) -> str:
        return "NIL" if self is NIL else f"<list {show(self)}>"


# The single empty list. Every empty list is this object, so `L == []` holds
# under identity equality.
NIL = Cell(None, None)  # type: ignore[arg-type]


class Json:
    """A json object; field order is insertion order."""

    __slots__ = ("fields",)

    def __init__(self, fields: dict[str, Any] | None = None):
        self.fields = {} if fields is None else fields

    def __repr__(self) -> str:
        return f"<json {show(self)}>"


class Closure:
    """A function value: compiled code plus captured values.

    ``fn`` is a compiled unit exposing ``name``, ``nparams`` and ``star``.
    """

    __slots__ = ("fn", "captures")

    def __init__(self, fn: Any, captures: tuple = ()):
        self.fn = fn
        self.captures = captures

    def __repr__(self) -> str:
        return f"<function {self.fn.name}/{self.fn.nparams}>"


# ---------------------------------------------------------------------------
# type helpers


def wrap32(n: int) -> int:
    if INT_MIN <= n <= INT_MAX:
        return n
    return ((n - INT_MIN) & 0xFFFFFFFF) + INT_MIN


_TYPE_OF = {
    float: CLType.DOUBLE,
    int: CLType.INT,
    Char: CLType.CHAR,
    bool: CLType.BOOL,
    type(None): CLType.NULL,
    CLType: CLType.TYPE,
    str: CLType.STRING,
    Cell: CLType.LIST,
    Json: CLType.JSON,
    Closure: CLType.FUNCTION,
}


def type_of(v: Any) -> CLType:
    return _TYPE_OF[type(v)]


def type_name(v: Any) -> str:
    return _TYPE_OF[type(v)].value


# numeric rank: char < int < double
_RANK = {Char: 0, int: 1, float: 2}


def is_numeric(v: Any) -> bool:
    return type(v) in _RANK


def _numval(v: Any) -> int | float:
    return v.code if type(v) is Char else v


# ---------------------------------------------------------------------------
# arithmetic


def _float_div(x: float, y: float) -> float:
    if y == 0:
        if x == 0 or x != x:
            return math.nan
        return math.copysign(math.inf, x) * math.copysign(1.0, y)
    return x / y


def arith(op: str, a: Any, b: Any) -> Any:
    """Apply a binary arithmetic operator with numeric promotion.

    ``+`` is overloaded for string+string, string+char and list+list.
    """
    ta = type(a)
    tb = type(b)
    if op == "+":
        if ta is str:
            if tb is str:
                return a + b
            if tb is Char:
                return a + chr(b.code)
            raise type_error(f"cannot concatenate string and {type_name(b)}")
        if ta is Cell or tb is Cell:
            if ta is Cell and tb is Cell:
                return concat(a, b)[0]
            raise type_error(f"cannot add {type_name(a)} and {type_name(b)}")
    ra = _RANK.get(ta)
    rb = _RANK.get(tb)
    if ra is None or rb is None:
        raise type_error(f"operator {op} not defined on {type_name(a)} and {type_name(b)}")
    x = _numval(a)
    y = _numval(b)
    if op == "/":
        return _float_div(float(x), float(y))
    rank = ra if ra > rb else rb
    if op == "//" or op == "%":
        if rank == 2:
            raise type_error(f"operator {op} requires int or char operands")
        if y == 0:
            raise CLRuntimeError(DIV_ZERO, f"{op} by zero")
        return wrap32(x // y if op == "//" else x % y)
    if op == "+":
        r = x + y
    elif op == "-":
        r = x - y
    elif op == "*":
        r = x * y
    else:
        raise ValueError(op)
    if rank == 2:
        return float(r)
    return wrap32(r)


def negate(a: Any) -> Any:
    t = type(a)
    if t is int:
        return wrap32(-a)
    if t is float:
        return -a
    if t is Char:
        return -a.code
    raise type_error(f"unary - not defined on {type_name(a)}")


def positive(a: Any) -> Any:
    t = type(a)
    if t is int or t is float:
        return a
    if t is Char:
        return a.code
    raise type_error(f"unary + not defined on {type_name(a)}")


def logical_not(a: Any) -> bool:
    if type(a) is not bool:
        raise type_error(f"! requires a bool, got {type_name(a)}")
    return not a


# ---------------------------------------------------------------------------
# comparison


def equal(a: Any, b: Any) -> bool:
    """``==`` semantics: numbers by value across numeric types, strings by
    content, lists/jsons/functions by identity, mixed types never equal."""
    ta = type(a)
    tb = type(b)
    if ta in _RANK and tb in _RANK:
        return _numval(a) == _numval(b)
    if ta is not tb:
        return False
    if ta is Cell or ta is Json or ta is Closure:
        return a is b
    return a == b


def compare(op: str, a: Any, b: Any) -> bool:
    if op == "==":
        return equal(a, b)
    if op == "!=":
        return not equal(a, b)
    ta = type(a)
    tb = type(b)
    if ta in _RANK and tb in _RANK:
        x = _numval(a)
        y = _numval(b)
    elif (ta is bool and tb is bool) or (ta is str and tb is str):
        x, y = a, b
    else:
        raise type_error(f"cannot order {type_name(a)} and {type_name(b)}")
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    if op == ">=":
        return x >= y
    raise ValueError(op)


# ---------------------------------------------------------------------------
# lists


def from_iter(items: Iterable[Any], tail: Cell = NIL) -> Cell:
    result = tail
    for item in reversed(list(items)):
        result = Cell(item, result)
    return result


def iter_list(cell: Cell) -> Iterator[Any]:
    while cell is not NIL:
        yield cell.head
        cell = cell.tail


def to_pylist(cell: Cell) -> list:
    return list(iter_list(cell))


def _need_list(v: Any, what: str) -> None:
    if type(v) is not Cell:
        raise type_error(f"{what} requires a list, got {type_name(v)}")


def head(v: Any) -> Any:
    _need_list(v, "[.]")
    if v is NIL:
        raise CLRuntimeError(EMPTY_LIST, "head of the empty list")
    return v.head


def tail(v: Any) -> Cell:
    _need_list(v, "[>]")
    if v is NIL:
        raise CLRuntimeError(EMPTY_LIST, "tail of the empty list")
    return v.tail


def _need_index(i: Any) -> int:
    if type(i) is not int:
        raise type_error(f"index must be an int, got {type_name(i)}")
    if i < 0:
        raise CLRuntimeError(INDEX_RANGE, f"negative index {i}")
    return i


def _walk(cell: Cell, i: int) -> Cell:
    """Return the cell at position ``i`` (may be NIL when i == length)."""
    k = i
    while k:
        if cell is NIL:
            raise CLRuntimeError(INDEX_RANGE, f"index {i} out of range")
        cell = cell.tail
        k -= 1
    return cell


def suffix(v: Any, i: Any) -> tuple[Cell, int]:
    """``L[>i]``: the shared sublist starting at element ``i+1``."""
    _need_list(v, "[>i]")
    i = _need_index(i)
    cell = _walk(v, i)
    if cell is NIL:
        raise CLRuntimeError(INDEX_RANGE, f"index {i} out of range")
    return cell.tail, i + 1


def concat(a: Cell, b: Cell) -> tuple[Cell, int]:
    """List ``+``: copies the cells of ``a`` and links the copy to ``b``."""
    if a is NIL:
        return b, 0
    first = last = Cell(a.head, NIL)
    n = 1
    cell = a.tail
    while cell is not NIL:
        new = Cell(cell.head, NIL)
        last.tail = new
        last = new
        cell = cell.tail
        n += 1
    last.tail = b
    return first, n


def clone_list(cell: Cell, count: int | None = None) -> tuple[Cell, int]:
    """Copy ``count`` cells (all when None) into a fresh NIL-terminated list."""
    if cell is NIL or count == 0:
        return NIL, 0
    first = last = Cell(cell.head, NIL)
    n = 1
    cell = cell.tail
    while cell is not NIL and (count is None or n < count):
        new = Cell(cell.head, NIL)
        last.tail = new
        last = new
        cell = cell.tail
        n += 1
    if count is not None and n < count:
        raise CLRuntimeError(INDEX_RANGE, "slice bound out of range")
    return first, n


def list_length(cell: Cell) -> int:
    n = 0
    while cell is not NIL:
        n += 1
        cell = cell.tail
    return n


# ---------------------------------------------------------------------------
# indexing, slicing, length


def index(target: Any, key: Any) -> tuple[Any, int]:
    """``t[k]`` on a list, string or json. Returns (value, cells walked)."""
    t = type(target)
    if t is Cell:
        i = _need_index(key)
        cell = _walk(target, i)
        if cell is NIL:
            raise CLRuntimeError(INDEX_RANGE, f"index {i} out of range")
        return cell.head, i
    if t is Json:
        if type(key) is not str:
            raise type_error(f"json key must be a string, got {type_name(key)}")
        return target.fields.get(key), 0
    if t is str:
        i = _need_index(key)
        if i >= len(target):
            raise CLRuntimeError(INDEX_RANGE, f"index {i} out of range")
        return Char(ord(target[i])), 0
    raise type_error(f"cannot index a value of type {type_name(target)}")


def set_index(target: Any, key: Any, value: Any) -> int:
    """``t[k] = v`` on a list element or json field. Returns cells walked."""
    t = type(target)
    if t is Cell:
        i = _need_index(key)
        cell = _walk(target, i)
        if cell is NIL:
            raise CLRuntimeError(INDEX_RANGE, f"index {i} out of range")
        cell.head = value
        return i
    if t is Json:
        if type(key) is not str:
            raise type_error(f"json key must be a string, got {type_name(key)}")
        target.fields[key] = value
        return 0
    raise type_error(f"cannot assign into a value of type {type_name(target)}")


def _bound(v: Any, default: int | None) -> int | None:
    if v is None:
        return default
    return _need_index(v)


def slice_value(target: Any, lo: Any = None, hi: Any = None) -> tuple[Any, int]:
    """Deep slice. ``lo``/``hi`` of ``None`` mean "missing".

    Returns (value, cells visited).
    """
    t = type(target)
    if t is str:
        n = len(target)
        i = _bound(lo, 0)
        j = _bound(hi, n)
        if not i <= j <= n:
            raise CLRuntimeError(INDEX_RANGE, f"slice [{i}:{j}] out of range for length {n}")
        return target[i:j], 0
    if t is Cell:
        i = _bound(lo, 0)
        j = _bound(hi, None)
        start = _walk(target, i)
        if j is None:
            copy, n = clone_list(start)
        else:
            if j < i:
                raise CLRuntimeError(INDEX_RANGE, f"slice [{i}:{j}] out of range")
            copy, n = clone_list(start, j - i)
        return copy, i + n
    if t is Json:
        if lo is not None or hi is not None:
            raise type_error("a json can only be cloned with [:]")
        return Json(dict(target.fields)), len(target.fields)
    raise type_error(f"cannot slice a value of type {type_name(target)}")


def length(v: Any) -> tuple[int, int]:
    """``_len``: returns (length, cells walked)."""
    t = type(v)
    if t is Cell:
        n = list_length(v)
        return n, n
    if t is str:
        return len(v), 0
    if t is Json:
        return len(v.fields), 0
    raise type_error(f"_len not defined on {type_name(v)}")


def make_json(keys: Iterable[str], vals: Iterable[Any]) -> Json:
    fields: dict[str, Any] = {}
    for k, v in zip(keys, vals):
        if k in fields:
            raise type_error(f'duplicate json key "{k}"')
        fields[k] = v
    return Json(fields)


# ---------------------------------------------------------------------------
# printing

_ESCAPES = {"\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0"}


def quote_string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        else:
            out.append(_ESCAPES.get(ch, ch))
    out.append('"')
    return "".join(out)


def quote_char(c: Char) -> str:
    ch = chr(c.code)
    if ch == "'":
        return "'\\''"
    return "'" + _ESCAPES.get(ch, ch) + "'"


def format_double(x: float) -> str:
    if x != x:
        return "NaN"
    if x == math.inf:
        return "Infinity"
    if x == -math.inf:
        return "-Infinity"
    r = repr(x)
    if "e" in r:
        mant, exp = r.split("e")
        if "." not in mant:
            mant += ".0"
        return f"{mant}E{int(exp)}"
    return r


def show(v: Any, top: bool = True) -> str:
    """Printed form of a value.

    At top level strings and chars print bare; nested inside lists/jsons they
    are quoted, which is also the form :func:`read_value` parses back.
    """
    parts: list[str] = []
    _show(v, top, parts, set())
    return "".join(parts)


def _show(v: Any, top: bool, out: list[str], active: set[int]) -> None:
    t = type(v)
    if t is int:
        out.append(str(v))
    elif t is float:
        out.append(format_double(v))
    elif t is str:
        out.append(v if top else quote_string(v))
    elif t is Char:
        out.append(chr(v.code) if top else quote_char(v))
    elif t is bool:
        out.append("true" if v else "false")
    elif v is None:
        out.append("null")
    elif t is CLType:
        out.append(v.value)
    elif t is Cell:
        if v is NIL:
            out.append("[]")
            return
        if id(v) in active:
            out.append("[...]")
            return
        active.add(id(v))
        out.append("[ ")
        first = True
        cell = v
        while cell is not NIL:
            if not first:
                out.append(", ")
            first = False
            _show(cell.head, False, out, active)
            cell = cell.tail
        out.append(" ]")
        active.discard(id(v))
    elif t is Json:
        if not v.fields:
            out.append("{}")
            return
        if id(v) in active:
            out.append("{...}")
            return
        active.add(id(v))
        out.append("{ ")
        first = True
        for k, x in v.fields.items():
            if not first:
                out.append(", ")
            first = False
            out.append(quote_string(k))
            out.append(": ")
            _show(x, False, out, active)
        out.append(" }")
        active.discard(id(v))
    elif t is Closure:
        name = "lambda" if "$lambda" in v.fn.name else v.fn.name
        out.append(f"<function {name}/{v.fn.nparams}>")
    else:
        raise TypeError(f"not a CalcuList value: {v!r}")


def count_atoms(v: Any, seen: set[int] | None = None) -> int:
    """Number of values a print of ``v`` visits (used for PRINT clops)."""
    t = type(v)
    if t is not Cell and t is not Json:
        return 1
    if seen is None:
        seen = set()
    if id(v) in seen:
        return 1
    seen.add(id(v))
    items = iter_list(v) if t is Cell else v.fields.values()
    n = 1
    for x in items:
        tx = type(x)
        n += count_atoms(x, seen) if tx is Cell or tx is Json else 1
    return n
