import math

import pytest
from hypothesis import given, strategies as st

from calculist import assemble, disassemble
from calculist.clvm import run
from calculist.errors import AsmError
from calculist.isa import Op, tail_call_optimize

from corpus import LIST_DEFS, SESSIONS, TRIANG_FAST, replay

SUM_TO = """
.func sumTo
.params n acc
    LOADP 0
    PUSHC 0
    EQ
    JZ L7
    LOADP 1
    RET
L7:
    LOADP 0
    PUSHC 1
    SUB
    LOADP 1
    LOADP 0
    ADD
    CALL sumTo 2
    RET
.end
PUSHC 100
PUSHC 0
CALL sumTo 2
PRINT 0
"""


def test_straight_line_program():
    assert run(assemble("PUSHC 2\nPUSHC 3\nADD\nPRINT 0\nHALT")) == (["5"], 16)


def test_functions_and_labels():
    unit = assemble(SUM_TO)
    assert unit.code[-1][0] == Op.HALT
    assert [u.name for u in unit.lambdas] == ["sumTo"]
    assert run(unit, {u.name: u for u in unit.all_units()})[0] == ["5050"]


def test_named_constants_and_comments():
    src = """
    .const greeting "hi there" ; a string
        PUSHC greeting
        PUSHC 'x'               ; a char
        ADD
        PRINT 0
    """
    assert run(assemble(src))[0] == ["hi therex"]


def test_json_keys():
    src = 'PUSHC 1\nPUSHC "two"\nNEWJSON a "b c"\nPRINT 0'
    assert run(assemble(src))[0] == ['{ "a": 1, "b c": "two" }']


def test_special_floats_round_trip():
    unit = assemble(".func f\n PUSHC Infinity\n PUSHC -Infinity\n PUSHC NaN\n RET\n.end")
    text = disassemble(unit)
    assert "Infinity" in text and "NaN" in text
    consts = assemble(text).consts
    assert consts[0] == math.inf and consts[1] == -math.inf and math.isnan(consts[2])


@pytest.mark.parametrize(
    "src, msg",
    [
        ("L1:\nL1:\nHALT", "duplicate label"),
        ("JMP L9", "undefined label"),
        ("FROB 1", "unknown opcode"),
        ("ADD 1", "operand"),
        (".end", ".end without .func"),
        (".func f\nRET", "not closed"),
        ("CALL f x", "integer"),
        (".locals -1", "non-negative"),
        (".bogus", "unknown directive"),
        ("PUSHC [1,", "bad constant"),
        ("PUSHC [1]", "not a scalar"),
    ],
)
def test_errors(src, msg):
    with pytest.raises(AsmError, match=msg) as e:
        assemble(src)
    assert "line " in str(e.value)


def _corpus_units():
    for steps in list(SESSIONS.values()) + [TRIANG_FAST]:
        s, _ = replay(steps)
        yield from s.state.functions.values()


def test_corpus_round_trip():
    n = 0
    for unit in _corpus_units():
        for u in (unit, tail_call_optimize(unit)):
            again = assemble(disassemble(u))
            assert again.same_code(u), u.name
            assert disassemble(again) == disassemble(u)
            n += 1
    assert n >= 60


def test_reassembled_functions_behave_identically():
    s, _ = replay(LIST_DEFS)
    s.eval_input("L = range(1, 50);")
    expected = s.eval_input("^rev(listRev(L));")
    clops = s.state.last_clops
    for name, unit in list(s.state.functions.items()):
        s.state.functions[name] = assemble(disassemble(unit))
    assert s.eval_input("^rev(listRev(L));") == expected
    assert s.state.last_clops == clops


literals = st.one_of(
    st.integers(-(2**31), 2**31 - 1),
    st.floats(allow_nan=False, allow_infinity=False),
    st.booleans(),
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=8),
    st.just([]),
)


def _text(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + ",".join(_text(x) for x in v) + "]"
    return repr(v)


@given(literals)
def test_constant_literals_survive_round_trip(v):
    unit = assemble(f".func f\n PUSHC {_text(v)}\n RET\n.end")
    again = assemble(disassemble(unit))
    assert again.same_code(unit)
