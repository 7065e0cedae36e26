import pytest
from hypothesis import given, settings, strategies as st

from calculist.session import Session, read_value, transcript, write_value
from calculist.errors import CLRuntimeError
from calculist.frontend import read_literal
from calculist.values import show

from corpus import LIST_DEFS, SESSIONS, mismatches, replay


@pytest.mark.parametrize("name", sorted(SESSIONS))
def test_example_sessions(name):
    _, results = replay(SESSIONS[name])
    assert mismatches(results) == []


def test_somma_is_close_to_expected():
    s, _ = replay(SESSIONS["side_effects"])
    assert abs(s.state.globals["MATH1.somma"] - 1.2) < 1e-9


def test_services(session):
    replay(LIST_DEFS, session)
    session.eval_input("x=3; y=[1,2];")
    assert "!clops" in session.eval_input("!help")
    session.eval_input("^rev(y);")
    assert session.eval_input("!clops") == str(session.state.last_clops)
    assert session.eval_input("!vars").splitlines() == ["x: int = 3", "y: list = [ 1, 2 ]"]
    funcs = session.eval_input("!funcs").splitlines()
    assert len(funcs) == 5 and funcs[0].startswith("member(")
    hist = session.eval_input("!history").splitlines()
    assert hist[-1].startswith(f"{len(hist)}: ") and "rev(y)" in hist[-1]
    assert "stack:" in session.eval_input("!memory")
    assert session.eval_input("!opt off") == "opt off"
    assert session.eval_input("!opt") == "opt off"
    assert session.eval_input("!opt on") == "opt on"
    assert session.eval_input("!debug") == "debug off"
    code = session.eval_input("!code rev1")
    assert code.startswith(".func rev1") and "TAILCALL" in code
    session.eval_input("!opt off")
    assert "TAILCALL" not in session.eval_input("!code rev1")


def test_unknown_service(session):
    assert session.eval_input("!frobnicate").startswith("static error: unknown service")
    assert session.errors == 1


def test_save_and_import_replay_state(session, tmp_path):
    replay(LIST_DEFS, session)
    session.eval_input("A: a, b; A.a = range(1,4); z = rev(A.a);")
    before = session.eval_input("^z; ^A.a;")
    session.eval_input("!save hist.txt")
    fresh = Session(base_dir=str(tmp_path))
    out = fresh.eval_input("!import hist.txt")
    assert out.endswith(before)
    assert fresh.eval_input("!vars") == session.eval_input("!vars")
    assert fresh.eval_input("!funcs") == session.eval_input("!funcs")


def test_value_files_round_trip(tmp_path):
    text = '{ "k": [ 1, 2.5, "s", \'c\' ], "n": null }'
    p = str(tmp_path / "v.txt")
    write_value(p, read_literal(text))
    assert show(read_value(p), top=False) == text
    (tmp_path / "bad.txt").write_text("[1, 2")
    with pytest.raises(CLRuntimeError):
        read_value(str(tmp_path / "bad.txt"))
    with pytest.raises(CLRuntimeError):
        read_value(str(tmp_path / "missing.txt"))


def test_missing_input_file(session):
    assert "io-error" in session.eval_input("^<<(missing.txt);")


def test_multiline_feed(session):
    assert session.feed("f(x): x > 0 ?") == (False, "")
    assert session.pending
    assert session.feed("   x : -x;") == (True, "")
    assert not session.pending
    assert session.feed("^f(-4);") == (True, "4")


def test_errors_do_not_stop_the_chunk(session):
    out = session.eval_input("^1/0; ^2;").splitlines()
    assert len(out) == 2 and out[1] == "2"


def test_syntax_error_stops_the_chunk(session):
    out = session.eval_input("^1+; ^2;")
    assert out.startswith("syntax error") and "\n" not in out


def test_redefinition_changes_type(session):
    session.eval_input("x = 1;")
    session.eval_input('x = "one";')
    assert session.eval_input("^x@type;") == "string"


def test_non_star_function_cannot_write_globals(session):
    out = session.eval_input("A: n; f(x): <A*> {! n=x !} x;")
    assert "only star functions" in out and "f" not in session.state.functions


def test_label_redeclaration_drops_members(session):
    session.eval_input("A: a, b; A.a=1; A.b=2; A: b, c;")
    assert "A.a" not in session.state.globals
    assert {"A.b", "A.c"} <= set(session.state.globals)
    assert session.eval_input("^A.c %;") == "null"


def test_transcript_helper():
    assert transcript("^[1,2]+[3];") == "[ 1, 2, 3 ]"


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([
    "3*7", "'A'+1=='B'", '"Hello "+"Worl"+\'d\'', "[1,[2,'x'],3.5][1]", '{"a": [1, 2]}',
    "2.0/3", "[1,2]+[3]", "1e16", '"abc"[1:]', "7//-2", "-7%3",
]))
def test_state_equation(expr):
    s = Session()
    direct = s.eval_input(f"^{expr};")
    s.eval_input(f"V = {expr};")
    assert s.eval_input("^V;") == direct


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-50, 50), max_size=6))
def test_non_star_functions_ignore_global_changes(values):
    s = Session()
    s.eval_input("g = 10; f(x): x*2 + 1;")
    before = s.eval_input("^f(5);")
    for v in values:
        s.eval_input(f"g = {v}; f2(y): y;")
    assert s.eval_input("^f(5);") == before == "11"


def test_history_entries_are_complete_statements(session):
    session.eval_input("^1+1")
    session.eval_input("f(x):\n  x+1;")
    assert session.state.history == ["^1+1;", "f(x):   x+1;"]
