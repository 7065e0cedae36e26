import pytest

from calculist import compiler
from calculist.errors import CompileError, ParseError
from calculist.frontend import parse_statement
from calculist.isa import Op, tail_call_optimize
from calculist.session import Session

from corpus import SESSIONS, TRIANG_FAST, replay


def ops(unit):
    return [Op(op) for op, _, _ in unit.code]


def define(session, *sources):
    for src in sources:
        out = session.eval_input(src)
        assert out == "", out
    return session.state.functions


class TestStaticChecks:
    @pytest.mark.parametrize(
        "src, msg",
        [
            ("f(x): 1+true;", "type error"),
            ("f(x): 'c'+\"ab\";", "type error"),
            ("f(x): 7.0 % 2;", "type error"),
            ("f(x): 1 ? x : x;", "bool"),
            ("f(x): !3;", "type error"),
            ("f(x): [1 | 2];", "list"),
            ("f(x): _len(5);", "_len"),
            ("f(x): 3(x);", "not a function"),
            ("f(x): exc(1);", "string"),
        ],
    )
    def test_constant_type_errors(self, session, src, msg):
        out = session.eval_input(src)
        assert out.startswith("static error") and msg in out
        assert "f" not in session.state.functions

    def test_star_call_from_non_star(self, session):
        define(session, "div*(x,y): x/y;")
        assert "cannot be called by non-star" in session.eval_input("g(x): div(x,2);")

    def test_star_call_checked_at_link_when_forward(self, session):
        define(session, "g(x): div(x,2);")
        define(session, "div*(x,y): x/y;")
        assert "cannot be called by non-star" in session.eval_input("^g(4);")

    def test_arity(self, session):
        define(session, "fibe1(x,f2,f1,k): x==k? f1: fibe1(x,f1,f1+f2,k+1);")
        assert "expects 4 arguments, got 2" in session.eval_input("^fibe1(1,2);")
        assert "expects 4 arguments" in session.eval_input("h(x): fibe1(x);")

    def test_function_argument_arities(self, session):
        define(session, "app(f/1,x): f(x);", "add(x,y): x+y;")
        assert "arity 1" in session.eval_input("^app(add, 1);")
        assert "arity 1" in session.eval_input("^app(lambda a,b: a, 1);")
        assert "must be a function" in session.eval_input("^app(3, 1);")
        assert "not a function parameter" in session.eval_input("^add(add, 1);")
        assert "is not a function parameter" in session.eval_input("h(g, x): g(x);")
        assert "has arity 1" in session.eval_input("h(g/1, x): g(x, x);")

    def test_return_arity(self, session):
        define(session, "twice(f/1)/1: lambda x: f(f(x));", "one(x): 1;")
        assert "arity 1" in session.eval_input("^twice(lambda x: x)(1, 2);")
        assert "does not return a function" in session.eval_input("^one(1)(2);")
        assert "arity 2" in session.eval_input("bad(x)/2: lambda y: y;")

    def test_star_flag_is_fixed(self, session):
        define(session, "f(x): x;")
        assert "cannot be changed" in session.eval_input("f*(x): x;")
        define(session, "f(x): x+1;")

    def test_unknown_names(self, session):
        assert "unknown identifier undefinedVar" in session.eval_input("^undefinedVar;")
        assert "unknown labeled variable" in session.eval_input("^MATH.zeroD;")
        assert "unknown label" in session.eval_input("f*(x): <NOPE*> x;")
        assert "not defined" in session.eval_input("z += 1;")

    def test_labels_need_star_declaration(self, session):
        define(session, "MATH: zeroD;")
        assert "not accessible" in session.eval_input("f*(x): MATH.zeroD;")
        define(session, "f*(x): <MATH*> zeroD;")

    def test_builtins_are_reserved(self, session):
        assert "built-in" in session.eval_input("_len(x): x;")

    def test_dynamic_type_errors_compile(self, session):
        define(session, "f(x): x+true;")
        assert "type-error" in session.eval_input("^f(1);")


class TestCodeShape:
    def test_identity(self, session):
        u = define(session, "id(x): x;")["id"]
        assert u.code == [(Op.LOADP, 0, None), (Op.RET, None, None)]

    def test_short_circuit_compiles_to_branches(self, session):
        u = define(session, "f(a,b): a && b || a;")["f"]
        assert Op.JZ in ops(u) and not {Op.EQ, Op.NE} & set(ops(u))

    def test_tco_on_tail_calls_only(self, session):
        fns = define(
            session,
            "rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);",
            "listRev(L): L==[]? []: listRev(L[>])+[L[.]];",
            "fibe1(x,f2,f1,k): x==k? f1: fibe1(x,f1,f1+f2,k+1);",
        )
        assert Op.TAILCALL in ops(tail_call_optimize(fns["rev1"]))
        assert Op.TAILCALL in ops(tail_call_optimize(fns["fibe1"]))
        assert Op.TAILCALL not in ops(tail_call_optimize(fns["listRev"]))
        # the stored unit is left alone; optimization happens at link time
        assert Op.TAILCALL not in ops(fns["rev1"])

    def test_post_blocks_block_tail_calls(self, session):
        fns = define(session, "A: n;", "f*(x): <A*> x==0? 0: f(x-1) {! n+=1 !};")
        assert Op.TAILCALL not in ops(tail_call_optimize(fns["f"]))

    def test_link_respects_option(self, session):
        define(session, "rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);")
        q = compiler.compile_query(parse_statement("^rev1([1],[]);").expr, session.state)
        on = compiler.link(q, session.state.functions, tail_opt=True)
        off = compiler.link(q, session.state.functions, tail_opt=False)
        assert Op.TAILCALL in ops(on["rev1"]) and Op.TAILCALL not in ops(off["rev1"])

    def test_lambda_captures(self, session):
        u = define(session, "adder(n)/1: lambda x: x+n;")["adder"]
        assert u.code[-2] == (Op.MKCLOSURE, "adder$lambda0", 1)
        (lam,) = u.lambdas
        assert lam.params == ("x",) and lam.ncaptures == 1
        assert session.eval_input("^adder(3)(4);") == "7"

    def test_redefined_callee_arity_is_caught(self, session):
        define(session, "g(x): x;", "f(x): g(x);", "g(x,y): x;")
        assert "now takes 2" in session.eval_input("^f(1);")


def corpus_units():
    for steps in list(SESSIONS.values()) + [TRIANG_FAST]:
        s, _ = replay(steps)
        for name, fd in s.state.defs.items():
            yield name, fd, s.state.functions[name], s


def test_determinism():
    for name, fd, unit, s in corpus_units():
        again = compiler.compile_function(fd, s.state)
        assert again.same_code(unit), name


def test_purity_fence():
    writes = {Op.STOREG, Op.STOREP, Op.SETIDX, Op.PRINT}
    seen_star = 0
    for name, fd, unit, _ in corpus_units():
        if unit.star:
            seen_star += 1
            continue
        for u in unit.all_units():
            assert not writes & set(ops(u)), name
    assert seen_star >= 5


def test_parse_errors_are_not_compile_errors():
    with pytest.raises(ParseError):
        parse_statement("f(x): <L*> x;")
    with pytest.raises(CompileError):
        compiler.compile_function(parse_statement("_len(x): x;"), Session().state)
