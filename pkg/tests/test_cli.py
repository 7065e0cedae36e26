from calculist.cli import main


def test_run_file(tmp_path, capsys):
    f = tmp_path / "prog.cl"
    f.write_text("sq(x): x*x;\n^sq(7);\n")
    assert main(["run", str(f)]) == 0
    assert capsys.readouterr().out == "49\n"


def test_run_file_reports_errors(tmp_path, capsys):
    f = tmp_path / "bad.cl"
    f.write_text("^1//0;\n^2;\n")
    assert main(["run", str(f)]) == 1
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("runtime error") and out[1] == "2"


def test_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.cl")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_no_opt_overflows_only_without_optimizer(tmp_path, capsys):
    f = tmp_path / "deep.cl"
    f.write_text("loop(n): n==0? 0: loop(n-1);\n^loop(5000);\n")
    assert main(["--stack-limit", "1000", "run", str(f)]) == 0
    assert capsys.readouterr().out == "0\n"
    assert main(["--stack-limit", "1000", "--no-opt", "run", str(f)]) == 1
    assert "stack-overflow" in capsys.readouterr().out


def test_asm(tmp_path, capsys):
    f = tmp_path / "p.asm"
    f.write_text("PUSHC 2\nPUSHC 3\nMUL\nPRINT 0\n")
    assert main(["asm", str(f)]) == 0
    assert capsys.readouterr().out == "6\n"
    assert main(["asm", str(f), "--list"]) == 0
    assert capsys.readouterr().out.startswith(".func $main")


def test_asm_errors(tmp_path, capsys):
    f = tmp_path / "bad.asm"
    f.write_text("FROB\n")
    assert main(["asm", str(f)]) == 1
    assert "unknown opcode" in capsys.readouterr().err
    f.write_text("PUSHC 1\nPUSHC 0\nIDIV\nPRINT 0\n")
    assert main(["asm", str(f)]) == 1
    assert "division" in capsys.readouterr().err


def test_trace(tmp_path, capsys):
    f = tmp_path / "p.cl"
    f.write_text("^1+1;\n")
    assert main(["--trace", "run", str(f)]) == 0
    captured = capsys.readouterr()
    assert captured.out == "2\n" and "ADD" in captured.err
