import os
import subprocess
import sys
from pathlib import Path

import pytest

from dbgen import __version__, cli, corpus
from dbgen.cli import USAGE, run
from dbgen.laws import Bounds

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def lambda_file(tmp_path):
    p = tmp_path / "lambda.v"
    p.write_text(corpus.source("lambda"), encoding="utf-8")
    return p


def golden_for_release(name):
    return (GOLDEN / f"{name}.v").read_text(encoding="utf-8").replace("dbgen TEST ", f"dbgen {__version__} ", 1)


def test_usage_line_verbatim():
    assert USAGE == "usage: dbgen [ -version ][ -debug ] in-file out-file"


@pytest.mark.parametrize("argv", [[], ["only-one-arg"], ["a", "b", "c"], ["--version"], ["-v", "a", "b"]])
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    out, err = capsys.readouterr()
    assert out == ""
    assert err == USAGE + "\n"


def test_version(capsys):
    assert run(["-version"]) == 0
    out, err = capsys.readouterr()
    assert out == f"dbgen {__version__}\n"
    assert err == ""


def test_version_wins_over_other_arguments(capsys, tmp_path):
    assert run(["-version", "missing.v", str(tmp_path / "out.v")]) == 0
    assert not (tmp_path / "out.v").exists()
    assert capsys.readouterr().out == f"dbgen {__version__}\n"


def test_generates_golden(lambda_file, tmp_path, capsys):
    out = tmp_path / "out.v"
    assert run([str(lambda_file), str(out)]) == 0
    assert out.read_text(encoding="utf-8") == golden_for_release("lambda")
    assert capsys.readouterr() == ("", "")


def test_replaces_existing_file_and_is_idempotent(lambda_file, tmp_path):
    out = tmp_path / "out.v"
    out.write_text("stale contents that are much longer than nothing\n" * 1000)
    assert run([str(lambda_file), str(out)]) == 0
    first = out.read_bytes()
    assert first == golden_for_release("lambda").encode()
    assert run([str(lambda_file), str(out)]) == 0
    assert out.read_bytes() == first
    assert sorted(os.listdir(tmp_path)) == ["lambda.v", "out.v"]


def test_parse_error_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.v"
    src.write_text("Module M.\nInductive t : Type := | c (x nat).\nEnd M.\n")
    out = tmp_path / "out.v"
    assert run([str(src), str(out)]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert f"{src}:2:30:" in captured.err
    assert not out.exists()


def test_lex_error_exit_code(tmp_path):
    src = tmp_path / "bad.v"
    src.write_text("Module M. (* unterminated")
    assert run([str(src), str(tmp_path / "out.v")]) == 2


def test_validation_errors_all_reported(tmp_path, capsys):
    src = tmp_path / "dup.v"
    src.write_text(corpus.source("bad_duplicate"))
    out = tmp_path / "out.v"
    out.write_text("previous\n")
    assert run([str(src), str(out)]) == 3
    err = capsys.readouterr().err
    assert err.count("DuplicateName") == 2
    assert out.read_text() == "previous\n"


@pytest.mark.parametrize("name", corpus.INVALID)
def test_each_invalid_corpus_file_exits_3(name, tmp_path, capsys):
    src = tmp_path / f"{name}.v"
    src.write_text(corpus.source(name))
    assert run([str(src), str(tmp_path / "out.v")]) == 3
    assert corpus.INVALID[name] in capsys.readouterr().err


def test_missing_input_is_io_error(tmp_path, capsys):
    assert run([str(tmp_path / "nope.v"), str(tmp_path / "out.v")]) == 4
    assert "cannot read" in capsys.readouterr().err


def test_unwritable_output_is_io_error(lambda_file, tmp_path, capsys):
    assert run([str(lambda_file), str(tmp_path / "no" / "such" / "dir.v")]) == 4
    assert "cannot write" in capsys.readouterr().err


def test_failed_write_leaves_old_file(lambda_file, tmp_path, monkeypatch):
    out = tmp_path / "out.v"
    out.write_text("old\n")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    assert run([str(lambda_file), str(out)]) == 4
    assert out.read_text() == "old\n"
    assert sorted(os.listdir(tmp_path)) == ["lambda.v", "out.v"]


def test_debug_goes_to_stderr(lambda_file, tmp_path, capsys):
    out = tmp_path / "out.v"
    assert run(["-debug", str(lambda_file), str(out)]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "tokens:" in captured.err
    assert "grammar:" in captured.err
    assert "term_lift_in_term : nat -> nat -> term -> term" in captured.err
    assert "hint database: LambdaTerms_database" in captured.err
    assert out.read_text(encoding="utf-8") == golden_for_release("lambda")


def test_selftest_reduced(monkeypatch, capsys):
    small = Bounds(max_size=2, max_index=2, max_param=2, samples=50)
    monkeypatch.setattr(corpus, "VALID", {name: small for name in corpus.VALID})
    assert run(["selftest"]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "selftest: 0 counterexample(s)" in captured.err


def test_selftest_reports_failures(monkeypatch, capsys):
    monkeypatch.setattr(corpus, "VALID", {"lambda": Bounds(max_size=2)})
    monkeypatch.setattr("dbgen.laws.check_law", lambda g, law, bounds: None if law != "lift_zero" else "boom")
    assert cli.selftest() == 3
    assert "selftest: 1 counterexample(s)" in capsys.readouterr().err


def test_console_script(tmp_path, lambda_file):
    out = tmp_path / "out.v"
    proc = subprocess.run([sys.executable, "-m", "dbgen", str(lambda_file), str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == ""
    assert out.read_text(encoding="utf-8") == golden_for_release("lambda")
    proc = subprocess.run([sys.executable, "-m", "dbgen", "x"], capture_output=True, text=True)
    assert (proc.returncode, proc.stderr) == (1, USAGE + "\n")
