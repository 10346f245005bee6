"""The ``dbgen`` command."""

from __future__ import annotations

import os
import sys
import tempfile
import time

from . import __version__
from .analysis import format_debug, plan_functions
from .core import GrammarError, validate_grammar
from .emitter import emit_module
from .frontend import LexError, ParseError, parse_module, render_source, tokenize

USAGE = "usage: dbgen [ -version ][ -debug ] in-file out-file"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SYNTAX = 2
EXIT_INVALID = 3
EXIT_IO = 4


def _err(*lines: str) -> None:
    for line in lines:
        print(line, file=sys.stderr)


def write_atomic(path: str, text: str) -> None:
    """Replace ``path`` with ``text`` so that readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".dbgen-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def selftest(debug: bool = False) -> int:
    from . import corpus
    from .laws import LAWS, check_law

    failures = 0
    for name, bounds in corpus.VALID.items():
        g = corpus.load(name)
        for law in LAWS:
            start = time.perf_counter()
            cx = check_law(g, law, bounds)
            elapsed = time.perf_counter() - start
            status = "ok" if cx is None else "FAIL"
            _err(f"{name:<12} {law:<24} {status} ({elapsed:.2f}s)")
            if cx is not None:
                failures += 1
                _err(f"  {cx}")
    _err(f"selftest: {failures} counterexample(s)")
    return EXIT_OK if failures == 0 else EXIT_INVALID


def run(argv: list[str]) -> int:
    show_version = debug = False
    positional = []
    for arg in argv:
        if arg == "-version":
            show_version = True
        elif arg == "-debug":
            debug = True
        elif arg.startswith("-") and arg != "-":
            _err(USAGE)
            return EXIT_USAGE
        else:
            positional.append(arg)

    if show_version:
        print(f"dbgen {__version__}")
        return EXIT_OK
    if positional == ["selftest"]:
        return selftest(debug)
    if len(positional) != 2:
        _err(USAGE)
        return EXIT_USAGE
    in_file, out_file = positional

    try:
        with open(in_file, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        _err(f"dbgen: cannot read {in_file}: {e}")
        return EXIT_IO

    try:
        tokens = tokenize(text)
        if debug:
            _err("tokens:", *(f"  {t}" for t in tokens))
        grammar = parse_module(tokens)
    except (LexError, ParseError) as e:
        _err(f"{in_file}:{e}")
        return EXIT_SYNTAX
    if debug:
        _err("grammar:", *("  " + line for line in render_source(grammar).splitlines()))

    try:
        valid = validate_grammar(grammar)
    except GrammarError as e:
        _err(*(f"{in_file}:{err}" for err in e.errors))
        return EXIT_INVALID

    plan = plan_functions(valid)
    if debug:
        _err(format_debug(valid, plan).rstrip("\n"))
    text_out = emit_module(valid, plan).rendered

    try:
        write_atomic(out_file, text_out)
    except OSError as e:
        _err(f"dbgen: cannot write {out_file}: {e}")
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
