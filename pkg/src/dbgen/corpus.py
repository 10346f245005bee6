"""The grammars shipped with the package, used by ``dbgen selftest`` and the tests."""

from __future__ import annotations

from importlib import resources

from .core import ValidGrammar, validate_grammar
from .frontend import parse_source
from .laws import Bounds

# name -> law-checking bounds for the self test
VALID = {
    "lambda": Bounds(max_size=5),
    "system_f": Bounds(max_size=4),
    "branches": Bounds(max_size=4, max_index=2, max_param=2),
    "telescopes": Bounds(max_size=3, max_index=2, max_param=2, u_size=2),
    "plain": Bounds(max_size=4),
}

INVALID = {
    "bad_extra_args": "ExtraArgsOnIndexConstructor",
    "bad_multiple_index": "MultipleIndexConstructors",
    "bad_unknown_bind": "UnknownCategoryInBind",
    "bad_unknown_param": "UnknownCategoryInParam",
    "bad_unbound_expr": "UnboundExprIdentifier",
    "bad_duplicate": "DuplicateName",
}


def source(name: str) -> str:
    return (resources.files("dbgen") / "corpus" / f"{name}.v").read_text(encoding="utf-8")


def load(name: str) -> ValidGrammar:
    return validate_grammar(parse_source(source(name)))
