import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbgen import corpus
from dbgen.frontend import (
    BinOp,
    BindingSpec,
    Category,
    Constructor,
    IndexParam,
    InductiveGroup,
    LexError,
    Lit,
    NatParam,
    Param,
    ParseError,
    Ref,
    Shift,
    SourceGrammar,
    SubtermParam,
    TokenKind,
    parse_expr,
    parse_module,
    parse_source,
    render_expr,
    render_source,
    tokenize,
)

ALL_FILES = list(corpus.VALID) + list(corpus.INVALID)


def kinds(text):
    return [(t.kind, t.lexeme) for t in tokenize(text)[:-1]]


def test_tokenize_module_header():
    assert kinds("Module M.") == [
        (TokenKind.KEYWORD, "Module"),
        (TokenKind.IDENT, "M"),
        (TokenKind.PUNCT, "."),
    ]


def test_tokenize_index_annotation_is_structured():
    toks = kinds("((* index *) x : nat)")
    assert (TokenKind.COMMENT_OPEN, "(*") in toks
    assert (TokenKind.KEYWORD, "index") in toks
    assert (TokenKind.COMMENT_CLOSE, "*)") in toks


def test_plain_comment_is_skipped():
    assert kinds("(* just a note *) Inductive") == [(TokenKind.KEYWORD, "Inductive")]


def test_nested_plain_comment_is_skipped():
    assert kinds("(* a (* nested *) note *) End") == [(TokenKind.KEYWORD, "End")]


def test_annotation_keywords_are_identifiers_outside_annotations():
    assert kinds("(index : nat)")[1] == (TokenKind.IDENT, "index")


def test_whitespace_free_annotation():
    toks = kinds("(*bind term in*)")
    assert toks == [
        (TokenKind.COMMENT_OPEN, "(*"),
        (TokenKind.KEYWORD, "bind"),
        (TokenKind.IDENT, "term"),
        (TokenKind.KEYWORD, "in"),
        (TokenKind.COMMENT_CLOSE, "*)"),
    ]


def test_positions_are_one_based():
    toks = tokenize("Module M.\n  End")
    assert [t.position for t in toks[:4]] == [(1, 1), (1, 8), (1, 9), (2, 3)]


@pytest.mark.parametrize("text,pos", [("Module (* open", (1, 8)), ("Module $", (1, 8)), ("x\n (* index ", (2, 2))])
def test_lex_errors_carry_position(text, pos):
    with pytest.raises(LexError) as info:
        tokenize(text)
    assert info.value.position == pos


@pytest.mark.parametrize("name", ALL_FILES)
def test_positions_strictly_increase(name):
    toks = tokenize(corpus.source(name))
    positions = [t.position for t in toks]
    assert positions == sorted(set(positions))
    assert all(t.lexeme.isdigit() for t in toks if t.kind is TokenKind.NUMBER)


def test_parse_example_one(lam):
    g = lam.grammar
    expected = SourceGrammar(
        "LambdaTerms",
        (
            InductiveGroup(
                (
                    Category(
                        "term",
                        (
                            Constructor("var", (Param("x", IndexParam()),)),
                            Constructor("app", (Param("t1", SubtermParam("term")), Param("t2", SubtermParam("term")))),
                            Constructor(
                                "lam",
                                (Param("t", SubtermParam("term", BindingSpec((Shift(Lit(1), "term"),)))),),
                            ),
                        ),
                    ),
                )
            ),
        ),
    )
    assert g == expected


def test_parse_system_f(sysf):
    g = sysf.grammar
    assert [c.name for grp in g.groups for c in grp.categories] == ["type", "term"]
    assert len(g.groups) == 2
    lam = sysf.constructors["lam"]
    assert lam.params == (
        Param("A", SubtermParam("type")),
        Param("t", SubtermParam("term", BindingSpec((Shift(Lit(1), "term"),)))),
    )
    gen = sysf.constructors["gen"]
    assert gen.params[0].kind.binding.shifts == (Shift(Lit(1), "type"),)
    assert sysf.constructors["tconst"].params == (Param("n", NatParam()),)


def test_parse_count_expression_precedence():
    src = """Module M.
Inductive term : Type :=
| var ((* index *) x : nat)
| letn (n : nat) ((* bind [2*n - 1 term] in *) t : term).
End M."""
    g = parse_source(src)
    binding = g.groups[0].categories[0].constructors[1].params[1].kind.binding
    assert binding.shifts == (Shift(BinOp("-", BinOp("*", Lit(2), Ref("n")), Lit(1)), "term"),)


def test_mutual_group_parses():
    g = parse_source(corpus.source("branches"))
    assert [c.name for c in g.groups[0].categories] == ["tm", "br"]


@pytest.mark.parametrize(
    "text,pos",
    [
        ("Module M.\nInductive t : Type := | c.\nEnd N.", (3, 5)),
        ("Module M.\nEnd M.", (2, 1)),
        ("Module M.\nInductive t : Type := | c (x : nat.\nEnd M.", (2, 35)),
        ("Module M.\nInductive t : Type := | c ((* index *) x : t).\nEnd M.", (2, 44)),
        ("Module M.\nInductive t : Type := | c ((* bind t in *) x : nat).\nEnd M.", (2, 48)),
    ],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as info:
        parse_source(text)
    assert info.value.position == pos


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_source("Module M.\nInductive t : Type := | c (x nat).\nEnd M.")
    assert info.value.expected == frozenset({"':'"})


def test_mismatched_module_names():
    with pytest.raises(ParseError, match="closed by 'End N'"):
        parse_source("Module M.\nInductive t : Type := | c.\nEnd N.")


@pytest.mark.parametrize("name", ALL_FILES)
def test_round_trip(name):
    g = parse_source(corpus.source(name))
    assert parse_module(tokenize(render_source(g))) == g


def test_render_example_one_is_the_source(lam):
    assert render_source(lam.grammar) == corpus.source("lambda")


def test_shorthand_renders_as_bare_category():
    g = parse_source("Module M.\nInductive t : Type :=\n| v ((* index *) x : nat)\n| b ((* bind [1 t] in *) y : t).\nEnd M.")
    assert "(* bind t in *)" in render_source(g)


@pytest.mark.parametrize("name", ALL_FILES)
def test_normalization_idempotent(name):
    once = render_source(parse_source(corpus.source(name)))
    assert render_source(parse_source(once)) == once


@pytest.mark.parametrize(
    "expr,text",
    [
        (BinOp("-", Lit(1), BinOp("-", Lit(2), Lit(3))), "1 - (2 - 3)"),
        (BinOp("-", BinOp("-", Lit(1), Lit(2)), Lit(3)), "1 - 2 - 3"),
        (BinOp("*", BinOp("+", Ref("n"), Lit(1)), Lit(2)), "(n + 1) * 2"),
        (BinOp("+", Ref("n"), BinOp("*", Lit(1), Lit(2))), "n + 1 * 2"),
    ],
)
def test_render_expr_minimal_parentheses(expr, text):
    assert render_expr(expr) == text
    assert parse_expr(text) == expr


exprs = st.recursive(
    st.one_of(st.integers(0, 20).map(Lit), st.sampled_from(["n", "m", "k2"]).map(Ref)),
    lambda sub: st.builds(BinOp, st.sampled_from("+-*"), sub, sub),
    max_leaves=16,
)


@settings(max_examples=300)
@given(exprs)
def test_expr_round_trip(e):
    assert parse_expr(render_expr(e)) == e


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(ALL_FILES), st.data())
def test_error_positions_within_text(name, data):
    text = corpus.source(name)
    i = data.draw(st.integers(0, len(text) - 1))
    j = data.draw(st.integers(i, min(len(text), i + 8)))
    mutated = text[:i] + data.draw(st.sampled_from(["", "(*", "$", ")", "|", "[", "End"])) + text[j:]
    try:
        parse_module(tokenize(mutated))
    except (LexError, ParseError) as e:
        line, col = e.position
        lines = mutated.split("\n")
        assert 1 <= line <= len(lines)
        assert 1 <= col <= len(lines[line - 1]) + 1
