"""Lexer, parser and pretty-printer for annotated inductive definitions.

The accepted language is a module wrapping one or more ``Inductive`` blocks
whose constructor parameters may carry ``(* index *)`` or
``(* bind ... in *)`` annotations::

    Module LambdaTerms.
    Inductive term : Type :=
    | var ((* index *) x : nat)
    | app (t1 : term) (t2 : term)
    | lam ((* bind term in *) t : term).
    End LambdaTerms.

Any other comment is skipped like whitespace.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

Position = tuple[int, int]


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    NUMBER = "natural-literal"
    PUNCT = "punctuation"
    OPERATOR = "operator"
    COMMENT_OPEN = "comment-open"
    COMMENT_CLOSE = "comment-close"
    EOF = "end-of-input"


KEYWORDS = frozenset({"Module", "End", "Inductive", "Type", "with"})
# Only keywords inside an annotation comment; ordinary identifiers elsewhere.
ANNOTATION_KEYWORDS = frozenset({"index", "bind", "in"})


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    position: Position

    def __str__(self) -> str:
        return f"{self.kind.value} {self.lexeme!r} at {self.position[0]}:{self.position[1]}"


class LexError(Exception):
    def __init__(self, message: str, position: Position):
        super().__init__(f"{position[0]}:{position[1]}: {message}")
        self.message = message
        self.position = position


class ParseError(Exception):
    def __init__(self, message: str, position: Position, expected: frozenset[str] = frozenset()):
        detail = message
        if expected:
            detail += " (expected " + " or ".join(sorted(expected)) + ")"
        super().__init__(f"{position[0]}:{position[1]}: {detail}")
        self.message = message
        self.position = position
        self.expected = expected


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*"
    left: CountExpr
    right: CountExpr


CountExpr = Union[Lit, Ref, BinOp]


@dataclass(frozen=True)
class Shift:
    count: CountExpr
    sort: str
    position: Position = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BindingSpec:
    shifts: tuple[Shift, ...]

    def sorts(self) -> tuple[str, ...]:
        """Bound sorts in canonical order (first occurrence in the shift list)."""
        return tuple(dict.fromkeys(s.sort for s in self.shifts))


@dataclass(frozen=True)
class IndexParam:
    pass


@dataclass(frozen=True)
class NatParam:
    pass


@dataclass(frozen=True)
class SubtermParam:
    category: str
    binding: BindingSpec | None = None


ParamKind = Union[IndexParam, NatParam, SubtermParam]


@dataclass(frozen=True)
class Param:
    name: str
    kind: ParamKind
    position: Position = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Constructor:
    name: str
    params: tuple[Param, ...]
    position: Position = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Category:
    name: str
    constructors: tuple[Constructor, ...]
    position: Position = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class InductiveGroup:
    categories: tuple[Category, ...]


@dataclass(frozen=True)
class SourceGrammar:
    module_name: str
    groups: tuple[InductiveGroup, ...]

    @property
    def categories(self) -> tuple[Category, ...]:
        return tuple(c for grp in self.groups for c in grp.categories)


# ---------------------------------------------------------------------------
# Lexing

_PUNCT_CHARS = "():|.,[]"
_OPERATORS = "+-*"


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_'"


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def pos(self) -> Position:
        return (self.line, self.col)

    def peek(self, offset: int = 0) -> str:
        j = self.i + offset
        return self.text[j] if j < len(self.text) else ""

    def advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.text[self.i] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.i += 1

    def skip_space(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.advance()

    def emit(self, kind: TokenKind, lexeme: str, pos: Position) -> None:
        self.tokens.append(Token(kind, lexeme, pos))

    def run(self) -> list[Token]:
        while True:
            self.skip_space()
            if self.i >= len(self.text):
                break
            if self.peek() == "(" and self.peek(1) == "*":
                self.comment()
            else:
                self.ordinary(in_annotation=False)
        self.emit(TokenKind.EOF, "", self.pos())
        return self.tokens

    def comment(self) -> None:
        start = self.pos()
        j = self.i + 2
        while j < len(self.text) and self.text[j].isspace():
            j += 1
        k = j
        while k < len(self.text) and _is_ident_char(self.text[k]):
            k += 1
        if self.text[j:k] in ("index", "bind"):
            self.annotation(start)
        else:
            self.skip_comment(start)

    def skip_comment(self, start: Position) -> None:
        depth = 0
        while self.i < len(self.text):
            if self.peek() == "(" and self.peek(1) == "*":
                depth += 1
                self.advance(2)
            elif self.peek() == "*" and self.peek(1) == ")":
                depth -= 1
                self.advance(2)
                if depth == 0:
                    return
            else:
                self.advance()
        raise LexError("unterminated comment", start)

    def annotation(self, start: Position) -> None:
        self.emit(TokenKind.COMMENT_OPEN, "(*", start)
        self.advance(2)
        while True:
            self.skip_space()
            if self.i >= len(self.text):
                raise LexError("unterminated annotation", start)
            if self.peek() == "*" and self.peek(1) == ")":
                self.emit(TokenKind.COMMENT_CLOSE, "*)", self.pos())
                self.advance(2)
                return
            if self.peek() == "(" and self.peek(1) == "*":
                raise LexError("comment inside annotation", self.pos())
            self.ordinary(in_annotation=True)

    def ordinary(self, in_annotation: bool) -> None:
        pos = self.pos()
        ch = self.peek()
        if _is_ident_start(ch):
            j = self.i
            while j < len(self.text) and _is_ident_char(self.text[j]):
                j += 1
            word = self.text[self.i:j]
            if word in KEYWORDS or (in_annotation and word in ANNOTATION_KEYWORDS):
                kind = TokenKind.KEYWORD
            else:
                kind = TokenKind.IDENT
            self.emit(kind, word, pos)
            self.advance(j - self.i)
        elif ch.isdigit():
            j = self.i
            while j < len(self.text) and self.text[j].isdigit():
                j += 1
            if j < len(self.text) and _is_ident_char(self.text[j]):
                raise LexError("malformed number", pos)
            self.emit(TokenKind.NUMBER, self.text[self.i:j], pos)
            self.advance(j - self.i)
        elif ch == ":" and self.peek(1) == "=":
            self.emit(TokenKind.PUNCT, ":=", pos)
            self.advance(2)
        elif ch in _PUNCT_CHARS:
            self.emit(TokenKind.PUNCT, ch, pos)
            self.advance()
        elif ch in _OPERATORS:
            self.emit(TokenKind.OPERATOR, ch, pos)
            self.advance()
        else:
            raise LexError(f"illegal character {ch!r}", pos)


def tokenize(source_text: str) -> list[Token]:
    """Split ``source_text`` into tokens, ending with an EOF token.

    Annotation comments are kept as ``comment-open ... comment-close`` runs;
    plain comments (which may nest) are dropped.
    """
    return _Lexer(source_text).run()


# ---------------------------------------------------------------------------
# Parsing


class _Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            last = tokens[-1].position if tokens else (1, 1)
            tokens = [*tokens, Token(TokenKind.EOF, "", last)]
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, kind: TokenKind, lexeme: str | None = None) -> bool:
        t = self.tok
        return t.kind is kind and (lexeme is None or t.lexeme == lexeme)

    def fail(self, message: str, *expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind is TokenKind.EOF else repr(t.lexeme)
        return ParseError(f"{message}, found {found}", t.position, frozenset(expected))

    def expect(self, kind: TokenKind, lexeme: str | None = None, what: str = "") -> Token:
        if not self.at(kind, lexeme):
            desc = repr(lexeme) if lexeme is not None else kind.value
            raise self.fail(f"unexpected token{what}", desc)
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str) -> Token:
        if not self.at(TokenKind.IDENT):
            raise self.fail(f"expected {what}", "identifier")
        t = self.tok
        self.i += 1
        return t

    def module(self) -> SourceGrammar:
        self.expect(TokenKind.KEYWORD, "Module")
        name = self.ident("module name").lexeme
        self.expect(TokenKind.PUNCT, ".")
        groups = [self.node()]
        while self.at(TokenKind.KEYWORD, "Inductive"):
            groups.append(self.node())
        if not self.at(TokenKind.KEYWORD, "End"):
            raise self.fail("unexpected token", "'Inductive'", "'End'")
        self.i += 1
        end = self.ident("module name")
        if end.lexeme != name:
            raise ParseError(
                f"module {name!r} closed by 'End {end.lexeme}'", end.position, frozenset({repr(name)})
            )
        self.expect(TokenKind.PUNCT, ".")
        self.expect(TokenKind.EOF)
        return SourceGrammar(name, tuple(groups))

    def node(self) -> InductiveGroup:
        self.expect(TokenKind.KEYWORD, "Inductive")
        cats = [self.category()]
        while self.at(TokenKind.KEYWORD, "with"):
            self.i += 1
            cats.append(self.category())
        self.expect(TokenKind.PUNCT, ".")
        return InductiveGroup(tuple(cats))

    def category(self) -> Category:
        name = self.ident("category name")
        self.expect(TokenKind.PUNCT, ":")
        self.expect(TokenKind.KEYWORD, "Type")
        self.expect(TokenKind.PUNCT, ":=")
        constrs = []
        # The bar before the first constructor is optional, as in the host language.
        if self.at(TokenKind.IDENT):
            constrs.append(self.constructor())
        while self.at(TokenKind.PUNCT, "|"):
            self.i += 1
            constrs.append(self.constructor())
        return Category(name.lexeme, tuple(constrs), name.position)

    def constructor(self) -> Constructor:
        name = self.ident("constructor name")
        params = []
        while self.at(TokenKind.PUNCT, "("):
            params.append(self.param())
        return Constructor(name.lexeme, tuple(params), name.position)

    def param(self) -> Param:
        self.expect(TokenKind.PUNCT, "(")
        annotation: str | None = None
        binding = None
        if self.at(TokenKind.COMMENT_OPEN):
            self.i += 1
            if self.at(TokenKind.KEYWORD, "index"):
                self.i += 1
                annotation = "index"
            elif self.at(TokenKind.KEYWORD, "bind"):
                self.i += 1
                annotation = "bind"
                binding = self.shifts()
                self.expect(TokenKind.KEYWORD, "in")
            else:
                raise self.fail("unknown annotation", "'index'", "'bind'")
            self.expect(TokenKind.COMMENT_CLOSE)
        name = self.ident("parameter name")
        self.expect(TokenKind.PUNCT, ":")
        ty = self.ident("parameter type")
        self.expect(TokenKind.PUNCT, ")")
        kind: ParamKind
        if annotation == "index":
            if ty.lexeme != "nat":
                raise ParseError("index parameter must have type nat", ty.position, frozenset({"'nat'"}))
            kind = IndexParam()
        elif ty.lexeme == "nat":
            if annotation == "bind":
                raise ParseError("binding annotation on a nat parameter", ty.position, frozenset({"category name"}))
            kind = NatParam()
        else:
            kind = SubtermParam(ty.lexeme, binding)
        return Param(name.lexeme, kind, name.position)

    def shifts(self) -> BindingSpec:
        out = [self.shift()]
        while self.at(TokenKind.PUNCT, ","):
            self.i += 1
            out.append(self.shift())
        return BindingSpec(tuple(out))

    def shift(self) -> Shift:
        if self.at(TokenKind.PUNCT, "["):
            self.i += 1
            count = self.expr()
            sort = self.ident("bound category name")
            self.expect(TokenKind.PUNCT, "]")
            return Shift(count, sort.lexeme, sort.position)
        sort = self.ident("bound category name")
        return Shift(Lit(1), sort.lexeme, sort.position)

    # exp: '*' binds tighter than '+' and '-'; all left-associative.
    def expr(self) -> CountExpr:
        left = self.term()
        while self.at(TokenKind.OPERATOR, "+") or self.at(TokenKind.OPERATOR, "-"):
            op = self.tok.lexeme
            self.i += 1
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> CountExpr:
        left = self.atom()
        while self.at(TokenKind.OPERATOR, "*"):
            self.i += 1
            left = BinOp("*", left, self.atom())
        return left

    def atom(self) -> CountExpr:
        t = self.tok
        if t.kind is TokenKind.NUMBER:
            self.i += 1
            return Lit(int(t.lexeme))
        if t.kind is TokenKind.IDENT:
            self.i += 1
            return Ref(t.lexeme)
        if self.at(TokenKind.PUNCT, "("):
            self.i += 1
            e = self.expr()
            self.expect(TokenKind.PUNCT, ")")
            return e
        raise self.fail("expected expression", "natural-literal", "identifier", "'('")


def parse_module(tokens: list[Token]) -> SourceGrammar:
    """Parse a token list produced by :func:`tokenize`."""
    return _Parser(tokens).module()


def parse_source(text: str) -> SourceGrammar:
    return parse_module(tokenize(text))


def parse_expr(text: str) -> CountExpr:
    """Parse a standalone binder-count expression (used by tests and tooling)."""
    p = _Parser(tokenize(text))
    e = p.expr()
    p.expect(TokenKind.EOF)
    return e


# ---------------------------------------------------------------------------
# Rendering

_PREC = {"+": 1, "-": 1, "*": 2}


def render_expr(e: CountExpr) -> str:
    """Render with the fewest parentheses that still reparse to ``e``."""
    match e:
        case Lit(value):
            return str(value)
        case Ref(name):
            return name
        case BinOp(op, left, right):
            prec = _PREC[op]
            lhs = render_expr(left)
            rhs = render_expr(right)
            if isinstance(left, BinOp) and _PREC[left.op] < prec:
                lhs = f"({lhs})"
            if isinstance(right, BinOp) and _PREC[right.op] <= prec:
                rhs = f"({rhs})"
            return f"{lhs} {op} {rhs}"
    raise TypeError(f"not a count expression: {e!r}")


def render_shift(s: Shift) -> str:
    if s.count == Lit(1):
        return s.sort
    return f"[{render_expr(s.count)} {s.sort}]"


def render_param(p: Param, annotate: bool = True) -> str:
    match p.kind:
        case IndexParam():
            prefix = "(* index *) " if annotate else ""
            return f"({prefix}{p.name} : nat)"
        case NatParam():
            return f"({p.name} : nat)"
        case SubtermParam(cat, binding):
            prefix = ""
            if binding is not None and annotate:
                shifts = ", ".join(render_shift(s) for s in binding.shifts)
                prefix = f"(* bind {shifts} in *) "
            return f"({prefix}{p.name} : {cat})"
    raise TypeError(p.kind)


def render_group(group: InductiveGroup, annotate: bool = True) -> str:
    lines = []
    for i, cat in enumerate(group.categories):
        head = "Inductive" if i == 0 else "with"
        lines.append(f"{head} {cat.name} : Type :=")
        for c in cat.constructors:
            params = "".join(" " + render_param(p, annotate) for p in c.params)
            lines.append(f"| {c.name}{params}")
    lines[-1] += "."
    return "\n".join(lines)


def render_source(g: SourceGrammar) -> str:
    """Render ``g`` back to annotated source text."""
    parts = [f"Module {g.module_name}.", ""]
    for group in g.groups:
        parts.append(render_group(group))
        parts.append("")
    parts.append(f"End {g.module_name}.")
    return "\n".join(parts) + "\n"
