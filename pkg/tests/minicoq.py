"""A tiny structural interpreter for the emitted lifting/substitution fixpoints.

It reads only the vernacular subset the emitter uses in that section:
``Fixpoint ... with ...`` blocks whose bodies are ``match`` over the last
argument, constructor and function application, ``if le_gt_dec``,
``match lt_eq_lt_dec``, numerals, and ``+ - *`` on naturals (subtraction
truncates, as in the proof assistant).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from dbgen.analysis import plan_functions
from dbgen.core import ValidGrammar
from dbgen.terms import Node, Var, enumerate_terms, eval_lift, eval_subst

SECTION = "(** * Lifting and substitution function definitions *)"

_TOKEN = re.compile(r"\s*(?:(\(\*.*?\*\))|(:=|=>|[A-Za-z_][A-Za-z0-9_']*|\d+|[()|{}:.+\-*]))", re.S)


def tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SyntaxError(f"unexpected text at {pos}: {text[pos:pos + 20]!r}")
        if m.group(2):
            out.append(m.group(2))
        pos = m.end()
    return out


# expression tree
@dataclass
class Num:
    value: int


@dataclass
class Name:
    ident: str


@dataclass
class App:
    head: str
    args: list


@dataclass
class Arith:
    op: str
    left: object
    right: object


@dataclass
class IfLe:
    a: object
    b: object
    then: object
    other: object


@dataclass
class Match:
    scrutinee: object
    clauses: list  # (pattern tokens, expr)


@dataclass
class Fixpoint:
    name: str
    params: list[str]
    struct: str
    body: Match


class _Parser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise SyntaxError(f"expected {expected!r}, got {tok!r} at token {self.i}")
        self.i += 1
        return tok

    def fixpoints(self) -> list[Fixpoint]:
        out = []
        while self.peek() is not None:
            self.take("Fixpoint")
            out.append(self.fixpoint())
            while self.peek() == "with":
                self.take("with")
                out.append(self.fixpoint())
            self.take(".")
        return out

    def fixpoint(self) -> Fixpoint:
        name = self.take()
        params = []
        while self.peek() == "(":
            self.take("(")
            params.append(self.take())
            self.take(":")
            self.take()
            self.take(")")
        self.take("{")
        self.take("struct")
        struct = self.take()
        self.take("}")
        self.take(":")
        self.take()
        self.take(":=")
        body = self.expr()
        assert isinstance(body, Match)
        return Fixpoint(name, params, struct, body)

    def expr(self):
        left = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            left = Arith(op, left, self.term())
        return left

    def term(self):
        left = self.application()
        while self.peek() == "*":
            self.take()
            left = Arith("*", left, self.application())
        return left

    def application(self):
        tok = self.peek()
        if tok == "if":
            self.take()
            self.take("le_gt_dec")
            a, b = self.atom(), self.atom()
            self.take("then")
            then = self.expr()
            self.take("else")
            return IfLe(a, b, then, self.expr())
        if tok == "match":
            self.take()
            scrutinee = self.expr()
            self.take("with")
            clauses = []
            while self.peek() == "|":
                self.take("|")
                pattern = []
                while self.peek() != "=>":
                    pattern.append(self.take())
                self.take("=>")
                clauses.append((pattern, self.expr()))
            self.take("end")
            return Match(scrutinee, clauses)
        head = self.atom()
        args = []
        while self.peek() is not None and (self.peek() == "(" or _is_atom(self.peek())):
            args.append(self.atom())
        if not args:
            return head
        assert isinstance(head, Name), head
        return App(head.ident, args)

    def atom(self):
        tok = self.take()
        if tok == "(":
            e = self.expr()
            self.take(")")
            return e
        if tok.isdigit():
            return Num(int(tok))
        return Name(tok)


_KEYWORDS = {"with", "end", "then", "else", "match", "if", "Fixpoint", "struct"}


def _is_atom(tok: str) -> bool:
    return tok not in _KEYWORDS and (tok.isdigit() or re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok) is not None)


def section_text(rendered: str) -> str:
    start = rendered.index(SECTION) + len(SECTION)
    end = rendered.index("(** *", start)
    return rendered[start:end]


def parse_section(text: str) -> dict[str, Fixpoint]:
    return {f.name: f for f in _Parser(tokenize(text)).fixpoints()}


_DEC = {("inleft", "(", "left", "_", ")"): "lt", ("inleft", "(", "right", "_", ")"): "eq", ("inright", "_"): "gt"}


class Interpreter:
    def __init__(self, g: ValidGrammar, fixpoints: dict[str, Fixpoint]):
        self.g = g
        self.fns = fixpoints
        self.index_of = {con: cat for cat, con in g.index_constructor_of.items()}

    def call(self, name: str, *args):
        fn = self.fns[name]
        if len(args) != len(fn.params):
            raise TypeError(f"{name} takes {len(fn.params)} arguments, got {len(args)}")
        env = dict(zip(fn.params, args))
        return self.eval(fn.body, env)

    def eval(self, e, env):
        match e:
            case Num(v):
                return v
            case Name(x):
                if x in env:
                    return env[x]
                return self.construct(x, [])
            case Arith(op, a, b):
                x, y = self.eval(a, env), self.eval(b, env)
                assert isinstance(x, int) and isinstance(y, int)
                return x + y if op == "+" else max(0, x - y) if op == "-" else x * y
            case IfLe(a, b, then, other):
                return self.eval(then if self.eval(a, env) <= self.eval(b, env) else other, env)
            case App(head, args):
                vals = [self.eval(a, env) for a in args]
                if head in self.fns:
                    return self.call(head, *vals)
                return self.construct(head, vals)
            case Match(App("lt_eq_lt_dec", [a, b]), clauses):
                x, y = self.eval(a, env), self.eval(b, env)
                outcome = "lt" if x < y else "eq" if x == y else "gt"
                for pattern, body in clauses:
                    if _DEC[tuple(pattern)] == outcome:
                        return self.eval(body, env)
                raise ValueError("non-exhaustive decision match")
            case Match(scrutinee, clauses):
                return self.match(self.eval(scrutinee, env), clauses, env)
        raise TypeError(f"cannot evaluate {e!r}")

    def match(self, value, clauses, env):
        for pattern, body in clauses:
            con, names = pattern[0], pattern[1:]
            if isinstance(value, Var) and self.index_of.get(con) == value.sort:
                return self.eval(body, {**env, names[0]: value.index})
            if isinstance(value, Node) and value.constructor == con:
                assert len(names) == len(value.args)
                return self.eval(body, {**env, **dict(zip(names, value.args))})
        raise ValueError(f"no clause matches {value!r}")

    def construct(self, con: str, args: list):
        if con in self.index_of:
            (i,) = args
            return Var(self.index_of[con], i)
        if con not in self.g.constructors:
            raise NameError(f"unknown identifier {con!r}")
        return Node(self.g.sort_of_constructor[con], con, tuple(args))


def first_mismatch(g: ValidGrammar, rendered: str, t_size: int, u_size: int, max_param: int = 2, max_index: int = 2):
    """Compare the emitted fixpoints with the engine on every bounded instance.

    Returns ``None`` or a tuple describing the first disagreement.
    """
    plan = plan_functions(g)
    it = Interpreter(g, parse_section(section_text(rendered)))
    params = range(max_param + 1)
    for (s, p), fn in plan.lift_names.items():
        for t in enumerate_terms(g, p, t_size, max_index):
            for n, k in itertools.product(params, repeat=2):
                got, want = it.call(fn, n, k, t), eval_lift(g, s, n, k, t)
                if got != want:
                    return (fn, n, k, t, got, want)
    for (s, p), fn in plan.subst_names.items():
        us = list(enumerate_terms(g, s, u_size, max_index))
        for t in enumerate_terms(g, p, t_size, max_index):
            for j in params:
                for u in us:
                    got, want = it.call(fn, u, j, t), eval_subst(g, s, u, j, t)
                    if got != want:
                        return (fn, u, j, t, got, want)
    return None
