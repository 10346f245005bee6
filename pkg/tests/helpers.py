"""Shorthand constructors for the lambda-calculus and System F test grammars."""

from dbgen.terms import NNode, NSub, NVar, Node, Var


def var(i):
    return Var("term", i)


def tvar(i):
    return Var("type", i)


def app(a, b):
    return Node("term", "app", (a, b))


def lam(body):
    return Node("term", "lam", (body,))


def flam(ty, body):
    """System F ``lam (A : type) (t : term)``."""
    return Node("term", "lam", (ty, body))


def tconst(n):
    return Node("type", "tconst", (n,))


def gen(body):
    return Node("term", "gen", (body,))


def _var(x):
    return NVar("term", x)


def _app(a, b):
    return NNode("term", "app", (NSub((), a), NSub((), b)))


def _lam(x, body):
    return NNode("term", "lam", (NSub((("term", x),), body),))
