"""Generic nameless and named terms for any validated grammar.

A nameless term is either ``Var(sort, index)`` (the sort's index
constructor) or ``Node(sort, constructor, args)`` where each argument is a
plain ``int`` for a ``nat`` parameter or a nested term for a subterm
parameter.  Named terms mirror this with string variables and an explicit
binder list on every subterm argument.

Lifting and substitution here are the reference semantics that the emitted
fixpoints must denote.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence, Union

from .analysis import build_graph, indexed_sorts, reachable_from
from .core import ValidGrammar, binder_counts, expr_identifiers
from .frontend import BindingSpec, IndexParam, NatParam, SubtermParam

NAT_VALUES = (0, 1, 2)


class Var:
    """The index constructor of ``sort`` applied to ``index``.

    Terms are immutable by convention; plain slotted classes keep the
    law-checking loops fast.
    """

    __slots__ = ("sort", "index")
    __match_args__ = ("sort", "index")

    def __init__(self, sort: str, index: int):
        self.sort = sort
        self.index = index

    def __eq__(self, other: object) -> bool:
        return other.__class__ is Var and self.index == other.index and self.sort == other.sort

    def __hash__(self) -> int:
        return hash((self.sort, self.index))

    def __repr__(self) -> str:
        return f"{self.sort}#{self.index}"


class Node:
    __slots__ = ("sort", "constructor", "args", "_hash")
    __match_args__ = ("sort", "constructor", "args")

    def __init__(self, sort: str, constructor: str, args: tuple[int | Term, ...] = ()):
        self.sort = sort
        self.constructor = constructor
        self.args = args
        self._hash = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        # the constructor determines the sort
        return other.__class__ is Node and self.constructor == other.constructor and self.args == other.args

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.constructor, self.args))
        return self._hash

    def __repr__(self) -> str:
        if not self.args:
            return self.constructor
        return f"{self.constructor}({', '.join(map(repr, self.args))})"


Term = Union[Var, Node]


@dataclass(frozen=True)
class NVar:
    sort: str
    name: str


@dataclass(frozen=True)
class NSub:
    """A subterm argument together with the (sort, name) binders it is under."""

    binders: tuple[tuple[str, str], ...]
    term: NamedTerm


@dataclass(frozen=True)
class NNode:
    sort: str
    constructor: str
    args: tuple[int | NSub, ...] = ()


NamedTerm = Union[NVar, NNode]
Telescope = tuple[tuple[str, str], ...]


# ---------------------------------------------------------------------------
# Precomputed grammar signature


@dataclass(frozen=True)
class _ParamInfo:
    category: str | None  # None for a nat parameter
    binding: BindingSpec | None
    # binder counts when they do not depend on nat arguments
    static_counts: dict[str, int] | None = None

    def counts(self, info: _ConInfo, args: Sequence) -> dict[str, int]:
        if self.static_counts is not None:
            return self.static_counts
        return binder_counts(self.binding, info.env(args))


@dataclass(frozen=True)
class _ConInfo:
    sort: str
    params: tuple[_ParamInfo, ...]
    nat_names: tuple[str, ...]

    def env(self, args: Sequence) -> dict[str, int]:
        nats = [a for a, p in zip(args, self.params) if p.category is None]
        return dict(zip(self.nat_names, nats))


@dataclass(frozen=True, eq=False)
class Signature:
    sorts: tuple[str, ...]
    cons: dict[str, _ConInfo]
    # category -> indexed sorts reachable from it
    reaches: dict[str, frozenset[str]]
    # category -> non-index constructors, in source order
    node_cons: dict[str, tuple[str, ...]]
    # sort -> constructor -> (arg position, param) for every subterm that can hold that sort
    slots: dict[str, dict[str, tuple[tuple[int, _ParamInfo], ...]]]


@lru_cache(maxsize=None)
def signature(g: ValidGrammar) -> Signature:
    graph = build_graph(g)
    sorts = tuple(indexed_sorts(g))
    reach_sets = {s: reachable_from(graph, s) for s in sorts}
    cons = {}
    node_cons = {}
    for cat in g.grammar.categories:
        node_cons[cat.name] = tuple(
            c.name for c in cat.constructors if g.index_constructor_of.get(cat.name) != c.name
        )
        for con in cat.constructors:
            params = []
            for p in con.params:
                if isinstance(p.kind, SubtermParam):
                    b = p.kind.binding
                    static = None
                    if b is None or not any(expr_identifiers(sh.count) for sh in b.shifts):
                        static = dict(binder_counts(b, {}))
                    params.append(_ParamInfo(p.kind.category, b, static))
                else:
                    params.append(_ParamInfo(None, None))
            nat_names = tuple(p.name for p in con.params if isinstance(p.kind, NatParam))
            cons[con.name] = _ConInfo(cat.name, tuple(params), nat_names)
    reaches = {c: frozenset(s for s in sorts if c in reach_sets[s]) for c in g.category_order}
    slots = {
        s: {
            name: tuple(
                (i, p) for i, p in enumerate(info.params) if p.category is not None and s in reaches[p.category]
            )
            for name, info in cons.items()
        }
        for s in sorts
    }
    return Signature(sorts, cons, reaches, node_cons, slots)


# ---------------------------------------------------------------------------
# Well-formedness


class WfCode(str, enum.Enum):
    UNKNOWN_CONSTRUCTOR = "UnknownConstructor"
    ARITY_MISMATCH = "ArityMismatch"
    SORT_MISMATCH = "SortMismatch"
    VAR_OF_NON_INDEXED_SORT = "VarOfNonIndexedSort"


class WfError(Exception):
    def __init__(self, code: WfCode, path: tuple[int, ...], message: str):
        super().__init__(f"{code.value} at {list(path)}: {message}")
        self.code = code
        self.path = path


def check_wf(g: ValidGrammar, t: Term, path: tuple[int, ...] = ()) -> None:
    """Raise :class:`WfError` unless ``t`` is a well-formed term of its sort."""
    match t:
        case Var(sort, index):
            if not g.is_indexed(sort):
                raise WfError(WfCode.VAR_OF_NON_INDEXED_SORT, path, f"{sort!r} has no index constructor")
            if not isinstance(index, int) or index < 0:
                raise WfError(WfCode.ARITY_MISMATCH, path, f"index must be a natural, got {index!r}")
        case Node(sort, con, args):
            c = g.constructors.get(con)
            if c is None:
                raise WfError(WfCode.UNKNOWN_CONSTRUCTOR, path, f"no constructor {con!r}")
            if g.sort_of_constructor[con] != sort:
                raise WfError(WfCode.SORT_MISMATCH, path, f"{con!r} builds {g.sort_of_constructor[con]!r}, not {sort!r}")
            if any(isinstance(p.kind, IndexParam) for p in c.params):
                raise WfError(WfCode.ARITY_MISMATCH, path, f"index constructor {con!r} must be written as Var")
            if len(args) != len(c.params):
                raise WfError(WfCode.ARITY_MISMATCH, path, f"{con!r} takes {len(c.params)} arguments, got {len(args)}")
            for i, (a, p) in enumerate(zip(args, c.params)):
                if isinstance(p.kind, NatParam):
                    if not isinstance(a, int) or a < 0:
                        raise WfError(WfCode.ARITY_MISMATCH, path + (i,), f"{p.name!r} expects a natural")
                    continue
                assert isinstance(p.kind, SubtermParam)
                if not isinstance(a, (Var, Node)):
                    raise WfError(WfCode.ARITY_MISMATCH, path + (i,), f"{p.name!r} expects a term")
                if a.sort != p.kind.category:
                    raise WfError(
                        WfCode.SORT_MISMATCH, path + (i,), f"{p.name!r} expects {p.kind.category!r}, got {a.sort!r}"
                    )
                check_wf(g, a, path + (i,))
        case _:
            raise WfError(WfCode.ARITY_MISMATCH, path, f"not a term: {t!r}")


def size(t: Term | NamedTerm) -> int:
    """Node count; nat arguments and binder lists do not count."""
    match t:
        case Var() | NVar():
            return 1
        case Node(_, _, args):
            return 1 + sum(size(a) for a in args if not isinstance(a, int))
        case NNode(_, _, args):
            return 1 + sum(size(a.term) for a in args if isinstance(a, NSub))
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Lifting and substitution


def eval_lift(g: ValidGrammar, s: str, n: int, k: int, t: Term) -> Term:
    """Add ``n`` to every free index of sort ``s`` that is ``>= k``."""
    return _lift(signature(g), s, n, k, t)


def _lift(sig: Signature, s: str, n: int, k: int, t: Term) -> Term:
    if t.__class__ is Var:
        if t.index >= k and t.sort == s:
            return Var(s, t.index + n)
        return t
    args = t.args
    out = None
    for i, p in sig.slots[s][t.constructor]:
        a = args[i]
        counts = p.static_counts
        if counts is None:
            counts = p.counts(sig.cons[t.constructor], args)
        r = _lift(sig, s, n, k + counts.get(s, 0), a)
        if r is not a:
            if out is None:
                out = list(args)
            out[i] = r
    # unchanged subtrees are shared, not rebuilt
    return t if out is None else Node(t.sort, t.constructor, tuple(out))


@lru_cache(maxsize=1 << 16)
def _lift_cached(sig: Signature, s: str, n: int, k: int, t: Term) -> Term:
    return _lift(sig, s, n, k, t)


def eval_subst(g: ValidGrammar, s: str, u: Term, j: int, t: Term) -> Term:
    """Replace index ``j`` of sort ``s`` in ``t`` by ``u``; higher indices drop by one.

    Under a binder ``u`` is lifted, one sort at a time, by the number of
    variables the binder introduces.
    """
    return _subst(signature(g), s, u, j, t)


def _subst(sig: Signature, s: str, u: Term, j: int, t: Term) -> Term:
    if t.__class__ is Var:
        if t.index < j or t.sort != s:
            return t
        if t.index == j:
            return u
        return Var(s, t.index - 1)
    args = t.args
    out = None
    for i, p in sig.slots[s][t.constructor]:
        a = args[i]
        if p.binding is None:
            r = _subst(sig, s, u, j, a)
        else:
            counts = p.static_counts
            if counts is None:
                counts = p.counts(sig.cons[t.constructor], args)
            u2 = u
            for s2 in sig.sorts:
                b = counts.get(s2, 0)
                if b > 0 and s2 in sig.reaches[s]:
                    u2 = _lift_cached(sig, s2, b, 0, u2)
            r = _subst(sig, s, u2, j + counts.get(s, 0), a)
        if r is not a:
            if out is None:
                out = list(args)
            out[i] = r
    return t if out is None else Node(t.sort, t.constructor, tuple(out))


# ---------------------------------------------------------------------------
# Named syntax


class TranslateError(Exception):
    pass


class UnboundName(TranslateError):
    def __init__(self, sort: str, name: str):
        super().__init__(f"unbound {sort} variable {name!r}")
        self.sort = sort
        self.name = name


class BinderArityMismatch(TranslateError):
    def __init__(self, sort: str, expected: int, got: int):
        super().__init__(f"binder for {sort!r} expects {expected} name(s), got {got}")
        self.sort = sort
        self.expected = expected
        self.got = got


def lookup(ctx: Telescope, sort: str, name: str) -> int | None:
    """De Bruijn distance of (sort, name) in ``ctx``; the innermost (last) match wins."""
    d = 0
    for s, x in reversed(ctx):
        if s != sort:
            continue
        if x == name:
            return d
        d += 1
    return None


def translate_named(g: ValidGrammar, ctx: Telescope, nt: NamedTerm) -> Term:
    """Translate a named term to De Bruijn form under the binder context ``ctx``."""
    sig = signature(g)
    match nt:
        case NVar(sort, name):
            d = lookup(ctx, sort, name)
            if d is None:
                raise UnboundName(sort, name)
            return Var(sort, d)
        case NNode(sort, con, args):
            info = sig.cons[con]
            env = info.env(args)
            out = []
            for a, p in zip(args, info.params):
                if p.category is None:
                    out.append(a)
                    continue
                expected = binder_counts(p.binding, env)
                got = Counter(s for s, _ in a.binders)
                for srt in expected.keys() | got.keys():
                    if expected[srt] != got[srt]:
                        raise BinderArityMismatch(srt, expected[srt], got[srt])
                out.append(translate_named(g, ctx + tuple(a.binders), a.term))
            return Node(sort, con, tuple(out))
    raise TypeError(nt)


def free_names(nt: NamedTerm) -> set[tuple[str, str]]:
    match nt:
        case NVar(sort, name):
            return {(sort, name)}
        case NNode(_, _, args):
            out: set[tuple[str, str]] = set()
            for a in args:
                if isinstance(a, NSub):
                    out |= free_names(a.term) - set(a.binders)
            return out
    raise TypeError(nt)


def all_names(nt: NamedTerm) -> set[tuple[str, str]]:
    match nt:
        case NVar(sort, name):
            return {(sort, name)}
        case NNode(_, _, args):
            out: set[tuple[str, str]] = set()
            for a in args:
                if isinstance(a, NSub):
                    out |= all_names(a.term) | set(a.binders)
            return out
    raise TypeError(nt)


def fresh_name(sort: str, name: str, avoid: set[tuple[str, str]]) -> str:
    while (sort, name) in avoid:
        name += "'"
    return name


def named_subst(g: ValidGrammar, x: tuple[str, str], u: NamedTerm, t: NamedTerm) -> NamedTerm:
    """Capture-avoiding substitution of ``u`` for the free variable ``x`` in ``t``."""
    match t:
        case NVar(sort, name):
            return u if (sort, name) == x else t
        case NNode(sort, con, args):
            fv_u = free_names(u)
            out = []
            for a in args:
                if isinstance(a, int):
                    out.append(a)
                elif x in a.binders:
                    out.append(a)
                else:
                    out.append(_subst_under(g, x, u, fv_u, a))
            return NNode(sort, con, tuple(out))
    raise TypeError(t)


def _subst_under(g, x, u, fv_u, a: NSub) -> NSub:
    binders = list(a.binders)
    body = a.term
    if any(b in fv_u for b in binders):
        avoid = fv_u | all_names(body) | set(binders) | {x}
        for i, (bs, bn) in enumerate(binders):
            if (bs, bn) not in fv_u:
                continue
            new = fresh_name(bs, bn, avoid)
            avoid.add((bs, new))
            # Only the last occurrence of a repeated binder is visible in the body.
            if (bs, bn) not in binders[i + 1:]:
                body = named_subst(g, (bs, bn), NVar(bs, new), body)
            binders[i] = (bs, new)
    return NSub(tuple(binders), named_subst(g, x, u, body))


# ---------------------------------------------------------------------------
# Enumeration


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def enumerate_terms(g: ValidGrammar, sort: str, max_size: int, max_index: int) -> Iterator[Term]:
    """Every well-formed term of ``sort`` with at most ``max_size`` nodes.

    Free indices of each sort range below ``max_index`` plus the number of
    binders of that sort crossed on the way down; nat arguments range over
    ``NAT_VALUES``.  Terms come out by increasing size, then in constructor
    order.
    """
    sig = signature(g)
    pos = {s: i for i, s in enumerate(sig.sorts)}
    memo: dict[tuple[str, int, tuple[int, ...]], list[Term]] = {}

    def gen(cat: str, n: int, offs: tuple[int, ...]) -> list[Term]:
        key = (cat, n, offs)
        if key in memo:
            return memo[key]
        out: list[Term] = []
        if n == 1 and cat in pos:
            out.extend(Var(cat, i) for i in range(max_index + offs[pos[cat]]))
        for con in sig.node_cons[cat]:
            info = sig.cons[con]
            subs = [i for i, p in enumerate(info.params) if p.category is not None]
            if len(subs) > n - 1 or (not subs and n != 1):
                continue
            n_nats = len(info.params) - len(subs)
            for nats in itertools.product(NAT_VALUES, repeat=n_nats):
                env = dict(zip(info.nat_names, nats))
                sub_offs = []
                for i in subs:
                    p = info.params[i]
                    counts = binder_counts(p.binding, env)
                    sub_offs.append(tuple(o + counts[s] for s, o in zip(sig.sorts, offs)))
                for split in _compositions(n - 1, len(subs)):
                    choices = [gen(info.params[i].category, m, o) for i, m, o in zip(subs, split, sub_offs)]
                    for picked in itertools.product(*choices):
                        args: list = []
                        nat_it = iter(nats)
                        sub_it = iter(picked)
                        for p in info.params:
                            args.append(next(nat_it) if p.category is None else next(sub_it))
                        out.append(Node(cat, con, tuple(args)))
        memo[key] = out
        return out

    zero = tuple(0 for _ in sig.sorts)
    for n in range(1, max_size + 1):
        yield from gen(sort, n, zero)


LiftFn = Callable[[ValidGrammar, str, int, int, Term], Term]
SubstFn = Callable[[ValidGrammar, str, Term, int, Term], Term]
