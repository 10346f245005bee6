"""Exhaustive and randomized checking of the lifting/substitution algebra."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Iterator

from .analysis import plan_functions
from .core import ValidGrammar, binder_counts
from .terms import (
    NamedTerm,
    NNode,
    NSub,
    NVar,
    Node,
    Term,
    Var,
    eval_lift,
    eval_subst,
    enumerate_terms,
    free_names,
    named_subst,
    signature,
    translate_named,
)

LAWS = (
    "lift_zero",
    "lift_lift_add",
    "lift_lift_commute",
    "cross_sort_lift_commute",
    "subst_lift_cancel",
    "lift_subst_distrib",
    "structure_preservation",
    "named_differential",
)


@dataclass(frozen=True)
class Bounds:
    max_size: int = 5
    max_index: int = 3
    max_param: int = 3
    # size bound for substituted terms u; None means max_size
    u_size: int | None = None
    samples: int = 1000
    named_size: int = 6
    seed: int = 0


@dataclass
class Counterexample:
    law: str
    bindings: dict[str, Any]
    lhs: Any
    rhs: Any

    def __str__(self) -> str:
        inst = ", ".join(f"{k}={v!r}" for k, v in self.bindings.items())
        return f"{self.law} fails for {inst}: {self.lhs!r} != {self.rhs!r}"


@dataclass
class _Ctx:
    g: ValidGrammar
    bounds: Bounds
    lift: Any
    subst: Any
    cache: dict = field(default_factory=dict)

    def terms(self, cat: str, max_size: int | None = None) -> list[Term]:
        n = self.bounds.max_size if max_size is None else max_size
        key = (cat, n)
        if key not in self.cache:
            self.cache[key] = list(enumerate_terms(self.g, cat, n, self.bounds.max_index))
        return self.cache[key]

    def us(self, s: str) -> list[Term]:
        return self.terms(s, self.bounds.u_size)

    @property
    def params(self) -> range:
        return range(self.bounds.max_param + 1)

    def pairs(self) -> Iterator[tuple[str, str]]:
        return iter(plan_functions(self.g).lift_names)


def check_law(g: ValidGrammar, law: str, bounds: Bounds = Bounds(), lift=eval_lift, subst=eval_subst) -> Counterexample | None:
    """Check one law over all terms within ``bounds``; return the first failure.

    ``lift``/``subst`` default to the engine and can be swapped out to test
    the harness itself.
    """
    if law not in LAWS:
        raise ValueError(f"unknown law {law!r}; expected one of {', '.join(LAWS)}")
    ctx = _Ctx(g, bounds, lift, subst)
    return globals()[f"_law_{law}"](ctx)


def check_all(g: ValidGrammar, bounds: Bounds = Bounds()) -> list[Counterexample]:
    return [cx for law in LAWS if (cx := check_law(g, law, bounds)) is not None]


def _law_lift_zero(c: _Ctx):
    for s, p in c.pairs():
        for t in c.terms(p):
            for k in c.params:
                lhs = c.lift(c.g, s, 0, k, t)
                if lhs != t:
                    return Counterexample("lift_zero", dict(s=s, k=k, t=t), lhs, t)


def _law_lift_lift_add(c: _Ctx):
    for s, p in c.pairs():
        for t in c.terms(p):
            for n, m, k in itertools.product(c.params, repeat=3):
                lhs = c.lift(c.g, s, n, k, c.lift(c.g, s, m, k, t))
                rhs = c.lift(c.g, s, n + m, k, t)
                if lhs != rhs:
                    return Counterexample("lift_lift_add", dict(s=s, n=n, m=m, k=k, t=t), lhs, rhs)


def _law_lift_lift_commute(c: _Ctx):
    for s, p in c.pairs():
        for t in c.terms(p):
            for n, m, k, k2 in itertools.product(c.params, repeat=4):
                if k > k2:
                    continue
                lhs = c.lift(c.g, s, n, k, c.lift(c.g, s, m, k2, t))
                rhs = c.lift(c.g, s, m, k2 + n, c.lift(c.g, s, n, k, t))
                if lhs != rhs:
                    return Counterexample("lift_lift_commute", dict(s=s, n=n, m=m, k=k, k2=k2, t=t), lhs, rhs)


def _law_cross_sort_lift_commute(c: _Ctx):
    pairs = list(c.pairs())
    for s, p in pairs:
        for s2, p2 in pairs:
            if p2 != p or s2 == s:
                continue
            for t in c.terms(p):
                for n, m, k, k2 in itertools.product(c.params, repeat=4):
                    lhs = c.lift(c.g, s, n, k, c.lift(c.g, s2, m, k2, t))
                    rhs = c.lift(c.g, s2, m, k2, c.lift(c.g, s, n, k, t))
                    if lhs != rhs:
                        return Counterexample(
                            "cross_sort_lift_commute", dict(s=s, s2=s2, n=n, m=m, k=k, k2=k2, t=t), lhs, rhs
                        )


def _law_subst_lift_cancel(c: _Ctx):
    for s, p in c.pairs():
        for t in c.terms(p):
            for j in c.params:
                lifted = c.lift(c.g, s, 1, j, t)
                for u in c.us(s):
                    lhs = c.subst(c.g, s, u, j, lifted)
                    if lhs != t:
                        return Counterexample("subst_lift_cancel", dict(s=s, j=j, u=u, t=t), lhs, t)


def _law_lift_subst_distrib(c: _Ctx):
    nks = [(n, k) for n, k in itertools.product(c.params, repeat=2)]
    for s, p in c.pairs():
        us = c.us(s)
        lifted_u = {(n, k): [c.lift(c.g, s, n, k, u) for u in us] for n, k in nks}
        for t in c.terms(p):
            lifted_t = {(n, k): c.lift(c.g, s, n, k, t) for n, k in nks}
            for j in c.params:
                for ui, u in enumerate(us):
                    st = c.subst(c.g, s, u, j, t)
                    for n, k in nks:
                        if k > j:
                            continue
                        lhs = c.lift(c.g, s, n, k, st)
                        rhs = c.subst(c.g, s, lifted_u[n, k][ui], j + n, lifted_t[n, k])
                        if lhs != rhs:
                            return Counterexample(
                                "lift_subst_distrib", dict(s=s, n=n, k=k, j=j, u=u, t=t), lhs, rhs
                            )


def same_structure(before: Term, after: Term, var_may_change: bool) -> bool:
    """Every Node of ``before`` survives in ``after`` with its constructor and nat arguments."""
    if isinstance(before, Var):
        return var_may_change or (isinstance(after, Var) and after.sort == before.sort)
    if not isinstance(after, Node) or after.constructor != before.constructor:
        return False
    for a, b in zip(before.args, after.args):
        if isinstance(a, int):
            if a != b:
                return False
        elif not same_structure(a, b, var_may_change):
            return False
    return True


def _law_structure_preservation(c: _Ctx):
    for s, p in c.pairs():
        for t in c.terms(p):
            for n, k in itertools.product(c.params, repeat=2):
                r = c.lift(c.g, s, n, k, t)
                if not same_structure(t, r, var_may_change=False):
                    return Counterexample("structure_preservation", dict(op="lift", s=s, n=n, k=k, t=t), r, t)
            for j in c.params:
                for u in c.us(s):
                    r = c.subst(c.g, s, u, j, t)
                    if not same_structure(t, r, var_may_change=True):
                        return Counterexample("structure_preservation", dict(op="subst", s=s, j=j, u=u, t=t), r, t)


# ---------------------------------------------------------------------------
# Randomized named terms


def min_sizes(g: ValidGrammar) -> dict[str, float]:
    """Smallest term size per category, assuming every indexed sort has a name in scope."""
    sig = signature(g)
    best = {c: (1 if c in sig.sorts else float("inf")) for c in g.category_order}
    changed = True
    while changed:
        changed = False
        for cat in g.category_order:
            for con in sig.node_cons[cat]:
                info = sig.cons[con]
                n = 1 + sum(best[p.category] for p in info.params if p.category is not None)
                if n < best[cat]:
                    best[cat] = n
                    changed = True
    return best


class NamedTermGenerator:
    """Random named terms whose binders never repeat a name within one term.

    Binder names come from ``binder_pool``; when that pool is used up,
    numbered names are minted.  Every indexed sort must have at least one
    name in the initial scope so that a variable is always available.
    """

    def __init__(self, g: ValidGrammar, rng: random.Random, binder_pool: tuple[str, ...]):
        self.g = g
        self.sig = signature(g)
        self.rng = rng
        self.pool = binder_pool
        self.mins = min_sizes(g)

    def term(self, sort: str, budget: int, scope: tuple[tuple[str, str], ...]) -> NamedTerm:
        self.used: set[tuple[str, str]] = set()
        self.minted = 0
        return self._gen(sort, budget, scope)

    def _binder(self, sort: str) -> tuple[str, str]:
        free = [x for x in self.pool if (sort, x) not in self.used]
        if free:
            name = self.rng.choice(free)
        else:
            self.minted += 1
            name = f"z{self.minted}"
        self.used.add((sort, name))
        return (sort, name)

    def _gen(self, sort: str, budget: int, scope) -> NamedTerm:
        sig = self.sig
        options = []
        names = [x for s, x in scope if s == sort]
        if sort in sig.sorts and names:
            options.append(None)
        for con in sig.node_cons[sort]:
            info = sig.cons[con]
            need = 1 + sum(self.mins[p.category] for p in info.params if p.category is not None)
            if need <= budget:
                options.append(con)
        if not options:
            raise ValueError(f"no {sort} term fits in size {budget}")
        choice = self.rng.choice(options)
        if choice is None:
            return NVar(sort, self.rng.choice(names))
        info = sig.cons[choice]
        subs = [p for p in info.params if p.category is not None]
        extra = budget - 1 - sum(self.mins[p.category] for p in subs)
        nats = [self.rng.choice((0, 1, 2)) for p in info.params if p.category is None]
        env = dict(zip(info.nat_names, nats))
        args = []
        nat_it = iter(nats)
        for p in info.params:
            if p.category is None:
                args.append(next(nat_it))
                continue
            give = self.rng.randint(0, extra) if extra > 0 else 0
            extra -= give
            counts = binder_counts(p.binding, env)
            binders = []
            if p.binding is not None:
                for s2 in p.binding.sorts():
                    binders.extend(self._binder(s2) for _ in range(counts[s2]))
            sub = self._gen(p.category, int(self.mins[p.category]) + give, scope + tuple(binders))
            args.append(NSub(tuple(binders), sub))
        return NNode(sort, choice, tuple(args))


def differential_cases(g: ValidGrammar, samples: int, max_size: int, seed: int = 0):
    """Yield (s, ctx, x, d, u, t, full_ctx) instances for the named differential law.

    ``full_ctx`` is ``ctx`` with ``(s, x)`` inserted so that exactly ``d``
    sort-``s`` entries follow it.  Context names and binder names share a
    pool, so capture-avoiding renaming is exercised.
    """
    rng = random.Random(seed)
    plan = plan_functions(g)
    sig = signature(g)
    ctx_pool = ("a", "b", "c", "d")
    gen = NamedTermGenerator(g, rng, binder_pool=("a", "b", "c", "d", "e", "f", "x"))
    pairs = list(plan.subst_names)
    if not pairs:
        return
    produced = 0
    while produced < samples:
        s, p = rng.choice(pairs)
        outer = [(srt, nm) for srt in sig.sorts for nm in rng.sample(ctx_pool, 2)]
        rng.shuffle(outer)
        cut = rng.randint(0, len(outer))
        before, after = tuple(outer[:cut]), tuple(outer[cut:])
        # every sort keeps a name in scope on both sides of the insertion
        ctx = before + after
        full = before + ((s, "x"),) + after
        d = sum(1 for srt, _ in after if srt == s)
        u = gen.term(s, rng.randint(1, max_size), ctx)
        for _ in range(50):
            t = gen.term(p, rng.randint(1, max_size), full)
            if (s, "x") in free_names(t):
                break
        else:
            continue
        produced += 1
        yield s, ctx, "x", d, u, t, full


def _law_named_differential(c: _Ctx):
    b = c.bounds
    for s, ctx, x, d, u, t, full in differential_cases(c.g, b.samples, b.named_size, b.seed):
        lhs = translate_named(c.g, ctx, named_subst(c.g, (s, x), u, t))
        rhs = c.subst(c.g, s, translate_named(c.g, ctx, u), d, translate_named(c.g, full, t))
        if lhs != rhs:
            return Counterexample("named_differential", dict(s=s, ctx=ctx, d=d, u=u, t=t), lhs, rhs)
