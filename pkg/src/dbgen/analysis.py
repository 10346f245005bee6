"""Grammar graph, reachability, and the table of generated names."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import ValidGrammar
from .frontend import SubtermParam

NAMED_PREFIX = "_"

TACTIC_NAMES = {
    "crush": "crush_tac",
    "ecrush": "ecrush_tac",
    "index": "index_tac",
    "rewrite": "rewrite_tac",
    "main": "dbgen_tac",
}


@dataclass(frozen=True)
class GrammarGraph:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def successors(self, node: str) -> list[str]:
        return [q for q in self.nodes if (node, q) in self.edges]


def build_graph(g: ValidGrammar) -> GrammarGraph:
    """Edge p -> q whenever some constructor of p has a subterm of category q."""
    edges = set()
    for cat in g.grammar.categories:
        for con in cat.constructors:
            for p in con.params:
                if isinstance(p.kind, SubtermParam):
                    edges.add((cat.name, p.kind.category))
    return GrammarGraph(g.category_order, frozenset(edges))


def indexed_sorts(g: ValidGrammar) -> list[str]:
    return [c for c in g.category_order if g.is_indexed(c)]


def reachable_from(graph: GrammarGraph, s: str) -> set[str]:
    """Categories from which ``s`` is reachable (zero or more edges)."""
    preds: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for p, q in graph.edges:
        preds[q].append(p)
    seen = {s}
    todo = deque([s])
    while todo:
        q = todo.popleft()
        for p in preds[q]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


@dataclass(frozen=True)
class FunctionPlan:
    module_name: str
    sorts: tuple[str, ...]
    # insertion order: indexed sort (source order), then category (source order)
    lift_names: dict[tuple[str, str], str]
    subst_names: dict[tuple[str, str], str]
    translate_names: dict[str, str]
    # category -> indexed sorts it reaches, in source order
    reaches: dict[str, tuple[str, ...]]
    mutual_groups: tuple[tuple[str, ...], ...]
    hintdb_name: str
    named_prefix: str = NAMED_PREFIX
    tactic_names: dict[str, str] = field(default_factory=lambda: dict(TACTIC_NAMES))
    lookup_name: str = "lookup_index"

    def named(self, name: str) -> str:
        return self.named_prefix + name

    def lift_signature(self, s: str, p: str) -> str:
        return f"nat -> nat -> {p} -> {p}"

    def subst_signature(self, s: str, p: str) -> str:
        return f"{s} -> nat -> {p} -> {p}"


def plan_functions(g: ValidGrammar) -> FunctionPlan:
    graph = build_graph(g)
    sorts = indexed_sorts(g)
    lift, subst = {}, {}
    reach_sets = {s: reachable_from(graph, s) for s in sorts}
    for s in sorts:
        for p in g.category_order:
            if p in reach_sets[s]:
                lift[(s, p)] = f"{s}_lift_in_{p}"
                subst[(s, p)] = f"{s}_subst_in_{p}"
    reaches = {p: tuple(s for s in sorts if p in reach_sets[s]) for p in g.category_order}
    return FunctionPlan(
        module_name=g.module_name,
        sorts=tuple(sorts),
        lift_names=lift,
        subst_names=subst,
        translate_names={p: f"dbify_{p}" for p in g.category_order},
        reaches=reaches,
        mutual_groups=tuple(tuple(c.name for c in grp.categories) for grp in g.grammar.groups),
        hintdb_name=f"{g.module_name}_database",
    )


def format_debug(g: ValidGrammar, plan: FunctionPlan) -> str:
    """Stable text dump of the analysis, for ``-debug``."""
    graph = build_graph(g)
    out = ["graph:"]
    for p in graph.nodes:
        out.append(f"  {p} -> {' '.join(graph.successors(p)) or '(none)'}")
    out.append(f"indexed sorts: {' '.join(plan.sorts) or '(none)'}")
    for s in plan.sorts:
        reach = [p for p in graph.nodes if p in reachable_from(graph, s)]
        out.append(f"  reaching {s}: {' '.join(reach)}")
    out.append("lift functions:")
    for (s, p), name in plan.lift_names.items():
        out.append(f"  {name} : {plan.lift_signature(s, p)}")
    out.append("subst functions:")
    for (s, p), name in plan.subst_names.items():
        out.append(f"  {name} : {plan.subst_signature(s, p)}")
    out.append("translations:")
    for p, name in plan.translate_names.items():
        out.append(f"  {name}")
    out.append(f"hint database: {plan.hintdb_name}")
    out.append("tactics: " + " ".join(plan.tactic_names.values()))
    return "\n".join(out) + "\n"
