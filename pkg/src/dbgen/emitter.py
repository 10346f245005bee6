"""Rendering of the generated proof-assistant module."""

from __future__ import annotations

from dataclasses import dataclass

from . import __version__
from .analysis import FunctionPlan
from .core import ValidGrammar
from .frontend import (
    BinOp,
    BindingSpec,
    Category,
    Constructor,
    CountExpr,
    IndexParam,
    NatParam,
    Ref,
    SubtermParam,
    render_expr,
    render_group,
)

SECTION_TITLES = (
    "Database and tactics definition",
    "De Bruijn structure definition",
    "Lifting and substitution function definitions",
    "Auxiliary structure and function definitions",
    "Basic functions properties w.r.t. index cases",
    "Index tactic definition",
    "Advanced functions properties and corresponding tactics",
    "Main tactic definition",
)

IMPORTS = ("Arith", "Lia", "List", "String")


@dataclass(frozen=True)
class EmittedFile:
    module_name: str
    sections: tuple[tuple[str, str], ...]
    header: str

    @property
    def rendered(self) -> str:
        parts = [self.header, "", f"Module {self.module_name}.", ""]
        for title, body in self.sections:
            parts.append(f"(** * {title} *)")
            parts.append("")
            parts.append(body.rstrip("\n"))
            parts.append("")
        parts.append(f"End {self.module_name}.")
        return "\n".join(parts) + "\n"


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


class _Names:
    """Argument names for generated functions, chosen to avoid every grammar identifier."""

    def __init__(self, g: ValidGrammar, plan: FunctionPlan):
        taken = set(g.category_order) | set(g.constructors)
        for con in g.constructors.values():
            taken.update(p.name for p in con.params)
        self.amount = _fresh("n", taken)
        self.amount2 = _fresh("m", taken)
        self.cutoff = _fresh("k", taken)
        self.cutoff2 = _fresh("k'", taken)
        self.value = _fresh("u", taken)
        self.target = _fresh("j", taken)
        # the scrutinee may be shadowed by pattern variables; it only has to avoid globals
        globals_ = set(g.category_order) | set(g.constructors)
        globals_ |= {self.amount, self.amount2, self.cutoff, self.cutoff2, self.value, self.target}
        self.term = _fresh("t", globals_)
        self.ctx = {s: _fresh(f"ctx_{s}", taken) for s in plan.sorts}
        self.binder_lists: dict[tuple[str, str, str], str] = {}
        for con in g.constructors.values():
            local = set(taken)
            for p in con.params:
                if isinstance(p.kind, SubtermParam) and p.kind.binding:
                    for s in p.kind.binding.sorts():
                        self.binder_lists[(con.name, p.name, s)] = _fresh(f"{p.name}_{s}", local)


def _sum_counts(binding: BindingSpec | None, sort: str) -> CountExpr | None:
    if binding is None:
        return None
    total: CountExpr | None = None
    for shift in binding.shifts:
        if shift.sort == sort:
            total = shift.count if total is None else BinOp("+", total, shift.count)
    return total


def _plus(count: CountExpr | None, var: str) -> str:
    """``count + var`` as an argument (parenthesized), or just ``var``."""
    if count is None:
        return var
    return f"({render_expr(BinOp('+', count, Ref(var)))})"


def _arg(count: CountExpr) -> str:
    text = render_expr(count)
    return f"({text})" if isinstance(count, BinOp) else text


def _pattern(con: Constructor) -> str:
    return " ".join([con.name, *(p.name for p in con.params)])


def lemma_names(plan: FunctionPlan) -> list[str]:
    """All lemma names the emitted module declares, in emission order."""
    return [name for _, name, _ in _basic_lemmas_index(plan)] + [name for name, _ in _advanced_index(plan)]


# ---------------------------------------------------------------------------
# Sections


def emit_db_inductives(g: ValidGrammar) -> str:
    return "\n\n".join(render_group(grp, annotate=False) for grp in g.grammar.groups) + "\n"


def emit_named_inductives(g: ValidGrammar, plan: FunctionPlan) -> str:
    names = _Names(g, plan)
    pre = plan.named
    blocks = []
    for grp in g.grammar.groups:
        lines = []
        for i, cat in enumerate(grp.categories):
            head = "Inductive" if i == 0 else "with"
            lines.append(f"{head} {pre(cat.name)} : Type :=")
            for con in cat.constructors:
                params = []
                for p in con.params:
                    match p.kind:
                        case IndexParam():
                            params.append(f"({p.name} : string)")
                        case NatParam():
                            params.append(f"({p.name} : nat)")
                        case SubtermParam(cat_name, binding):
                            if binding:
                                for s in binding.sorts():
                                    params.append(f"({names.binder_lists[(con.name, p.name, s)]} : list string)")
                            params.append(f"({p.name} : {pre(cat_name)})")
                lines.append(f"| {pre(con.name)}" + "".join(" " + x for x in params))
        lines[-1] += "."
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _fixpoint_block(scrutinee: str, parts: list[tuple[str, list[str]]]) -> str:
    """A (possibly mutual) Fixpoint; each part is a header and its match clauses."""
    out = []
    for i, (header, clauses) in enumerate(parts):
        out.append(("Fixpoint " if i == 0 else "with ") + header + " :=")
        out.append(f"  match {scrutinee} with")
        out.extend(clauses)
        out.append("  end")
    out[-1] += "."
    return "\n".join(out)


def _lift_clause(g: ValidGrammar, plan: FunctionPlan, nm: _Names, s: str, cat: Category, con: Constructor) -> str:
    n, k = nm.amount, nm.cutoff
    if g.index_constructor_of.get(cat.name) == con.name:
        x = con.params[0].name
        if cat.name == s:
            return f"  | {con.name} {x} => if le_gt_dec {k} {x} then {con.name} ({n} + {x}) else {con.name} {x}"
        return f"  | {con.name} {x} => {con.name} {x}"
    args = []
    for p in con.params:
        if isinstance(p.kind, SubtermParam) and (s, p.kind.category) in plan.lift_names:
            cutoff = _plus(_sum_counts(p.kind.binding, s), k)
            args.append(f"({plan.lift_names[(s, p.kind.category)]} {n} {cutoff} {p.name})")
        else:
            args.append(p.name)
    return f"  | {_pattern(con)} => " + " ".join([con.name, *args])


def _subst_clause(g: ValidGrammar, plan: FunctionPlan, nm: _Names, s: str, cat: Category, con: Constructor) -> str:
    u, j = nm.value, nm.target
    if g.index_constructor_of.get(cat.name) == con.name:
        x = con.params[0].name
        if cat.name == s:
            return "\n".join(
                [
                    f"  | {con.name} {x} =>",
                    f"      match lt_eq_lt_dec {x} {j} with",
                    f"      | inleft (left _) => {con.name} {x}",
                    f"      | inleft (right _) => {u}",
                    f"      | inright _ => {con.name} ({x} - 1)",
                    "      end",
                ]
            )
        return f"  | {con.name} {x} => {con.name} {x}"
    args = []
    for p in con.params:
        if isinstance(p.kind, SubtermParam) and (s, p.kind.category) in plan.subst_names:
            value = u
            for s2 in plan.sorts:
                count = _sum_counts(p.kind.binding, s2)
                if count is not None and s2 in plan.reaches[s]:
                    value = f"({plan.lift_names[(s2, s)]} {_arg(count)} 0 {value})"
            target = _plus(_sum_counts(p.kind.binding, s), j)
            args.append(f"({plan.subst_names[(s, p.kind.category)]} {value} {target} {p.name})")
        else:
            args.append(p.name)
    return f"  | {_pattern(con)} => " + " ".join([con.name, *args])


def emit_lift_subst(g: ValidGrammar, plan: FunctionPlan) -> str:
    if not plan.sorts:
        return "(* The grammar has no index constructor: no lifting or substitution functions. *)\n"
    nm = _Names(g, plan)
    blocks = []
    for kind in ("lift", "subst"):
        for grp in g.grammar.groups:
            for s in plan.sorts:
                members = [c for c in grp.categories if (s, c.name) in plan.lift_names]
                if not members:
                    continue
                parts = []
                for cat in members:
                    if kind == "lift":
                        name = plan.lift_names[(s, cat.name)]
                        header = f"{name} ({nm.amount} : nat) ({nm.cutoff} : nat) ({nm.term} : {cat.name}) {{struct {nm.term}}} : {cat.name}"
                        clauses = [_lift_clause(g, plan, nm, s, cat, con) for con in cat.constructors]
                    else:
                        name = plan.subst_names[(s, cat.name)]
                        header = f"{name} ({nm.value} : {s}) ({nm.target} : nat) ({nm.term} : {cat.name}) {{struct {nm.term}}} : {cat.name}"
                        clauses = [_subst_clause(g, plan, nm, s, cat, con) for con in cat.constructors]
                    parts.append((header, clauses))
                blocks.append(_fixpoint_block(nm.term, parts))
    return "\n\n".join(blocks) + "\n"


def _lookup_fn(plan: FunctionPlan) -> str:
    f = plan.lookup_name
    return "\n".join(
        [
            f"Fixpoint {f} (x : string) (l : list string) {{struct l}} : option nat :=",
            "  match l with",
            "  | nil => None",
            f"  | cons y l' => if string_dec x y then Some 0 else option_map S ({f} x l')",
            "  end.",
        ]
    )


def _dbify_clause(g: ValidGrammar, plan: FunctionPlan, nm: _Names, cat: Category, con: Constructor) -> str:
    pre = plan.named
    ctx_args = {s: nm.ctx[s] for s in plan.sorts}
    if g.index_constructor_of.get(cat.name) == con.name:
        x = con.params[0].name
        return f"  | {pre(con.name)} {x} => option_map {con.name} ({plan.lookup_name} {x} {ctx_args[cat.name]})"
    pattern_args = []
    checks = []
    calls = []
    for p in con.params:
        if isinstance(p.kind, SubtermParam):
            binding = p.kind.binding
            extended = dict(ctx_args)
            if binding:
                for s in binding.sorts():
                    lst = nm.binder_lists[(con.name, p.name, s)]
                    pattern_args.append(lst)
                    checks.append(f"Nat.eqb (length {lst}) {_arg(_sum_counts(binding, s))}")
                    extended[s] = f"(rev {lst} ++ {ctx_args[s]})"
            ctxs = " ".join(extended[s] for s in plan.reaches[p.kind.category])
            call = " ".join(x for x in (plan.translate_names[p.kind.category], ctxs, p.name) if x)
            calls.append((p.name, call))
        pattern_args.append(p.name)
    head = f"  | {' '.join([pre(con.name), *pattern_args])} =>"
    result = " ".join([con.name, *(p.name for p in con.params)])
    if not calls:
        return f"{head} Some ({result})" if con.params else f"{head} Some {result}"
    else:
        scrut = ", ".join(c for _, c in calls)
        some = ", ".join(f"Some {name}" for name, _ in calls)
        wild = ", ".join("_" for _ in calls)
        body = [
            f"      match {scrut} with",
            f"      | {some} => Some ({result})",
            f"      | {wild} => None",
            "      end",
        ]
    if checks:
        cond = checks[0]
        for c in checks[1:]:
            cond = f"andb ({cond}) ({c})"
        body = [f"      if {cond} then"] + ["  " + line for line in body] + ["      else None"]
    return "\n".join([head, *body])


def emit_translation(g: ValidGrammar, plan: FunctionPlan) -> str:
    nm = _Names(g, plan)
    pre = plan.named
    blocks = [_lookup_fn(plan)]
    for grp in g.grammar.groups:
        parts = []
        for cat in grp.categories:
            ctx_params = "".join(f" ({nm.ctx[s]} : list string)" for s in plan.reaches[cat.name])
            header = (
                f"{plan.translate_names[cat.name]}{ctx_params} ({nm.term} : {pre(cat.name)}) "
                f"{{struct {nm.term}}} : option {cat.name}"
            )
            parts.append((header, [_dbify_clause(g, plan, nm, cat, con) for con in cat.constructors]))
        blocks.append(_fixpoint_block(nm.term, parts))
    return "\n\n".join(blocks) + "\n"


def _hints(plan: FunctionPlan, name: str, rewrite: bool) -> list[str]:
    out = [f"#[export] Hint Resolve {name} : {plan.hintdb_name}."]
    if rewrite:
        out.append(f"#[export] Hint Rewrite {name} : {plan.hintdb_name}.")
    return out


def _basic_lemmas_index(plan: FunctionPlan) -> list[tuple[tuple[str, str], str, str]]:
    """(pair, lemma name, role) for every index-case lemma."""
    out = []
    for (s, p), lift in plan.lift_names.items():
        if p not in plan.sorts:
            continue
        subst = plan.subst_names[(s, p)]
        if p == s:
            out += [
                ((s, p), f"{lift}_var_ge", "lift_ge"),
                ((s, p), f"{lift}_var_lt", "lift_lt"),
                ((s, p), f"{subst}_var_lt", "subst_lt"),
                ((s, p), f"{subst}_var_eq", "subst_eq"),
                ((s, p), f"{subst}_var_gt", "subst_gt"),
            ]
        else:
            out += [((s, p), f"{lift}_var", "lift_other"), ((s, p), f"{subst}_var", "subst_other")]
    return out


def emit_basic_properties(g: ValidGrammar, plan: FunctionPlan) -> str:
    nm = _Names(g, plan)
    n, k, u, j = nm.amount, nm.cutoff, nm.value, nm.target
    x = "x"
    blocks = []
    for (s, p), name, role in _basic_lemmas_index(plan):
        lift, subst = plan.lift_names[(s, p)], plan.subst_names[(s, p)]
        var = g.index_constructor_of[p]
        if role == "lift_ge":
            stmt = f"forall {n} {k} {x}, {k} <= {x} -> {lift} {n} {k} ({var} {x}) = {var} ({n} + {x})"
            proof = f"intros; simpl; destruct (le_gt_dec {k} {x}); crush_tac."
        elif role == "lift_lt":
            stmt = f"forall {n} {k} {x}, {k} > {x} -> {lift} {n} {k} ({var} {x}) = {var} {x}"
            proof = f"intros; simpl; destruct (le_gt_dec {k} {x}); crush_tac."
        elif role == "subst_lt":
            stmt = f"forall {u} {j} {x}, {x} < {j} -> {subst} {u} {j} ({var} {x}) = {var} {x}"
            proof = f"intros; simpl; destruct (lt_eq_lt_dec {x} {j}) as [[? | ?] | ?]; crush_tac."
        elif role == "subst_eq":
            stmt = f"forall {u} {j}, {subst} {u} {j} ({var} {j}) = {u}"
            proof = f"intros; simpl; destruct (lt_eq_lt_dec {j} {j}) as [[? | ?] | ?]; crush_tac."
        elif role == "subst_gt":
            stmt = f"forall {u} {j} {x}, {j} < {x} -> {subst} {u} {j} ({var} {x}) = {var} ({x} - 1)"
            proof = f"intros; simpl; destruct (lt_eq_lt_dec {x} {j}) as [[? | ?] | ?]; crush_tac."
        elif role == "lift_other":
            stmt = f"forall {n} {k} {x}, {lift} {n} {k} ({var} {x}) = {var} {x}"
            proof = "reflexivity."
        else:
            stmt = f"forall {u} {j} {x}, {subst} {u} {j} ({var} {x}) = {var} {x}"
            proof = "reflexivity."
        unconditional = role in ("subst_eq", "lift_other", "subst_other")
        blocks.append(
            "\n".join([f"Lemma {name} : {stmt}.", f"Proof. {proof} Qed.", *_hints(plan, name, unconditional)])
        )
    if not blocks:
        return "(* No category has an index constructor: there are no index cases. *)\n"
    return "\n\n".join(blocks) + "\n"


def emit_index_tactic(plan: FunctionPlan) -> str:
    return "\n".join(
        [
            f"Ltac {plan.tactic_names['index']} :=",
            "  repeat match goal with",
            "  | |- context [le_gt_dec ?a ?b] => destruct (le_gt_dec a b)",
            "  | |- context [lt_eq_lt_dec ?a ?b] => destruct (lt_eq_lt_dec a b) as [[? | ?] | ?]",
            f"  end; {plan.tactic_names['crush']}.",
        ]
    ) + "\n"


def _advanced_index(plan: FunctionPlan) -> list[tuple[str, tuple]]:
    out = []
    for (s, p), lift in plan.lift_names.items():
        subst = plan.subst_names[(s, p)]
        out += [
            (f"{lift}_zero", ("lift_zero", s, p)),
            (f"{lift}_lift_add", ("lift_lift_add", s, p)),
            (f"{lift}_lift_commute", ("lift_lift_commute", s, p)),
        ]
        for s2 in plan.sorts:
            if plan.sorts.index(s2) > plan.sorts.index(s) and (s2, p) in plan.lift_names:
                out.append((f"{s}_{s2}_lift_in_{p}_commute", ("cross_sort_lift_commute", s, p, s2)))
        out += [
            (f"{subst}_lift_cancel", ("subst_lift_cancel", s, p)),
            (f"{lift}_subst_distrib", ("lift_subst_distrib", s, p)),
        ]
    return out


def emit_advanced_properties(g: ValidGrammar, plan: FunctionPlan) -> str:
    nm = _Names(g, plan)
    n, m, k, k2, u, j, t = nm.amount, nm.amount2, nm.cutoff, nm.cutoff2, nm.value, nm.target, nm.term
    blocks = []
    proof = f"Proof. induction {t}; intros; simpl; f_equal; {plan.tactic_names['index']}. Qed."
    for name, (law, s, p, *rest) in _advanced_index(plan):
        lift, subst = plan.lift_names[(s, p)], plan.subst_names[(s, p)]
        if law == "lift_zero":
            stmt = f"forall {t} {k}, {lift} 0 {k} {t} = {t}"
        elif law == "lift_lift_add":
            stmt = f"forall {t} {n} {m} {k}, {lift} {n} {k} ({lift} {m} {k} {t}) = {lift} ({n} + {m}) {k} {t}"
        elif law == "lift_lift_commute":
            stmt = (
                f"forall {t} {n} {m} {k} {k2}, {k} <= {k2} -> "
                f"{lift} {n} {k} ({lift} {m} {k2} {t}) = {lift} {m} ({k2} + {n}) ({lift} {n} {k} {t})"
            )
        elif law == "cross_sort_lift_commute":
            other = plan.lift_names[(rest[0], p)]
            stmt = (
                f"forall {t} {n} {m} {k} {k2}, "
                f"{lift} {n} {k} ({other} {m} {k2} {t}) = {other} {m} {k2} ({lift} {n} {k} {t})"
            )
        elif law == "subst_lift_cancel":
            stmt = f"forall {t} {u} {j}, {subst} {u} {j} ({lift} 1 {j} {t}) = {t}"
        else:
            lift_u = plan.lift_names[(s, s)]
            stmt = (
                f"forall {t} {u} {n} {k} {j}, {k} <= {j} -> "
                f"{lift} {n} {k} ({subst} {u} {j} {t}) = {subst} ({lift_u} {n} {k} {u}) ({j} + {n}) ({lift} {n} {k} {t})"
            )
        unconditional = law not in ("lift_lift_commute", "lift_subst_distrib")
        blocks.append("\n".join([f"Lemma {name} : {stmt}.", proof, *_hints(plan, name, unconditional)]))
    db = plan.hintdb_name
    blocks.append(
        "\n".join(
            [
                f"Ltac {plan.tactic_names['rewrite']} :=",
                f"  repeat (autorewrite with {db} in *; {plan.tactic_names['index']}).",
            ]
        )
    )
    if len(blocks) == 1:
        blocks.insert(0, "(* No lifting or substitution functions: no advanced properties. *)")
    return "\n\n".join(blocks) + "\n"


def emit_database_and_tactics(plan: FunctionPlan) -> str:
    db = plan.hintdb_name
    tn = plan.tactic_names
    return "\n".join(
        [
            f"Create HintDb {db}.",
            "",
            f"Ltac {tn['crush']} :=",
            f"  intros; simpl in *; try solve [ auto with {db} arith | lia ].",
            "",
            f"Ltac {tn['ecrush']} :=",
            f"  intros; simpl in *; try solve [ eauto with {db} arith | lia ].",
        ]
    ) + "\n"


def emit_main_tactic(plan: FunctionPlan) -> str:
    tn = plan.tactic_names
    return "\n".join(
        [
            f"Ltac {tn['main']} :=",
            f"  intros; simpl in *; try {tn['rewrite']}; try {tn['index']}; try {tn['ecrush']}.",
        ]
    ) + "\n"


def emit_properties_and_tactics(g: ValidGrammar, plan: FunctionPlan) -> dict[str, str]:
    """Bodies of the database, property and tactic sections, keyed by title."""
    return {
        SECTION_TITLES[0]: emit_database_and_tactics(plan),
        SECTION_TITLES[4]: emit_basic_properties(g, plan),
        SECTION_TITLES[5]: emit_index_tactic(plan),
        SECTION_TITLES[6]: emit_advanced_properties(g, plan),
        SECTION_TITLES[7]: emit_main_tactic(plan),
    }


def emit_module(g: ValidGrammar, plan: FunctionPlan, version: str = __version__) -> EmittedFile:
    bodies = emit_properties_and_tactics(g, plan)
    bodies[SECTION_TITLES[1]] = emit_db_inductives(g)
    bodies[SECTION_TITLES[2]] = emit_lift_subst(g, plan)
    bodies[SECTION_TITLES[3]] = emit_named_inductives(g, plan) + "\n" + emit_translation(g, plan)
    header = "\n".join(
        [
            f"(* Generated by dbgen {version} from module {g.module_name}. Do not edit. *)",
            "",
            *(f"Require Import {lib}." for lib in IMPORTS),
        ]
    )
    return EmittedFile(g.module_name, tuple((t, bodies[t]) for t in SECTION_TITLES), header)
