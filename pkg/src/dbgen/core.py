"""Grammar validation and binder-count arithmetic."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .frontend import (
    BinOp,
    BindingSpec,
    Category,
    Constructor,
    CountExpr,
    IndexParam,
    Lit,
    NatParam,
    Param,
    Position,
    Ref,
    SourceGrammar,
    SubtermParam,
)


class ErrorCode(str, enum.Enum):
    EXTRA_ARGS_ON_INDEX_CONSTRUCTOR = "ExtraArgsOnIndexConstructor"
    MULTIPLE_INDEX_CONSTRUCTORS = "MultipleIndexConstructors"
    UNKNOWN_CATEGORY_IN_BIND = "UnknownCategoryInBind"
    UNKNOWN_CATEGORY_IN_PARAM = "UnknownCategoryInParam"
    UNBOUND_EXPR_IDENTIFIER = "UnboundExprIdentifier"
    DUPLICATE_NAME = "DuplicateName"


@dataclass(frozen=True)
class ValidationError:
    code: ErrorCode
    location: tuple[str, ...]
    message: str
    position: Position = (0, 0)

    def __str__(self) -> str:
        line, col = self.position
        return f"{line}:{col}: {self.code.value}: {self.message} (at {'/'.join(self.location)})"


class GrammarError(Exception):
    """Raised by :func:`validate_grammar` with every violation found."""

    def __init__(self, errors: list[ValidationError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


class EvalError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ValidGrammar:
    grammar: SourceGrammar
    index_constructor_of: Mapping[str, str]
    # constructor name -> for each param position, the NatParam names declared before it
    nat_param_env_of: Mapping[str, tuple[tuple[str, ...], ...]]

    @property
    def module_name(self) -> str:
        return self.grammar.module_name

    @cached_property
    def categories(self) -> dict[str, Category]:
        return {c.name: c for c in self.grammar.categories}

    @cached_property
    def constructors(self) -> dict[str, Constructor]:
        return {k.name: k for c in self.grammar.categories for k in c.constructors}

    @cached_property
    def sort_of_constructor(self) -> dict[str, str]:
        return {k.name: c.name for c in self.grammar.categories for k in c.constructors}

    @cached_property
    def group_of(self) -> dict[str, int]:
        return {c.name: i for i, grp in enumerate(self.grammar.groups) for c in grp.categories}

    @cached_property
    def category_order(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.grammar.categories)

    def is_indexed(self, category: str) -> bool:
        return category in self.index_constructor_of

    def index_param_name(self, category: str) -> str:
        return self.constructors[self.index_constructor_of[category]].params[0].name


def eval_expr(e: CountExpr, env: Mapping[str, int]) -> int:
    """Evaluate a count expression over the naturals (subtraction truncates at 0)."""
    match e:
        case Lit(value):
            return value
        case Ref(name):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound identifier {name!r}") from None
        case BinOp("+", a, b):
            return eval_expr(a, env) + eval_expr(b, env)
        case BinOp("-", a, b):
            return max(0, eval_expr(a, env) - eval_expr(b, env))
        case BinOp("*", a, b):
            return eval_expr(a, env) * eval_expr(b, env)
    raise TypeError(f"not a count expression: {e!r}")


def binder_counts(b: BindingSpec | None, env: Mapping[str, int]) -> Counter[str]:
    """Number of variables bound per sort; a sort listed twice gets the sum.

    Sorts that are not bound read as 0 (the result is a ``Counter``).
    """
    counts: Counter[str] = Counter()
    if b is None:
        return counts
    for shift in b.shifts:
        counts[shift.sort] += eval_expr(shift.count, env)
    return counts


def expr_identifiers(e: CountExpr) -> list[Ref]:
    match e:
        case Lit():
            return []
        case Ref():
            return [e]
        case BinOp(_, a, b):
            return expr_identifiers(a) + expr_identifiers(b)
    raise TypeError(e)


def validate_grammar(g: SourceGrammar) -> ValidGrammar:
    """Check the restrictions on index constructors and binders.

    Raises :class:`GrammarError` carrying all violations, sorted by source
    position.
    """
    errors: list[ValidationError] = []
    cats = g.categories
    cat_names = {c.name for c in cats}

    def err(code: ErrorCode, loc: tuple[str, ...], msg: str, pos: Position) -> None:
        errors.append(ValidationError(code, loc, msg, pos))

    seen_top: dict[str, str] = {}
    for cat in cats:
        if cat.name in seen_top:
            err(ErrorCode.DUPLICATE_NAME, (cat.name,), f"{cat.name!r} already names a {seen_top[cat.name]}", cat.position)
        else:
            seen_top[cat.name] = "category"
    for cat in cats:
        for con in cat.constructors:
            if con.name in seen_top:
                err(
                    ErrorCode.DUPLICATE_NAME,
                    (cat.name, con.name),
                    f"{con.name!r} already names a {seen_top[con.name]}",
                    con.position,
                )
            else:
                seen_top[con.name] = "constructor"

    index_constructor_of: dict[str, str] = {}
    nat_env: dict[str, tuple[tuple[str, ...], ...]] = {}
    for cat in cats:
        index_cons = [c for c in cat.constructors if any(isinstance(p.kind, IndexParam) for p in c.params)]
        if len(index_cons) > 1:
            names = ", ".join(c.name for c in index_cons)
            err(
                ErrorCode.MULTIPLE_INDEX_CONSTRUCTORS,
                (cat.name, index_cons[1].name),
                f"category {cat.name!r} has several index constructors: {names}",
                index_cons[1].position,
            )
        elif index_cons:
            index_constructor_of[cat.name] = index_cons[0].name
        for con in index_cons:
            if len(con.params) != 1:
                err(
                    ErrorCode.EXTRA_ARGS_ON_INDEX_CONSTRUCTOR,
                    (cat.name, con.name),
                    f"index constructor {con.name!r} must have exactly one parameter",
                    con.position,
                )

    for cat in cats:
        for con in cat.constructors:
            nat_env[con.name] = _check_params(cat, con, cat_names, errors)

    # Binders may only bind sorts that own an index constructor.
    for cat in cats:
        for con in cat.constructors:
            for p in con.params:
                if not (isinstance(p.kind, SubtermParam) and p.kind.binding):
                    continue
                for shift in p.kind.binding.shifts:
                    if shift.sort not in cat_names:
                        msg = f"binder names unknown category {shift.sort!r}"
                    elif shift.sort not in index_constructor_of:
                        msg = f"binder names category {shift.sort!r}, which has no index constructor"
                    else:
                        continue
                    err(ErrorCode.UNKNOWN_CATEGORY_IN_BIND, (cat.name, con.name, p.name), msg, shift.position)

    if errors:
        errors.sort(key=lambda e: e.position)
        raise GrammarError(errors)
    return ValidGrammar(g, index_constructor_of, nat_env)


def _check_params(
    cat: Category, con: Constructor, cat_names: set[str], errors: list[ValidationError]
) -> tuple[tuple[str, ...], ...]:
    seen: set[str] = set()
    nats: list[str] = []
    envs = []
    for p in con.params:
        loc = (cat.name, con.name, p.name)
        envs.append(tuple(nats))
        if p.name in seen:
            errors.append(
                ValidationError(ErrorCode.DUPLICATE_NAME, loc, f"parameter {p.name!r} repeated in {con.name!r}", p.position)
            )
        seen.add(p.name)
        if isinstance(p.kind, SubtermParam):
            if p.kind.category not in cat_names:
                errors.append(
                    ValidationError(
                        ErrorCode.UNKNOWN_CATEGORY_IN_PARAM,
                        loc,
                        f"parameter type {p.kind.category!r} is neither nat nor a category",
                        p.position,
                    )
                )
            if p.kind.binding:
                for shift in p.kind.binding.shifts:
                    for ref in expr_identifiers(shift.count):
                        if ref.name not in nats:
                            errors.append(
                                ValidationError(
                                    ErrorCode.UNBOUND_EXPR_IDENTIFIER,
                                    loc,
                                    f"{ref.name!r} is not a nat parameter declared earlier in {con.name!r}",
                                    shift.position,
                                )
                            )
        if isinstance(p.kind, NatParam):
            nats.append(p.name)
    return tuple(envs)


def param_env(con: Constructor, values: list[int] | tuple[int, ...]) -> dict[str, int]:
    """Map a constructor's NatParam names to the given natural arguments, in order."""
    names = [p.name for p in con.params if isinstance(p.kind, NatParam)]
    return dict(zip(names, values))


def nat_params(con: Constructor) -> list[Param]:
    return [p for p in con.params if isinstance(p.kind, NatParam)]
