"""Abstract syntax of K programs and its canonical text rendering.

Every node is an immutable dataclass so programs can be hashed, compared and
shared between threads.  ``format_program`` renders a program back into
concrete syntax; parsing the rendered text yields an equal AST.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Union

FLUENT = "fluent"
ACTION = "action"
TYPE = "type"

EQ = "="  # built-in equality, tacitly a type predicate


def is_variable(term: str) -> bool:
    return term[:1].isupper() or term[:1] == "_"


@dataclass(frozen=True)
class Literal:
    """An atom ``pred(args)`` or its strong negation ``-pred(args)``."""

    pred: str
    args: tuple[str, ...] = ()
    negated: bool = False
    kind: str = TYPE

    def __str__(self) -> str:
        if self.pred == EQ:
            return f"{self.args[0]} = {self.args[1]}"
        sign = "-" if self.negated else ""
        if not self.args:
            return sign + self.pred
        return f"{sign}{self.pred}({','.join(self.args)})"

    @property
    def atom(self) -> "Literal":
        return replace(self, negated=False) if self.negated else self

    def complement(self) -> "Literal":
        return replace(self, negated=not self.negated)

    def variables(self) -> set[str]:
        return {a for a in self.args if is_variable(a)}

    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def substitute(self, theta: dict[str, str]) -> "Literal":
        if not self.args:
            return self
        return replace(self, args=tuple(theta.get(a, a) for a in self.args))


def literal_key(lit: Literal) -> str:
    return str(lit)


def canonical(lits: Iterable[Literal]) -> tuple[Literal, ...]:
    """Literals sorted by their text, the ordering used for all output."""
    return tuple(sorted(lits, key=str))


def _vars(lits: Iterable[Literal]) -> set[str]:
    out: set[str] = set()
    for lit in lits:
        out |= lit.variables()
    return out


@dataclass(frozen=True)
class Declaration:
    head: Literal
    requires: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class CausationRule:
    """``caused head if post after pre``; a ``None`` head stands for ``false``."""

    head: Literal | None
    post_pos: tuple[Literal, ...] = ()
    post_neg: tuple[Literal, ...] = ()
    pre_pos: tuple[Literal, ...] = ()
    pre_neg: tuple[Literal, ...] = ()
    is_initial: bool = False

    @property
    def h(self) -> frozenset:
        return frozenset([self.head]) if self.head is not None else frozenset(["false"])

    @property
    def post(self) -> frozenset[Literal]:
        return frozenset(self.post_pos) | frozenset(self.post_neg)

    @property
    def pre(self) -> frozenset[Literal]:
        return frozenset(self.pre_pos) | frozenset(self.pre_neg)

    @property
    def b_pos(self) -> frozenset[Literal]:
        return frozenset(self.post_pos) | frozenset(self.pre_pos)

    @property
    def b_neg(self) -> frozenset[Literal]:
        return frozenset(self.post_neg) | frozenset(self.pre_neg)

    @property
    def lit(self) -> frozenset[Literal]:
        heads = frozenset([self.head]) if self.head is not None else frozenset()
        return heads | self.post | self.pre

    @property
    def is_static(self) -> bool:
        return not self.pre_pos and not self.pre_neg

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def variables(self) -> set[str]:
        return _vars(self.lit)

    def substitute(self, theta: dict[str, str]) -> "CausationRule":
        sub = lambda lits: tuple(l.substitute(theta) for l in lits)  # noqa: E731
        return CausationRule(
            None if self.head is None else self.head.substitute(theta),
            sub(self.post_pos), sub(self.post_neg),
            sub(self.pre_pos), sub(self.pre_neg), self.is_initial)

    def __str__(self) -> str:
        head = "false" if self.head is None else str(self.head)
        text = "caused " + head
        if self.post_pos or self.post_neg:
            text += " if " + _body(self.post_pos, self.post_neg)
        if self.pre_pos or self.pre_neg:
            text += " after " + _body(self.pre_pos, self.pre_neg)
        return text + "."


@dataclass(frozen=True)
class ExecutabilityCondition:
    head: Literal
    pre_pos: tuple[Literal, ...] = ()
    pre_neg: tuple[Literal, ...] = ()

    # post parts are empty by construction
    post_pos: tuple[Literal, ...] = field(default=(), init=False, repr=False, compare=False)
    post_neg: tuple[Literal, ...] = field(default=(), init=False, repr=False, compare=False)

    @property
    def h(self) -> frozenset[Literal]:
        return frozenset([self.head])

    @property
    def pre(self) -> frozenset[Literal]:
        return frozenset(self.pre_pos) | frozenset(self.pre_neg)

    @property
    def post(self) -> frozenset[Literal]:
        return frozenset()

    @property
    def lit(self) -> frozenset[Literal]:
        return frozenset([self.head]) | self.pre

    def variables(self) -> set[str]:
        return _vars(self.lit)

    def substitute(self, theta: dict[str, str]) -> "ExecutabilityCondition":
        return ExecutabilityCondition(
            self.head.substitute(theta),
            tuple(l.substitute(theta) for l in self.pre_pos),
            tuple(l.substitute(theta) for l in self.pre_neg))

    def __str__(self) -> str:
        text = f"executable {self.head}"
        if self.pre_pos or self.pre_neg:
            text += " if " + _body(self.pre_pos, self.pre_neg)
        return text + "."


MACRO_KINDS = ("inertial", "default", "total", "forbidden", "nonexecutable")


@dataclass(frozen=True)
class Macro:
    """Surface statement that ``expand_macros`` rewrites into core rules.

    ``literal`` is the fluent (or, for ``nonexecutable``, the action) the
    macro is about; ``forbidden`` has none.  For ``nonexecutable a if B`` the
    body ``B`` is stored in the ``pre`` fields, since it refers to the state
    in which ``a`` would be executed.
    """

    kind: str
    literal: Literal | None
    post_pos: tuple[Literal, ...] = ()
    post_neg: tuple[Literal, ...] = ()
    pre_pos: tuple[Literal, ...] = ()
    pre_neg: tuple[Literal, ...] = ()
    is_initial: bool = False

    def variables(self) -> set[str]:
        lits = [self.literal] if self.literal is not None else []
        return _vars([*lits, *self.post_pos, *self.post_neg, *self.pre_pos, *self.pre_neg])

    def __str__(self) -> str:
        if self.kind == "nonexecutable":
            text = f"nonexecutable {self.literal}"
            if self.pre_pos or self.pre_neg:
                text += " if " + _body(self.pre_pos, self.pre_neg)
            return text + "."
        if self.kind == "forbidden":
            text = "forbidden"
            if self.post_pos or self.post_neg:
                text += " " + _body(self.post_pos, self.post_neg)
        else:
            text = f"{self.kind} {self.literal}"
            if self.post_pos or self.post_neg:
                text += " if " + _body(self.post_pos, self.post_neg)
        if self.pre_pos or self.pre_neg:
            text += " after " + _body(self.pre_pos, self.pre_neg)
        return text + "."


Statement = Union[CausationRule, ExecutabilityCondition, Macro]


@dataclass(frozen=True)
class Query:
    goal_pos: tuple[Literal, ...] = ()
    goal_neg: tuple[Literal, ...] = ()
    plan_length: int = 0

    def __str__(self) -> str:
        body = _body(self.goal_pos, self.goal_neg)
        return (body + " " if body else "") + f"? ({self.plan_length})"


@dataclass(frozen=True)
class DatalogRule:
    head: Literal
    pos: tuple[Literal, ...] = ()
    neg: tuple[Literal, ...] = ()

    def variables(self) -> set[str]:
        return _vars([self.head, *self.pos, *self.neg])

    def __str__(self) -> str:
        if not self.pos and not self.neg:
            return f"{self.head}."
        return f"{self.head} :- {_body(self.pos, self.neg)}."


@dataclass(frozen=True)
class DatalogProgram:
    rules: tuple[DatalogRule, ...] = ()

    def __add__(self, other: "DatalogProgram") -> "DatalogProgram":
        return DatalogProgram(self.rules + other.rules)

    def constants(self) -> set[str]:
        out: set[str] = set()
        for r in self.rules:
            for lit in (r.head, *r.pos, *r.neg):
                out.update(a for a in lit.args if not is_variable(a))
        return out


@dataclass(frozen=True)
class KProgram:
    background: DatalogProgram = DatalogProgram()
    fluent_decls: tuple[Declaration, ...] = ()
    action_decls: tuple[Declaration, ...] = ()
    always: tuple[Statement, ...] = ()
    initially: tuple[Statement, ...] = ()
    query: Query | None = None
    no_concurrency: bool = False
    secure_plan: bool = False

    @property
    def fluent_names(self) -> dict[str, int]:
        return {d.head.pred: len(d.head.args) for d in self.fluent_decls}

    @property
    def action_names(self) -> dict[str, int]:
        return {d.head.pred: len(d.head.args) for d in self.action_decls}

    def statements(self) -> tuple[Statement, ...]:
        return self.always + self.initially

    def constants(self) -> set[str]:
        out = self.background.constants()
        lits: list[Literal] = []
        for d in self.fluent_decls + self.action_decls:
            lits += [d.head, *d.requires]
        for st in self.statements():
            if isinstance(st, Macro):
                if st.literal is not None:
                    lits.append(st.literal)
                lits += [*st.post_pos, *st.post_neg, *st.pre_pos, *st.pre_neg]
            else:
                lits += list(st.lit)
        if self.query is not None:
            lits += [*self.query.goal_pos, *self.query.goal_neg]
        for lit in lits:
            out.update(a for a in lit.args if not is_variable(a))
        return out


def _body_item(lit: Literal, negative: bool) -> str:
    if negative and lit.pred == EQ:
        return f"{lit.args[0]} <> {lit.args[1]}"
    return ("not " if negative else "") + str(lit)


def _body(pos: Iterable[Literal], neg: Iterable[Literal]) -> str:
    items = [_body_item(l, False) for l in pos] + [_body_item(l, True) for l in neg]
    return ", ".join(items)


def format_declaration(decl: Declaration) -> str:
    if decl.requires:
        return f"{decl.head} requires {_body(decl.requires, ())}."
    return f"{decl.head}."


def format_program(program: KProgram) -> str:
    """Render ``program`` in concrete K syntax, one statement per line."""
    out: list[str] = []
    if program.background.rules:
        out.append("background:")
        out += [f"  {r}" for r in program.background.rules]
    if program.fluent_decls:
        out.append("fluents:")
        out += [f"  {format_declaration(d)}" for d in program.fluent_decls]
    if program.action_decls:
        out.append("actions:")
        out += [f"  {format_declaration(d)}" for d in program.action_decls]
    if program.always or program.no_concurrency or program.secure_plan:
        out.append("always:")
        out += [f"  {st}" for st in program.always]
        if program.no_concurrency:
            out.append("  noConcurrency.")
        if program.secure_plan:
            out.append("  securePlan.")
    if program.initially:
        out.append("initially:")
        for st in program.initially:
            out.append(f"  {_format_initial(st)}")
    if program.query is not None:
        out.append("goal:")
        out.append(f"  {program.query}.")
    return "\n".join(out) + "\n"


def _format_initial(st: Statement) -> str:
    # Initial facts print without the optional "caused" keyword.
    if isinstance(st, CausationRule) and st.head is not None and st.is_static:
        text = str(st)
        return text[len("caused "):] if not (st.post_pos or st.post_neg) else text
    return str(st)
