"""Typed instantiation of K programs.

A ground instance of a statement is kept exactly when each of its fluent and
action literals refers to a legal instance (strongly negated fluents are
allowed when the positive atom is legal).  Type literals are not filtered
here; they are evaluated against the background answer set later.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .datalog import AnswerSet, evaluate, pred_key
from .errors import KValidationError
from .macros import expand_macros
from .safety import check_safety
from .syntax import (
    ACTION, EQ, FLUENT, CausationRule, Declaration, ExecutabilityCondition,
    KProgram, Literal, Query, is_variable,
)


@dataclass(frozen=True)
class LegalInstances:
    fluents: frozenset[Literal]
    actions: frozenset[Literal]

    def __contains__(self, lit: Literal) -> bool:
        atom = lit.atom
        return atom in (self.fluents if lit.kind == FLUENT else self.actions)

    def sorted_fluents(self) -> list[Literal]:
        return sorted(self.fluents, key=str)

    def sorted_actions(self) -> list[Literal]:
        return sorted(self.actions, key=str)


def _join(lits: list[Literal], relation, theta: dict[str, str]) -> Iterator[dict[str, str]]:
    """Join ``lits`` against ``relation(lit) -> iterable of arg tuples``."""
    if not lits:
        yield theta
        return
    # most-bound literal first keeps the join small
    best = min(range(len(lits)), key=lambda i: sum(1 for a in lits[i].args
                                                   if is_variable(a) and a not in theta))
    lit, rest = lits[best], lits[:best] + lits[best + 1:]
    for args in relation(lit, theta):
        t = theta
        ok = True
        for term, value in zip(lit.args, args):
            if is_variable(term):
                bound = t.get(term)
                if bound is None:
                    if t is theta:
                        t = dict(theta)
                    t[term] = value
                elif bound != value:
                    ok = False
                    break
            elif term != value:
                ok = False
                break
        if ok:
            yield from _join(rest, relation, t)


def legal_instances(fluent_decls: Iterable[Declaration], action_decls: Iterable[Declaration],
                    M: AnswerSet, constants: Iterable[str] = ()) -> LegalInstances:
    """All ground atoms whose declaration's requirements hold in ``M``."""
    consts = sorted(set(constants) | M.constants())

    def relation(lit: Literal, theta):
        if lit.pred == EQ:
            a, b = (theta.get(x, x) for x in lit.args)
            if not is_variable(a):
                return [(a, a)] if is_variable(b) or a == b else []
            if not is_variable(b):
                return [(b, b)]
            return [(c, c) for c in consts]
        return M.tuples(pred_key(lit))

    def instances(decls: Iterable[Declaration], kind: str) -> frozenset[Literal]:
        out = set()
        for d in decls:
            free = sorted(d.head.variables() - set().union(*(r.variables() for r in d.requires)))
            for theta in _join(list(d.requires), relation, {}):
                for extra in itertools.product(consts, repeat=len(free)):
                    t = dict(theta, **dict(zip(free, extra)))
                    out.add(Literal(d.head.pred, d.head.substitute(t).args, False, kind))
        return frozenset(out)

    return LegalInstances(instances(fluent_decls, FLUENT), instances(action_decls, ACTION))


@dataclass(frozen=True)
class GroundDomain:
    """Typed instantiation of a planning domain together with its context."""

    program: KProgram  # core program the domain was grounded from
    M: AnswerSet
    instances: LegalInstances
    constants: tuple[str, ...]
    rules: tuple[CausationRule, ...]          # always-section causation rules
    execs: tuple[ExecutabilityCondition, ...]
    initials: tuple[CausationRule, ...]       # initially-section constraints
    query: Query | None = None
    no_concurrency: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def static_rules(self) -> tuple[CausationRule, ...]:
        return tuple(r for r in self.rules if r.is_static)

    @property
    def dynamic_rules(self) -> tuple[CausationRule, ...]:
        return tuple(r for r in self.rules if not r.is_static)

    def with_query(self, query: Query | None) -> "GroundDomain":
        gd = GroundDomain(self.program, self.M, self.instances, self.constants, self.rules,
                          self.execs, self.initials, query, self.no_concurrency)
        gd._cache.update(self._cache)  # compiled engine does not depend on the query
        return gd


def _statement_lits(st) -> list[Literal]:
    if isinstance(st, ExecutabilityCondition):
        return [st.head, *st.pre_pos, *st.pre_neg]
    heads = [st.head] if st.head is not None else []
    return [*heads, *st.post_pos, *st.post_neg, *st.pre_pos, *st.pre_neg]


def _ground_statement(st, inst: LegalInstances, consts: list[str], naive: bool) -> list:
    variables = sorted(st.variables())
    if not variables:
        return [st] if all(l in inst for l in _statement_lits(st) if l.kind != "type") else []
    dyn = [l for l in _statement_lits(st) if l.kind in (FLUENT, ACTION)]
    out = []
    if naive:
        for values in itertools.product(consts, repeat=len(variables)):
            g = st.substitute(dict(zip(variables, values)))
            if all(l in inst for l in _statement_lits(g) if l.kind != "type"):
                out.append(g)
        return out

    by_pred: dict[tuple[str, str], list[tuple[str, ...]]] = {}
    for a in inst.fluents:
        by_pred.setdefault((FLUENT, a.pred), []).append(a.args)
    for a in inst.actions:
        by_pred.setdefault((ACTION, a.pred), []).append(a.args)

    def relation(lit: Literal, theta):
        return by_pred.get((lit.kind, lit.pred), ())

    dyn_vars = set().union(*(l.variables() for l in dyn)) if dyn else set()
    free = [v for v in variables if v not in dyn_vars]
    for theta in _join(dyn, relation, {}):
        for values in itertools.product(consts, repeat=len(free)):
            out.append(st.substitute(dict(theta, **dict(zip(free, values)))))
    return out


def _dedupe_sorted(items: Iterable) -> tuple:
    seen = {}
    for it in items:
        seen.setdefault(it, None)
    return tuple(sorted(seen, key=str))


def typed_ground(program: KProgram, M: AnswerSet | None = None, naive: bool = False) -> GroundDomain:
    """Ground ``program`` over all constants, keeping only well-typed instances.

    Macros are expanded first; ``noConcurrency`` becomes one constraint per
    unordered pair of distinct legal actions.  ``naive=True`` enumerates every
    substitution and filters, and serves as a reference for the join-based
    default.
    """
    program = expand_macros(program)
    unsafe = check_safety(program)
    if unsafe:
        raise KValidationError(str(unsafe[0]))
    if M is None:
        M = evaluate(program.background)
    consts = sorted(program.constants() | M.constants())
    inst = legal_instances(program.fluent_decls, program.action_decls, M, consts)

    rules, execs, initials = [], [], []
    for st in program.always:
        target = execs if isinstance(st, ExecutabilityCondition) else rules
        target.extend(_ground_statement(st, inst, consts, naive))
    for st in program.initially:
        initials.extend(_ground_statement(st, inst, consts, naive))
    if program.no_concurrency:
        acts = inst.sorted_actions()
        for i, a1 in enumerate(acts):
            for a2 in acts[i + 1:]:
                rules.append(CausationRule(None, pre_pos=(a1, a2)))
    return GroundDomain(program, M, inst, tuple(consts), _dedupe_sorted(rules),
                        _dedupe_sorted(execs), _dedupe_sorted(initials),
                        program.query, program.no_concurrency)


def ground_program(gd: GroundDomain) -> KProgram:
    """The ground domain as a (variable-free) program, suitable for re-grounding."""
    from dataclasses import replace
    return replace(gd.program, always=gd.rules + gd.execs, initially=gd.initials,
                   no_concurrency=False, query=gd.query)


def dump_ground(gd: GroundDomain) -> str:
    """Textual listing of the ground domain in K syntax."""
    lines = ["% legal fluent instances: " + ", ".join(map(str, gd.instances.sorted_fluents())),
             "% legal action instances: " + ", ".join(map(str, gd.instances.sorted_actions())),
             "always:"]
    lines += [f"  {r}" for r in gd.rules]
    lines += [f"  {e}" for e in gd.execs]
    lines.append("initially:")
    lines += [f"  {r}" for r in gd.initials]
    if gd.query is not None:
        lines.append("goal:")
        lines.append(f"  {gd.query}.")
    return "\n".join(lines) + "\n"
