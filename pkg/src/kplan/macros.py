"""Rewriting of surface macros into core causation rules.

``noConcurrency`` is not rewritten here: its expansion needs the set of
legal ground actions and therefore happens during grounding.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import KValidationError
from .syntax import CausationRule, KProgram, Macro, Statement


def expand_statement(st: Statement) -> list[Statement]:
    if not isinstance(st, Macro):
        return [st]
    lit = st.literal
    if st.kind == "inertial":
        if st.is_initial:
            raise KValidationError(f"'{st}' refers to a previous state and cannot be initial")
        return [CausationRule(lit, st.post_pos, (lit.complement(),) + st.post_neg,
                              (lit,) + st.pre_pos, st.pre_neg, st.is_initial)]
    if st.kind == "default":
        return [CausationRule(lit, st.post_pos, (lit.complement(),) + st.post_neg,
                              st.pre_pos, st.pre_neg, st.is_initial)]
    if st.kind == "total":
        if lit.negated:
            raise KValidationError(f"total requires a positive fluent, got '{st}'")
        neg = lit.complement()
        return [
            CausationRule(lit, st.post_pos, (neg,) + st.post_neg, st.pre_pos, st.pre_neg, st.is_initial),
            CausationRule(neg, st.post_pos, (lit,) + st.post_neg, st.pre_pos, st.pre_neg, st.is_initial),
        ]
    if st.kind == "forbidden":
        return [CausationRule(None, st.post_pos, st.post_neg, st.pre_pos, st.pre_neg, st.is_initial)]
    if st.kind == "nonexecutable":
        return [CausationRule(None, (), (), (lit,) + st.pre_pos, st.pre_neg, st.is_initial)]
    raise KValidationError(f"unknown macro {st.kind!r}")


def expand_macros(program: KProgram) -> KProgram:
    """Replace every macro by its core rules; programs without macros are returned unchanged."""
    if not any(isinstance(st, Macro) for st in program.statements()):
        return program
    always = tuple(r for st in program.always for r in expand_statement(st))
    initially = tuple(r for st in program.initially for r in expand_statement(st))
    return replace(program, always=always, initially=initially)


def has_macros(program: KProgram) -> bool:
    return any(isinstance(st, Macro) for st in program.statements())
