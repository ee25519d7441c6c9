"""States, reducts, and legality of initial states and transitions.

The checking functions (``reduct``, ``least_state``, ``is_legal_*``) work
directly on literal sets and follow the definitions one step at a time; they
run in polynomial time and never enumerate candidate states.  The
enumerating functions (``legal_initial_states``, ``executable_action_sets``,
``successors``) are served by the compiled engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from ._engine import engine_for
from .datalog import AnswerSet
from .ground import GroundDomain
from .macros import expand_macros
from .syntax import (
    ACTION, FLUENT, CausationRule, ExecutabilityCondition, KProgram, Literal,
)

State = frozenset  # frozenset[Literal] of ground fluent literals


class Outcome(enum.Enum):
    INCONSISTENT = "inconsistent"
    CONSTRAINT_VIOLATION = "constraint violation"


@dataclass(frozen=True)
class Transition:
    source: frozenset[Literal]
    actions: frozenset[Literal]
    target: frozenset[Literal]


def state_key(state: Iterable[Literal]) -> tuple[str, ...]:
    return tuple(sorted(map(str, state)))


def format_state(state: Iterable[Literal]) -> str:
    return "{" + ", ".join(state_key(state)) + "}"


def is_consistent(state: Iterable[Literal]) -> bool:
    state = set(state)
    return not any(l.complement() in state for l in state if not l.negated)


def _holds(lit: Literal, s: frozenset, A: frozenset, M: AnswerSet) -> bool:
    if lit.kind == FLUENT:
        return lit in s
    if lit.kind == ACTION:
        return lit in A
    return lit in M


# -- reduct ---------------------------------------------------------------

def reduct_rules(rules: Iterable, s: Iterable[Literal], A: Iterable[Literal],
                 s2: Iterable[Literal], M: AnswerSet) -> list:
    """Delete rules blocked by ``t = <s, A, s2>`` and strip default literals."""
    s, A, s2 = frozenset(s), frozenset(A), frozenset(s2)
    out = []
    for r in rules:
        if any(_holds(l, s2, frozenset(), M) for l in r.post_neg):
            continue
        if any(_holds(l, s, A, M) for l in r.pre_neg):
            continue
        if isinstance(r, ExecutabilityCondition):
            out.append(ExecutabilityCondition(r.head, r.pre_pos, ()))
        else:
            out.append(CausationRule(r.head, r.post_pos, (), r.pre_pos, (), r.is_initial))
    return out


def reduct(gd: GroundDomain, t: Transition) -> GroundDomain:
    """The positive ground domain obtained by reducing ``gd`` w.r.t. ``t``."""
    args = (t.source, t.actions, t.target, gd.M)
    return GroundDomain(gd.program, gd.M, gd.instances, gd.constants,
                        tuple(reduct_rules(gd.rules, *args)),
                        tuple(reduct_rules(gd.execs, *args)),
                        tuple(reduct_rules(gd.initials, *args)),
                        gd.query, gd.no_concurrency)


# -- least states -----------------------------------------------------------

def least_state(rules: Iterable[CausationRule], s: Iterable[Literal] = (),
                A: Iterable[Literal] = (), M: AnswerSet | None = None):
    """Least set closed under positive ``rules`` in context ``s ∪ A ∪ M``.

    Returns the state, or an ``Outcome`` when a ``false``-headed rule fires
    or a complementary pair is derived.
    """
    M = M if M is not None else AnswerSet()
    s, A = frozenset(s), frozenset(A)
    active = [r for r in rules if all(_holds(l, s, A, M) for l in r.pre_pos)]
    derived: set[Literal] = set()
    changed = True
    while changed:
        changed = False
        for r in active:
            if all((l in derived) if l.kind == FLUENT else (l in M) for l in r.post_pos):
                if r.head is None:
                    return Outcome.CONSTRAINT_VIOLATION
                if r.head not in derived:
                    derived.add(r.head)
                    changed = True
    if not is_consistent(derived):
        return Outcome.INCONSISTENT
    return frozenset(derived)


def is_legal_initial_state(gd: GroundDomain, s0: Iterable[Literal]) -> bool:
    s0 = frozenset(s0)
    if not _is_state(gd, s0):
        return False
    rules = [r for r in gd.rules if r.is_static] + list(gd.initials)
    red = reduct_rules(rules, (), (), s0, gd.M)
    return least_state(red, (), (), gd.M) == s0


def is_executable(gd: GroundDomain, s: Iterable[Literal], A: Iterable[Literal]) -> bool:
    s, A = frozenset(s), frozenset(A)
    if not all(a.kind == ACTION and a in gd.instances.actions for a in A):
        return False
    execs = reduct_rules(gd.execs, s, A, (), gd.M)
    for a in A:
        if not any(e.head == a and all(_holds(l, s, A, gd.M) for l in e.pre_pos) for e in execs):
            return False
    return True


def is_legal_transition(gd: GroundDomain, s: Iterable[Literal], A: Iterable[Literal],
                        s2: Iterable[Literal]) -> bool:
    """Polynomial check of ``<s, A, s2>`` against the definitions (no enumeration)."""
    s, A, s2 = frozenset(s), frozenset(A), frozenset(s2)
    if not (_is_state(gd, s) and _is_state(gd, s2)):
        return False
    if not is_executable(gd, s, A):
        return False
    red = reduct_rules(gd.rules, s, A, s2, gd.M)
    return least_state(red, s, A, gd.M) == s2


def _is_state(gd: GroundDomain, s: frozenset) -> bool:
    return (all(l.kind == FLUENT and l.atom in gd.instances.fluents for l in s)
            and is_consistent(s))


# -- enumeration (engine backed) ----------------------------------------------

def legal_initial_states(gd: GroundDomain) -> list[frozenset[Literal]]:
    eng = engine_for(gd)
    return [eng.to_state(m) for m in eng.initial_states()]


def executable_action_sets(gd: GroundDomain, s: Iterable[Literal], bound: int | None = None,
                           cap: int | None = None) -> list[frozenset[Literal]]:
    """All executable action sets w.r.t. ``s`` with at most ``bound`` actions.

    ``bound`` defaults to 1 when the domain declares ``noConcurrency``.
    """
    eng = engine_for(gd)
    if bound is None and gd.no_concurrency:
        bound = 1
    kwargs = {} if cap is None else {"cap": cap}
    masks = eng.action_sets(eng.to_mask(s), bound, prune=False, **kwargs)
    return [eng.to_actions(m) for m in masks]


def successors(gd: GroundDomain, s: Iterable[Literal], A: Iterable[Literal]) -> list[frozenset[Literal]]:
    """All ``s'`` such that ``<s, A, s'>`` is legal (empty when stuck)."""
    eng = engine_for(gd)
    s_mask, a_mask = eng.to_mask(s), eng.act_mask(A)
    if not eng.executable(s_mask, a_mask):
        return []
    return [eng.to_state(m) for m in eng.successors(s_mask, a_mask)]


# -- probes -------------------------------------------------------------------

def probe_determined(gd: GroundDomain, s: Iterable[Literal], A: Iterable[Literal]) -> bool:
    return len(successors(gd, s, A)) <= 1


@dataclass(frozen=True)
class PlainReport:
    plain: bool
    reasons: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.plain


def plain_report(program: KProgram) -> PlainReport:
    """Check the syntactic conditions for a plain domain and say which fail."""
    from .ground import typed_ground

    core = expand_macros(program)
    reasons: list[str] = []
    if core.background.rules:
        reasons.append("background knowledge is not empty")
    for st in core.always:
        if isinstance(st, ExecutabilityCondition):
            if any(l.kind != FLUENT for l in (*st.pre_pos, *st.pre_neg)):
                reasons.append(f"executability condition refers to non-fluents: {st}")
        elif st.post_neg:
            reasons.append(f"default negation in a post part: {st}")
    if reasons:
        return PlainReport(False, tuple(reasons))
    gd = typed_ground(core)
    acts = gd.instances.sorted_actions()
    present = set()
    for r in gd.rules:
        if r.head is None and not r.post_pos and not r.post_neg:
            present.add((frozenset(r.pre_pos), frozenset(r.pre_neg)))
    for i, a in enumerate(acts):
        for b in acts[i + 1:]:
            if (frozenset([a, b]), frozenset()) not in present:
                reasons.append(f"missing constraint against executing {a} and {b} together")
    # with no actions at all the "some action" constraint is vacuous
    if acts and (frozenset(), frozenset(acts)) not in present:
        reasons.append("missing constraint requiring at least one action per step")
    return PlainReport(not reasons, tuple(reasons))


def probe_plain(program: KProgram) -> bool:
    return plain_report(program).plain
