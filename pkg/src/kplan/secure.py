"""Security (conformance) of plans: checking and generation.

A plan is secure when some legal initial state exists and, from every legal
initial state, every trajectory it induces can always be continued and ends
in a goal state.  The checker propagates explicit state sets step by step;
generation performs the same propagation while choosing the action sets
(a depth-first search over belief states), so every emitted plan is secure
by construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

from .errors import KValidationError, ResourceLimitError
from .ground import GroundDomain
from .plan import CONCURRENT, SEQUENTIAL, Plan, Trajectory, _Search, optimistic_plans
from .syntax import Literal, Query
from .transition import Transition, format_state


class FailureKind(enum.Enum):
    STUCK = "STUCK"
    GOAL_MISSED = "GOAL_MISSED"
    NO_INITIAL_STATE = "NO_INITIAL_STATE"


@dataclass(frozen=True)
class Counterexample:
    kind: FailureKind
    initial: frozenset[Literal] | None = None
    trajectory: Trajectory | None = None
    step: int = 0  # 1-based step that cannot be executed, or the plan length

    def to_dict(self) -> dict:
        traj = self.trajectory
        return {
            "kind": self.kind.value,
            "step": self.step,
            "initial": None if self.initial is None else sorted(map(str, self.initial)),
            "states": None if traj is None else [sorted(map(str, s)) for s in traj.states],
        }

    def __str__(self) -> str:
        if self.kind is FailureKind.NO_INITIAL_STATE:
            return "no legal initial state exists"
        where = (f"step {self.step} cannot be executed" if self.kind is FailureKind.STUCK
                 else "goal not reached")
        return f"{self.kind.value}: {where}; from initial state {format_state(self.initial)}: {self.trajectory}"


@dataclass(frozen=True)
class SecurityVerdict:
    secure: bool
    counterexample: Counterexample | None = None

    def __bool__(self) -> bool:
        return self.secure


def check_secure(gd: GroundDomain, plan: Plan, query: Query | None = None,
                 max_states: int = 10**6) -> SecurityVerdict:
    """Decide whether ``plan`` is secure, with a counterexample if not."""
    query = query if query is not None else gd.query
    if query is None:
        raise KValidationError("no query given")
    if plan.length != query.plan_length:
        raise KValidationError(f"plan has {plan.length} steps but the query asks for {query.plan_length}")
    S = _Search(gd, query, CONCURRENT, max_states, None)
    eng = S.eng
    masks = [eng.act_mask(A) for A in plan.steps]

    initial = eng.initial_states()
    if not initial:
        return SecurityVerdict(False, Counterexample(FailureKind.NO_INITIAL_STATE))
    parents: list[dict[int, int | None]] = [{s: None for s in initial}]

    def trace(s: int, level: int) -> Trajectory:
        path = [s]
        for j in range(level, 0, -1):
            path.append(parents[j][path[-1]])
        path.reverse()
        steps = tuple(Transition(eng.to_state(path[j]), eng.to_actions(masks[j]),
                                 eng.to_state(path[j + 1])) for j in range(level))
        return Trajectory(eng.to_state(path[0]), steps)

    for j, A in enumerate(masks, start=1):
        level: dict[int, int] = {}
        for s in sorted(parents[-1], key=eng.state_key):
            succ = eng.successors(s, A) if eng.executable(s, A) else ()
            if not succ:
                traj = trace(s, j - 1)
                return SecurityVerdict(False, Counterexample(FailureKind.STUCK, traj.initial, traj, j))
            for s2 in succ:
                level.setdefault(s2, s)
        S.check_size(level)
        parents.append(level)

    for s in sorted(parents[-1], key=eng.state_key):
        if not S.goal(s):
            traj = trace(s, len(masks))
            return SecurityVerdict(False, Counterexample(FailureKind.GOAL_MISSED, traj.initial, traj,
                                                         len(masks)))
    return SecurityVerdict(True)


def secure_plans(gd: GroundDomain, query: Query | None = None, mode: str = SEQUENTIAL,
                 limit: int | None = None, plan_length: int | None = None,
                 strategy: str = "belief", max_states: int = 10**6,
                 max_action_sets: int | None = None) -> Iterator[Plan]:
    """Yield secure plans of exactly the query's length, in canonical order.

    ``strategy="filter"`` instead enumerates optimistic plans and keeps the
    secure ones; both strategies produce the same sequence.
    """
    query = query if query is not None else gd.query
    if query is None:
        raise KValidationError("no query given")
    n = query.plan_length if plan_length is None else plan_length
    if strategy == "filter":
        q = Query(query.goal_pos, query.goal_neg, n)
        count = 0
        for plan, _ in optimistic_plans(gd, q, mode, None, None, max_states, max_action_sets):
            if check_secure(gd, plan, q, max_states).secure:
                yield plan
                count += 1
                if limit is not None and count >= limit:
                    return
        return
    if strategy != "belief":
        raise KValidationError(f"unknown strategy {strategy!r}")

    S = _Search(gd, query, mode, max_states, max_action_sets)
    eng = S.eng
    dead: set[tuple[frozenset[int], int]] = set()

    def rec(states: frozenset[int], remaining: int, prefix: list[int]) -> Iterator[list[int]]:
        if remaining == 0:
            if all(S.goal(s) for s in states):
                yield list(prefix)
            return
        key = (states, remaining)
        if key in dead:
            return
        ordered = sorted(states, key=eng.state_key)
        found = False
        for A in S.action_sets(ordered[0]):
            nxt: set[int] = set()
            for s in ordered:
                succ = eng.successors(s, A) if eng.executable(s, A) else ()
                if not succ:
                    break
                nxt.update(succ)
            else:
                S.check_size(nxt)
                prefix.append(A)
                for plan in rec(frozenset(nxt), remaining - 1, prefix):
                    found = True
                    yield plan
                prefix.pop()
        if not found:
            dead.add(key)

    initial = frozenset(eng.initial_states())
    if not initial:
        return
    S.check_size(initial)
    count = 0
    for masks in rec(initial, n, []):
        yield S.to_plan(masks)
        count += 1
        if limit is not None and count >= limit:
            return


def has_secure_plan(gd: GroundDomain, query: Query | None = None, mode: str = SEQUENTIAL,
                    plan_length: int | None = None) -> bool:
    return next(secure_plans(gd, query, mode, limit=1, plan_length=plan_length), None) is not None


__all__ = ["FailureKind", "Counterexample", "SecurityVerdict", "check_secure", "secure_plans",
           "has_secure_plan", "ResourceLimitError", "SEQUENTIAL", "CONCURRENT"]
