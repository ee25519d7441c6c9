"""Optimistic planning: action-set sequences admitting a goal-reaching trajectory.

The search runs in plan-prefix space.  A node is the set of states reachable
by *some* trajectory for the prefix; extending the prefix by an action set
keeps the states from which it can be executed and has a successor.  Plans
are therefore produced once each, in canonical order (action sets compared
by their sorted action names, the empty set first), independent of how many
trajectories witness them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from ._engine import Engine, engine_for
from .errors import KValidationError, ResourceLimitError
from .ground import GroundDomain
from .syntax import Literal, Query
from .transition import Transition, format_state

SEQUENTIAL = "sequential"
CONCURRENT = "concurrent"


def goal_satisfied(query: Query, state: Iterable[Literal]) -> bool:
    state = frozenset(state)
    return all(g in state for g in query.goal_pos) and not any(g in state for g in query.goal_neg)


@dataclass(frozen=True)
class Plan:
    steps: tuple[frozenset[Literal], ...]

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def is_sequential(self) -> bool:
        return all(len(A) <= 1 for A in self.steps)

    def key(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(sorted(map(str, A))) for A in self.steps)

    def to_text(self) -> str:
        if not self.steps:
            return "(empty plan)\n"
        return "".join(f"STEP {k}: {{{', '.join(names)}}}\n"
                       for k, names in enumerate(self.key(), start=1))

    def __str__(self) -> str:
        return "<" + ", ".join("{" + ", ".join(names) + "}" for names in self.key()) + ">"

    @classmethod
    def from_names(cls, gd: GroundDomain, steps: Iterable[Iterable[str]]) -> "Plan":
        """Build a plan from action names such as ``"move(c,table)"``."""
        by_name = {str(a): a for a in gd.instances.actions}
        out = []
        for names in steps:
            A = []
            for n in names:
                key = n.replace(" ", "")
                if key not in by_name:
                    raise KValidationError(f"unknown or illegal action instance {n!r}")
                A.append(by_name[key])
            out.append(frozenset(A))
        return cls(tuple(out))

    @classmethod
    def parse(cls, gd: GroundDomain, text: str) -> "Plan":
        """Read the ``STEP k: {a, b}`` format written by ``to_text``.

        Solver output may be passed as is: ``PLAN`` header lines are skipped
        and only the first plan block is read.
        """
        steps: dict[int, list[str]] = {}
        headers = 0
        for raw in text.splitlines():
            line = raw.split("%", 1)[0].strip()
            if line.upper().startswith("PLAN"):
                headers += 1
                if headers > 1:
                    break
                continue
            if not line or line == "(empty plan)":
                continue
            if not line.upper().startswith("STEP") or ":" not in line:
                raise KValidationError(f"malformed plan line {raw!r}")
            head, body = line.split(":", 1)
            try:
                k = int(head.split()[1])
            except (IndexError, ValueError):
                raise KValidationError(f"malformed plan line {raw!r}") from None
            body = body.strip()
            if not (body.startswith("{") and body.endswith("}")):
                raise KValidationError(f"malformed plan line {raw!r}")
            steps[k] = _split_actions(body[1:-1])
        if sorted(steps) != list(range(1, len(steps) + 1)):
            raise KValidationError("plan steps must be numbered 1..n")
        return cls.from_names(gd, [steps[k] for k in sorted(steps)])


def _split_actions(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


@dataclass(frozen=True)
class Trajectory:
    initial: frozenset[Literal]
    steps: tuple[Transition, ...]

    @property
    def states(self) -> tuple[frozenset[Literal], ...]:
        return (self.initial,) + tuple(t.target for t in self.steps)

    @property
    def final(self) -> frozenset[Literal]:
        return self.steps[-1].target if self.steps else self.initial

    def __str__(self) -> str:
        parts = [format_state(self.initial)]
        for t in self.steps:
            parts.append("--{" + ", ".join(sorted(map(str, t.actions))) + "}--> " + format_state(t.target))
        return " ".join(parts)


class _Search:
    """Shared machinery for plan-prefix search over sets of states."""

    def __init__(self, gd: GroundDomain, query: Query, mode: str, max_states: int,
                 max_action_sets: int | None):
        if mode not in (SEQUENTIAL, CONCURRENT):
            raise KValidationError(f"unknown mode {mode!r}")
        self.gd = gd
        self.eng: Engine = engine_for(gd)
        self.query = query
        self.bound = 1 if (mode == SEQUENTIAL or gd.no_concurrency) else None
        self.max_states = max_states
        self.cap_kwargs = {} if max_action_sets is None else {"cap": max_action_sets}
        eng = self.eng
        self.goal_pos = eng.to_mask(query.goal_pos) if _legal(eng, query.goal_pos) else None
        self.goal_neg = eng.to_mask(l for l in query.goal_neg if l in eng.bit_of)

    def goal(self, s: int) -> bool:
        if self.goal_pos is None:
            return False
        return s & self.goal_pos == self.goal_pos and not s & self.goal_neg

    def action_sets(self, s: int) -> list[int]:
        return self.eng.action_sets(s, self.bound, prune=True, **self.cap_kwargs)

    def check_size(self, states) -> None:
        if len(states) > self.max_states:
            raise ResourceLimitError(f"state set exceeded {self.max_states} states")

    def to_plan(self, masks: list[int]) -> Plan:
        return Plan(tuple(self.eng.to_actions(m) for m in masks))


def _legal(eng: Engine, lits) -> bool:
    return all(l in eng.bit_of for l in lits)


def optimistic_plans(gd: GroundDomain, query: Query | None = None, mode: str = SEQUENTIAL,
                     limit: int | None = None, plan_length: int | None = None,
                     max_states: int = 10**6, max_action_sets: int | None = None
                     ) -> Iterator[tuple[Plan, Trajectory]]:
    """Yield ``(plan, witness trajectory)`` pairs of exactly the query's length.

    ``plan_length`` overrides the length stated in the query.
    """
    query = query if query is not None else gd.query
    if query is None:
        raise KValidationError("no query given")
    n = query.plan_length if plan_length is None else plan_length
    S = _Search(gd, query, mode, max_states, max_action_sets)
    eng = S.eng
    dead: set[tuple[frozenset[int], int]] = set()
    count = 0

    def expand(states: frozenset[int]) -> list[tuple[int, frozenset[int]]]:
        children: dict[int, set[int]] = {}
        for s in sorted(states, key=eng.state_key):
            for A in S.action_sets(s):
                succ = eng.successors(s, A)
                if succ:
                    children.setdefault(A, set()).update(succ)
        return [(A, frozenset(children[A])) for A in sorted(children, key=eng.act_key)]

    def rec(states: frozenset[int], remaining: int, prefix: list[int]) -> Iterator[list[int]]:
        if remaining == 0:
            if any(S.goal(s) for s in states):
                yield list(prefix)
            return
        key = (states, remaining)
        if key in dead:
            return
        found = False
        for A, nxt in expand(states):
            S.check_size(nxt)
            prefix.append(A)
            for plan in rec(nxt, remaining - 1, prefix):
                found = True
                yield plan
            prefix.pop()
        if not found:
            dead.add(key)

    initial = frozenset(eng.initial_states())
    if not initial:
        return
    S.check_size(initial)
    for masks in rec(initial, n, []):
        yield S.to_plan(masks), _witness(S, masks)
        count += 1
        if limit is not None and count >= limit:
            return


def _witness(S: _Search, masks: list[int]) -> Trajectory:
    """Some goal-reaching trajectory for the plan, first in canonical order."""
    eng = S.eng
    failed: set[tuple[int, int]] = set()

    def rec(s: int, j: int) -> list[int] | None:
        if j == len(masks):
            return [s] if S.goal(s) else None
        if (s, j) in failed:
            return None
        A = masks[j]
        if eng.executable(s, A):
            for s2 in eng.successors(s, A):
                path = rec(s2, j + 1)
                if path is not None:
                    return [s] + path
        failed.add((s, j))
        return None

    for s0 in eng.initial_states():
        path = rec(s0, 0)
        if path is not None:
            steps = tuple(Transition(eng.to_state(path[j]), eng.to_actions(masks[j]),
                                     eng.to_state(path[j + 1])) for j in range(len(masks)))
            return Trajectory(eng.to_state(path[0]), steps)
    raise AssertionError("optimistic plan without a witness trajectory")


def is_optimistic(gd: GroundDomain, plan: Plan, query: Query | None = None) -> Trajectory | None:
    """Return a goal-establishing trajectory for ``plan`` if one exists."""
    query = query if query is not None else gd.query
    S = _Search(gd, query, CONCURRENT, 10**9, None)
    masks = [S.eng.act_mask(A) for A in plan.steps]
    try:
        return _witness(S, masks)
    except AssertionError:
        return None
