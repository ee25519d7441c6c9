from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from kplan import (
    CONCURRENT, SEQUENTIAL, KValidationError, Plan, Query, ResourceLimitError, goal_satisfied, load,
    optimistic_plans,
)
from kplan.corpus import DATA_DIR
from kplan.plan import is_optimistic
from kplan.secure import secure_plans
from kplan.syntax import FLUENT, Literal
from kplan.transition import is_legal_initial_state, is_legal_transition

from oracles import oracle_plans, random_domain


def F(pred, *args, neg=False):
    return Literal(pred, tuple(args), neg, FLUENT)


def corpus(name, bg=None):
    return load((DATA_DIR / name).read_text(), (DATA_DIR / bg).read_text() if bg else None)


def bomb(name, p, t=1):
    bg = " ".join(f"package({i})." for i in range(1, p + 1)) + " " + \
        " ".join(f"toilet({i})." for i in range(1, t + 1))
    gd = load((DATA_DIR / name).read_text(), bg)
    return gd


def keys(plans):
    return [p.key() for p in plans]


# -- goals -------------------------------------------------------------------------

@pytest.mark.parametrize("query,state,expected", [
    (Query((F("f"),), (), 0), {F("f")}, True),
    (Query((F("f"),), (), 0), {F("f", neg=True)}, False),
    (Query((F("f"),), (), 0), set(), False),
    (Query((), (F("u"),), 0), set(), True),
    (Query((), (F("u"),), 0), {F("u")}, False),
    (Query((), (F("u"),), 0), {F("u", neg=True)}, True),
    (Query((), (), 0), set(), True),
])
def test_goal_satisfied(query, state, expected):
    assert goal_satisfied(query, state) is expected


# -- published plans -------------------------------------------------------------------

def test_sussman_unique_plan():
    plans = [p for p, _ in optimistic_plans(corpus("bw-sussman.k", "bw.bg"))]
    assert keys(plans) == [(("move(c,table)",), ("move(b,a)",), ("move(c,b)",))]


def test_rocket_two_plans():
    plans = [p for p, _ in optimistic_plans(corpus("rocket.k", "rocket.bg"), mode=CONCURRENT)]
    assert len(plans) == 2
    for p in plans:
        assert not p.is_sequential


def test_monkey_unique_plan():
    gd = corpus("monkey.k", "monkey.bg")
    plans = [p for p, _ in optimistic_plans(gd, mode=CONCURRENT)]
    assert len(plans) == 1 and plans[0].is_sequential


def test_counter_needs_seven_steps():
    gd = corpus("counter.k")
    assert len(list(optimistic_plans(gd))) == 1
    assert list(optimistic_plans(gd, plan_length=6)) == []


def test_empty_goal_empty_plan():
    ((plan, traj),) = list(optimistic_plans(corpus("empty-goal.k")))
    assert plan.length == 0 and traj.steps == () and plan.to_text() == "(empty plan)\n"


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_bt_sequential_secure_count_is_factorial(p):
    gd = bomb("bt.k", p)
    assert len(list(secure_plans(gd, plan_length=p))) == math.factorial(p)
    # optimistically a single dunk of the armed package suffices
    assert len(list(optimistic_plans(gd, plan_length=1))) == p


@pytest.mark.parametrize("p", [1, 2, 3])
def test_bt_concurrent_single_step(p):
    gd = bomb("bt.k", p)
    plans = [pl for pl, _ in optimistic_plans(gd, mode=CONCURRENT, plan_length=1)]
    assert any(len(pl.steps[0]) == p for pl in plans)


def test_limit_and_canonical_order():
    gd = bomb("bt.k", 3)
    all_ = keys(p for p, _ in optimistic_plans(gd, plan_length=3))
    assert all_ == sorted(all_) and len(set(all_)) == len(all_)
    assert keys(p for p, _ in optimistic_plans(gd, plan_length=3, limit=2)) == all_[:2]


def test_state_cap_raises():
    with pytest.raises(ResourceLimitError):
        list(optimistic_plans(bomb("bt.k", 3), plan_length=3, max_states=2))


def test_missing_query_rejected():
    with pytest.raises(KValidationError):
        list(optimistic_plans(load("fluents: f.")))


@pytest.mark.parametrize("name,bg,mode", [
    ("bw-sussman.k", "bw.bg", SEQUENTIAL), ("rocket.k", "rocket.bg", CONCURRENT),
    ("counter.k", None, SEQUENTIAL), ("monkey.k", "monkey.bg", SEQUENTIAL),
])
def test_optimistic_equals_secure_on_deterministic_domains(name, bg, mode):
    gd = corpus(name, bg)
    opt = keys(p for p, _ in optimistic_plans(gd, mode=mode))
    sec = keys(secure_plans(gd, mode=mode))
    assert opt == sec and opt


# -- plan text ------------------------------------------------------------------------------

def test_plan_text_round_trip():
    gd = corpus("rocket.k", "rocket.bg")
    for plan, _ in optimistic_plans(gd, mode=CONCURRENT):
        assert Plan.parse(gd, plan.to_text()) == plan
        assert Plan.parse(gd, "PLAN 1 (secure):\n" + plan.to_text() + "PLAN 2:\nSTEP 1: {}\n") == plan


def test_plan_from_names_and_str():
    gd = corpus("bw-sussman.k", "bw.bg")
    plan = Plan.from_names(gd, [["move(c, table)"], [], ["move(a,b)"]])
    assert str(plan) == "<{move(c,table)}, {}, {move(a,b)}>"
    assert plan.to_text() == "STEP 1: {move(c,table)}\nSTEP 2: {}\nSTEP 3: {move(a,b)}\n"


@pytest.mark.parametrize("text", [
    "STEP 1: {move(q,table)}", "STEP 2: {}", "STEP x: {}", "step 1 move(a,b)", "STEP 1: move(a,b)",
])
def test_plan_parse_errors(text):
    with pytest.raises(KValidationError):
        Plan.parse(corpus("bw-sussman.k", "bw.bg"), text)


def test_is_optimistic():
    gd = corpus("bw-sussman.k", "bw.bg")
    good = Plan.from_names(gd, [["move(c,table)"], ["move(b,a)"], ["move(c,b)"]])
    bad = Plan.from_names(gd, [["move(c,table)"], ["move(c,b)"], ["move(b,a)"]])
    assert is_optimistic(gd, good) is not None
    assert is_optimistic(gd, bad) is None


# -- properties -----------------------------------------------------------------------------

def _check_witness(gd, plan, traj):
    assert is_legal_initial_state(gd, traj.initial)
    assert tuple(t.actions for t in traj.steps) == plan.steps
    for t in traj.steps:
        assert is_legal_transition(gd, t.source, t.actions, t.target)
    assert goal_satisfied(gd.query, traj.final)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([SEQUENTIAL, CONCURRENT]))
def test_optimistic_plans_match_oracle(seed, mode):
    gd = random_domain(random.Random(seed), n_fluents=3, n_actions=2)
    found = list(optimistic_plans(gd, mode=mode))
    for plan, traj in found:
        _check_witness(gd, plan, traj)
    bound = 1 if mode == SEQUENTIAL else None
    expected = sorted(tuple(tuple(sorted(map(str, A))) for A in p)
                      for p in oracle_plans(gd, gd.query.plan_length, bound=bound))
    assert keys(p for p, _ in found) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_sequential_plans_are_concurrent_plans(seed):
    gd = random_domain(random.Random(seed), n_fluents=3)
    seq = set(keys(p for p, _ in optimistic_plans(gd)))
    conc = set(keys(p for p, _ in optimistic_plans(gd, mode=CONCURRENT)))
    assert seq <= conc
    assert seq == {k for k in conc if all(len(A) <= 1 for A in k)}
