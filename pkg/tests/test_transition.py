from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from kplan import load, parse
from kplan.corpus import DATA_DIR
from kplan.reductions import CNF, dp_to_empty_secure
from kplan.syntax import ACTION, FLUENT, Literal
from kplan.transition import (
    Outcome, Transition, executable_action_sets, is_executable, is_legal_initial_state,
    is_legal_transition, least_state, legal_initial_states, plain_report, probe_determined,
    probe_plain, reduct, reduct_rules, successors,
)

from oracles import (
    all_action_sets, consistent_states, oracle_executable, oracle_initial_states,
    oracle_successors, random_domain,
)
from test_ground import EXAMPLE, EXAMPLE_BG


def F(pred, *args, neg=False):
    return Literal(pred, tuple(args), neg, FLUENT)


def A(pred, *args):
    return Literal(pred, tuple(args), False, ACTION)


def corpus(name, bg=None):
    return load((DATA_DIR / name).read_text(), (DATA_DIR / bg).read_text() if bg else None)


S = frozenset


# -- reduct -----------------------------------------------------------------------

def test_reduct_of_positive_domain_is_identity():
    gd = load("fluents: f. g. actions: a. always: caused f after a. caused g if f. executable a.\n"
              "initially: caused g.")
    t = Transition(S(), S({A("a")}), S({F("f"), F("g")}))
    red = reduct(gd, t)
    assert (red.rules, red.execs, red.initials) == (gd.rules, gd.execs, gd.initials)


def _btk1():
    return corpus("btk.k", "bomb_p1_t1.bg")


def test_reduct_deletes_blocked_rule():
    gd = _btk1()
    (rule,) = [r for r in gd.rules if r.head == F("unsafe")]
    s = S({F("armed", "1", neg=True)})
    assert reduct_rules([rule], s, S(), s, gd.M) == []


def test_reduct_strips_surviving_rule():
    gd = _btk1()
    (rule,) = [r for r in gd.rules if r.head == F("unsafe")]
    (out,) = reduct_rules([rule], S(), S(), S({F("unsafe")}), gd.M)
    assert str(out) == "caused unsafe."


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_reduct_idempotent(seed):
    rng = random.Random(seed)
    gd = random_domain(rng)
    states = list(consistent_states(gd))
    acts = list(all_action_sets(gd))
    t = Transition(rng.choice(states), rng.choice(acts), rng.choice(states))
    once = reduct(gd, t)
    twice = reduct(once, t)
    assert (once.rules, once.execs, once.initials) == (twice.rules, twice.execs, twice.initials)
    assert all(not r.post_neg and not r.pre_neg for r in (*once.rules, *once.execs, *once.initials))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_reduct_of_random_positive_domain_is_identity(seed):
    rng = random.Random(seed)
    gd = random_domain(rng, positive=True)
    states = list(consistent_states(gd))
    t = Transition(rng.choice(states), rng.choice(list(all_action_sets(gd))), rng.choice(states))
    red = reduct(gd, t)
    assert (red.rules, red.execs, red.initials) == (gd.rules, gd.execs, gd.initials)


# -- least states -------------------------------------------------------------------

def test_least_state_example():
    gd = load(EXAMPLE, EXAMPLE_BG)
    rules = reduct_rules(gd.rules, S(), S({A("ac", "a", "b")}), S({F("f", "a")}), gd.M)
    assert least_state(rules, S(), S({A("ac", "a", "b")}), gd.M) == S({F("f", "a")})


def test_least_state_no_rules():
    assert least_state([]) == S()


def test_least_state_inconsistent():
    gd = load("fluents: f. always: caused f. caused -f.")
    assert least_state(gd.rules) is Outcome.INCONSISTENT


def test_least_state_constraint():
    gd = load("fluents: f. always: caused f. caused false if f.")
    assert least_state(gd.rules) is Outcome.CONSTRAINT_VIOLATION


def test_least_state_monotone_in_background():
    small = load("fluents: f. g. always: caused f if p. caused g if f, q.", "p.")
    big = load("fluents: f. g. always: caused f if p. caused g if f, q.", "p. q.")
    a = least_state(small.rules, M=small.M)
    b = least_state(big.rules, M=big.M)
    assert a <= b and b == S({F("f"), F("g")})


# -- initial states -------------------------------------------------------------------

def test_sussman_initial_state():
    (s0,) = legal_initial_states(corpus("bw-sussman.k", "bw.bg"))
    assert s0 == S({F("on", "a", "table"), F("on", "b", "table"), F("on", "c", "a"), F("occupied", "a")})


def test_bt2_initial_states():
    states = legal_initial_states(corpus("bt.k", "bomb_p2_t1.bg"))
    assert len(states) == 2
    assert all(F("unsafe") in s for s in states)
    assert {frozenset(l for l in s if l.pred == "armed" and not l.negated) for s in states} == {
        S({F("armed", "1")}), S({F("armed", "2")})}


def test_yale_initial_states():
    states = set(legal_initial_states(corpus("yale.k")))
    assert states == {S({F("loaded"), F("alive")}), S({F("loaded", neg=True), F("alive")})}
    assert all(is_legal_initial_state(corpus("yale.k"), s) for s in states)
    assert not is_legal_initial_state(corpus("yale.k"), S({F("alive")}))


# -- executability ------------------------------------------------------------------------

def test_example_executability():
    gd = load(EXAMPLE, EXAMPLE_BG)
    assert is_executable(gd, S(), S({A("ac", "a", "b")}))
    assert not is_executable(gd, S(), S({A("ac", "a", "b"), A("ac", "b", "b")}))


def test_yale_executability():
    gd = corpus("yale.k")
    s2 = S({F("loaded", neg=True), F("alive")})
    sets = executable_action_sets(gd, s2)
    assert S({A("shoot")}) not in sets and S({A("load")}) in sets
    assert not is_executable(gd, s2, S({A("shoot")}))


@pytest.mark.parametrize("name,bg", [("yale.k", None), ("rocket.k", "rocket.bg"), ("bw-sussman.k", "bw.bg")])
def test_empty_action_set_always_executable(name, bg):
    gd = corpus(name, bg)
    for s in legal_initial_states(gd):
        assert S() in executable_action_sets(gd, s)


def test_mutually_justified_actions_are_executable():
    gd = load("fluents: f. actions: a. b. always: executable a if b. executable b if a.")
    sets = executable_action_sets(gd, S())
    assert sets == [S(), S({A("a"), A("b")})]


def test_no_concurrency_bounds_action_sets():
    gd = corpus("monkey.k", "monkey.bg")
    (s0,) = legal_initial_states(gd)
    assert all(len(a) <= 1 for a in executable_action_sets(gd, s0))


# -- successors ---------------------------------------------------------------------------------

def test_example_successors():
    gd = load(EXAMPLE, EXAMPLE_BG)
    assert successors(gd, S(), S({A("ac", "a", "b")})) == [S({F("f", "a")})]
    assert is_legal_transition(gd, S(), S({A("ac", "a", "b")}), S({F("f", "a")}))
    assert not is_legal_transition(gd, S(), S({A("ac", "a", "b"), A("ac", "b", "b")}), S({F("f", "a")}))


def test_btuc_dunk_is_nondeterministic():
    gd = corpus("btuc.k", "bomb_p1_t1.bg")
    (s0,) = legal_initial_states(gd)
    succ = successors(gd, s0, S({A("dunk", "1")}))
    assert len(succ) == 2
    assert {F("clogged") in s for s in succ} == {True, False}
    assert {F("clogged", neg=True) in s for s in succ} == {True, False}
    assert not probe_determined(gd, s0, S({A("dunk", "1")}))


def test_no_rules_successor_is_empty_state():
    gd = load("fluents: f.")
    assert successors(gd, S({F("f")}), S()) == [S()]


def test_static_closure_transition_is_legal():
    gd = load("fluents: f. g. always: caused g if f. caused f.")
    assert is_legal_transition(gd, S(), S(), S({F("f"), F("g")}))
    assert not is_legal_transition(gd, S(), S(), S({F("f")}))


def test_stuck_when_not_executable():
    gd = corpus("yale.k")
    assert successors(gd, S({F("loaded", neg=True), F("alive")}), S({A("shoot")})) == []


def test_sussman_is_deterministic_from_reachable_states():
    gd = corpus("bw-sussman.k", "bw.bg")
    frontier = legal_initial_states(gd)
    seen = set()
    for _ in range(3):
        nxt = []
        for s in frontier:
            for A_ in executable_action_sets(gd, s, bound=1):
                assert probe_determined(gd, s, A_)
                for s2 in successors(gd, s, A_):
                    if s2 not in seen:
                        seen.add(s2)
                        nxt.append(s2)
        frontier = nxt
    assert seen


# -- probes --------------------------------------------------------------------------------------------

def test_plain_probe():
    dp = dp_to_empty_secure(CNF.from_named(["x"], [["x", "x", "x"]]),
                            CNF.from_named(["y"], [["y"], ["-y"]]))
    assert probe_plain(dp.program)
    assert probe_plain(parse((DATA_DIR / "counter.k").read_text()))
    report = plain_report(parse((DATA_DIR / "bw-sussman.k").read_text(), (DATA_DIR / "bw.bg").read_text()))
    assert not report.plain and report.reasons


def test_plain_probe_requires_pairwise_constraints():
    text = "fluents: f. actions: a. b. always: executable a. executable b. caused false after not a, not b."
    report = plain_report(parse(text))
    assert not report.plain and any("together" in r for r in report.reasons)
    assert probe_plain(parse(text + " caused false after a, b."))


# -- agreement with the brute-force oracle --------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_engine_matches_oracle(seed):
    rng = random.Random(seed)
    gd = random_domain(rng)
    assert set(legal_initial_states(gd)) == set(oracle_initial_states(gd))
    states = list(consistent_states(gd))
    for s in rng.sample(states, min(5, len(states))):
        got = set(executable_action_sets(gd, s))
        assert got == {A_ for A_ in all_action_sets(gd) if oracle_executable(gd, s, A_)}
        for A_ in all_action_sets(gd):
            assert set(successors(gd, s, A_)) == set(oracle_successors(gd, s, A_))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_successors_are_legal_and_minimal(seed):
    rng = random.Random(seed)
    gd = random_domain(rng)
    states = list(consistent_states(gd))
    for s in rng.sample(states, min(5, len(states))):
        for A_ in all_action_sets(gd):
            for s2 in successors(gd, s, A_):
                assert is_legal_transition(gd, s, A_, s2)
                red = reduct_rules(gd.rules, s, A_, s2, gd.M)
                for l in s2:
                    smaller = s2 - {l}
                    # removing any literal breaks some rule of the reduct
                    assert least_state(red, s, A_, gd.M) != smaller
                    assert not _closed(red, smaller, s, A_, gd)


def _closed(rules, x, s, A_, gd):
    from oracles import _satisfies
    return _satisfies(rules, x, s, A_, gd.M)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_plain_domains_are_sequential_and_determined(seed):
    rng = random.Random(seed)
    gd = random_domain(rng, plain=True)
    assert probe_plain(gd.program)
    for s in consistent_states(gd):
        for A_ in all_action_sets(gd):
            succ = successors(gd, s, A_)
            assert len(succ) <= 1
            if succ and gd.instances.actions:
                # with no actions at all the "some action" condition is vacuous
                assert len(A_) == 1
