"""Independent reference semantics and random domain generators for tests.

The brute-force oracle shares nothing with the engine beyond the ground
rule objects: it enumerates every consistent set of fluent literals and
applies the definitions of reduct, legal initial state, executability and
legal transition literally, including minimality via subset enumeration.
"""

from __future__ import annotations

import itertools
import random

from kplan import load
from kplan.syntax import ACTION, FLUENT, Literal


def _holds(l, s, A, M):
    if l.kind == FLUENT:
        return l in s
    if l.kind == ACTION:
        return l in A
    return l in M


def fluent_literals(gd):
    out = []
    for f in gd.instances.sorted_fluents():
        out += [f, Literal(f.pred, f.args, True, FLUENT)]
    return out


def consistent_states(gd):
    """Every consistent set of legal fluent literals (3^n sets)."""
    options = [((), (f,), (Literal(f.pred, f.args, True, FLUENT),))
               for f in gd.instances.sorted_fluents()]
    for choice in itertools.product(*options):
        yield frozenset(itertools.chain.from_iterable(choice))


def _reduct_pre(rules, s, A, M):
    """Drop the rules whose ``after`` part is blocked by default negation."""
    return [r for r in rules if not any(_holds(l, s, A, M) for l in r.pre_neg)]


def _reduct_post(rules, s2, M):
    """Drop the rules whose ``if`` part is blocked by default negation."""
    return [r for r in rules if not any(_holds(l, s2, (), M) for l in r.post_neg)]


def _reduct(rules, s, A, s2, M):
    return _reduct_post(_reduct_pre(rules, s, A, M), s2, M)


def _satisfies(rules, x, s, A, M):
    """Does the (positive) reduct hold in the candidate set ``x``?"""
    for r in rules:
        if all(_holds(l, s, A, M) for l in r.pre_pos) and all(_holds(l, x, (), M) for l in r.post_pos):
            if r.head is None or r.head not in x:
                return False
    return True


def _consistent(x):
    return len({(l.pred, l.args) for l in x}) == len(x)


def _minimal_model(rules, x, s, A, M):
    if not _consistent(x) or not _satisfies(rules, x, s, A, M):
        return False
    items = sorted(x, key=str)
    for k in range(len(items)):
        for sub in itertools.combinations(items, k):
            if _satisfies(rules, frozenset(sub), s, A, M):
                return False
    return True


def oracle_initial_states(gd):
    rules = [r for r in gd.rules if r.is_static] + list(gd.initials)
    out = []
    for s0 in consistent_states(gd):
        red = _reduct(rules, frozenset(), frozenset(), s0, gd.M)
        if _minimal_model(red, s0, frozenset(), frozenset(), gd.M):
            out.append(s0)
    return out


def oracle_executable(gd, s, A):
    for a in A:
        ok = False
        for e in gd.execs:
            if e.head != a:
                continue
            if all(_holds(l, s, A, gd.M) for l in e.pre_pos) and not any(
                    _holds(l, s, A, gd.M) for l in e.pre_neg):
                ok = True
                break
        if not ok:
            return False
    return True


def oracle_successors(gd, s, A):
    if not oracle_executable(gd, s, A):
        return []
    out = []
    # neither step depends on the candidate: rules blocked in the source
    # state, and rules whose positive ``after`` part fails (trivially satisfied)
    pre = [r for r in _reduct_pre(gd.rules, s, A, gd.M)
           if all(_holds(l, s, A, gd.M) for l in r.pre_pos)]
    for s2 in consistent_states(gd):
        red = _reduct_post(pre, s2, gd.M)
        if _minimal_model(red, s2, s, A, gd.M):
            out.append(s2)
    return out


def all_action_sets(gd, bound=None):
    acts = gd.instances.sorted_actions()
    top = len(acts) if bound is None else bound
    for k in range(top + 1):
        for combo in itertools.combinations(acts, k):
            yield frozenset(combo)


def oracle_plans(gd, n, secure=False, bound=None):
    """All optimistic (or secure) plans of length ``n`` by exhaustive search."""
    init = oracle_initial_states(gd)
    q = gd.query
    sets = list(all_action_sets(gd, bound))

    def goal(s):
        return all(g in s for g in q.goal_pos) and not any(g in s for g in q.goal_neg)

    out = []
    for plan in itertools.product(sets, repeat=n):
        if secure:
            ok = bool(init)
            frontier = set(init)
            for A in plan:
                nxt = set()
                for s in frontier:
                    succ = oracle_successors(gd, s, A)
                    if not succ:
                        ok = False
                        break
                    nxt.update(succ)
                if not ok:
                    break
                frontier = nxt
            if ok and all(goal(s) for s in frontier):
                out.append(plan)
        else:
            frontier = set(init)
            for A in plan:
                frontier = {s2 for s in frontier for s2 in oracle_successors(gd, s, A)}
            if any(goal(s) for s in frontier):
                out.append(plan)
    return out


# -- random domains -------------------------------------------------------------

def _lit(rng, fluents, neg_p=0.4):
    f = rng.choice(fluents)
    return ("-" if rng.random() < neg_p else "") + f


def random_domain_text(rng: random.Random, n_fluents=None, n_actions=None, plain=False,
                       positive=False, plan_length=None) -> tuple[str, str | None]:
    """A random propositional K program (and background) over few fluents and actions.

    ``plain`` produces domains meeting the syntactic plainness conditions;
    ``positive`` avoids default negation altogether.
    """
    nf = n_fluents or rng.randint(1, 5)
    na = rng.randint(0, 4) if n_actions is None else n_actions
    fl = [f"f{i}" for i in range(nf)]
    ac = [f"a{i}" for i in range(na)]
    use_types = not plain and rng.random() < 0.3
    background = "ok." if use_types else None
    neg = not (plain or positive)

    def conj(parts):
        return ", ".join(parts)

    def body(k_fl, k_nfl=0, k_ac=0, k_nac=0, typ=False):
        parts = [_lit(rng, fl) for _ in range(k_fl)]
        if neg:
            parts += ["not " + _lit(rng, fl) for _ in range(k_nfl)]
        if ac:
            parts += [rng.choice(ac) for _ in range(k_ac)]
            if neg:
                parts += ["not " + rng.choice(ac) for _ in range(k_nac)]
        if typ and use_types:
            parts.append(rng.choice(["ok", "not bad", "not ok"] if neg else ["ok"]))
        return parts

    always = []
    for _ in range(rng.randint(0, 3)):  # static rules
        head = _lit(rng, fl) if rng.random() < 0.9 else "false"
        post = body(rng.randint(0, 2), rng.randint(0, 1), typ=rng.random() < 0.3)
        always.append(f"caused {head}" + (f" if {conj(post)}" if post else "") + ".")
    for _ in range(rng.randint(1, 5)):  # dynamic rules
        head = _lit(rng, fl) if rng.random() < 0.85 else "false"
        post = body(rng.randint(0, 1), rng.randint(0, 1))
        pre = body(rng.randint(0, 2), rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 1),
                   typ=rng.random() < 0.2)
        if not pre:
            pre = [_lit(rng, fl)]
        always.append(f"caused {head}" + (f" if {conj(post)}" if post else "") + f" after {conj(pre)}.")
    if neg and rng.random() < 0.5:
        always.append(f"inertial {_lit(rng, fl, 0.3)}.")
    if neg and ac and rng.random() < 0.5:
        always.append(f"total {rng.choice(fl)} after {rng.choice(ac)}.")
    for a in ac:
        for _ in range(rng.randint(0, 2)):
            if plain:
                pre = [_lit(rng, fl) for _ in range(rng.randint(0, 1))]
            else:
                pre = body(rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 1))
            always.append(f"executable {a}" + (f" if {conj(pre)}" if pre else "") + ".")
    if plain:
        for i, a in enumerate(ac):
            for b in ac[i + 1:]:
                always.append(f"caused false after {a}, {b}.")
        if ac:
            always.append("caused false after " + conj(f"not {a}" for a in ac) + ".")

    initially = []
    for _ in range(rng.randint(0, 3)):
        head = _lit(rng, fl) if rng.random() < 0.95 else "false"
        post = body(rng.randint(0, 1), rng.randint(0, 1))
        initially.append(f"caused {head}" + (f" if {conj(post)}" if post else "") + ".")
    if neg and rng.random() < 0.6:
        for f in rng.sample(fl, rng.randint(1, len(fl))):
            initially.append(f"total {f}.")

    goal = sorted({_lit(rng, fl) for _ in range(rng.randint(0, 2))})
    n = rng.randint(0, 2) if plan_length is None else plan_length
    text = (f"fluents: {' '.join(f + '.' for f in fl)}\n"
            + (f"actions: {' '.join(a + '.' for a in ac)}\n" if ac else "")
            + "always:\n" + "".join(f"  {r}\n" for r in always)
            + "initially:\n" + "".join(f"  {r}\n" for r in initially)
            + f"goal: {', '.join(goal)} ? ({n})\n")
    return text, background


def random_domain(rng: random.Random, **kw):
    text, bg = random_domain_text(rng, **kw)
    return load(text, bg)
