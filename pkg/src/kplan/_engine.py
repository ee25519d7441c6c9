"""Compiled bitmask representation of a ground domain and its solvers.

Fluent literal ``k`` of the sorted legal fluents is bit ``2k`` when positive
and ``2k+1`` when strongly negated, so the complement of bit ``i`` is
``i ^ 1``.  Actions are bits of a separate mask.  Type literals are decided
against the background answer set once, at compile time: a rule whose
positive type literal fails, or whose default-negated type literal holds,
can never fire and is dropped; the remaining type literals are stripped.

Successor states are found by branch-and-propagate over the *guess
literals* — the fluent literals occurring default-negated in post parts,
the only way a candidate state influences its own reduct.  For an assignment
(T true, F false) of the guesses, any stable state lies between the least
model of the rules that are certainly not blocked and the least model of the
rules that are possibly not blocked; both bounds drive propagation.
"""

from __future__ import annotations

from typing import Iterable

from .errors import ResourceLimitError
from .ground import GroundDomain
from .syntax import ACTION, FLUENT, TYPE, Literal

DEFAULT_MAX_ACTION_SETS = 200_000


def _even_mask(n: int) -> int:
    return int("01" * n, 2) if n else 0


def bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lfp(rules: list[tuple[int, int]]) -> int:
    """Least model of positive rules ``(head_bit, body_mask)`` from the empty set."""
    m = 0
    pending = rules
    changed = True
    while changed and pending:
        changed = False
        rest = []
        for h, p in pending:
            if p & m == p:
                if not m & h:
                    m |= h
                    changed = True
            else:
                rest.append((h, p))
        pending = rest
    return m


class Engine:
    def __init__(self, gd: GroundDomain):
        self.gd = gd
        self.fluents = gd.instances.sorted_fluents()
        self.actions = gd.instances.sorted_actions()
        self.nf = len(self.fluents)
        self.na = len(self.actions)
        self.lit_names: list[str] = []
        self.lits: list[Literal] = []
        self.bit_of: dict[Literal, int] = {}
        for k, f in enumerate(self.fluents):
            neg = Literal(f.pred, f.args, True, FLUENT)
            self.lits += [f, neg]
            self.lit_names += [str(f), str(neg)]
            self.bit_of[f] = 1 << (2 * k)
            self.bit_of[neg] = 1 << (2 * k + 1)
        self.act_bit = {a: 1 << j for j, a in enumerate(self.actions)}
        self.act_names = [str(a) for a in self.actions]
        self.even = _even_mask(self.nf)
        self.all = (1 << (2 * self.nf)) - 1

        M = gd.M
        static_rules, static_cons = [], []
        dyn_rules, dyn_cons = [], []
        for r in gd.rules:
            c = self._compile_rule(r, M)
            if c is None:
                continue
            h, pp, pn, qp, qn, ap, an = c
            if r.is_static:
                (static_cons if h == 0 else static_rules).append((pp, pn) if h == 0 else (h, pp, pn))
            else:
                (dyn_cons if h == 0 else dyn_rules).append(c)
        init_rules, init_cons = list(static_rules), list(static_cons)
        for r in gd.initials:
            c = self._compile_rule(r, M)
            if c is None:
                continue
            h, pp, pn = c[:3]
            if h == 0:
                init_cons.append((pp, pn))
            else:
                init_rules.append((h, pp, pn))
        self.static_rules, self.static_cons = static_rules, static_cons
        self.dyn_rules, self.dyn_cons = dyn_rules, dyn_cons
        self.init_rules, self.init_cons = init_rules, init_cons

        self.execs: list[list[tuple[int, int, int, int]]] = [[] for _ in range(self.na)]
        for e in gd.execs:
            c = self._compile_rule(e, M)
            if c is None:
                continue
            self.execs[self.act_bit[e.head].bit_length() - 1].append(c[3:])

        # constraints that forbid a set of actions regardless of the successor
        self.monotone_cons = [(qp, qn, ap) for (pp, pn, qp, qn, ap, an) in
                              ((c[1], c[2], c[3], c[4], c[5], c[6]) for c in dyn_cons)
                              if pp == 0 and pn == 0 and an == 0 and ap]
        self._succ_memo: dict[tuple[int, int], tuple[int, ...]] = {}
        self._exec_memo: dict[int, list[int]] = {}

    # -- compilation ---------------------------------------------------
    def _compile_rule(self, r, M):
        """Return (head, post+, post-, pre+fl, pre-fl, pre+act, pre-act) masks or None."""
        head = 0
        h = getattr(r, "head", None)
        if h is not None and h.kind == FLUENT:
            head = self.bit_of[h]
        masks = []
        for lits, negative in ((r.post_pos, False), (r.post_neg, True)):
            m = 0
            for l in lits:
                if l.kind == TYPE:
                    if (l in M) == negative:
                        return None
                else:
                    m |= self.bit_of[l]
            masks.append(m)
        fl = [0, 0]
        ac = [0, 0]
        for i, (lits, negative) in enumerate(((r.pre_pos, False), (r.pre_neg, True))):
            for l in lits:
                if l.kind == TYPE:
                    if (l in M) == negative:
                        return None
                elif l.kind == ACTION:
                    ac[i] |= self.act_bit[l]
                else:
                    fl[i] |= self.bit_of[l]
        if isinstance(h, Literal) and h.kind == ACTION:  # executability condition
            head = self.act_bit[h]
        return head, masks[0], masks[1], fl[0], fl[1], ac[0], ac[1]

    # -- conversions ---------------------------------------------------
    def to_mask(self, state: Iterable[Literal]) -> int:
        m = 0
        for l in state:
            m |= self.bit_of[l]
        return m

    def to_state(self, mask: int) -> frozenset[Literal]:
        return frozenset(self.lits[i] for i in bits(mask))

    def act_mask(self, actions: Iterable[Literal]) -> int:
        m = 0
        for a in actions:
            m |= self.act_bit[a]
        return m

    def to_actions(self, mask: int) -> frozenset[Literal]:
        return frozenset(self.actions[i] for i in bits(mask))

    def state_key(self, mask: int) -> tuple[str, ...]:
        return tuple(sorted(self.lit_names[i] for i in bits(mask)))

    def act_key(self, mask: int) -> tuple[str, ...]:
        return tuple(self.act_names[i] for i in bits(mask))  # indices follow name order

    def consistent(self, mask: int) -> bool:
        return not (mask & (mask >> 1) & self.even)

    def complement(self, mask: int) -> int:
        return ((mask & self.even) << 1) | ((mask >> 1) & self.even)

    # -- stable states -------------------------------------------------
    def stable_states(self, rules: list[tuple[int, int, int]],
                      cons: list[tuple[int, int]]) -> list[int]:
        guess = 0
        for _, _, n in rules:
            guess |= n
        out: list[int] = []

        def violated(m: int) -> bool:
            return any(p & m == p and not n & m for p, n in cons)

        if not guess:
            m = lfp([(h, p) for h, p, _ in rules])
            if self.consistent(m) and not violated(m):
                out.append(m)
            return out

        def search(T: int, F: int) -> None:
            while True:
                L = lfp([(h, p) for h, p, n in rules if not n & ~F])
                U = lfp([(h, p) for h, p, n in rules if not n & T])
                if L & F or T & ~U or not self.consistent(L):
                    return
                absent = F | (self.all & ~U)
                for p, n in cons:
                    if p & L == p and not n & ~absent:
                        return
                nT = T | (L & guess)
                nF = F | (guess & ~U) | (guess & self.complement(L))
                if nT & nF:
                    return
                if nT == T and nF == F:
                    break
                T, F = nT, nF
            open_ = guess & ~(T | F)
            if not open_:
                if L == U and not violated(L):
                    out.append(L)
                return
            g = open_ & -open_
            search(T | g, F)
            search(T, F | g)

        search(0, 0)
        return out

    def initial_states(self) -> list[int]:
        memo = self.__dict__.get("_initial")
        if memo is None:
            memo = sorted(self.stable_states(self.init_rules, self.init_cons), key=self.state_key)
            self._initial = memo
        return memo

    def successors(self, s: int, A: int) -> tuple[int, ...]:
        key = (s, A)
        hit = self._succ_memo.get(key)
        if hit is not None:
            return hit
        rules = list(self.static_rules)
        cons = list(self.static_cons)
        for h, pp, pn, qp, qn, ap, an in self.dyn_rules:
            if qp & s == qp and not qn & s and ap & A == ap and not an & A:
                rules.append((h, pp, pn))
        for _, pp, pn, qp, qn, ap, an in self.dyn_cons:
            if qp & s == qp and not qn & s and ap & A == ap and not an & A:
                cons.append((pp, pn))
        res = tuple(sorted(self.stable_states(rules, cons), key=self.state_key))
        self._succ_memo[key] = res
        return res

    # -- executability -------------------------------------------------
    def executable(self, s: int, A: int) -> bool:
        for j in bits(A):
            if not any(qp & s == qp and not qn & s and ap & A == ap and not an & A
                       for qp, qn, ap, an in self.execs[j]):
                return False
        return True

    def action_sets(self, s: int, bound: int | None = None, prune: bool = True,
                    cap: int = DEFAULT_MAX_ACTION_SETS) -> list[int]:
        """Executable action sets w.r.t. ``s`` of size at most ``bound``.

        With ``prune`` set, sets that trigger an unconditional action
        constraint (one that fires whatever the successor) are skipped, since
        they admit no successor anyway.
        """
        memo_key = (s, bound, prune)
        hit = self._exec_memo.get(memo_key)
        if hit is not None:
            return hit
        cand = [j for j in range(self.na)
                if any(qp & s == qp and not qn & s for qp, qn, _, _ in self.execs[j])]
        bad = [ap for qp, qn, ap in self.monotone_cons if qp & s == qp and not qn & s] if prune else []
        limit = len(cand) if bound is None else bound
        out: list[int] = []
        visited = 0

        def rec(i: int, A: int, size: int) -> None:
            nonlocal visited
            visited += 1
            if visited > cap:
                raise ResourceLimitError(
                    f"more than {cap} candidate action sets in one state; "
                    "raise the cap or restrict concurrency")
            if i == len(cand):
                if self.executable(s, A):
                    out.append(A)
                return
            rec(i + 1, A, size)
            if size < limit:
                B = A | (1 << cand[i])
                if not any(b & B == b for b in bad):
                    rec(i + 1, B, size + 1)

        rec(0, 0, 0)
        out.sort(key=self.act_key)
        self._exec_memo[memo_key] = out
        return out


def engine_for(gd: GroundDomain) -> Engine:
    eng = gd._cache.get("engine")
    if eng is None:
        eng = Engine(gd)
        gd._cache["engine"] = eng
    return eng
