"""Stratified evaluation of normal Datalog background programs.

Strongly negated atoms ``-p(...)`` are treated as atoms of a fresh predicate
``-p``; after evaluation the answer set is checked for complementary pairs.
Equality ``=`` is a built-in and is never stored in the answer set.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import networkx as nx

from .errors import KValidationError, StratificationError
from .safety import check_datalog_safety
from .syntax import EQ, TYPE, DatalogProgram, DatalogRule, Literal, is_variable


def pred_key(lit: Literal) -> str:
    return ("-" if lit.negated else "") + lit.pred


@dataclass(frozen=True)
class AnswerSet:
    """Set of ground type literals; membership understands built-in equality."""

    atoms: frozenset[Literal] = frozenset()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        atoms = frozenset(_as_type(a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        index: dict[str, set[tuple[str, ...]]] = defaultdict(set)
        for a in atoms:
            index[pred_key(a)].add(a.args)
        object.__setattr__(self, "_index", dict(index))

    def __contains__(self, lit: Literal) -> bool:
        if lit.pred == EQ:
            return lit.args[0] == lit.args[1]
        return lit.args in self._index.get(pred_key(lit), ())

    def __iter__(self) -> Iterator[Literal]:
        return iter(sorted(self.atoms, key=str))

    def __len__(self) -> int:
        return len(self.atoms)

    def tuples(self, key: str) -> set[tuple[str, ...]]:
        """All argument tuples of predicate ``key`` (``'p'`` or ``'-p'``)."""
        return self._index.get(key, set())

    def constants(self) -> set[str]:
        return {c for a in self.atoms for c in a.args}

    def __str__(self) -> str:
        return "{" + ", ".join(str(a) for a in self) + "}"


def _as_type(lit: Literal) -> Literal:
    return lit if lit.kind == TYPE else Literal(lit.pred, lit.args, lit.negated, TYPE)


def answer_set(atoms: Iterable[Literal]) -> AnswerSet:
    return AnswerSet(frozenset(atoms))


def dependency_graph(program: DatalogProgram) -> nx.DiGraph:
    g = nx.DiGraph()
    for rule in program.rules:
        head = pred_key(rule.head)
        g.add_node(head)
        for lit in rule.pos:
            if lit.pred != EQ:
                _add_edge(g, pred_key(lit), head, False)
        for lit in rule.neg:
            if lit.pred != EQ:
                _add_edge(g, pred_key(lit), head, True)
    return g


def _add_edge(g: nx.DiGraph, u: str, v: str, negative: bool) -> None:
    if g.has_edge(u, v):
        g[u][v]["negative"] = g[u][v]["negative"] or negative
    else:
        g.add_edge(u, v, negative=negative)


def stratify(program: DatalogProgram) -> list[frozenset[str]]:
    """Layer predicates so that negative dependencies point strictly downwards.

    Raises ``StratificationError`` naming a cycle through negation.
    """
    g = dependency_graph(program)
    comp_of: dict[str, int] = {}
    sccs = list(nx.strongly_connected_components(g))
    for i, comp in enumerate(sccs):
        for p in comp:
            comp_of[p] = i
    for u, v, data in g.edges(data=True):
        if data["negative"] and comp_of[u] == comp_of[v]:
            back = nx.shortest_path(g.subgraph(sccs[comp_of[u]]), v, u) if u != v else [u]
            raise StratificationError([u, *back] if u != v else [u, u])
    cond = nx.condensation(g, sccs)
    level: dict[int, int] = {}
    for c in nx.topological_sort(cond):
        lv = 0
        for pred in cond.predecessors(c):
            neg = any(g[u][v]["negative"] for u in sccs[pred] for v in sccs[c] if g.has_edge(u, v))
            lv = max(lv, level[pred] + (1 if neg else 0))
        level[c] = lv
    if not level:
        return []
    strata: list[set[str]] = [set() for _ in range(max(level.values()) + 1)]
    for c, lv in level.items():
        strata[lv] |= sccs[c]
    return [frozenset(s) for s in strata if s]


def _match(lit: Literal, args: tuple[str, ...], theta: dict[str, str]) -> dict[str, str] | None:
    out = theta
    for term, value in zip(lit.args, args):
        if is_variable(term):
            bound = out.get(term)
            if bound is None:
                if out is theta:
                    out = dict(theta)
                out[term] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return out


def _solutions(rule: DatalogRule, facts: dict[str, set[tuple[str, ...]]]) -> Iterator[dict[str, str]]:
    """Enumerate substitutions satisfying the body of ``rule`` w.r.t. ``facts``."""
    atoms = [l for l in rule.pos if l.pred != EQ]
    eqs = [l for l in rule.pos if l.pred == EQ]

    def rec(i: int, theta: dict[str, str]) -> Iterator[dict[str, str]]:
        if i == len(atoms):
            yield from _finish(theta)
            return
        lit = atoms[i]
        for args in facts.get(pred_key(lit), ()):
            if len(args) != len(lit.args):
                continue
            t = _match(lit, args, theta)
            if t is not None:
                yield from rec(i + 1, t)

    def _finish(theta: dict[str, str]) -> Iterator[dict[str, str]]:
        theta = dict(theta)
        pending = list(eqs)
        progress = True
        while pending and progress:
            progress = False
            for lit in list(pending):
                a, b = (theta.get(x, x) for x in lit.args)
                if is_variable(a) and not is_variable(b):
                    theta[a] = b
                elif is_variable(b) and not is_variable(a):
                    theta[b] = a
                elif is_variable(a) and is_variable(b):
                    continue
                elif a != b:
                    return
                pending.remove(lit)
                progress = True
        if pending:
            raise KValidationError(f"unsafe background rule '{rule}'")
        for lit in rule.neg:
            g = lit.substitute(theta)
            if not g.is_ground():
                raise KValidationError(f"unsafe background rule '{rule}'")
            if g.pred == EQ:
                if g.args[0] == g.args[1]:
                    return
            elif g.args in facts.get(pred_key(g), ()):
                return
        yield theta

    yield from rec(0, {})


def evaluate(program: DatalogProgram) -> AnswerSet:
    """Compute the unique answer set by an iterated least fixpoint per stratum."""
    violations = check_datalog_safety(program)
    if violations:
        raise KValidationError(str(violations[0]))
    strata = stratify(program)
    facts: dict[str, set[tuple[str, ...]]] = defaultdict(set)
    for stratum in strata:
        rules = [r for r in program.rules if pred_key(r.head) in stratum]
        changed = True
        while changed:
            changed = False
            for rule in rules:
                key = pred_key(rule.head)
                new = []
                for theta in _solutions(rule, facts):
                    head = rule.head.substitute(theta)
                    if head.args not in facts[key]:
                        new.append(head.args)
                if new:
                    facts[key].update(new)
                    changed = True
    atoms = frozenset(Literal(k.lstrip("-"), args, k.startswith("-"), TYPE)
                      for k, tuples in facts.items() for args in tuples)
    result = AnswerSet(atoms)
    for a in result.atoms:
        if not a.negated and a.args in result.tuples("-" + a.pred):
            raise KValidationError(f"background knowledge is inconsistent: {a} and -{a}")
    return result
