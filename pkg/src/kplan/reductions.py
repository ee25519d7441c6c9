"""Planning problems encoding SAT and QBF instances, with brute-force oracles.

Each generator turns a propositional formula into K text whose planning
answer (plan existence, security of a fixed plan, existence of a secure
plan) coincides with the truth of the formula.  ``oracle_sat`` and
``oracle_qbf`` decide the formulas by exhaustive evaluation so the two sides
can be compared.

Clauses are tuples of non-zero integers in DIMACS convention: ``k`` is the
``k``-th variable of ``CNF.variables`` (1-based) and ``-k`` its negation.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import KSyntaxError, KValidationError, ResourceLimitError
from .ground import GroundDomain, typed_ground
from .parser import parse
from .plan import CONCURRENT, SEQUENTIAL, Plan, optimistic_plans
from .secure import check_secure, secure_plans
from .syntax import KProgram

ORACLE_MAX_VARS = 16
_RESERVED = {"zero", "one", "alpha", "f"}
_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class CNF:
    variables: tuple[str, ...]
    clauses: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if len(set(self.variables)) != len(self.variables):
            raise KValidationError("duplicate variable names")
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > len(self.variables):
                    raise KValidationError(f"clause literal {lit} out of range")

    @classmethod
    def from_named(cls, variables: Sequence[str], clauses: Iterable[Iterable[str]]) -> "CNF":
        """Build from clauses written as names with an optional ``-`` prefix."""
        index = {v: i + 1 for i, v in enumerate(variables)}
        out = []
        for c in clauses:
            out.append(tuple(-index[l[1:]] if l.startswith("-") else index[l] for l in c))
        return cls(tuple(variables), tuple(out))

    def evaluate(self, assignment: dict[str, bool]) -> bool:
        return all(any(assignment[self.variables[abs(l) - 1]] == (l > 0) for l in c)
                   for c in self.clauses)

    def named(self, lit: int) -> tuple[str, bool]:
        return self.variables[abs(lit) - 1], lit > 0

    def flip(self, names: Iterable[str]) -> "CNF":
        """Swap the polarity of the given variables throughout the clauses."""
        idx = {self.variables.index(n) + 1 for n in names}
        return CNF(self.variables, tuple(tuple(-l if abs(l) in idx else l for l in c)
                                         for c in self.clauses))


@dataclass(frozen=True)
class QBFInstance:
    """Prenex QBF: ``blocks`` is a sequence of (``"forall"``/``"exists"``, names)."""

    blocks: tuple[tuple[str, tuple[str, ...]], ...]
    matrix: CNF

    def __post_init__(self):
        blocks = tuple((q, tuple(vs)) for q, vs in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: list[str] = []
        for q, vs in blocks:
            if q not in ("forall", "exists"):
                raise KValidationError(f"unknown quantifier {q!r}")
            seen += vs
        if len(set(seen)) != len(seen):
            raise KValidationError("quantifier blocks must be disjoint")
        if set(seen) != set(self.matrix.variables):
            raise KValidationError("quantifier blocks must cover exactly the matrix variables")

    def block(self, i: int) -> tuple[str, ...]:
        return self.blocks[i][1]

    @property
    def prefix(self) -> str:
        return "".join("A" if q == "forall" else "E" for q, _ in self.blocks)


# -- oracles ------------------------------------------------------------------

def _assignments(names: Sequence[str]) -> Iterable[dict[str, bool]]:
    for values in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, values))


def oracle_sat(cnf: CNF) -> bool:
    """Truth-table satisfiability check (at most 16 variables)."""
    if len(cnf.variables) > ORACLE_MAX_VARS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_VARS} variables")
    return any(cnf.evaluate(a) for a in _assignments(cnf.variables))


def satisfying_assignment(cnf: CNF) -> dict[str, bool] | None:
    if len(cnf.variables) > ORACLE_MAX_VARS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_VARS} variables")
    return next((a for a in _assignments(cnf.variables) if cnf.evaluate(a)), None)


def oracle_qbf(qbf: QBFInstance, negate_matrix: bool = False) -> bool:
    """Evaluate the quantifier tree exhaustively; optionally for ``not matrix``."""
    if len(qbf.matrix.variables) > ORACLE_MAX_VARS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_VARS} variables")

    def rec(i: int, env: dict[str, bool]) -> bool:
        if i == len(qbf.blocks):
            return qbf.matrix.evaluate(env) != negate_matrix
        q, names = qbf.blocks[i]
        results = (rec(i + 1, {**env, **a}) for a in _assignments(names))
        return all(results) if q == "forall" else any(results)

    return rec(0, {})


# -- DIMACS / QDIMACS ------------------------------------------------------------

def parse_dimacs(text: str, prefix: str = "x") -> CNF:
    n = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise KSyntaxError(f"bad problem line {line!r}")
            try:
                n = int(parts[2])
            except ValueError:
                raise KSyntaxError(f"bad problem line {line!r}") from None
            continue
        if line[0] in "ae":
            continue  # quantifier lines are handled by parse_qdimacs
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise KSyntaxError(f"bad clause token {tok!r}") from None
            if v == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(v)
    if cur:
        clauses.append(tuple(cur))
    if n is None:
        n = max((abs(l) for c in clauses for l in c), default=0)
    return CNF(tuple(f"{prefix}{i}" for i in range(1, n + 1)), tuple(clauses))


def parse_qdimacs(text: str) -> QBFInstance:
    cnf = parse_dimacs(text, prefix="v")
    blocks: list[tuple[str, tuple[str, ...]]] = []
    for line in text.splitlines():
        line = line.strip()
        if line[:1] in ("a", "e") and line.split()[0] in ("a", "e"):
            try:
                parts = [int(t) for t in line.split()[1:]]
            except ValueError:
                raise KSyntaxError(f"bad quantifier line {line!r}") from None
            if parts and parts[-1] == 0:
                parts = parts[:-1]
            q = "forall" if line[0] == "a" else "exists"
            names = tuple(f"v{v}" for v in parts)
            if blocks and blocks[-1][0] == q:
                blocks[-1] = (q, blocks[-1][1] + names)
            else:
                blocks.append((q, names))
    bound = {v for _, vs in blocks for v in vs}
    free = tuple(v for v in cnf.variables if v not in bound)
    if free:  # free variables are existential at the outermost level
        if blocks and blocks[0][0] == "exists":
            blocks[0] = ("exists", free + blocks[0][1])
        else:
            blocks.insert(0, ("exists", free))
    return QBFInstance(tuple(blocks), cnf)


# -- generated problems ----------------------------------------------------------

@dataclass(frozen=True)
class ReductionInstance:
    """A generated planning problem and how to read its answer."""

    kind: str
    text: str
    mode: str = SEQUENTIAL
    plan: tuple[tuple[str, ...], ...] | None = None  # the candidate plan, if fixed

    @cached_property
    def program(self) -> KProgram:
        return parse(self.text)

    @cached_property
    def domain(self) -> GroundDomain:
        return typed_ground(self.program)

    def candidate_plan(self) -> Plan:
        return Plan.from_names(self.domain, self.plan or ())

    def decide(self) -> bool:
        """The planner's answer to the question the construction encodes."""
        gd = self.domain
        if self.kind == "sat-optimistic":
            return next(optimistic_plans(gd, mode=self.mode, limit=1), None) is not None
        if self.kind in ("qbf2-security", "unsat-security", "dp-empty-secure"):
            return check_secure(gd, self.candidate_plan()).secure
        if self.kind in ("qbf3-secure-existence", "qbf3-proper-secure-existence"):
            return next(secure_plans(gd, mode=self.mode, limit=1), None) is not None
        raise KValidationError(f"unknown reduction kind {self.kind!r}")


def _check_names(names: Iterable[str]) -> None:
    for n in names:
        if not _NAME.match(n) or n in _RESERVED or n.startswith("set_"):
            raise KValidationError(f"variable name {n!r} cannot be used as a fluent name")


def _lit(cnf: CNF, lit: int, complement: bool = False) -> str:
    name, positive = cnf.named(lit)
    return name if positive != complement else "-" + name


def _decls(names: Iterable[str]) -> str:
    return " ".join(f"{n}." for n in names)


def _render(fluents: Sequence[str], actions: Sequence[str], always: Sequence[str],
            initially: Sequence[str], goal: str) -> str:
    out = [f"fluents: {_decls(fluents)}"]
    if actions:
        out.append(f"actions: {_decls(actions)}")
    if always:
        out.append("always:")
        out += [f"  {r}" for r in always]
    out.append("initially:")
    out += [f"  {r}" for r in initially]
    out.append(f"goal: {goal}")
    return "\n".join(out) + "\n"


def _body(parts: Sequence[str]) -> str:
    return ", ".join(parts)


def sat_to_optimistic(cnf: CNF) -> ReductionInstance:
    """Plain problem with an optimistic plan (of length 0) iff ``cnf`` is satisfiable."""
    _check_names(cnf.variables)
    initially = [f"total {x}." for x in cnf.variables]
    for c in cnf.clauses:
        body = _body([_lit(cnf, l, complement=True) for l in c])
        initially.append(f"forbidden {body}." if body else "forbidden.")
    initially.append("caused zero.")
    text = _render([*cnf.variables, "zero"], [], [], initially, "zero ? (0)")
    return ReductionInstance("sat-optimistic", text, SEQUENTIAL, ())


def _split_clause(cnf: CNF, clause: Sequence[int], universal: set[str]) -> tuple[list[str], list[str]]:
    """Complemented literals of ``clause``: (over non-universal vars, over universal vars)."""
    inner, outer = [], []
    for l in clause:
        (outer if cnf.named(l)[0] in universal else inner).append(_lit(cnf, l, complement=True))
    return inner, outer


def _forbidden_after(inner: list[str], outer: list[str], head: str = "false") -> str:
    after = _body(["zero", *outer])
    if head == "false":
        return f"forbidden {_body(inner)} after {after}." if inner else f"forbidden after {after}."
    return f"caused {head} if {_body(inner)} after {after}." if inner else f"caused {head} after {after}."


def normalize_all_true(qbf: QBFInstance) -> QBFInstance:
    """Rename polarities so the all-true assignment satisfies the matrix.

    Flipping a variable's polarity everywhere does not change the truth of
    the quantified formula.  Raises if the matrix is unsatisfiable.
    """
    model = satisfying_assignment(qbf.matrix)
    if model is None:
        raise KValidationError("matrix is unsatisfiable; no renaming makes it true under all-true")
    return QBFInstance(qbf.blocks, qbf.matrix.flip(n for n, v in model.items() if not v))


def all_true_satisfies(cnf: CNF) -> bool:
    return cnf.evaluate({v: True for v in cnf.variables})


def qbf2_to_security(qbf: QBFInstance, on_violation: str = "reject") -> ReductionInstance:
    """For ``forall X exists Y phi``: the plan ``<{alpha}>`` is secure iff the QBF is true.

    The construction presumes that setting every variable true satisfies
    ``phi`` (this makes the plan optimistic).  ``on_violation`` decides what
    happens otherwise: ``"reject"`` raises, ``"normalize"`` renames variable
    polarities to meet the assumption, ``"allow"`` builds the problem anyway.
    """
    X, Y = _blocks(qbf, ("forall", "exists"))
    if not all_true_satisfies(qbf.matrix):
        if on_violation == "reject":
            raise KValidationError("the all-true assignment must satisfy the matrix")
        if on_violation == "normalize":
            qbf = normalize_all_true(qbf)
        elif on_violation != "allow":
            raise KValidationError(f"unknown on_violation {on_violation!r}")
    cnf = qbf.matrix
    _check_names(cnf.variables)
    always = ["executable alpha."]
    always += [f"total {y} after zero." for y in Y]
    for c in cnf.clauses:
        inner, outer = _split_clause(cnf, c, set(X))
        always.append(_forbidden_after(inner, outer))
    always.append("caused one after zero.")
    initially = [f"total {x}." for x in X] + ["caused zero."]
    text = _render([*X, *Y, "zero", "one"], ["alpha"], always, initially, "one ? (1)")
    return ReductionInstance("qbf2-security", text, SEQUENTIAL, (("alpha",),))


def unsat_to_security(cnf: CNF) -> ReductionInstance:
    """Plain variant: the plan ``<{alpha}>`` is secure iff ``cnf`` is unsatisfiable.

    Every variable is guessed in the initial state; ``one`` is caused exactly
    when some clause is false, and a constraint demands an action per step.
    """
    _check_names(cnf.variables)
    always = ["executable alpha."]
    for c in cnf.clauses:
        _, outer = _split_clause(cnf, c, set(cnf.variables))
        always.append(_forbidden_after([], outer, head="one"))
    always.append("caused false after not alpha.")
    initially = [f"total {x}." for x in cnf.variables] + ["caused zero."]
    text = _render([*cnf.variables, "zero", "one"], ["alpha"], always, initially, "one ? (1)")
    return ReductionInstance("unsat-security", text, SEQUENTIAL, (("alpha",),))


def _blocks(qbf: QBFInstance, shape: tuple[str, ...]) -> list[tuple[str, ...]]:
    """Align the QBF's blocks with ``shape``, filling missing blocks with ()."""
    out: list[tuple[str, ...]] = []
    i = 0
    for q in shape:
        if i < len(qbf.blocks) and qbf.blocks[i][0] == q:
            out.append(qbf.blocks[i][1])
            i += 1
        else:
            out.append(())
    if i != len(qbf.blocks):
        raise KValidationError(f"QBF prefix {qbf.prefix} does not fit {''.join(q[0].upper() for q in shape)}")
    return out


def qbf3_to_secure_existence(qbf: QBFInstance, proper: bool = False) -> ReductionInstance:
    """For ``exists Z forall X exists Y phi``: a secure plan of length 1 exists iff true.

    With ``proper=True`` the deterministic variant is produced for
    ``exists Z forall X`` (Y must be empty), where a secure plan exists iff
    ``exists Z forall X not phi`` holds.
    """
    Z, X, Y = _blocks(qbf, ("exists", "forall", "exists"))
    if proper and Y:
        raise KValidationError("the proper variant requires an empty innermost block")
    cnf = qbf.matrix
    _check_names(cnf.variables)
    actions = [f"set_{z}" for z in Z]
    always = [f"executable set_{z}." for z in Z]
    for z in Z:
        always.append(f"caused {z} after zero, set_{z}.")
        always.append(f"caused -{z} after zero, not set_{z}.")
    if not proper:
        always.append("caused one after zero.")
        always += [f"total {y} after zero." for y in Y]
    for c in cnf.clauses:
        inner, outer = _split_clause(cnf, c, set(X))
        always.append(_forbidden_after(inner, outer, head="one" if proper else "false"))
    initially = [f"total {x}." for x in X] + ["caused zero."]
    text = _render([*X, *Y, *Z, "zero", "one"], actions, always, initially, "one ? (1)")
    kind = "qbf3-proper-secure-existence" if proper else "qbf3-secure-existence"
    return ReductionInstance(kind, text, CONCURRENT, None)


def dp_to_empty_secure(phi: CNF, psi: CNF) -> ReductionInstance:
    """The empty plan for ``f ? (0)`` is secure iff ``phi`` is satisfiable and ``psi`` is not.

    Clauses must have one to three literals; shorter clauses are padded by
    repeating a literal.
    """
    if set(phi.variables) & set(psi.variables):
        raise KValidationError("phi and psi must use disjoint variables")
    _check_names([*phi.variables, *psi.variables])
    initially = [f"total {x}." for x in phi.variables]
    for c in phi.clauses:
        c = _pad3(c)
        initially.append(f"caused {_lit(phi, c[0])} if {_lit(phi, c[1], True)}, {_lit(phi, c[2], True)}.")
    initially += [f"total {y}." for y in psi.variables]
    for c in psi.clauses:
        c = _pad3(c)
        initially.append("caused f if " + _body([_lit(psi, l, True) for l in c]) + ".")
    text = _render([*phi.variables, *psi.variables, "f"], [], [], initially, "f ? (0)")
    return ReductionInstance("dp-empty-secure", text, SEQUENTIAL, ())


def _pad3(clause: Sequence[int]) -> tuple[int, int, int]:
    if not 1 <= len(clause) <= 3:
        raise KValidationError("clauses must have between one and three literals")
    c = list(clause)
    while len(c) < 3:
        c.append(c[-1])
    return tuple(c)


# -- random instances ------------------------------------------------------------

def random_cnf(rng: random.Random, names: Sequence[str], n_clauses: int,
               width: tuple[int, int] = (1, 3)) -> CNF:
    clauses = []
    for _ in range(n_clauses):
        k = min(rng.randint(*width), len(names))
        picked = rng.sample(range(1, len(names) + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in picked))
    return CNF(tuple(names), tuple(clauses))


def random_qbf(rng: random.Random, shape: Sequence[tuple[str, str, int]], n_clauses: int,
               width: tuple[int, int] = (1, 3)) -> QBFInstance:
    """``shape`` lists (quantifier, name prefix, size) per block."""
    blocks = [(q, tuple(f"{p}{i}" for i in range(1, k + 1))) for q, p, k in shape if k]
    names = [n for _, vs in blocks for n in vs]
    return QBFInstance(tuple(blocks), random_cnf(rng, names, n_clauses, width))
