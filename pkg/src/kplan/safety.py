"""Safety restriction for rules and for the background program.

In a K statement every variable of a default-negated type literal must also
occur in a literal that is not a default-negated type literal.  Fluent and
action variables need no such guarantee, since declarations bound their
range.  The background program must be safe in the usual logic-programming
sense.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import EQ, TYPE, DatalogProgram, KProgram, Macro


@dataclass(frozen=True)
class SafetyViolation:
    statement: str
    variables: tuple[str, ...]
    where: str  # "rule" or "background"

    def __str__(self) -> str:
        return f"unsafe variable(s) {', '.join(self.variables)} in {self.where} '{self.statement}'"


def _statement_violation(st) -> SafetyViolation | None:
    negated = [l for l in (*st.post_neg, *st.pre_neg) if l.kind == TYPE]
    if not negated:
        return None
    others = [*st.post_pos, *st.pre_pos, *(l for l in (*st.post_neg, *st.pre_neg) if l.kind != TYPE)]
    head = getattr(st, "head", None) if not isinstance(st, Macro) else st.literal
    if head is not None:
        others.append(head)
    covered = set().union(*(l.variables() for l in others)) if others else set()
    unsafe = set().union(*(l.variables() for l in negated)) - covered
    if unsafe:
        return SafetyViolation(str(st), tuple(sorted(unsafe)), "rule")
    return None


def check_datalog_safety(program: DatalogProgram) -> list[SafetyViolation]:
    out = []
    for rule in program.rules:
        bound: set[str] = set()
        for lit in rule.pos:
            if lit.pred != EQ:
                bound |= lit.variables()
        # a positive equality binds one side once the other is bound
        changed = True
        while changed:
            changed = False
            for lit in rule.pos:
                if lit.pred == EQ:
                    a, b = lit.args
                    for x, y in ((a, b), (b, a)):
                        x_bound = x in bound or not x[:1].isupper() and x[:1] != "_"
                        if x_bound and y not in bound and (y[:1].isupper() or y[:1] == "_"):
                            bound.add(y)
                            changed = True
        unsafe = rule.variables() - bound
        if unsafe:
            out.append(SafetyViolation(str(rule), tuple(sorted(unsafe)), "background"))
    return out


def check_safety(program: KProgram) -> list[SafetyViolation]:
    """Return every safety violation; an empty list means the program is safe."""
    out = [v for st in program.statements() if (v := _statement_violation(st)) is not None]
    out += check_datalog_safety(program.background)
    return out
