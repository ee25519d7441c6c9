"""Hand-written lexer and recursive-descent parser for K programs.

A program is a sequence of sections (``fluents:``, ``actions:``,
``always:``, ``initially:``, ``goal:``, ``background:``); each statement in
a section is terminated by ``.``.  Background knowledge may alternatively be
supplied as a separate Datalog text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import KSyntaxError, KValidationError
from .syntax import (
    ACTION, EQ, FLUENT, TYPE, CausationRule, DatalogProgram, DatalogRule,
    Declaration, ExecutabilityCondition, KProgram, Literal, Macro, Query,
    Statement,
)

SECTIONS = ("fluents", "actions", "always", "initially", "goal", "background")
KEYWORDS = {"caused", "if", "after", "not", "executable", "nonexecutable",
            "inertial", "default", "total", "forbidden", "requires", "false",
            "noConcurrency", "securePlan"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>:-|<>|!=|[():,.?=\-¬])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, var, int, punct, eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise KSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "punct" and value == "!=":
                value = "<>"
            if kind == "punct" and value == "¬":
                value = "-"
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("punct", "ident")

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        if tok.kind == "eof" and message.startswith("expected"):
            message = "unterminated statement: " + message
        raise KSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def at_section(self) -> bool:
        t = self.tok
        return t.kind == "ident" and self.peek().text == ":" and self.peek().kind == "punct"

    # -- terms and literals ------------------------------------------
    def term(self) -> str:
        t = self.tok
        if t.kind in ("ident", "var", "int"):
            self.advance()
            return t.text
        self.fail("expected a term")

    def literal(self) -> Literal:
        negated = False
        if self.at("-"):
            self.advance()
            negated = True
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail("expected a predicate name")
        self.advance()
        args: list[str] = []
        if self.at("("):
            self.advance()
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
            self.expect(")")
        return Literal(t.text, tuple(args), negated)

    def _comparison(self) -> tuple[Literal, bool] | None:
        """Parse ``X = Y`` / ``X <> Y`` if the input starts with one."""
        nxt = self.peek()
        if self.tok.kind in ("ident", "var", "int") and nxt.kind == "punct" and nxt.text in ("=", "<>"):
            left = self.term()
            op = self.advance().text
            right = self.term()
            return Literal(EQ, (left, right)), op == "<>"
        return None

    def body_item(self) -> tuple[Literal, bool]:
        """Returns (literal, default_negated)."""
        if self.at("not"):
            self.advance()
            if self.at("("):
                self.advance()
                cmp = self._comparison()
                if cmp is None:
                    lit = self.literal()
                    neg = False
                else:
                    lit, neg = cmp
                self.expect(")")
                if neg:
                    self.fail("double negation of a comparison is not supported")
                return lit, True
            cmp = self._comparison()
            if cmp is not None:
                lit, neg = cmp
                if neg:
                    self.fail("double negation of a comparison is not supported")
                return lit, True
            return self.literal(), True
        cmp = self._comparison()
        if cmp is not None:
            return cmp
        return self.literal(), False

    def body(self, stops: tuple[str, ...], allow_empty: bool = False
             ) -> tuple[tuple[Literal, ...], tuple[Literal, ...]]:
        pos: list[Literal] = []
        neg: list[Literal] = []
        if any(self.at(s) for s in stops):
            if not allow_empty:
                self.fail("expected a literal")
            return (), ()
        while True:
            lit, is_neg = self.body_item()
            (neg if is_neg else pos).append(lit)
            if self.at(","):
                self.advance()
                continue
            break
        return tuple(pos), tuple(neg)

    # -- statements ----------------------------------------------------
    def declaration(self) -> Declaration:
        head = self.literal()
        if head.negated:
            self.fail("declared atoms must be positive")
        requires: list[Literal] = []
        if self.at("requires"):
            self.advance()
            pos, neg = self.body((".",))
            if neg:
                self.fail("requires lists may not contain default negation")
            requires = list(pos)
        self.expect(".")
        return Declaration(head, tuple(requires))

    def _if_after(self) -> tuple[tuple, tuple, tuple, tuple]:
        post_pos = post_neg = pre_pos = pre_neg = ()
        if self.at("if"):
            self.advance()
            post_pos, post_neg = self.body(("after", "."))
        if self.at("after"):
            self.advance()
            pre_pos, pre_neg = self.body((".",))
        return post_pos, post_neg, pre_pos, pre_neg

    def rule_statement(self, initial: bool) -> Statement | str:
        t = self.tok
        if t.text in ("noConcurrency", "securePlan") and t.kind == "ident":
            self.advance()
            self.expect(".")
            return t.text
        if t.text == "executable":
            self.advance()
            head = self.literal()
            pre_pos = pre_neg = ()
            if self.at("if"):
                self.advance()
                pre_pos, pre_neg = self.body((".",))
            self.expect(".")
            return ExecutabilityCondition(head, pre_pos, pre_neg)
        if t.text == "nonexecutable":
            self.advance()
            head = self.literal()
            pre_pos = pre_neg = ()
            if self.at("if"):
                self.advance()
                pre_pos, pre_neg = self.body((".",))
            self.expect(".")
            return Macro("nonexecutable", head, (), (), pre_pos, pre_neg, initial)
        if t.text in ("inertial", "default", "total"):
            self.advance()
            lit = self.literal()
            parts = self._if_after()
            self.expect(".")
            return Macro(t.text, lit, *parts, initial)
        if t.text == "forbidden":
            self.advance()
            post_pos, post_neg = self.body(("after", "."), allow_empty=True)
            pre_pos = pre_neg = ()
            if self.at("after"):
                self.advance()
                pre_pos, pre_neg = self.body((".",))
            self.expect(".")
            return Macro("forbidden", None, post_pos, post_neg, pre_pos, pre_neg, initial)
        if t.text == "caused":
            self.advance()
        if self.at("false"):
            self.advance()
            head = None
        else:
            head = self.literal()
        parts = self._if_after()
        self.expect(".")
        return CausationRule(head, *parts, is_initial=initial)

    def query(self) -> Query:
        pos, neg = self.body(("?",), allow_empty=True)
        self.expect("?")
        self.expect("(")
        t = self.tok
        if t.kind != "int":
            self.fail("expected the plan length")
        self.advance()
        self.expect(")")
        if self.at("."):
            self.advance()
        return Query(pos, neg, int(t.text))

    def datalog_rule(self) -> DatalogRule:
        head = self.literal()
        pos = neg = ()
        if self.at(":-"):
            self.advance()
            pos, neg = self.body((".",))
        self.expect(".")
        return DatalogRule(head, pos, neg)

    # -- top level -----------------------------------------------------
    def program(self) -> dict:
        out: dict = {"background": [], "fluents": [], "actions": [], "always": [],
                     "initially": [], "query": None, "no_concurrency": False,
                     "secure_plan": False}
        section = None
        while self.tok.kind != "eof":
            if self.at_section():
                name_tok = self.advance()
                if name_tok.text not in SECTIONS:
                    self.fail(f"unknown section keyword {name_tok.text!r}", name_tok)
                self.advance()  # ':'
                section = name_tok.text
                if section == "goal":
                    if out["query"] is not None:
                        self.fail("duplicate goal section", name_tok)
                    if self.tok.kind == "eof" or self.at_section():
                        out["query"] = Query()
                    else:
                        out["query"] = self.query()
                continue
            if section is None:
                self.fail("statement outside of any section")
            if section == "goal":
                self.fail("the goal section holds a single query")
            if self.tok.text in ("noConcurrency", "securePlan") and self.tok.kind == "ident" \
                    and self.peek().text == ".":
                flag = self.advance().text
                self.advance()
                out["no_concurrency" if flag == "noConcurrency" else "secure_plan"] = True
                continue
            if section in ("fluents", "actions"):
                out[section].append(self.declaration())
            elif section == "background":
                out["background"].append(self.datalog_rule())
            else:
                start = self.tok
                st = self.rule_statement(section == "initially")
                if section == "initially":
                    _check_initial(st, start)
                out[section].append(st)
        return out


def _check_initial(st: Statement, tok: Token) -> None:
    if isinstance(st, ExecutabilityCondition) or (isinstance(st, Macro) and st.kind == "nonexecutable"):
        raise KSyntaxError("executability statements are not allowed in the initially section",
                           tok.line, tok.column)
    if st.pre_pos or st.pre_neg:
        raise KSyntaxError("initial state constraints must be static (no 'after' part)",
                           tok.line, tok.column)


def parse_datalog(text: str) -> DatalogProgram:
    """Parse a background file of Datalog facts and rules."""
    p = _Parser(text)
    if p.at_section() and p.tok.text == "background":
        p.advance()
        p.advance()
    rules = []
    while p.tok.kind != "eof":
        rules.append(p.datalog_rule())
    return DatalogProgram(tuple(rules))


def parse(text: str, background_text: str | None = None) -> KProgram:
    """Parse K source (and optional separate background) into a typed AST."""
    raw = _Parser(text).program()
    background = DatalogProgram(tuple(raw["background"]))
    if background_text is not None:
        background = background + parse_datalog(background_text)
    program = KProgram(
        background=background,
        fluent_decls=tuple(raw["fluents"]),
        action_decls=tuple(raw["actions"]),
        always=tuple(raw["always"]),
        initially=tuple(raw["initially"]),
        query=raw["query"],
        no_concurrency=raw["no_concurrency"],
        secure_plan=raw["secure_plan"],
    )
    return resolve_kinds(program)


# -- kind resolution and typing checks ----------------------------------

class _Resolver:
    def __init__(self, program: KProgram):
        self.fluents: dict[str, int] = {}
        self.actions: dict[str, int] = {}
        for decl, table, other, what in (
                *((d, self.fluents, self.actions, "fluent") for d in program.fluent_decls),
                *((d, self.actions, self.fluents, "action") for d in program.action_decls)):
            name, arity = decl.head.pred, len(decl.head.args)
            if name == EQ or name in other:
                raise KValidationError(f"{name!r} is declared both as fluent and action")
            if table.get(name, arity) != arity:
                raise KValidationError(f"{what} {name!r} declared with different arities")
            table[name] = arity

    def lit(self, lit: Literal, where: str) -> Literal:
        name = lit.pred
        if name in self.fluents:
            kind, arity = FLUENT, self.fluents[name]
        elif name in self.actions:
            kind, arity = ACTION, self.actions[name]
            if lit.negated:
                raise KValidationError(f"action literal {lit} may not be strongly negated ({where})")
        else:
            return replace(lit, kind=TYPE)
        if len(lit.args) != arity:
            raise KValidationError(f"{name!r} expects {arity} argument(s), got {lit} ({where})")
        return replace(lit, kind=kind)

    def lits(self, lits, where, allowed=(FLUENT, ACTION, TYPE)):
        out = tuple(self.lit(l, where) for l in lits)
        for l in out:
            if l.kind not in allowed:
                raise KValidationError(f"{l.kind} literal {l} not allowed in {where}")
        return out

    def head(self, lit: Literal | None, kind: str, where: str) -> Literal | None:
        if lit is None:
            return None
        out = self.lit(lit, where)
        if out.kind != kind:
            raise KValidationError(f"head {lit} of {where} must be a declared {kind}")
        return out

    def statement(self, st: Statement) -> Statement:
        post_kinds = (FLUENT, TYPE)
        if isinstance(st, CausationRule):
            where = str(st)
            return CausationRule(
                self.head(st.head, FLUENT, where),
                self.lits(st.post_pos, where, post_kinds), self.lits(st.post_neg, where, post_kinds),
                self.lits(st.pre_pos, where), self.lits(st.pre_neg, where), st.is_initial)
        if isinstance(st, ExecutabilityCondition):
            where = str(st)
            if st.head.negated:
                raise KValidationError(f"executability head must be positive: {where}")
            return ExecutabilityCondition(self.head(st.head, ACTION, where),
                                          self.lits(st.pre_pos, where), self.lits(st.pre_neg, where))
        where = str(st)
        if st.kind == "nonexecutable":
            literal = self.head(st.literal, ACTION, where)
        elif st.literal is not None:
            literal = self.head(st.literal, FLUENT, where)
        else:
            literal = None
        return Macro(st.kind, literal,
                     self.lits(st.post_pos, where, post_kinds), self.lits(st.post_neg, where, post_kinds),
                     self.lits(st.pre_pos, where), self.lits(st.pre_neg, where), st.is_initial)

    def declaration(self, decl: Declaration) -> Declaration:
        head = self.lit(decl.head, "declaration")
        requires = self.lits(decl.requires, f"requires list of {decl.head}", (TYPE,))
        missing = head.variables() - set().union(*(r.variables() for r in requires))
        if missing:
            raise KValidationError(
                f"variables {sorted(missing)} of {decl.head} do not occur in its requires list")
        return Declaration(head, requires)


def resolve_kinds(program: KProgram) -> KProgram:
    """Attach fluent/action/type kinds to every literal and validate typing."""
    r = _Resolver(program)
    for rule in program.background.rules:
        for lit in (rule.head, *rule.pos, *rule.neg):
            if lit.pred in r.fluents or lit.pred in r.actions:
                raise KValidationError(f"background rule {rule} mentions dynamic predicate {lit.pred!r}")
    query = program.query
    if query is not None:
        pos = r.lits(query.goal_pos, "goal", (FLUENT,))
        neg = r.lits(query.goal_neg, "goal", (FLUENT,))
        for lit in pos + neg:
            if not lit.is_ground():
                raise KValidationError(f"goal literal {lit} must be variable-free")
        query = Query(pos, neg, query.plan_length)
    return replace(
        program,
        fluent_decls=tuple(r.declaration(d) for d in program.fluent_decls),
        action_decls=tuple(r.declaration(d) for d in program.action_decls),
        always=tuple(r.statement(s) for s in program.always),
        initially=tuple(r.statement(s) for s in program.initially),
        query=query,
    )


def parse_file(path, background_path=None) -> KProgram:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    bg = None
    if background_path is not None:
        with open(background_path, encoding="utf-8") as fh:
            bg = fh.read()
    return parse(text, bg)
