"""Golden fixtures: K encodings of worked examples with their expected results.

Each fixture is one JSON file in ``data/`` naming a domain file, an optional
background file, default search settings, and a list of checks.  Every check
carries a ``provenance`` tag saying where its expected value comes from:
``published`` (stated alongside the example's listing), ``derived`` (worked
out independently by hand or by an independent oracle), or ``trivial``.

Check kinds:

``plans_equal``      the set of plans found equals ``plans``
``plans_contain``    every plan in ``plans`` is found
``count``            exactly ``value`` plans are found
``exists``           some plan exists (``value`` true/false)
``secure``           ``plan`` is (not) secure; optional ``failure`` kind,
                     ``initial_contains``/``initial_excludes`` literals
``optimistic``       ``plan`` is (not) optimistic
``initial_states``   number of legal initial states
``optimistic_secure``  every optimistic plan is secure

Any check may override ``plan_length``, ``mode`` and ``planning``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import KError
from ..ground import GroundDomain, typed_ground
from ..parser import parse
from ..plan import Plan, is_optimistic, optimistic_plans
from ..secure import check_secure, secure_plans
from ..syntax import Query
from ..transition import legal_initial_states

DATA_DIR = Path(__file__).parent / "data"
PROVENANCE_TAGS = ("published", "derived", "trivial")
CHECK_KINDS = ("plans_equal", "plans_contain", "count", "exists", "secure", "optimistic",
               "initial_states", "optimistic_secure")


class FixtureError(KError):
    """A fixture file is missing or malformed."""


@dataclass(frozen=True)
class Fixture:
    name: str
    domain: str
    background: str | None
    mode: str
    planning: str
    plan_length: int | None
    checks: tuple[dict, ...]
    path: Path | None = None

    def domain_path(self) -> Path:
        return _resolve(self.domain, self.path)

    def background_path(self) -> Path | None:
        return None if self.background is None else _resolve(self.background, self.path)


@dataclass
class FixtureReport:
    name: str
    passed: bool = True
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.passed = False
        self.failures.append(msg)

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAILED"
        out = f"{self.name}: {status} ({self.checks} checks)"
        return "\n  ".join([out, *self.failures])


def _resolve(name: str, origin: Path | None) -> Path:
    p = Path(name)
    if not p.is_absolute():
        p = (origin.parent if origin else DATA_DIR) / p
    return p


def fixture_from_dict(d: dict, path: Path | None = None) -> Fixture:
    try:
        checks = tuple(d["checks"])
        fx = Fixture(d["name"], d["domain"], d.get("background"), d.get("mode", "sequential"),
                     d.get("planning", "secure"), d.get("plan_length"), checks, path)
    except (KeyError, TypeError) as e:
        raise FixtureError(f"malformed fixture {path or d!r}: missing {e}") from None
    for c in checks:
        if c.get("check") not in CHECK_KINDS:
            raise FixtureError(f"{fx.name}: unknown check {c.get('check')!r}")
        if c.get("provenance") not in PROVENANCE_TAGS:
            raise FixtureError(f"{fx.name}: check {c['check']!r} lacks a provenance tag")
    return fx


def load_fixture(path: str | Path) -> Fixture:
    path = Path(path)
    if not path.is_file():
        path = DATA_DIR / f"{path}.json" if path.suffix != ".json" else DATA_DIR / path.name
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        raise FixtureError(f"fixture file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise FixtureError(f"malformed fixture {path}: {e}") from None
    return fixture_from_dict(d, path)


def list_fixtures() -> list[Fixture]:
    return [load_fixture(p) for p in sorted(DATA_DIR.glob("*.json"))]


def load_domain(fx: Fixture) -> GroundDomain:
    try:
        text = fx.domain_path().read_text()
        bg = fx.background_path()
        bg_text = bg.read_text() if bg is not None else None
    except FileNotFoundError as e:
        raise FixtureError(f"{fx.name}: file not found: {e.filename}") from None
    return typed_ground(parse(text, bg_text))


def _plans(gd: GroundDomain, query: Query, mode: str, planning: str) -> list[Plan]:
    if planning == "secure":
        return list(secure_plans(gd, query, mode))
    if planning == "optimistic":
        return [p for p, _ in optimistic_plans(gd, query, mode)]
    raise FixtureError(f"unknown planning kind {planning!r}")


def _key(steps) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(sorted(a.replace(" ", "") for a in A)) for A in steps)


def run_fixture(fx: Fixture | str | Path) -> FixtureReport:
    """Run every check of a fixture and report which ones fail."""
    if not isinstance(fx, Fixture):
        fx = load_fixture(fx)
    gd = load_domain(fx)
    if gd.query is None:
        raise FixtureError(f"{fx.name}: domain has no goal")
    report = FixtureReport(fx.name)
    memo: dict[tuple, list[Plan]] = {}

    for c in fx.checks:
        report.checks += 1
        kind = c["check"]
        n = c.get("plan_length", fx.plan_length)
        n = gd.query.plan_length if n is None else n
        q = Query(gd.query.goal_pos, gd.query.goal_neg, n)
        mode = c.get("mode", fx.mode)
        planning = c.get("planning", fx.planning)
        label = f"{kind} ({planning}, {mode}, length {n})"

        def found() -> list[Plan]:
            k = (n, mode, planning)
            if k not in memo:
                memo[k] = _plans(gd, q, mode, planning)
            return memo[k]

        if kind in ("plans_equal", "plans_contain"):
            got = {p.key() for p in found()}
            want = {_key(p) for p in c["plans"]}
            if kind == "plans_equal" and got != want:
                report.fail(f"{label}: expected {sorted(want)}, got {sorted(got)}")
            if kind == "plans_contain" and not want <= got:
                report.fail(f"{label}: missing {sorted(want - got)}")
        elif kind == "count":
            if len(found()) != c["value"]:
                report.fail(f"{label}: expected {c['value']} plans, got {len(found())}")
        elif kind == "exists":
            gen = (secure_plans(gd, q, mode, limit=1) if planning == "secure"
                   else (p for p, _ in optimistic_plans(gd, q, mode, limit=1)))
            if (next(gen, None) is not None) != c["value"]:
                report.fail(f"{label}: expected existence {c['value']}")
        elif kind == "secure":
            plan = Plan.from_names(gd, c["plan"])
            verdict = check_secure(gd, plan, Query(q.goal_pos, q.goal_neg, plan.length))
            if verdict.secure != c["value"]:
                report.fail(f"{label}: {plan} expected secure={c['value']}")
            elif not verdict.secure:
                cex = verdict.counterexample
                if "failure" in c and cex.kind.value != c["failure"]:
                    report.fail(f"{label}: expected failure {c['failure']}, got {cex.kind.value}")
                names = set() if cex.initial is None else {str(l) for l in cex.initial}
                for lit in c.get("initial_contains", ()):
                    if lit not in names:
                        report.fail(f"{label}: counterexample initial state lacks {lit}")
                for lit in c.get("initial_excludes", ()):
                    if lit in names:
                        report.fail(f"{label}: counterexample initial state contains {lit}")
        elif kind == "optimistic":
            plan = Plan.from_names(gd, c["plan"])
            ok = is_optimistic(gd, plan, Query(q.goal_pos, q.goal_neg, plan.length)) is not None
            if ok != c["value"]:
                report.fail(f"{label}: {plan} expected optimistic={c['value']}")
        elif kind == "initial_states":
            got_n = len(legal_initial_states(gd))
            if got_n != c["value"]:
                report.fail(f"{label}: expected {c['value']} initial states, got {got_n}")
        elif kind == "optimistic_secure":
            for plan, _ in optimistic_plans(gd, q, mode):
                if not check_secure(gd, plan, q).secure:
                    report.fail(f"{label}: optimistic plan {plan} is not secure")
                    break
    return report


__all__ = ["Fixture", "FixtureReport", "FixtureError", "DATA_DIR", "load_fixture",
           "list_fixtures", "load_domain", "run_fixture", "fixture_from_dict"]
