"""Command-line driver: ``kplan solve`` and ``kplan corpus``.

Exit codes: 0 plans found / plan secure, 1 none found / plan insecure,
2 input error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import KError, ResourceLimitError
from .ground import GroundDomain, dump_ground, typed_ground
from .parser import parse
from .plan import CONCURRENT, SEQUENTIAL, Plan, is_optimistic, optimistic_plans
from .secure import check_secure, secure_plans
from .syntax import Query
from .transition import (
    executable_action_sets, format_state, legal_initial_states, plain_report, successors,
)

EXIT_OK, EXIT_NONE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    domain: Path
    background: Path | None = None
    secure: bool = False
    check_plan: Path | None = None
    mode: str = SEQUENTIAL
    max_plans: int | None = 1
    plan_length: int | None = None
    max_states: int = 10**6
    max_action_sets: int = 200_000
    strategy: str = "belief"
    json: bool = False
    dump_ground: bool = False
    probe: bool = False

    def __post_init__(self):
        for name in ("max_plans", "max_states", "max_action_sets"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.plan_length is not None and self.plan_length < 0:
            raise ValueError("plan length must be non-negative")


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kplan", description="Planner for the action language K.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find plans for a K planning problem")
    s.add_argument("file", type=Path, help="K program (.k)")
    s.add_argument("--background", type=Path, help="background knowledge (Datalog)")
    s.add_argument("--secure", action="store_true", help="compute secure (conformant) plans only")
    s.add_argument("--check-plan", type=Path, metavar="PLANFILE",
                   help="check a plan given in 'STEP k: {a, b}' format instead of planning")
    m = s.add_mutually_exclusive_group()
    m.add_argument("--sequential", dest="mode", action="store_const", const=SEQUENTIAL,
                   help="at most one action per step (default)")
    m.add_argument("--concurrent", dest="mode", action="store_const", const=CONCURRENT,
                   help="allow several actions per step")
    n = s.add_mutually_exclusive_group()
    n.add_argument("--max-plans", type=_positive, default=1, metavar="N",
                   help="stop after N plans (default 1)")
    n.add_argument("--all", dest="max_plans", action="store_const", const=None,
                   help="enumerate all plans")
    s.add_argument("--plan-length", type=_nonneg, metavar="N", help="override the query's plan length")
    s.add_argument("--max-states", type=_positive, default=10**6, metavar="N",
                   help="cap on the size of a state set during search")
    s.add_argument("--max-action-sets", type=_positive, default=200_000, metavar="N",
                   help="cap on candidate action sets examined in one state")
    s.add_argument("--strategy", choices=("belief", "filter"), default="belief",
                   help="secure search: belief-state search or filtering optimistic plans")
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.add_argument("--dump-ground", action="store_true", help="print the ground domain and exit")
    s.add_argument("--probe", action="store_true", help="print domain diagnostics and exit")

    c = sub.add_parser("corpus", help="run the bundled golden fixtures")
    c.add_argument("names", nargs="*", help="fixture names (default: all)")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(domain=ns.file, background=ns.background, secure=ns.secure,
                     check_plan=ns.check_plan, mode=ns.mode or SEQUENTIAL, max_plans=ns.max_plans,
                     plan_length=ns.plan_length, max_states=ns.max_states,
                     max_action_sets=ns.max_action_sets, strategy=ns.strategy, json=ns.json,
                     dump_ground=ns.dump_ground, probe=ns.probe)


def _load(cfg: RunConfig) -> GroundDomain:
    text = cfg.domain.read_text()
    bg = cfg.background.read_text() if cfg.background else None
    return typed_ground(parse(text, bg))


def _emit(cfg: RunConfig, out, payload: dict, text: str) -> None:
    if cfg.json:
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write(text)


def _plan_json(plan: Plan) -> list[list[str]]:
    return [list(names) for names in plan.key()]


def _probe(gd: GroundDomain, cfg: RunConfig, out) -> int:
    init = legal_initial_states(gd)
    undetermined = None
    for s in init:
        for A in executable_action_sets(gd, s, cap=cfg.max_action_sets):
            if len(successors(gd, s, A)) > 1:
                undetermined = (s, A)
                break
        if undetermined:
            break
    report = plain_report(gd.program)
    payload = {
        "legal_initial_states": len(init),
        "fluent_instances": len(gd.instances.fluents),
        "action_instances": len(gd.instances.actions),
        "determined_from_initial_states": undetermined is None,
        "plain": report.plain,
        "plain_reasons": list(report.reasons),
        "proper": True if report.plain else None,
    }
    lines = [f"legal initial states: {len(init)}",
             f"fluent instances: {payload['fluent_instances']}",
             f"action instances: {payload['action_instances']}"]
    if undetermined is None:
        lines.append("determined: yes (every executable action set from every legal initial state)")
    else:
        s, A = undetermined
        lines.append(f"determined: no ({{{', '.join(sorted(map(str, A)))}}} from {format_state(s)} "
                     "has several successors)")
    lines.append("plain: " + ("yes" if report.plain else "no"))
    lines += [f"  - {r}" for r in report.reasons]
    lines.append("proper: " + ("yes (plain domains are proper)" if report.plain
                               else "not certified (only plain domains are recognised as proper)"))
    _emit(cfg, out, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def _check(gd: GroundDomain, cfg: RunConfig, out) -> int:
    plan = Plan.parse(gd, cfg.check_plan.read_text())
    q = Query(gd.query.goal_pos, gd.query.goal_neg, plan.length)
    optimistic = is_optimistic(gd, plan, q) is not None
    verdict = check_secure(gd, plan, q, cfg.max_states)
    cex = verdict.counterexample
    payload = {"plans": [_plan_json(plan)], "optimistic": optimistic, "secure": verdict.secure,
               "counterexample": None if cex is None else cex.to_dict()}
    text = plan.to_text() + f"optimistic: {'yes' if optimistic else 'no'}\n"
    text += f"secure: {'yes' if verdict.secure else 'no'}\n"
    if cex is not None:
        text += f"counterexample: {cex}\n"
    _emit(cfg, out, payload, text)
    return EXIT_OK if verdict.secure else EXIT_NONE


def _solve(gd: GroundDomain, cfg: RunConfig, out) -> int:
    query = gd.query
    n = query.plan_length if cfg.plan_length is None else cfg.plan_length
    q = Query(query.goal_pos, query.goal_neg, n)
    secure = cfg.secure or gd.program.secure_plan
    caps = dict(max_states=cfg.max_states, max_action_sets=cfg.max_action_sets)
    if secure:
        plans = list(secure_plans(gd, q, cfg.mode, cfg.max_plans, strategy=cfg.strategy, **caps))
    else:
        plans = [p for p, _ in optimistic_plans(gd, q, cfg.mode, cfg.max_plans, **caps)]

    cex = None
    if secure and not plans:
        # explain the failure on the first optimistic plan, if there is one
        first = next(optimistic_plans(gd, q, cfg.mode, 1, **caps), None)
        if first is not None:
            cex = (first[0], check_secure(gd, first[0], q, cfg.max_states).counterexample)

    payload = {"plans": [_plan_json(p) for p in plans],
               "secure": (bool(plans) if secure else None),
               "counterexample": None if cex is None else {"plan": _plan_json(cex[0]),
                                                           **cex[1].to_dict()}}
    kind = "secure" if secure else "optimistic"
    if plans:
        blocks = [f"PLAN {i} ({kind}):\n{p.to_text()}" for i, p in enumerate(plans, start=1)]
        text = "\n".join(blocks)
    else:
        text = f"no {kind} plan of length {n}\n"
        if cex is not None:
            text += f"optimistic plan {cex[0]} is not secure\ncounterexample: {cex[1]}\n"
    _emit(cfg, out, payload, text)
    return EXIT_OK if plans else EXIT_NONE


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    gd = _load(cfg)
    if cfg.dump_ground:
        out.write(dump_ground(gd))
        return EXIT_OK
    if cfg.probe:
        return _probe(gd, cfg, out)
    if gd.query is None:
        raise KError("the program has no goal section")
    if cfg.check_plan is not None:
        return _check(gd, cfg, out)
    return _solve(gd, cfg, out)


def _corpus(names: list[str], out) -> int:
    from .corpus import list_fixtures, load_fixture, run_fixture

    fixtures = [load_fixture(n) for n in names] if names else list_fixtures()
    failed = 0
    for fx in fixtures:
        report = run_fixture(fx)
        failed += not report.passed
        out.write(str(report) + "\n")
    out.write(f"{len(fixtures) - failed}/{len(fixtures)} fixtures passed\n")
    return EXIT_OK if not failed else EXIT_NONE


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    out, err = sys.stdout, sys.stderr
    try:
        if ns.command == "corpus":
            return _corpus(ns.names, out)
        return run(config_from_args(ns), out)
    except ResourceLimitError as e:
        err.write(f"kplan: resource limit: {e}\n")
        return EXIT_LIMIT
    except (KError, OSError, ValueError) as e:
        err.write(f"kplan: error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
