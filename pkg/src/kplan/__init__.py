"""kplan — an interpreter and planner for the action language K."""

from __future__ import annotations

from .datalog import AnswerSet, evaluate, stratify
from .errors import KError, KSyntaxError, KValidationError, ResourceLimitError, StratificationError
from .ground import GroundDomain, LegalInstances, dump_ground, legal_instances, typed_ground
from .macros import expand_macros
from .parser import parse, parse_datalog, parse_file
from .plan import CONCURRENT, SEQUENTIAL, Plan, Trajectory, goal_satisfied, optimistic_plans
from .safety import SafetyViolation, check_safety
from .secure import Counterexample, FailureKind, SecurityVerdict, check_secure, secure_plans
from .syntax import KProgram, Literal, Query, format_program
from .transition import (
    Outcome, Transition, executable_action_sets, is_executable, is_legal_initial_state,
    is_legal_transition, least_state, legal_initial_states, probe_determined, probe_plain,
    reduct, successors,
)


def load(text: str, background: str | None = None) -> GroundDomain:
    """Parse, expand and ground a K program in one call."""
    return typed_ground(parse(text, background))


__all__ = [
    "AnswerSet", "CONCURRENT", "Counterexample", "FailureKind", "GroundDomain", "KError",
    "KProgram", "KSyntaxError", "KValidationError", "LegalInstances", "Literal", "Outcome", "Plan",
    "Query", "ResourceLimitError", "SafetyViolation", "SecurityVerdict", "SEQUENTIAL",
    "StratificationError", "Trajectory", "Transition", "check_safety", "check_secure",
    "dump_ground", "evaluate", "executable_action_sets", "expand_macros", "format_program",
    "goal_satisfied", "is_executable", "is_legal_initial_state", "is_legal_transition",
    "least_state", "legal_initial_states", "legal_instances", "load", "optimistic_plans", "parse",
    "parse_datalog", "parse_file", "probe_determined", "probe_plain", "reduct", "secure_plans",
    "stratify", "successors", "typed_ground",
]
