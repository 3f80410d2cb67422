"""Sound plan validation, backprompt text and response adjudication."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .extraction import ExtractionFailure, extract_plan
from .pddl import Atom, Domain, Plan, Problem, Step, satisfies
from .resources import fill

VALID = "Valid"
PRECONDITION_FAILURE = "PreconditionFailure"
UNKNOWN_ACTION = "UnknownAction"
GOAL_FAILURE = "GoalFailure"

PLAN_ATTEMPT = "PlanAttempt"
EMPTY_PLAN = "EmptyPlan"
IMPOSSIBILITY_CLAIM = "ImpossibilityClaim"

TRUE_NEGATIVE = "TrueNegative"
FALSE_NEGATIVE = "FalseNegative"
WRONG_FULL_PLAN = "WrongFullPlan"
WRONG_EMPTY_PLAN = "WrongEmptyPlan"
CORRECT_PLAN = "CorrectPlan"
INVALID_PLAN = "InvalidPlan"

DEFAULT_IMPOSSIBILITY_CUES = (
    "unsolvable",
    "no plan exists",
    "cannot be accomplished",
    "no sequence of actions",
    "no plan can be provided",
    "impossible to achieve",
    "no valid plan",
)

_EMPTY_MARKERS = re.compile(r"^\s*(?:\.|\[\s*empty(?:\s+plan)?\s*\]|\(\s*\)|empty plan\.?|none\.?)?\s*$", re.I)


@dataclass(frozen=True)
class ValidationReport:
    verdict: str
    step_index: int | None = None
    action: Step | None = None
    unmet: tuple = ()
    missing_goals: tuple = ()
    reason: str | None = field(default=None, compare=False)
    plan_length: int = 0
    states: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def valid(self) -> bool:
        return self.verdict == VALID

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "step_index": self.step_index,
            "action": None if self.action is None else [self.action.name, list(self.action.args)],
            "unmet": [str(a) for a in self.unmet],
            "missing_goals": [str(a) for a in self.missing_goals],
            "reason": self.reason,
            "plan_length": self.plan_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ValidationReport":
        def atoms(xs):
            out = []
            for s in xs:
                parts = s.strip("()").split()
                out.append(Atom(parts[0], tuple(parts[1:])))
            return tuple(out)

        action = d.get("action")
        return cls(
            verdict=d["verdict"],
            step_index=d.get("step_index"),
            action=None if action is None else Step(action[0], tuple(action[1])),
            unmet=atoms(d.get("unmet", ())),
            missing_goals=atoms(d.get("missing_goals", ())),
            reason=d.get("reason"),
            plan_length=d.get("plan_length", 0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _atom_sort_key(a: Atom) -> str:
    return str(a)


def validate_plan(domain: Domain, problem: Problem, plan: Plan | Sequence, trace: bool = False) -> ValidationReport:
    """Simulate ``plan`` from the initial state and report the first problem found."""
    if not isinstance(plan, Plan):
        plan = Plan.of(plan)
    objects = dict(problem.objects)
    state = problem.initial_state
    states = [state] if trace else None
    n = len(plan.steps)
    for i, step in enumerate(plan.steps, 1):
        schema = domain.action_map.get(step.name)
        reason = None
        if schema is None:
            reason = f"unknown action {step.name}"
        elif len(step.args) != schema.arity:
            reason = f"{step.name} takes {schema.arity} arguments, got {len(step.args)}"
        else:
            for (var, ptype), obj in zip(schema.params, step.args):
                if obj not in objects:
                    reason = f"unknown object {obj}"
                    break
                if not domain.is_subtype(objects[obj], ptype):
                    reason = f"object {obj} is not of type {ptype}"
                    break
        if reason is not None:
            return ValidationReport(UNKNOWN_ACTION, i, step, reason=reason, plan_length=n,
                                    states=tuple(states) if trace else None)
        ground = schema.instantiate(step.args)
        unmet = ground.pre - state
        if unmet:
            return ValidationReport(
                PRECONDITION_FAILURE, i, step, unmet=tuple(sorted(unmet, key=_atom_sort_key)),
                plan_length=n, states=tuple(states) if trace else None,
            )
        state = (state - ground.dele) | ground.add
        if trace:
            states.append(state)
    missing = problem.goal_set - state
    if missing:
        return ValidationReport(GOAL_FAILURE, missing_goals=tuple(sorted(missing, key=_atom_sort_key)),
                                plan_length=n, states=tuple(states) if trace else None)
    return ValidationReport(VALID, plan_length=n, states=tuple(states) if trace else None)


def _step_text(step: Step) -> str:
    return " ".join((step.name,) + tuple(step.args))


def build_backprompt(report: ValidationReport, style: str = "pddl-plan") -> str:
    if style != "pddl-plan":
        raise ValueError(f"unknown backprompt style {style!r}")
    if report.verdict == VALID:
        raise ValueError("a valid plan has no backprompt")
    if report.verdict == PRECONDITION_FAILURE:
        return fill("backprompt_precondition.txt", step=report.step_index,
                    action=_step_text(report.action), atom=str(report.unmet[0]))
    if report.verdict == GOAL_FAILURE:
        return fill("backprompt_goal.txt", n_steps=report.plan_length,
                    atoms="\n".join(str(a) for a in report.missing_goals))
    if report.verdict == UNKNOWN_ACTION:
        return fill("backprompt_unknown.txt", step=report.step_index, action=_step_text(report.action))
    raise ValueError(f"unknown verdict {report.verdict!r}")


@dataclass(frozen=True)
class ResponseClass:
    kind: str
    extracted: Plan | None = None


def classify_response(
    text: str,
    domain: Domain | None = None,
    problem: Problem | None = None,
    cues: Iterable[str] = DEFAULT_IMPOSSIBILITY_CUES,
) -> ResponseClass:
    """Sort a raw answer into a plan attempt, an empty plan, or a claim of impossibility.

    A recognisable plan always wins over an impossibility cue.  Text with no
    recognisable step and no cue counts as an empty plan.
    """
    plan = None
    if domain is not None and not _EMPTY_MARKERS.match(text):
        try:
            plan = extract_plan(text, domain, problem)
        except ExtractionFailure:
            plan = None
    if plan is not None and len(plan):
        return ResponseClass(PLAN_ATTEMPT, plan)
    lowered = " ".join(text.lower().split())
    if any(c.lower() in lowered for c in cues):
        return ResponseClass(IMPOSSIBILITY_CLAIM)
    return ResponseClass(EMPTY_PLAN, Plan())


def adjudicate(problem_solvable: bool, response: ResponseClass, report: ValidationReport | None = None) -> str:
    """Label a response using the true/false-negative definitions for unsolvable suites.

    On a solvable instance an empty plan is judged by its validation report, so
    it is correct exactly when the goal already holds initially.
    """
    kind = response.kind
    if not problem_solvable:
        if kind == IMPOSSIBILITY_CLAIM:
            return TRUE_NEGATIVE
        if kind == EMPTY_PLAN:
            return WRONG_EMPTY_PLAN
        return WRONG_FULL_PLAN
    if kind == IMPOSSIBILITY_CLAIM:
        return FALSE_NEGATIVE
    if report is None:
        raise ValueError("a validation report is required to judge a plan on a solvable instance")
    return CORRECT_PLAN if report.valid else INVALID_PLAN


def replay_states(domain: Domain, problem: Problem, plan: Plan) -> list:
    """Step-by-step successor states via the pddl apply function (raises on a bad step)."""
    from .pddl import apply

    state = problem.initial_state
    out = [state]
    for step in plan.steps:
        state = apply(state, domain.action_map[step.name].instantiate(step.args))
        out.append(state)
    return out


def reaches_goal(domain: Domain, problem: Problem, plan: Plan) -> bool:
    try:
        return satisfies(replay_states(domain, problem, plan)[-1], problem.goal)
    except (KeyError, ValueError):
        return False
