"""One interface over the four answer kinds: plans, colorings, trips and meeting times.

Each task knows how to render its first prompt, judge a raw response with a
sound checker, turn a failed check into feedback, and produce a correct
answer on its own (the oracle).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .instances.calendar import render_calendar_prompt, render_calendar_solution
from .instances.graphs import Graph, find_coloring
from .instances.prompts import NATURAL, PDDL, render_natural_plan, render_prompt, vocabulary
from .instances.trip import example_specs, render_trip_prompt, render_trip_solution, render_trip_task, solve_trip
from .obfuscation import ObfuscationMap
from .pddl import Domain, Plan, Problem, render_plan
from .search import GREEDY, SOLVED, SearchLimits, solve
from .validator import (
    EMPTY_PLAN, IMPOSSIBILITY_CLAIM, adjudicate, build_backprompt, classify_response, validate_plan,
)
from .verifiers.calendar import CalendarParseError, calendar_feedback, parse_calendar, solve_calendar, verify_calendar
from .verifiers.coloring import coloring_feedback, parse_coloring, render_coloring_answer, render_coloring_prompt, verify_coloring
from .verifiers.trip import build_trip_backprompt, parse_trip, trip_feedback, verify_trip

PLANNING, COLORING, TRIP, CALENDAR = "planning", "coloring", "trip", "calendar"
IMPOSSIBLE_ANSWER = "No plan exists: the goal is unsolvable from the given initial state."
CLAIM_REJECTED = "The claim that no plan exists is incorrect. Provide a plan.\n\n[PLAN]\n"


@dataclass(frozen=True)
class PlanningInstance:
    domain: Domain
    problem: Problem
    solvable: bool = True
    obfuscation: ObfuscationMap | None = None
    example: tuple | None = None  # (problem, plan) for one-shot prompts


@dataclass(frozen=True)
class ColoringInstance:
    graph: Graph
    k: int


@dataclass(frozen=True)
class Task:
    id: str
    kind: str
    instance: object
    style: str = PDDL
    shots: int = 0


@dataclass(frozen=True)
class Evaluation:
    valid: bool
    artifact: str
    report: dict = field(default_factory=dict)
    feedback: str | None = None
    outcome: str | None = None


def first_prompt(task: Task) -> str:
    inst = task.instance
    if task.kind == PLANNING:
        return render_prompt(inst.domain, inst.problem, task.style, task.shots, inst.example, inst.obfuscation)
    if task.kind == COLORING:
        return render_coloring_prompt(inst.graph, inst.k)
    if task.kind == TRIP:
        return render_trip_prompt(inst, task.shots)
    if task.kind == CALENDAR:
        return render_calendar_prompt(inst, task.shots)
    raise ValueError(f"unknown task kind {task.kind!r}")


def _evaluate_planning(inst: PlanningInstance, response: str, translator=None) -> Evaluation:
    """On an unsolvable instance only an impossibility claim is accepted.

    Any other answer is validated as a plan, so the feedback is the usual
    plan criticism and never reveals that the instance is unsolvable.
    ``translator`` is tried only when the rules find neither steps nor a claim.
    """
    cls = classify_response(response, inst.domain, inst.problem)
    if cls.kind == EMPTY_PLAN and translator is not None and response.strip():
        cls = classify_response(translator(response), inst.domain, inst.problem)
    plan = cls.extracted if cls.extracted is not None else Plan()
    report = validate_plan(inst.domain, inst.problem, plan)
    if inst.solvable:
        outcome = adjudicate(True, cls, report)
        ok = report.valid and cls.kind != IMPOSSIBILITY_CLAIM
    else:
        outcome = adjudicate(False, cls)
        ok = cls.kind == IMPOSSIBILITY_CLAIM
    if ok:
        fb = None
    elif report.valid:
        fb = CLAIM_REJECTED
    else:
        fb = build_backprompt(report)
    rep = report.to_dict()
    rep["response_kind"] = cls.kind
    return Evaluation(ok, render_plan(plan), rep, fb, outcome)


def evaluate(task: Task, response: str, translator=None) -> Evaluation:
    inst = task.instance
    if task.kind == PLANNING:
        return _evaluate_planning(inst, response, translator)
    if task.kind == COLORING:
        coloring = parse_coloring(response)
        report = verify_coloring(inst.graph, inst.k, coloring)
        artifact = "\n".join(f"{v}: {c}" for v, c in sorted(coloring.assignment.items()))
        fb = None if report.valid else coloring_feedback(inst.graph, report)
        return Evaluation(report.valid, artifact, report.to_dict(), fb)
    if task.kind == TRIP:
        parsed = parse_trip(response)
        report = verify_trip(inst, parsed)
        return Evaluation(report.valid, str(parsed.as_list()), report.to_dict(),
                          None if report.valid else trip_feedback(report))
    if task.kind == CALENDAR:
        try:
            slot = parse_calendar(response)
        except CalendarParseError as exc:
            return Evaluation(False, "", {"error": str(exc)},
                              f"{exc}.\nAnswer in the form 'SOLUTION: Here is the proposed time: Monday, 9:00 - 9:30'.\n")
        report = verify_calendar(inst, slot)
        return Evaluation(report.valid, str(slot), report.to_dict(),
                          None if report.valid else calendar_feedback(report))
    raise ValueError(f"unknown task kind {task.kind!r}")


def next_prompt(task: Task, base_prompt: str, response: str, evaluation: Evaluation) -> str:
    """Prompt for the following attempt: ``base_prompt`` plus the latest answer and its feedback.

    Trip tasks use a self-contained correction prompt instead, which quotes the
    query, the failed answer and the parser's reading of it.
    """
    if evaluation.valid:
        raise ValueError("no follow-up prompt after a valid answer")
    if task.kind == TRIP:
        parsed = parse_trip(response)
        shots = example_specs(task.shots, len(task.instance.cities)) if task.shots else ()
        return build_trip_backprompt(render_trip_task(task.instance), response, parsed,
                                     verify_trip(task.instance, parsed), shots)
    return base_prompt + response.strip("\n") + "\n\n" + evaluation.feedback


def oracle_answer(task: Task, limits: SearchLimits | None = None) -> str:
    inst = task.instance
    if task.kind == PLANNING:
        if not inst.solvable:
            return IMPOSSIBLE_ANSWER
        res = solve(inst.domain, inst.problem, GREEDY, limits)
        if res.status != SOLVED:
            raise RuntimeError(f"oracle could not solve {task.id}: {res.status}")
        if task.style == NATURAL:
            return render_natural_plan(res.plan, vocabulary(inst.domain, inst.obfuscation))
        return render_plan(res.plan)
    if task.kind == COLORING:
        colors = find_coloring(inst.graph, inst.k)
        if colors is None or (inst.graph.n and len(set(colors)) != inst.k):
            raise RuntimeError(f"no coloring with exactly {inst.k} colors for {task.id}")
        return render_coloring_answer(colors)
    if task.kind == TRIP:
        segments = solve_trip(inst)
        if segments is None:
            raise RuntimeError(f"trip spec {task.id} has no valid plan")
        return render_trip_solution(segments, inst.total_days)
    if task.kind == CALENDAR:
        slot = solve_calendar(inst)
        if slot is None:
            raise RuntimeError(f"calendar spec {task.id} has no free slot")
        return render_calendar_solution(slot)
    raise ValueError(f"unknown task kind {task.kind!r}")

