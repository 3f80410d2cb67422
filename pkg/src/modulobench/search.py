"""Complete forward state-space search used as ground truth.

States are compiled to integer bitmasks over the fluent atoms, and actions whose
static preconditions are false are dropped during grounding.  Duplicate states
are pruned with a closed set keyed on the bitmask, which is a canonical
encoding of the state.
"""
from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .pddl import Domain, Plan, Problem, ground_actions
from .validator import validate_plan

SOLVED = "Solved"
UNSOLVABLE = "Unsolvable"
LIMIT_EXCEEDED = "LimitExceeded"

SOLVABLE = "Solvable"
UNKNOWN = "Unknown"

BREADTH_FIRST = "breadth-first"
GREEDY = "greedy-goal-count"


@dataclass(frozen=True)
class SearchLimits:
    max_expanded_nodes: int = 2_000_000
    max_seconds: float = 120.0

    def __post_init__(self):
        if self.max_expanded_nodes <= 0 or self.max_seconds <= 0:
            raise ValueError("search limits must be positive")


@dataclass(frozen=True)
class SearchResult:
    status: str
    plan: Plan | None
    expanded_nodes: int
    elapsed_s: float

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


class SearchLimitExceeded(RuntimeError):
    def __init__(self, result: SearchResult):
        self.result = result
        super().__init__(f"search limit reached after {result.expanded_nodes} expansions")


class ProblemUnsolvable(RuntimeError):
    pass


class _Op(NamedTuple):
    pre: int
    add: int
    dele: int
    step: tuple


class Compiled:
    """A problem grounded into bitmask operators."""

    def __init__(self, domain: Domain, problem: Problem):
        actions = ground_actions(domain, problem, prune_static=True)
        statics = domain.static_predicates
        index: dict = {}

        def bit(atom) -> int:
            if atom not in index:
                index[atom] = len(index)
            return 1 << index[atom]

        def mask(atoms) -> int:
            m = 0
            for a in atoms:
                if a.predicate not in statics:
                    m |= bit(a)
            return m

        self.init = mask(problem.init)
        self.goal_atoms = []
        self.goal_unreachable = any(a.predicate in statics and a not in problem.initial_state for a in problem.goal)
        for a in problem.goal:
            if a.predicate not in statics:
                self.goal_atoms.append(bit(a))
        self.goal = 0
        for b in self.goal_atoms:
            self.goal |= b
        self.ops = []
        for act in actions:
            add = mask(act.add)
            dele = mask(act.dele) & ~add  # add wins when an atom is both added and deleted
            self.ops.append(_Op(mask(act.pre), add, dele, (act.name, act.args)))
        self.atoms = {i: a for a, i in index.items()}

    def successors(self, state: int):
        for op in self.ops:
            if state & op.pre == op.pre:
                yield op, (state & ~op.dele) | op.add

    def h_goal_count(self, state: int) -> int:
        return sum(1 for b in self.goal_atoms if not state & b)


def _plan_from(parents: dict, state: int) -> Plan:
    steps = []
    while True:
        prev = parents[state]
        if prev is None:
            break
        state, step = prev
        steps.append(step)
    steps.reverse()
    return Plan.of(steps)


def solve(domain: Domain, problem: Problem, strategy: str = BREADTH_FIRST,
          limits: SearchLimits | None = None, compiled: Compiled | None = None) -> SearchResult:
    limits = limits or SearchLimits()
    t0 = time.perf_counter()
    c = compiled or Compiled(domain, problem)
    goal = c.goal

    def finish(status, plan, expanded):
        if plan is not None:
            report = validate_plan(domain, problem, plan)
            if not report.valid:
                raise AssertionError(f"search produced an invalid plan: {report}")
        return SearchResult(status, plan, expanded, time.perf_counter() - t0)

    if c.goal_unreachable:
        return finish(UNSOLVABLE, None, 0)
    parents: dict = {c.init: None}
    expanded = 0
    if strategy == BREADTH_FIRST:
        frontier: deque = deque([c.init])
        pop = frontier.popleft
        push = frontier.append
    elif strategy == GREEDY:
        heap: list = [(c.h_goal_count(c.init), 0, c.init)]
        counter = 1

        def pop():
            return heapq.heappop(heap)[2]

        def push(s):
            nonlocal counter
            heapq.heappush(heap, (c.h_goal_count(s), counter, s))
            counter += 1

        frontier = heap
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    if c.init & goal == goal:
        return finish(SOLVED, Plan(), 1)
    deadline = t0 + limits.max_seconds
    while frontier:
        if expanded >= limits.max_expanded_nodes or (expanded & 1023 == 0 and time.perf_counter() > deadline):
            return finish(LIMIT_EXCEEDED, None, expanded)
        state = pop()
        expanded += 1
        for op, nxt in c.successors(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, op.step)
            if nxt & goal == goal:
                return finish(SOLVED, _plan_from(parents, nxt), expanded)
            push(nxt)
    return finish(UNSOLVABLE, None, expanded)


def optimal_length(domain: Domain, problem: Problem, limits: SearchLimits | None = None) -> int:
    res = solve(domain, problem, BREADTH_FIRST, limits)
    if res.status == SOLVED:
        return len(res.plan)
    if res.status == UNSOLVABLE:
        raise ProblemUnsolvable(problem.name)
    raise SearchLimitExceeded(res)


def plan_exists(domain: Domain, problem: Problem, limits: SearchLimits | None = None) -> str:
    res = solve(domain, problem, GREEDY, limits)
    return {SOLVED: SOLVABLE, UNSOLVABLE: UNSOLVABLE}.get(res.status, UNKNOWN)
