"""Blocksworld instances: random tower configurations and unsolvable variants."""
from __future__ import annotations

import random
import string
from functools import lru_cache
from math import comb, factorial

from ..domains import BLOCKSWORLD, load_domain
from ..pddl import Atom, Problem, parse_problem
from ..search import SOLVABLE, UNSOLVABLE, SearchLimits, optimal_length, plan_exists


class GenerationError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def count_configurations(n: int) -> int:
    """Number of ways to arrange n labelled blocks into towers on a table."""
    if n == 0:
        return 1
    return sum(comb(n - 1, s - 1) * factorial(s) * count_configurations(n - s) for s in range(1, n + 1))


def random_towers(blocks: list, rng: random.Random) -> list:
    """Draw a configuration uniformly among all tower arrangements of ``blocks``.

    Each tower is listed bottom to top; towers are ordered by their first
    member in ``blocks``.
    """
    remaining = list(blocks)
    towers = []
    while remaining:
        n = len(remaining)
        first, rest = remaining[0], remaining[1:]
        weights = [comb(n - 1, s - 1) * factorial(s) * count_configurations(n - s) for s in range(1, n + 1)]
        r = rng.randrange(count_configurations(n))
        size = 1
        for size, w in enumerate(weights, 1):
            if r < w:
                break
            r -= w
        members = [first] + rng.sample(rest, size - 1)
        rng.shuffle(members)
        towers.append(members)
        chosen = set(members)
        remaining = [b for b in remaining if b not in chosen]
    return towers


def tower_atoms(towers: list) -> tuple:
    """(ontable, on, clear) atom lists for a configuration."""
    ontable, on, clear = [], [], []
    for t in towers:
        ontable.append(Atom("ontable", (t[0],)))
        for below, above in zip(t, t[1:]):
            on.append(Atom("on", (above, below)))
        clear.append(Atom("clear", (t[-1],)))
    return ontable, on, clear


def block_names(n: int) -> list:
    if n <= 26:
        return list(string.ascii_lowercase[:n])
    return [f"b{i}" for i in range(n)]


def render_blocksworld_problem(name: str, blocks: list, towers: list, goal: list) -> str:
    """Problem text in the layout of the classic blocksworld generator."""
    position = {}
    for t in towers:
        position[t[0]] = f"(ontable {t[0]})"
        for below, above in zip(t, t[1:]):
            position[above] = f"(on {above} {below})"
    tops = {t[-1] for t in towers}
    lines = [f"(define(problem {name})", "(:domain blocksworld-4ops)", f"(:objects {' '.join(blocks)} )", "(:init", "(handempty)"]
    lines += [position[b] for b in blocks]
    lines += [f"(clear {b})" for b in blocks if b in tops]
    lines += [")", "(:goal", "(and"]
    goal_lines = [str(a) for a in goal]
    goal_lines[-1] += ")"
    lines += goal_lines + [")", ")"]
    return "\n".join(lines) + "\n"


def _goal_atoms(towers: list, blocks: list, partial: bool, rng: random.Random) -> list:
    ontable, on, _ = tower_atoms(towers)
    order = {b: i for i, b in enumerate(blocks)}
    atoms = sorted(on, key=lambda a: order[a.args[0]]) or sorted(ontable, key=lambda a: order[a.args[0]])
    if partial and len(atoms) > 1:
        k = rng.randint(1, len(atoms))
        picked = set(rng.sample(range(len(atoms)), k))
        atoms = [a for i, a in enumerate(atoms) if i in picked]
    return atoms


def gen_blocksworld(n_blocks: int, seed, partial_goal: bool = False, allow_trivial: bool = False,
                    limits: SearchLimits | None = None, max_attempts: int = 1000) -> Problem:
    """A random instance whose goal comes from an independent second configuration."""
    if n_blocks < 2:
        raise ValueError("need at least two blocks")
    rng = random.Random(seed)
    domain = load_domain(BLOCKSWORLD)
    blocks = block_names(n_blocks)
    for _ in range(max_attempts):
        init_towers = random_towers(blocks, rng)
        goal = _goal_atoms(random_towers(blocks, rng), blocks, partial_goal, rng)
        ontable, on, clear = tower_atoms(init_towers)
        if not allow_trivial and set(goal) <= set(ontable + on):
            continue
        text = render_blocksworld_problem(f"BW-rand-{n_blocks}", blocks, init_towers, goal)
        problem = parse_problem(text, domain)
        if plan_exists(domain, problem, limits) != SOLVABLE:
            continue
        return problem
    raise GenerationError("no acceptable blocksworld instance within the attempt budget")


def gen_hard_blocksworld(n_blocks: int, seed, min_length: int = 20, max_length: int = 40,
                         partial_goal: bool = False, limits: SearchLimits | None = None,
                         max_attempts: int = 200) -> tuple:
    """Resample until the optimal plan length lies in [min_length, max_length].

    Returns ``(problem, optimal_length)``.  Optimal lengths come from
    breadth-first search, so this is only practical up to about eight blocks.
    """
    rng = random.Random(seed)
    domain = load_domain(BLOCKSWORLD)
    for _ in range(max_attempts):
        problem = gen_blocksworld(n_blocks, rng.getrandbits(64), partial_goal=partial_goal, limits=limits)
        length = optimal_length(domain, problem, limits)
        if min_length <= length <= max_length:
            return problem, length
    raise GenerationError("no instance of the requested difficulty within the attempt budget")


def _structure(goal) -> tuple:
    on = {}
    under = {}
    ontable = set()
    for a in goal:
        if a.predicate == "on":
            on.setdefault(a.args[0], set()).add(a.args[1])
            under.setdefault(a.args[1], set()).add(a.args[0])
        elif a.predicate == "ontable":
            ontable.add(a.args[0])
    return on, under, ontable


def inconsistent_additions(problem: Problem) -> list:
    """All on(x, y) atoms that make the goal conjunction structurally impossible."""
    blocks = list(problem.object_names)
    on, under, ontable = _structure(problem.goal)
    goal = set(problem.goal)
    out = []
    for x in blocks:
        for y in blocks:
            if x == y:
                continue
            atom = Atom("on", (x, y))
            if atom in goal:
                continue
            reasons = (
                x in ontable,  # x both on the table and on y
                bool(on.get(x, set()) - {y}),  # x on two blocks
                bool(under.get(y, set()) - {x}),  # two blocks on y
                _reaches(on, y, x),  # y is (transitively) on x, so a cycle
            )
            if any(reasons):
                out.append(atom)
    return out


def _reaches(on: dict, start: str, target: str) -> bool:
    seen = set()
    stack = [start]
    while stack:
        b = stack.pop()
        if b == target:
            return True
        if b in seen:
            continue
        seen.add(b)
        stack.extend(on.get(b, ()))
    return False


def mutate_unsolvable(problem: Problem, seed, limits: SearchLimits | None = None) -> Problem:
    """Add one on(x, y) goal atom that makes the instance unsolvable."""
    domain = load_domain(BLOCKSWORLD)
    candidates = inconsistent_additions(problem)
    if not candidates:
        raise GenerationError("no inconsistent on(x, y) atom is available")
    rng = random.Random(seed)
    rng.shuffle(candidates)
    for atom in candidates:
        mutated = Problem(problem.name, problem.domain_name, problem.objects, problem.init, problem.goal + (atom,))
        text = _rewrite_goal(problem, mutated.goal)
        mutated = parse_problem(text, domain)
        if plan_exists(domain, mutated, limits) == UNSOLVABLE:
            return mutated
    raise GenerationError("no candidate atom could be confirmed unsolvable")


def _rewrite_goal(problem: Problem, goal: tuple) -> str:
    """Re-render a blocksworld problem with a new goal, keeping its initial layout."""
    blocks = list(problem.object_names)
    state = set(problem.init)
    below = {a.args[0]: a.args[1] for a in state if a.predicate == "on"}
    towers = []
    for b in blocks:
        if Atom("ontable", (b,)) in state:
            tower = [b]
            above = {v: k for k, v in below.items()}
            while tower[-1] in above:
                tower.append(above[tower[-1]])
            towers.append(tower)
    name = problem.source.split("(problem", 1)[1].split(")", 1)[0].strip() if problem.source else problem.name
    return render_blocksworld_problem(name, blocks, towers, list(goal))
