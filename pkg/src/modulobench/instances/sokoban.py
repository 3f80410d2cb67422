"""Sokoban instances on a rectangular grid with wall cells.

Instances are built backwards: boxes start on their goal cells and the robot
walks and *pulls* boxes at random.  Every pull is the reverse of a legal push,
so the resulting layout is solvable by construction; the search oracle still
checks it (and bounds its difficulty) before it is emitted.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from ..domains import SOKOBAN, load_domain
from ..pddl import Problem, parse_problem
from ..search import GREEDY, SOLVED, SearchLimits, solve
from .blocksworld import GenerationError

DIRECTIONS = (("left", 0, -1), ("right", 0, 1), ("up", -1, 0), ("down", 1, 0))


@dataclass(frozen=True)
class SokobanConfig:
    grid_w: int = 7
    grid_h: int = 7
    boxes: int = 1
    walls: int = 2
    seed: int = 0

    def __post_init__(self):
        for name, lo, hi in (("grid_w", 4, 10), ("grid_h", 4, 10), ("boxes", 1, 4), ("walls", 1, 4)):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name} must be in [{lo}, {hi}], got {v}")


def cell(r: int, c: int) -> str:
    return f"f{r}-{c}f"


def problem_name(cfg: SokobanConfig) -> str:
    grid = f"grid{cfg.grid_w}" if cfg.grid_w == cfg.grid_h else f"grid{cfg.grid_w}x{cfg.grid_h}"
    return f"typed-sokoban-{grid}-boxes{cfg.boxes}-walls{cfg.walls}"


def render_sokoban_problem(name: str, grid_w: int, grid_h: int, walls: set, boxes: list, robot: tuple,
                           goals: list) -> str:
    """``boxes`` and ``goals`` are (row, col) lists indexed by box number."""
    lines = [f"(define(problem {name})", "(:domain typed-sokoban)", "(:objects ",
             "        up down left right - DIR",
             "        " + " ".join(f"box{i}" for i in range(len(boxes))) + " - BOX"]
    for r in range(grid_h):
        row = "        " + " ".join(cell(r, c) for c in range(grid_w)) + " "
        if r == grid_h - 1:
            row += " - LOC"
        lines.append(row)
    lines += [")", "(:init"]
    for r in range(grid_h):
        for c in range(grid_w):
            for d, dr, dc in DIRECTIONS:
                rr, cc = r + dr, c + dc
                if 0 <= rr < grid_h and 0 <= cc < grid_w:
                    lines.append(f"(adjacent {cell(r, c)} {cell(rr, cc)} {d})")
    lines += [f"(at box{i} {cell(*b)}) " for i, b in enumerate(boxes)]
    occupied = set(boxes)
    for r in range(grid_h):
        for c in range(grid_w):
            if (r, c) == robot:
                lines.append(f"(at-robot {cell(r, c)}) ")
            if (r, c) not in walls and (r, c) not in occupied:
                lines.append(f"(clear {cell(r, c)}) ")
    lines += [")", "(:goal", "(and"]
    lines += [f"(at box{i} {cell(*g)}) " for i, g in enumerate(goals)]
    lines += [")", ")", ")"]
    return "\n".join(lines) + "\n"


def _reverse_walk(cfg: SokobanConfig, walls: set, goals: list, rng: random.Random, steps: int):
    free = [(r, c) for r in range(cfg.grid_h) for c in range(cfg.grid_w) if (r, c) not in walls]
    boxes = list(goals)
    open_cells = [p for p in free if p not in boxes]
    if not open_cells:
        return None
    robot = rng.choice(open_cells)

    def inside(p):
        return 0 <= p[0] < cfg.grid_h and 0 <= p[1] < cfg.grid_w and p not in walls

    for _ in range(steps):
        _, dr, dc = rng.choice(DIRECTIONS)
        back = (robot[0] - dr, robot[1] - dc)
        ahead = (robot[0] + dr, robot[1] + dc)
        if not inside(back) or back in boxes:
            continue
        if ahead in boxes and rng.random() < 0.6:
            boxes[boxes.index(ahead)] = robot  # pull the box along
        robot = back
    return boxes, robot


def gen_sokoban(cfg: SokobanConfig, limits: SearchLimits | None = None, max_attempts: int = 200,
                walk_steps: int | None = None) -> Problem:
    rng = random.Random(cfg.seed)
    domain = load_domain(SOKOBAN)
    limits = limits or SearchLimits(max_expanded_nodes=200_000, max_seconds=20)
    cells = [(r, c) for r in range(cfg.grid_h) for c in range(cfg.grid_w)]
    steps = walk_steps or 8 * (cfg.grid_w + cfg.grid_h)
    for _ in range(max_attempts):
        walls = set(rng.sample(cells, cfg.walls))
        free = [p for p in cells if p not in walls]
        goals = rng.sample(free, cfg.boxes)
        walked = _reverse_walk(cfg, walls, goals, rng, steps)
        if walked is None:
            continue
        boxes, robot = walked
        if boxes == goals:
            continue
        text = render_sokoban_problem(problem_name(cfg), cfg.grid_w, cfg.grid_h, walls, boxes, robot, goals)
        problem = parse_problem(text, domain)
        if solve(domain, problem, GREEDY, limits).status == SOLVED:
            return problem
    raise GenerationError("could not place a solvable sokoban layout within the attempt budget")
