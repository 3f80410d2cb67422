"""Logistics instances: packages moved between cities by trucks and airplanes."""
from __future__ import annotations

import random

from ..domains import LOGISTICS, load_domain
from ..pddl import Problem, parse_problem
from ..search import SOLVABLE, SearchLimits, plan_exists
from .blocksworld import GenerationError


def render_logistics_problem(name: str, n_cities: int, locs_per_city: int, airplanes: list,
                             trucks: list, packages: list, goals: list) -> str:
    """``airplanes``/``trucks``/``packages`` hold (object, location); ``goals`` holds (package, location)."""
    cities = [f"c{c}" for c in range(n_cities)]
    locations = [f"l{c}-{i}" for c in range(n_cities) for i in range(locs_per_city)]
    pad = "          "
    lines = [f"(define(problem {name})", "(:domain logistics-strips)"]
    lines.append("(:objects " + " ".join(a for a, _ in airplanes) + " ")
    lines.append(pad + " ".join(cities) + " ")
    lines.append(pad + " ".join(t for t, _ in trucks) + " ")
    lines.append(pad + " ".join(locations) + " ")
    lines.append(pad + " ".join(p for p, _ in packages) + " ")
    lines += [")", "(:init"]
    lines += [f"    (AIRPLANE {a})" for a, _ in airplanes]
    lines += [f"    (CITY {c})" for c in cities]
    lines += [f"    (TRUCK {t})" for t, _ in trucks]
    for loc in locations:
        city = "c" + loc[1:].split("-")[0]
        lines += [f"    (LOCATION {loc})", f"    (in-city  {loc} {city})"]
    lines += [f"    (AIRPORT l{c}-0)" for c in range(n_cities)]
    lines += [f"    (OBJ {p})" for p, _ in packages]
    lines += [f"    (at {t} {loc})" for t, loc in trucks]
    lines += [f"    (at {p} {loc})" for p, loc in packages]
    lines += [f"    (at {a} {loc})" for a, loc in airplanes]
    lines += [")", "(:goal", "    (and"]
    lines += [f"        (at {p} {loc})" for p, loc in goals]
    lines += ["    )", ")", ")"]
    return "\n".join(lines) + "\n"


def gen_logistics(n_cities: int, locs_per_city: int, packages: int, airplanes: int, seed,
                  allow_trivial: bool = False, limits: SearchLimits | None = None,
                  max_attempts: int = 100) -> Problem:
    """One truck per city; location 0 of every city is its airport."""
    if min(n_cities, locs_per_city, packages, airplanes) < 1:
        raise ValueError("all counts must be at least 1")
    if not allow_trivial and n_cities * locs_per_city < 2:
        raise ValueError("a single location only admits trivial goals")
    rng = random.Random(seed)
    domain = load_domain(LOGISTICS)
    locations = [f"l{c}-{i}" for c in range(n_cities) for i in range(locs_per_city)]
    airports = [f"l{c}-0" for c in range(n_cities)]
    name = f"logistics-c{n_cities}-s{locs_per_city}-p{packages}-a{airplanes}"
    for _ in range(max_attempts):
        planes = [(f"a{i}", rng.choice(airports)) for i in range(airplanes)]
        trucks = [(f"t{c}", f"l{c}-{rng.randrange(locs_per_city)}") for c in range(n_cities)]
        pkgs = [(f"p{i}", rng.choice(locations)) for i in range(packages)]
        goals = []
        for p, start in pkgs:
            choices = locations if allow_trivial else [loc for loc in locations if loc != start]
            goals.append((p, rng.choice(choices)))
        text = render_logistics_problem(name, n_cities, locs_per_city, planes, trucks, pkgs, goals)
        problem = parse_problem(text, domain)
        if plan_exists(domain, problem, limits) == SOLVABLE:
            return problem
    raise GenerationError("no solvable logistics instance within the attempt budget")
