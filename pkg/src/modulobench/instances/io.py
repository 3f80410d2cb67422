"""Instance-set directories: deterministic generation, manifests and loading.

A set directory holds numbered instance files, ``manifest.json`` with the
generation parameters, seeds and oracle statistics, and ``timings.json`` with
wall-clock oracle times.  Timings live apart so that regenerating a set
from its manifest reproduces every other file byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import random
import time
from pathlib import Path

from ..domains import BLOCKSWORLD, LOGISTICS, SOKOBAN, load_domain
from ..obfuscation import ObfuscationMap, obfuscate
from ..pddl import Plan, parse_domain, parse_plan, parse_problem, render_domain, render_plan, render_problem
from ..search import BREADTH_FIRST, GREEDY, SOLVED, SearchLimits, solve
from ..tasks import CALENDAR, COLORING, PLANNING, TRIP, ColoringInstance, PlanningInstance, Task
from .blocksworld import gen_blocksworld, gen_hard_blocksworld, mutate_unsolvable
from .calendar import CalendarSpec, gen_calendar
from .graphs import Graph, chromatic_number, gen_graph
from .logistics import gen_logistics
from .sokoban import SokobanConfig, gen_sokoban
from .trip import TripSpec, gen_trip

MANIFEST = "manifest.json"
TIMINGS = "timings.json"
DOMAIN_FILE = "domain.pddl"
MAP_FILE = "obfuscation.map"
FORMAT_VERSION = 1

DEFAULTS = {
    "blocksworld": {"min_blocks": 3, "max_blocks": 5, "partial_goal": False},
    "blocksworld-hard": {"min_blocks": 7, "max_blocks": 8, "min_length": 20, "max_length": 40},
    "blocksworld-unsolvable": {"min_blocks": 3, "max_blocks": 5},
    "logistics": {"min_cities": 2, "max_cities": 3, "locs_per_city": 2, "min_packages": 1,
                  "max_packages": 2, "airplanes": 1},
    "sokoban": {"min_grid": 4, "max_grid": 10, "min_boxes": 1, "max_boxes": 4, "min_walls": 1, "max_walls": 4},
    "coloring": {"n": 20, "p": 0.4},
    "trip": {"n_cities": 10, "min_days": 20, "max_days": 26},
    "calendar": {"participants": 5, "duration_minutes": 30},
}
SET_KINDS = tuple(DEFAULTS)
PLANNING_SETS = {"blocksworld": BLOCKSWORLD, "blocksworld-hard": BLOCKSWORLD,
                 "blocksworld-unsolvable": BLOCKSWORLD, "logistics": LOGISTICS, "sokoban": SOKOBAN}


def instance_seed(seed, index: int) -> int:
    """Per-instance seed derived by hashing, independent of generation order."""
    return int(hashlib.sha256(f"{seed}:{index}".encode()).hexdigest()[:16], 16)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _oracle_stats(domain, problem, limits) -> tuple:
    res = solve(domain, problem, BREADTH_FIRST, limits)
    stats = {"status": res.status, "expanded_nodes": res.expanded_nodes}
    if res.status == SOLVED:
        stats["optimal_length"] = len(res.plan)
    return stats, res.elapsed_s


def _planning_instance(kind: str, params: dict, rng: random.Random, limits: SearchLimits):
    s = rng.getrandbits(64)
    if kind == "blocksworld":
        n = rng.randint(params["min_blocks"], params["max_blocks"])
        return gen_blocksworld(n, s, partial_goal=params["partial_goal"], limits=limits)
    if kind == "blocksworld-hard":
        n = rng.randint(params["min_blocks"], params["max_blocks"])
        return gen_hard_blocksworld(n, s, params["min_length"], params["max_length"], limits=limits)[0]
    if kind == "blocksworld-unsolvable":
        n = rng.randint(params["min_blocks"], params["max_blocks"])
        return mutate_unsolvable(gen_blocksworld(n, s, limits=limits), rng.getrandbits(64), limits)
    if kind == "logistics":
        return gen_logistics(rng.randint(params["min_cities"], params["max_cities"]), params["locs_per_city"],
                             rng.randint(params["min_packages"], params["max_packages"]), params["airplanes"],
                             s, limits=limits)
    if kind == "sokoban":
        g = rng.randint(params["min_grid"], params["max_grid"])
        cfg = SokobanConfig(g, g, rng.randint(params["min_boxes"], params["max_boxes"]),
                            rng.randint(params["min_walls"], params["max_walls"]), s)
        return gen_sokoban(cfg)
    raise ValueError(kind)


def generate_set(kind: str, count: int, seed, out, params: dict | None = None,
                 limits: SearchLimits | None = None) -> Path:
    """Write ``count`` instances of ``kind`` to ``out`` and return the directory."""
    if kind not in DEFAULTS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {', '.join(SET_KINDS)}")
    if count < 1:
        raise ValueError("count must be positive")
    unknown = set(params or {}) - set(DEFAULTS[kind])
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {', '.join(sorted(unknown))}")
    p = {**DEFAULTS[kind], **(params or {})}
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    limits = limits or SearchLimits(max_expanded_nodes=2_000_000, max_seconds=120)
    entries, timings = [], {}
    if kind in PLANNING_SETS:
        domain = load_domain(PLANNING_SETS[kind])
        _write(out / DOMAIN_FILE, domain.source)
    for i in range(count):
        iseed = instance_seed(seed, i)
        rng = random.Random(iseed)
        name = f"{i:04d}"
        entry = {"id": name, "seed": iseed}
        if kind in PLANNING_SETS:
            problem = _planning_instance(kind, p, rng, limits)
            entry["file"] = f"{name}.pddl"
            _write(out / entry["file"], problem.source)
            stats, elapsed = _oracle_stats(domain, problem, limits)
            entry.update(stats)
        elif kind == "coloring":
            graph = gen_graph(p["n"], p["p"], iseed)
            t0 = time.perf_counter()
            entry["chromatic_number"] = chromatic_number(graph)
            elapsed = time.perf_counter() - t0
            entry["edges"] = len(graph.edges)
            entry["file"] = f"{name}.graph"
            _write(out / entry["file"], graph.to_text())
        elif kind == "trip":
            spec = gen_trip(p["n_cities"], rng.randint(p["min_days"], p["max_days"]), iseed)
            entry["file"] = f"{name}.json"
            _write(out / entry["file"], spec.to_json())
            elapsed = 0.0
        else:
            spec = gen_calendar(p["participants"], p["duration_minutes"], iseed)
            entry["file"] = f"{name}.json"
            _write(out / entry["file"], spec.to_json())
            elapsed = 0.0
        timings[name] = round(elapsed, 6)
        entries.append(entry)
    manifest = {"format_version": FORMAT_VERSION, "kind": kind, "count": count, "seed": seed,
                "params": p, "domain_file": DOMAIN_FILE if kind in PLANNING_SETS else None,
                "obfuscation": None, "instances": entries}
    _write(out / MANIFEST, _json(manifest))
    _write(out / TIMINGS, _json(timings))
    return out


def read_manifest(path) -> dict:
    path = Path(path)
    f = path / MANIFEST if path.is_dir() else path
    if not f.exists():
        raise FileNotFoundError(f"no {MANIFEST} in {path}")
    return json.loads(f.read_text(encoding="utf-8"))


def regenerate(path, out) -> Path:
    """Rebuild a set from its manifest into ``out``."""
    m = read_manifest(path)
    if m.get("obfuscation"):
        raise ValueError("regenerate the source set, then obfuscate it again")
    return generate_set(m["kind"], m["count"], m["seed"], out, m["params"])


def obfuscate_set(src, out, scheme: str, seed: int | None = None, rename_objects: bool = False) -> Path:
    """Rename a planning set's vocabulary, writing the map next to the instances."""
    src, out = Path(src), Path(out)
    m = read_manifest(src)
    if m["kind"] not in PLANNING_SETS:
        raise ValueError("only planning sets can be obfuscated")
    domain = parse_domain((src / m["domain_file"]).read_text(encoding="utf-8"))
    problems = [parse_problem((src / e["file"]).read_text(encoding="utf-8"), domain) for e in m["instances"]]
    new_domain, new_problems, mapping = obfuscate(domain, problems, scheme, seed, rename_objects)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / DOMAIN_FILE, render_domain(new_domain) + "\n")
    for e, prob in zip(m["instances"], new_problems):
        _write(out / e["file"], render_problem(prob) + "\n")
    _write(out / MAP_FILE, mapping.to_text())
    m = dict(m, obfuscation={"scheme": scheme, "seed": seed, "map_file": MAP_FILE, "source": str(src)})
    _write(out / MANIFEST, _json(m))
    timings = src / TIMINGS
    if timings.exists():
        _write(out / TIMINGS, timings.read_text(encoding="utf-8"))
    return out


def load_map(path) -> ObfuscationMap | None:
    m = read_manifest(path)
    ob = m.get("obfuscation")
    if not ob:
        return None
    return ObfuscationMap.from_text((Path(path) / ob["map_file"]).read_text(encoding="utf-8"))


def load_tasks(path, style: str = "pddl", shots: int = 0) -> list:
    """Tasks for every instance of a set, ready for the modulo loop."""
    path = Path(path)
    m = read_manifest(path)
    kind = m["kind"]
    tasks = []
    if kind in PLANNING_SETS:
        domain = parse_domain((path / m["domain_file"]).read_text(encoding="utf-8"))
        mapping = load_map(path)
        problems = [parse_problem((path / e["file"]).read_text(encoding="utf-8"), domain) for e in m["instances"]]
        example = None
        if shots:
            ex_problem = problems[-1]
            res = solve(domain, ex_problem, GREEDY)
            if res.status != SOLVED:
                raise ValueError("the one-shot example instance must be solvable")
            example = (ex_problem, res.plan)
        for e, prob in zip(m["instances"], problems):
            solvable = e.get("status") != "Unsolvable"
            inst = PlanningInstance(domain, prob, solvable, mapping, example)
            tasks.append(Task(e["id"], PLANNING, inst, style, shots))
        return tasks
    for e in m["instances"]:
        text = (path / e["file"]).read_text(encoding="utf-8")
        if kind == "coloring":
            tasks.append(Task(e["id"], COLORING, ColoringInstance(Graph.from_text(text), e["chromatic_number"])))
        elif kind == "trip":
            tasks.append(Task(e["id"], TRIP, TripSpec.from_json(text), shots=shots))
        else:
            tasks.append(Task(e["id"], CALENDAR, CalendarSpec.from_json(text), shots=shots))
    return tasks


def oracle_stats(path) -> dict:
    """Per-instance oracle statistics from a set's manifest, keyed by instance id."""
    m = read_manifest(path)
    return {e["id"]: {k: v for k, v in e.items() if k not in ("id", "file", "seed")} for e in m["instances"]}


def read_plan(path) -> Plan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


def write_plan(path, plan: Plan) -> None:
    _write(Path(path), render_plan(plan) + "\n")
