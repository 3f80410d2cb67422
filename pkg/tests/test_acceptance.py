"""Acceptance criteria, one test each.  Every test records a PASS or FAIL line,
printed at the end of the pytest run (and immediately when run with -s)."""
import functools
import itertools
import json
import random
import time

import pytest

from conftest import ACCEPTANCE_LINES, golden
from modulobench.clients import ORACLE_ANSWER, GeneratorUsage, OracleGenerator, ReplayGenerator, ScriptedGenerator, Transcript
from modulobench.domains import load_domain
from modulobench.extraction import extract_plan
from modulobench.instances.blocksworld import gen_blocksworld, mutate_unsolvable
from modulobench.instances.calendar import TimeSlot, gen_calendar, parse_calendar_task
from modulobench.instances.graphs import Graph, chromatic_number, complete_graph, cycle_graph, gen_graph
from modulobench.instances.io import generate_set, load_tasks, regenerate
from modulobench.instances.logistics import gen_logistics
from modulobench.instances.sokoban import SokobanConfig, gen_sokoban
from modulobench.instances.trip import gen_trip, parse_trip_task
from modulobench.loop import EXHAUSTED, SOLVED, CostModel, StopPolicy, compute_cost, run_batch, run_instance
from modulobench.obfuscation import INVERSE, NAMED_MYSTERY, RANDOMIZED, ObfuscationMap, obfuscate, translate_plan, translate_report
from modulobench.pddl import Plan, ground_actions, render_plan
from modulobench.report import cost_table, load_run_dirs, render_text
from modulobench.resources import read_asset
from modulobench.search import BREADTH_FIRST, SOLVED as PLAN_FOUND, solve
from modulobench.tasks import (
    CALENDAR, COLORING, IMPOSSIBLE_ANSWER, PLANNING, TRIP, ColoringInstance, PlanningInstance, Task, evaluate,
)
from modulobench.validator import (
    EMPTY_PLAN, GOAL_FAILURE, IMPOSSIBILITY_CLAIM, PLAN_ATTEMPT, PRECONDITION_FAILURE, TRUE_NEGATIVE, VALID,
    WRONG_FULL_PLAN, build_backprompt, classify_response, validate_plan,
)
from modulobench.verifiers.calendar import candidate_slots, solve_calendar, verify_calendar
from modulobench.verifiers.coloring import Coloring, coloring_feedback, verify_coloring
from modulobench.verifiers.trip import parse_trip, trip_feedback, verify_trip

BW = load_domain("blocksworld")


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                line = f"FAIL {number}: {title} ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
                ACCEPTANCE_LINES.append(line)
                print(line)
                raise
            line = f"PASS {number}: {title}"
            ACCEPTANCE_LINES.append(line)
            print(line)
        return run
    return wrap


def simulate(problem, steps):
    """Plan execution straight over ground actions, independent of the validator."""
    acts = {(a.name, a.args): a for a in ground_actions(BW, problem)}
    state = problem.initial_state
    for i, step in enumerate(steps, 1):
        act = acts.get((step.name, step.args))
        if act is None or not act.pre <= state:
            return PRECONDITION_FAILURE, i
        state = (state - act.dele) | act.add
    return (VALID, None) if problem.goal_set <= state else (GOAL_FAILURE, None)


def corrupt(plan: Plan, rng: random.Random) -> Plan:
    steps = list(plan.steps)
    if len(steps) >= 2 and rng.random() < 0.5:
        i = rng.randrange(len(steps) - 1)
        steps[i], steps[i + 1] = steps[i + 1], steps[i]
    else:
        del steps[rng.randrange(len(steps))]
    return Plan(tuple(steps))


def exhaustive_reachable(problem):
    """Every state reachable from the initial state, by plain graph search."""
    acts = ground_actions(BW, problem)
    seen = {problem.initial_state}
    frontier = [problem.initial_state]
    while frontier:
        s = frontier.pop()
        for a in acts:
            if a.pre <= s:
                t = (s - a.dele) | a.add
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
    return seen


@criterion(1, "validator agrees with oracle and independent simulation on 200 instances")
def test_validator_oracle_agreement():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    agree = 0
    for i in range(200):
        p = gen_blocksworld(rng.randint(3, 5), rng.getrandbits(32))
        res = solve(BW, p, BREADTH_FIRST)
        assert res.status == PLAN_FOUND
        assert validate_plan(BW, p, res.plan).valid
        bad = corrupt(res.plan, rng)
        r = validate_plan(BW, p, bad)
        verdict, idx = simulate(p, bad.steps)
        assert r.verdict in (PRECONDITION_FAILURE, GOAL_FAILURE, VALID)
        if r.verdict == verdict and r.step_index == idx:
            agree += 1
    elapsed = time.perf_counter() - t0
    assert agree == 200, f"{agree}/200 agree"
    assert elapsed < 30, f"{elapsed:.1f}s"


@criterion(2, "golden suite: plan, backprompt, coloring and trip feedback")
def test_golden_suite(h1, rand6):
    four = Plan.of([("unstack", ("b", "c")), ("put-down", ("b",)), ("pick-up", ("c",)), ("stack", ("c", "b"))])
    assert validate_plan(BW, h1, four).valid
    r = validate_plan(BW, rand6, extract_plan(golden("bw_rand_6_response.txt"), BW, rand6))
    assert build_backprompt(r) == golden("bw_rand_6_backprompt.txt")
    import re

    text = golden("coloring_feedback.txt")
    pairs = re.findall(r"Vertex (\d+) was not given a value in the coloring\.\nVertex (\d+) was not given", text)
    g = Graph.of(20, [(int(u), int(v)) for u, v in pairs])
    assert coloring_feedback(g, verify_coloring(g, 5, Coloring())) == text
    spec = parse_trip_task(golden("trip_query.txt"))
    fb = trip_feedback(verify_trip(spec, parse_trip(golden("trip_o1_response.txt"))))
    assert fb == golden("trip_feedback.txt").strip("\n") == "Number of cities in plan is 7, expected 10"


@criterion(3, "unsolvable suite: 100 mutations unsolvable, adjudication exact")
def test_unsolvable_suite():
    rng = random.Random(7)
    for i in range(100):
        p = gen_blocksworld(rng.randint(3, 5), rng.getrandbits(32))
        q = mutate_unsolvable(p, rng.getrandbits(32))
        assert not any(q.goal_set <= s for s in exhaustive_reachable(q))
        task = Task(f"u{i}", PLANNING, PlanningInstance(BW, q, solvable=False))
        full_plan = solve(BW, p, BREADTH_FIRST).plan  # the solvable parent's plan

        claim = evaluate(task, IMPOSSIBLE_ANSWER)
        assert claim.valid and claim.outcome == TRUE_NEGATIVE
        attempt = evaluate(task, render_plan(full_plan))
        assert not attempt.valid and attempt.outcome == WRONG_FULL_PLAN
        empty = evaluate(task, "")
        assert not empty.valid and empty.outcome != TRUE_NEGATIVE
        kinds = {classify_response(x, BW, q).kind for x in (IMPOSSIBLE_ANSWER, render_plan(full_plan), "")}
        assert kinds == {IMPOSSIBILITY_CLAIM, PLAN_ATTEMPT, EMPTY_PLAN}


@criterion(4, "obfuscation invariance over 100 instances, both schemes, valid and corrupted plans")
def test_obfuscation_invariance():
    rng = random.Random(11)
    for i in range(100):
        p = gen_blocksworld(rng.randint(3, 5), rng.getrandbits(32))
        good = solve(BW, p, BREADTH_FIRST).plan
        for scheme in (NAMED_MYSTERY, RANDOMIZED):
            dom, [prob], m = obfuscate(BW, [p], scheme, seed=i)
            assert ObfuscationMap.from_text(m.to_text()) == m
            assert m.inverse().inverse() == m
            for plan in (good, corrupt(good, rng)):
                original = validate_plan(BW, p, plan)
                moved = translate_plan(plan, m)
                assert translate_plan(moved, m, INVERSE) == plan
                assert translate_report(validate_plan(dom, prob, moved), m, INVERSE) == original


def brute_force_chromatic(g: Graph) -> int:
    """Smallest k for which some assignment out of all k**n is proper."""
    edges = g.edges
    for k in range(1, g.n + 1):
        for colors in itertools.product(range(k), repeat=g.n):
            if all(colors[u] != colors[v] for u, v in edges):
                return k
    return g.n


@criterion(5, "chromatic number exact on 50 small graphs, K_n, C_5, and (20, 0.4) in time")
def test_chromatic_exactness():
    rng = random.Random(5)
    for i in range(50):
        g = gen_graph(rng.randint(1, 9), rng.choice([0.2, 0.4, 0.6]), rng.getrandbits(32))
        assert chromatic_number(g) == brute_force_chromatic(g), g
    for n in range(1, 10):
        assert chromatic_number(complete_graph(n)) == n
    assert chromatic_number(cycle_graph(5)) == 3
    t0 = time.perf_counter()
    chromatic_number(gen_graph(20, 0.4, 0))
    assert time.perf_counter() - t0 < 60


@criterion(6, "trip parser on the o1 response")
def test_parse_trip_o1():
    assert list(parse_trip(golden("trip_o1_response.txt")).segments) == [
        ("Dubrovnik", 4), ("Manchester", 4), ("Stuttgart", 6), ("Berlin", 4), ("Vilnius", 5), ("Oslo", 5),
        ("Reykjavik", 3)]


@criterion(7, "calendar query solves to Monday 15:00-15:30, unique among 16 slots")
def test_calendar_query():
    spec = parse_calendar_task(golden("calendar_query.txt"))
    slot = solve_calendar(spec)
    assert slot == TimeSlot("Monday", 15 * 60, 15 * 60 + 30)
    slots = candidate_slots(spec)
    assert len(slots) == 16
    assert [s for s in slots if verify_calendar(spec, s).valid] == [slot]
    assert verify_calendar(spec, slot).valid


def _oracle_batches():
    logistics, sokoban = load_domain("logistics"), load_domain("sokoban")
    bw = [gen_blocksworld(3 + i % 3, i) for i in range(5)]
    out = {
        "blocksworld": [PlanningInstance(BW, p) for p in bw],
        "blocksworld-natural": [PlanningInstance(BW, p) for p in bw],
        "logistics": [PlanningInstance(logistics, gen_logistics(2, 2, 1, 1, i)) for i in range(3)],
        "sokoban": [PlanningInstance(sokoban, gen_sokoban(SokobanConfig(5, 5, 1, 1, i))) for i in range(3)],
        "unsolvable": [PlanningInstance(BW, mutate_unsolvable(p, 0), solvable=False) for p in bw[:3]],
        "coloring": [ColoringInstance(g, chromatic_number(g)) for g in (gen_graph(12, 0.4, i) for i in range(3))],
        "trip": [gen_trip(6, 15, i) for i in range(3)],
        "calendar": [gen_calendar(4, 30, i) for i in range(3)],
    }
    for scheme in (NAMED_MYSTERY, RANDOMIZED):
        dom, probs, m = obfuscate(BW, bw, scheme, seed=1)
        out[f"blocksworld/{scheme}"] = [PlanningInstance(dom, p, obfuscation=m) for p in probs]
    kinds = {"coloring": COLORING, "trip": TRIP, "calendar": CALENDAR}
    tasks = {}
    for name, insts in out.items():
        style = "natural" if name in ("blocksworld-natural", f"blocksworld/{NAMED_MYSTERY}") else "pddl"
        tasks[name] = [Task(f"{i}", kinds.get(name, PLANNING), inst, style) for i, inst in enumerate(insts)]
    return tasks


@criterion(8, "modulo loop: oracle at iteration 1, SolvedAt(k) with exact cost, always-wrong exhausts")
def test_modulo_loop():
    for name, tasks in _oracle_batches().items():
        res = run_batch(tasks, OracleGenerator(), StopPolicy())
        assert res.curve()[0] == 1.0, name
    task = Task("t", PLANNING, PlanningInstance(BW, gen_blocksworld(4, 3)))
    rates = CostModel({"m": (15.0, 60.0)})
    for k in range(1, 11):
        usages = [GeneratorUsage(100 * j, 10 * j, 5 * j) for j in range(1, k + 1)]
        gen = ScriptedGenerator(["(pick-up zz)"] * (k - 1) + [ORACLE_ANSWER],
                                usage=lambda prompt, text, it=iter(usages): next(it), model="m")
        run = run_instance(task, gen, StopPolicy(max_iterations=10), rates)
        assert run.status == SOLVED and run.solved_at == k
        hand = sum(u.input_tokens * 15.0 + (u.output_tokens + u.reasoning_tokens) * 60.0 for u in usages) / 1e6
        assert run.total_cost == pytest.approx(hand, rel=1e-12)
    run = run_instance(task, ScriptedGenerator(["(pick-up zz)"]), StopPolicy(max_iterations=10))
    assert run.status == EXHAUSTED and len(run.records) == 10
    assert run.solved_at is None and not any(r.verdict == "valid" for r in run.records)


@criterion(9, "compute_cost examples and cost-per-100 table from the sample config")
def test_cost_examples(tmp_path):
    cm = CostModel({"m": (15.0, 60.0)})
    assert compute_cost(GeneratorUsage(0, 0, 0), "m", cm) == 0
    assert compute_cost(GeneratorUsage(1_000_000, 0, 0), "m", cm) == pytest.approx(15.0)
    assert compute_cost(GeneratorUsage(1000, 500, 2000), "m", cm) == pytest.approx(0.165)
    sample = CostModel.from_toml(read_asset("config/costs.toml"))
    from modulobench.clients import GeneratorConfig
    from modulobench.harness import RunManifest, execute_run

    rates = tmp_path / "rates.toml"
    rates.write_text(sample.to_toml())
    s = generate_set("blocksworld", 3, 0, tmp_path / "set")
    m = RunManifest(str(s), GeneratorConfig("scripted", model="o1-preview"), StopPolicy(max_iterations=1),
                    cost_model=str(rates), script=("@oracle",))
    execute_run(m, tmp_path / "run")
    text = render_text(cost_table(load_run_dirs([tmp_path / "run"]), sample), "cost")
    assert "cost_per_100" in text and "o1-preview" in text


@criterion(10, "oracle mean solve time on 600 3-5 block instances <= 1 s")
def test_oracle_speed(tmp_path):
    s = generate_set("blocksworld", 600, 0, tmp_path / "bw600")
    tasks = load_tasks(s)
    t0 = time.perf_counter()
    for t in tasks:
        assert solve(BW, t.instance.problem, BREADTH_FIRST).status == PLAN_FOUND
    mean = (time.perf_counter() - t0) / len(tasks)
    assert mean <= 1.0, f"{mean:.3f}s"


@criterion(11, "replay reproduces the batch byte for byte; sets regenerate byte for byte")
def test_replay_and_regenerate(tmp_path):
    s = generate_set("blocksworld", 8, 4, tmp_path / "set")
    tasks = load_tasks(s)
    path = tmp_path / "t.jsonl"
    gen = ScriptedGenerator(lambda task, attempt: ORACLE_ANSWER if attempt > int(task.id) % 3 else "(pick-up zz)",
                            usage=GeneratorUsage(120, 30, 7, 0.5), model="m", transcript=Transcript(path))
    rates = CostModel({"m": (15.0, 60.0)})
    a = run_batch(tasks, gen, StopPolicy(stall_window=None), rates)
    b = run_batch(tasks, ReplayGenerator(path), StopPolicy(stall_window=None), rates)
    assert a.to_json() == b.to_json()
    assert a.runs_jsonl() == b.runs_jsonl()
    again = regenerate(s, tmp_path / "again")
    for f in s.iterdir():
        if f.name != "timings.json":
            assert f.read_bytes() == (again / f.name).read_bytes(), f.name
    assert json.loads((s / "manifest.json").read_text())["count"] == 8
