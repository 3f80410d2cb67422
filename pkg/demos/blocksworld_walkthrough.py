"""Walk through one blocksworld instance: prompt, oracle plan, a broken plan and its critique,
then the same instance under both renaming schemes."""
from modulobench.domains import load_domain
from modulobench.instances.blocksworld import gen_blocksworld, mutate_unsolvable
from modulobench.instances.prompts import render_prompt
from modulobench.obfuscation import NAMED_MYSTERY, RANDOMIZED, obfuscate, translate_plan
from modulobench.pddl import Plan, render_plan
from modulobench.search import BREADTH_FIRST, plan_exists, solve
from modulobench.validator import build_backprompt, validate_plan

bw = load_domain("blocksworld")
problem = gen_blocksworld(4, seed=17)

print("=== natural-language prompt ===")
print(render_prompt(bw, problem, "natural"))

res = solve(bw, problem, BREADTH_FIRST)
print(f"=== oracle: {res.status}, {len(res.plan)} steps, {res.expanded_nodes} nodes expanded ===")
print(render_plan(res.plan))

# drop the first step; the second one now fails its preconditions (or the goal is missed)
broken = Plan(res.plan.steps[1:])
report = validate_plan(bw, problem, broken)
print(f"\n=== broken plan: {report.verdict} at step {report.step_index} ===")
print(build_backprompt(report))

for scheme in (NAMED_MYSTERY, RANDOMIZED):
    dom, [renamed], mapping = obfuscate(bw, [problem], scheme, seed=3)
    moved = translate_plan(res.plan, mapping)
    print(f"=== {scheme}: first step {moved.steps[0]}, still valid: {validate_plan(dom, renamed, moved).valid} ===")

impossible = mutate_unsolvable(problem, seed=1)
extra = set(impossible.goal) - set(problem.goal)
print(f"\nadding goal {extra.pop()} makes the instance {plan_exists(bw, impossible)}")
