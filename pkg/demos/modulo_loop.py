"""The generate-verify-feedback loop on a small batch, with a scripted generator that
needs a different number of tries per instance, priced with the sample rates."""
from modulobench.clients import ORACLE_ANSWER, GeneratorUsage, ScriptedGenerator
from modulobench.domains import load_domain
from modulobench.instances.blocksworld import gen_blocksworld
from modulobench.loop import CostModel, StopPolicy, run_batch
from modulobench.resources import read_asset
from modulobench.tasks import PLANNING, PlanningInstance, Task

bw = load_domain("blocksworld")
tasks = [Task(f"bw-{i}", PLANNING, PlanningInstance(bw, gen_blocksworld(3 + i % 3, i))) for i in range(8)]


def script(task, attempt):
    # instance i is answered correctly on try (i % 4) + 1; earlier tries pick up a missing block
    needed = int(task.id.split("-")[1]) % 4 + 1
    return ORACLE_ANSWER if attempt >= needed else "(pick-up nowhere)"


gen = ScriptedGenerator(script, usage=GeneratorUsage(1200, 150, 900), model="o1-preview")
rates = CostModel.from_toml(read_asset("config/costs.toml"))
batch = run_batch(tasks, gen, StopPolicy(max_iterations=10, stall_window=3), rates)

print(batch.table())
print("cumulative accuracy by iteration:", [round(x, 3) for x in batch.curve()])
for run in batch.runs:
    print(f"{run.instance_id}: {run.label}, ${run.total_cost:.4f}")

second = next(r for r in batch.runs if r.solved_at and r.solved_at > 1)
print("\n=== feedback sent after the first wrong answer of", second.instance_id, "===")
print(second.records[0].feedback)
