"""Run directories: launch a batch from a run manifest, resume it, write its results.

Output layout::

    run.json          the manifest as run, plus the model name
    manifest.json     copy of the instance set's manifest
    obfuscation.map   copy of the set's renaming, if any
    cost_model.toml   copy of the rates used, if any
    transcript.jsonl  every generator call
    runs.jsonl        one finished loop per line, sorted by instance id
    summary.json, runs.csv, curve.csv, table.txt
"""
from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

from .clients import ORACLE_ANSWER, REPLAY, SCRIPTED, GeneratorConfig, Transcript, build_generator, make_translator
from .instances.io import MANIFEST, load_tasks, read_manifest
from .loop import BatchResult, CostModel, StopPolicy, batch_from_runs, read_runs, run_batch
from .report import RUN_FILE, RUNS_FILE

TRANSCRIPT_FILE = "transcript.jsonl"
COST_FILE = "cost_model.toml"
ORACLE_TOKEN = "@oracle"  # in a scripted manifest, stands for the oracle's answer


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class RunManifest:
    instance_set: str
    generator: GeneratorConfig
    policy: StopPolicy = field(default_factory=StopPolicy)
    cost_model: str | None = None
    label: str | None = None
    style: str = "pddl"
    shots: int = 0
    seed: int = 0
    parallelism: int = 4
    script: tuple = ()
    translator: GeneratorConfig | None = None

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "RunManifest":
        d = dict(d)
        base = Path(base) if base is not None else None

        def resolve(p):
            if p is None or base is None or Path(p).is_absolute():
                return p
            return str(base / p)

        if "instance_set" not in d or "generator" not in d:
            raise ManifestError("a run manifest needs instance_set and a [generator] table")
        gen = dict(d.pop("generator"))
        if gen.get("transcript"):
            gen["transcript"] = resolve(gen["transcript"])
        d["generator"] = GeneratorConfig.from_dict(gen)
        if d.get("translator"):
            d["translator"] = GeneratorConfig.from_dict(d["translator"])
        d["policy"] = StopPolicy.from_dict(d.get("policy", {}))
        d["instance_set"] = resolve(d["instance_set"])
        d["cost_model"] = resolve(d.get("cost_model"))
        d["script"] = tuple(d.get("script", ()))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ManifestError(f"unknown run manifest keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {"instance_set": self.instance_set, "generator": self.generator.to_dict(),
                "policy": self.policy.to_dict(), "cost_model": self.cost_model, "label": self.label,
                "style": self.style, "shots": self.shots, "seed": self.seed, "parallelism": self.parallelism,
                "script": list(self.script),
                "translator": self.translator.to_dict() if self.translator else None}

    def check_paths(self) -> None:
        missing = []
        if not (Path(self.instance_set) / MANIFEST).exists():
            missing.append(f"instance set {self.instance_set}")
        if self.cost_model and not Path(self.cost_model).exists():
            missing.append(f"cost model {self.cost_model}")
        if self.generator.kind == REPLAY and not Path(self.generator.transcript).exists():
            missing.append(f"transcript {self.generator.transcript}")
        if missing:
            raise ManifestError("missing: " + "; ".join(missing))


def _script(items) -> list:
    return [ORACLE_ANSWER if x == ORACLE_TOKEN else x for x in items]


def _copy_provenance(m: RunManifest, out: Path) -> None:
    src = Path(m.instance_set)
    shutil.copyfile(src / MANIFEST, out / MANIFEST)
    ob = read_manifest(src).get("obfuscation")
    if ob:
        shutil.copyfile(src / ob["map_file"], out / ob["map_file"])
    if m.cost_model:
        shutil.copyfile(m.cost_model, out / COST_FILE)


def _model_name(m: RunManifest) -> str:
    """Replays keep the recorded model's name, so reports group and price them alike."""
    if m.generator.model:
        return m.generator.model
    if m.generator.kind == REPLAY:
        entries = Transcript.read(m.generator.transcript)
        if entries and entries[0].model:
            return entries[0].model
    return m.generator.kind


def write_results(batch: BatchResult, out) -> None:
    out = Path(out)
    (out / RUNS_FILE).write_text(batch.runs_jsonl(), encoding="utf-8")
    (out / "summary.json").write_text(batch.to_json(), encoding="utf-8")
    (out / "runs.csv").write_text(batch.runs_csv(), encoding="utf-8")
    (out / "curve.csv").write_text(batch.curve_csv(), encoding="utf-8")
    (out / "table.txt").write_text(batch.table(), encoding="utf-8")


def execute_run(m: RunManifest, out) -> BatchResult:
    """Run every instance without a finished run in ``out``; earlier results are kept."""
    m.check_paths()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    model = _model_name(m)
    run_info = dict(m.to_dict(), model=model)
    (out / RUN_FILE).write_text(json.dumps(run_info, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _copy_provenance(m, out)
    cost_model = CostModel.load(m.cost_model) if m.cost_model else None

    done = {}
    if (out / RUNS_FILE).exists():
        done = {r.instance_id: r for r in read_runs(out / RUNS_FILE) if r.status is not None}
    tasks = load_tasks(m.instance_set, m.style, m.shots)
    pending = [t for t in tasks if t.id not in done]
    if pending:
        transcript = Transcript(out / TRANSCRIPT_FILE)
        gen = build_generator(m.generator, transcript, _script(m.script) if m.generator.kind == SCRIPTED else None)
        translator = None
        if m.translator is not None:
            if pending[0].kind != "planning":
                raise ManifestError("plan translation only applies to planning sets")
            helper = build_generator(m.translator)
            translator = make_translator(helper, pending[0].instance.domain)
        policy = m.policy
        if policy.dollar_budget is not None:
            spent = sum(r.total_cost for r in done.values())
            policy = replace(policy, dollar_budget=max(0.0, policy.dollar_budget - spent))
        with open(out / RUNS_FILE, "a", encoding="utf-8") as log:
            def keep(run):
                log.write(json.dumps(run.to_dict(), sort_keys=True) + "\n")
                log.flush()

            try:
                batch = run_batch(pending, gen, policy, cost_model, m.parallelism, translator, keep)
            finally:
                gen.close()
        done.update({r.instance_id: r for r in batch.runs})
    batch = batch_from_runs([done[t.id] for t in tasks], m.policy.max_iterations, model)
    write_results(batch, out)
    return batch
