"""Generate, verify, feed back, repeat: the iteration engine and its accounting.

A run keeps asking the generator until the sound checker accepts an answer,
the iteration cap is reached, or the dollar budget is spent.  Success is only
ever reported for an answer the checker accepted.
"""
from __future__ import annotations

import csv
import io
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .clients import ORACLE, AuthError, Generator, GeneratorError, GeneratorUsage, ReplayMiss
from .tasks import Evaluation, Task, evaluate, first_prompt, next_prompt

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SOLVED, EXHAUSTED, BUDGET_STOP = "SolvedAt", "Exhausted", "BudgetStop"
LATEST, FULL = "latest", "full"
VALID, INVALID, ERROR = "valid", "invalid", "error"


class UnknownModel(KeyError):
    pass


@dataclass(frozen=True)
class CostModel:
    """Dollars per million tokens, keyed by model name."""

    rates: dict  # model -> (input_rate, output_rate)

    def __post_init__(self):
        for model, (i, o) in self.rates.items():
            if i < 0 or o < 0:
                raise ValueError(f"negative rate for {model}")

    @classmethod
    def from_toml(cls, text: str) -> "CostModel":
        data = tomllib.loads(text)
        models = data.get("models", {})
        return cls({m: (float(r["input"]), float(r["output"])) for m, r in models.items()})

    @classmethod
    def load(cls, path) -> "CostModel":
        return cls.from_toml(Path(path).read_text(encoding="utf-8"))

    def to_toml(self) -> str:
        out = []
        for m in sorted(self.rates):
            i, o = self.rates[m]
            out.append(f'[models."{m}"]\ninput = {i!r}\noutput = {o!r}\n')
        return "\n".join(out)


def compute_cost(usage: GeneratorUsage, model: str, cost_model: CostModel | None) -> float:
    """Reasoning tokens are billed at the output rate.  No cost model means free."""
    if cost_model is None:
        return 0.0
    if model not in cost_model.rates:
        raise UnknownModel(f"no rates for model {model!r}")
    i, o = cost_model.rates[model]
    return (usage.input_tokens * i + (usage.output_tokens + usage.reasoning_tokens) * o) / 1_000_000


@dataclass(frozen=True)
class StopPolicy:
    max_iterations: int = 10
    stall_window: int | None = 2  # None disables the batch-level stall stop
    dollar_budget: float | None = None
    history: str = LATEST

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.stall_window is not None and self.stall_window < 1:
            raise ValueError("stall_window must be positive or None")
        if self.dollar_budget is not None and self.dollar_budget < 0:
            raise ValueError("dollar_budget must be non-negative")
        if self.history not in (LATEST, FULL):
            raise ValueError(f"history must be {LATEST!r} or {FULL!r}")

    def to_dict(self) -> dict:
        return {"max_iterations": self.max_iterations, "stall_window": self.stall_window,
                "dollar_budget": self.dollar_budget, "history": self.history}

    @classmethod
    def from_dict(cls, d: dict) -> "StopPolicy":
        return cls(**d)


@dataclass(frozen=True)
class IterationRecord:
    index: int
    prompt: str
    response: str
    artifact: str
    report: dict
    usage: GeneratorUsage
    verdict: str
    cost: float = 0.0
    feedback: str | None = None
    outcome: str | None = None

    def to_dict(self) -> dict:
        return {"index": self.index, "prompt": self.prompt, "response": self.response, "artifact": self.artifact,
                "report": self.report, "usage": self.usage.to_dict(), "verdict": self.verdict, "cost": self.cost,
                "feedback": self.feedback, "outcome": self.outcome}

    @classmethod
    def from_dict(cls, d: dict) -> "IterationRecord":
        return cls(d["index"], d["prompt"], d["response"], d["artifact"], d["report"],
                   GeneratorUsage.from_dict(d["usage"]), d["verdict"], d.get("cost", 0.0),
                   d.get("feedback"), d.get("outcome"))


@dataclass
class ModuloRun:
    instance_id: str
    records: list = field(default_factory=list)
    status: str | None = None  # None while the run is still open
    solved_at: int | None = None
    stop_reason: str | None = None

    @property
    def total_cost(self) -> float:
        return sum(r.cost for r in self.records)

    @property
    def total_latency_s(self) -> float:
        return sum(r.usage.latency_s for r in self.records)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    @property
    def label(self) -> str:
        return f"{SOLVED}({self.solved_at})" if self.solved else str(self.status)

    def usage_total(self) -> GeneratorUsage:
        return GeneratorUsage(sum(r.usage.input_tokens for r in self.records),
                              sum(r.usage.output_tokens for r in self.records),
                              sum(r.usage.reasoning_tokens for r in self.records),
                              self.total_latency_s)

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "status": self.status, "solved_at": self.solved_at,
                "stop_reason": self.stop_reason, "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d: dict) -> "ModuloRun":
        return cls(d["instance_id"], [IterationRecord.from_dict(r) for r in d["records"]], d["status"],
                   d.get("solved_at"), d.get("stop_reason"))


class _Budget:
    """Running spend shared by the instances of one batch."""

    def __init__(self, limit: float | None):
        self.limit = limit
        self.spent = 0.0
        self._lock = threading.Lock()

    def exhausted(self) -> bool:
        with self._lock:
            return self.limit is not None and self.spent >= self.limit

    def charge(self, dollars: float) -> None:
        with self._lock:
            self.spent += dollars


class _Runner:
    """Carries one instance's loop state between iterations."""

    def __init__(self, task: Task, generator: Generator, policy: StopPolicy, cost_model, translator=None):
        self.task = task
        self.generator = generator
        self.policy = policy
        self.cost_model = cost_model
        self.translator = translator
        self.run = ModuloRun(task.id)
        self.base = first_prompt(task)
        self.prompt = self.base

    def step(self, budget: _Budget) -> None:
        run = self.run
        if run.status is not None:
            return
        if budget.exhausted():
            run.status, run.stop_reason = BUDGET_STOP, "dollar budget spent"
            return
        index = len(run.records) + 1
        try:
            text, usage = self.generator.propose(self.prompt, self.task)
        except (AuthError, ReplayMiss):
            raise
        except GeneratorError as exc:
            run.records.append(IterationRecord(index, self.prompt, "", "", {"error": str(exc)},
                                               GeneratorUsage(), ERROR))
            run.status, run.stop_reason = EXHAUSTED, "generator failed"
            return
        cost = 0.0 if self.generator.kind == ORACLE else compute_cost(usage, self.generator.model, self.cost_model)
        budget.charge(cost)
        ev: Evaluation = evaluate(self.task, text, self.translator)
        run.records.append(IterationRecord(index, self.prompt, text, ev.artifact, ev.report, usage,
                                           VALID if ev.valid else INVALID, cost, ev.feedback, ev.outcome))
        if ev.valid:
            run.status, run.solved_at, run.stop_reason = SOLVED, index, "valid answer"
            return
        if index >= self.policy.max_iterations:
            run.status, run.stop_reason = EXHAUSTED, "iteration limit"
            return
        base = self.prompt if self.policy.history == FULL else self.base
        self.prompt = next_prompt(self.task, base, text, ev)

    def stop(self, reason: str) -> None:
        if self.run.status is None:
            self.run.status, self.run.stop_reason = EXHAUSTED, reason


def run_instance(task: Task, generator: Generator, policy: StopPolicy | None = None,
                 cost_model: CostModel | None = None, translator=None) -> ModuloRun:
    policy = policy or StopPolicy()
    runner = _Runner(task, generator, policy, cost_model, translator)
    budget = _Budget(policy.dollar_budget)
    while runner.run.status is None:
        runner.step(budget)
    return runner.run


@dataclass
class BatchResult:
    runs: list  # ModuloRun, sorted by instance id
    max_iterations: int
    model: str = ""

    @property
    def n(self) -> int:
        return len(self.runs)

    @property
    def rounds(self) -> int:
        """Iterations scheduled in the longest run, which is the number of lockstep rounds."""
        return max((len(r.records) for r in self.runs), default=0)

    def curve(self) -> list:
        """Fraction solved within k iterations, for k = 1 .. max_iterations."""
        if not self.runs:
            return [0.0] * self.max_iterations
        return [sum(1 for r in self.runs if r.solved and r.solved_at <= k) / self.n
                for k in range(1, self.max_iterations + 1)]

    @property
    def accuracy(self) -> float:
        return sum(r.solved for r in self.runs) / self.n if self.runs else 0.0

    @property
    def first_try_accuracy(self) -> float:
        return self.curve()[0] if self.runs else 0.0

    @property
    def mean_iterations_solved(self) -> float | None:
        solved = [r.solved_at for r in self.runs if r.solved]
        return sum(solved) / len(solved) if solved else None

    @property
    def mean_iterations_used(self) -> float:
        return sum(len(r.records) for r in self.runs) / self.n if self.runs else 0.0

    @property
    def total_cost(self) -> float:
        return sum(r.total_cost for r in self.runs)

    @property
    def mean_latency_s(self) -> float:
        return sum(r.total_latency_s for r in self.runs) / self.n if self.runs else 0.0

    def usage_total(self) -> GeneratorUsage:
        us = [r.usage_total() for r in self.runs]
        return GeneratorUsage(sum(u.input_tokens for u in us), sum(u.output_tokens for u in us),
                              sum(u.reasoning_tokens for u in us), sum(u.latency_s for u in us))

    def summary(self) -> dict:
        u = self.usage_total()
        return {
            "model": self.model, "instances": self.n, "max_iterations": self.max_iterations,
            "rounds": self.rounds, "accuracy": self.accuracy, "first_try_accuracy": self.first_try_accuracy,
            "mean_iterations_solved": self.mean_iterations_solved,
            "mean_iterations_used": self.mean_iterations_used, "total_cost": self.total_cost,
            "mean_latency_s": self.mean_latency_s, "input_tokens": u.input_tokens,
            "output_tokens": u.output_tokens, "reasoning_tokens": u.reasoning_tokens,
            "curve": self.curve(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "status", "solved_at", "iterations", "input_tokens", "output_tokens",
                    "reasoning_tokens", "cost", "latency_s", "stop_reason"])
        for r in self.runs:
            u = r.usage_total()
            w.writerow([r.instance_id, r.status, r.solved_at or "", len(r.records), u.input_tokens,
                        u.output_tokens, u.reasoning_tokens, repr(r.total_cost), repr(u.latency_s), r.stop_reason])
        return buf.getvalue()

    def curve_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "cumulative_accuracy"])
        for k, a in enumerate(self.curve(), 1):
            w.writerow([k, repr(a)])
        return buf.getvalue()

    def table(self) -> str:
        mis = self.mean_iterations_solved
        rows = [("% correct", f"{100 * self.accuracy:.1f}"),
                ("% correct at first try", f"{100 * self.first_try_accuracy:.1f}"),
                ("# of iters (mean, solved)", "-" if mis is None else f"{mis:.2f}"),
                ("# of iters (max scheduled)", str(self.max_iterations)),
                ("cost ($)", f"{self.total_cost:.4f}"),
                ("mean latency (s)", f"{self.mean_latency_s:.3f}")]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"

    def runs_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.runs)


def run_batch(tasks: list, generator: Generator, policy: StopPolicy | None = None,
              cost_model: CostModel | None = None, parallelism: int = 4, translator=None,
              on_run_complete=None) -> BatchResult:
    """Run every task in lockstep rounds, one iteration per open instance per round.

    Within a round instances run concurrently; each instance's iterations stay
    sequential.  When ``stall_window`` consecutive rounds solve nothing new,
    the remaining instances are stopped.  ``on_run_complete`` is called with
    each finished ModuloRun, from the coordinating thread.
    """
    policy = policy or StopPolicy()
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("task ids must be unique")
    runners = [_Runner(t, generator, policy, cost_model, translator) for t in tasks]
    budget = _Budget(policy.dollar_budget)
    stalled = 0
    reported = set()

    def finish_round():
        for r in runners:
            if r.run.status is not None and r.task.id not in reported:
                reported.add(r.task.id)
                if on_run_complete is not None:
                    on_run_complete(r.run)

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        while any(r.run.status is None for r in runners):
            open_runners = [r for r in runners if r.run.status is None]
            before = sum(r.run.solved for r in runners)
            for fut in [pool.submit(r.step, budget) for r in open_runners]:
                fut.result()
            gained = sum(r.run.solved for r in runners) - before
            stalled = 0 if gained else stalled + 1
            if policy.stall_window is not None and stalled >= policy.stall_window:
                for r in runners:
                    r.stop("no new solutions")
            finish_round()
    runs = sorted((r.run for r in runners), key=lambda run: run.instance_id)
    return BatchResult(runs, policy.max_iterations, generator.model)


def batch_from_runs(runs: list, max_iterations: int, model: str = "") -> BatchResult:
    return BatchResult(sorted(runs, key=lambda r: r.instance_id), max_iterations, model)


def read_runs(path) -> list:
    with open(path, encoding="utf-8") as f:
        return [ModuloRun.from_dict(json.loads(line)) for line in f if line.strip()]


def difficulty_export(batch: BatchResult, oracle_stats: dict) -> list:
    """Rows of (instance, optimal_length, expanded_nodes, reasoning_tokens, solved_at)."""
    rows = []
    for r in batch.runs:
        st = oracle_stats.get(r.instance_id, {})
        rows.append({"instance": r.instance_id, "optimal_length": st.get("optimal_length"),
                     "oracle_expanded_nodes": st.get("expanded_nodes"),
                     "reasoning_tokens": r.usage_total().reasoning_tokens, "solved_at": r.solved_at})
    return rows


def rows_csv(rows: list, columns: list | None = None) -> str:
    if not rows:
        return ""
    columns = columns or list(rows[0])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    return buf.getvalue()
