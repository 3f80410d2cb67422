"""Tables over finished run directories.

A run directory holds ``run.json`` (what was run), ``runs.jsonl`` (one loop
record per instance) and a copy of the instance set's ``manifest.json``.
Every table comes back as rows of dicts and renders to CSV or aligned text.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .loop import BatchResult, CostModel, batch_from_runs, compute_cost, difficulty_export, read_runs, rows_csv
from .validator import FALSE_NEGATIVE, TRUE_NEGATIVE

RUN_FILE = "run.json"
RUNS_FILE = "runs.jsonl"
SET_MANIFEST = "manifest.json"


class ReportError(ValueError):
    pass


@dataclass
class RunDir:
    path: Path
    run: dict
    batch: BatchResult
    set_manifest: dict

    @property
    def label(self) -> str:
        return self.run.get("label") or self.set_manifest.get("kind", "?")

    @property
    def family(self) -> str:
        """Domain with suite suffixes dropped, so solvable and unsolvable suites group together."""
        base = self.set_manifest.get("kind", self.label)
        for suffix in ("-unsolvable", "-hard"):
            base = base.removesuffix(suffix)
        ob = self.set_manifest.get("obfuscation")
        return f"{base}/{ob['scheme']}" if ob else base

    @property
    def model(self) -> str:
        return self.batch.model

    @property
    def mode(self) -> str:
        return "direct" if self.batch.max_iterations == 1 else "modulo"

    def oracle_stats(self) -> dict:
        return {e["id"]: e for e in self.set_manifest.get("instances", [])}


def load_run_dir(path) -> RunDir:
    path = Path(path)
    for name in (RUN_FILE, RUNS_FILE):
        if not (path / name).exists():
            raise ReportError(f"{path} is not a run directory (missing {name})")
    run = json.loads((path / RUN_FILE).read_text(encoding="utf-8"))
    runs = read_runs(path / RUNS_FILE)
    if any(r.status is None for r in runs):
        raise ReportError(f"{path} has unfinished runs")
    set_manifest = {}
    if (path / SET_MANIFEST).exists():
        set_manifest = json.loads((path / SET_MANIFEST).read_text(encoding="utf-8"))
    max_iter = run.get("policy", {}).get("max_iterations", 10)
    return RunDir(path, run, batch_from_runs(runs, max_iter, run.get("model", "")), set_manifest)


def load_run_dirs(paths) -> list:
    dirs = [load_run_dir(p) for p in paths]
    if not dirs:
        raise ReportError("no run directories given")
    return dirs


def _pct(x: float) -> float:
    return round(100 * x, 2)


def accuracy_table(dirs: list) -> list:
    """First-attempt accuracy and mean time per instance."""
    rows = []
    for d in dirs:
        first = [r.records[0] for r in d.batch.runs if r.records]
        avg_time = sum(rec.usage.latency_s for rec in first) / len(first) if first else 0.0
        rows.append({"domain": d.label, "model": d.model, "instances": d.batch.n,
                     "correct": sum(rec.verdict == "valid" for rec in first),
                     "pct_correct": _pct(d.batch.first_try_accuracy), "avg_time_s": round(avg_time, 3)})
    return rows


def _dollars(d: RunDir, cost_model: CostModel | None) -> float:
    """Recorded spend, or the usage repriced when ``cost_model`` has rates for the run's model."""
    if cost_model is None or d.model not in cost_model.rates:
        return d.batch.total_cost
    return sum(compute_cost(rec.usage, d.model, cost_model) for r in d.batch.runs for rec in r.records)


def cost_table(dirs: list, cost_model: CostModel | None = None) -> list:
    """Tokens and dollars per 100 instances.  ``cost_model`` reprices the recorded usage."""
    rows = []
    for d in dirs:
        b = d.batch
        u = b.usage_total()
        dollars = _dollars(d, cost_model)
        scale = 100 / b.n if b.n else 0.0
        rows.append({"domain": d.label, "model": d.model, "instances": b.n,
                     "input_tokens_per_100": round(u.input_tokens * scale),
                     "output_tokens_per_100": round(u.output_tokens * scale),
                     "reasoning_tokens_per_100": round(u.reasoning_tokens * scale),
                     "cost_per_100": round(dollars * scale, 2)})
    return rows


def cost_summary_table(dirs: list, cost_model: CostModel | None = None) -> list:
    """One row, one column per model: dollars per 100 instances over all of that model's runs."""
    spent: dict = {}
    for d in dirs:
        total, n = spent.get(d.model, (0.0, 0))
        spent[d.model] = (total + _dollars(d, cost_model), n + d.batch.n)
    return [{m: round(100 * t / n, 2) if n else 0.0 for m, (t, n) in sorted(spent.items())}]


def modulo_table(dirs: list) -> list:
    """Direct prompting next to the loop: accuracy, iterations and cost."""
    rows = []
    for d in dirs:
        b = d.batch
        mis = b.mean_iterations_solved
        rows.append({"domain": d.label, "model": d.model, "mode": d.mode, "instances": b.n,
                     "pct_correct": _pct(b.accuracy), "pct_first_try": _pct(b.first_try_accuracy),
                     "mean_iters_solved": None if mis is None else round(mis, 2),
                     "max_iters": b.max_iterations, "rounds": b.rounds, "cost": round(b.total_cost, 4)})
    return sorted(rows, key=lambda r: (r["domain"], r["model"], r["mode"] != "direct"))


def curve_table(dirs: list) -> list:
    rows = []
    for d in dirs:
        for k, a in enumerate(d.batch.curve(), 1):
            rows.append({"domain": d.label, "model": d.model, "iteration": k, "cumulative_pct": _pct(a)})
    return rows


def difficulty_table(dirs: list) -> list:
    rows = []
    for d in dirs:
        for row in difficulty_export(d.batch, d.oracle_stats()):
            rows.append({"domain": d.label, "model": d.model, **row})
    return rows


def negatives_table(dirs: list) -> list:
    """True negatives over unsolvable instances, false negatives over solvable ones.

    Only first attempts count.  Both rates are percentages of the instances
    of that kind, grouped by model and domain family.
    """
    groups: dict = {}
    for d in dirs:
        stats = d.oracle_stats()
        g = groups.setdefault((d.model, d.family), {"unsolvable": 0, "tn": 0, "solvable": 0, "fn": 0})
        for r in d.batch.runs:
            if not r.records or r.records[0].outcome is None:
                continue
            outcome = r.records[0].outcome
            if stats.get(r.instance_id, {}).get("status") == "Unsolvable":
                g["unsolvable"] += 1
                g["tn"] += outcome == TRUE_NEGATIVE
            else:
                g["solvable"] += 1
                g["fn"] += outcome == FALSE_NEGATIVE
    rows = []
    for (model, family), g in sorted(groups.items()):
        if not g["unsolvable"] and not g["solvable"]:
            continue
        rows.append({"domain": family, "model": model,
                     "unsolvable": g["unsolvable"],
                     "true_negative_pct": _pct(g["tn"] / g["unsolvable"]) if g["unsolvable"] else None,
                     "solvable": g["solvable"],
                     "false_negative_pct": _pct(g["fn"] / g["solvable"]) if g["solvable"] else None})
    return rows


TABLES = {
    "accuracy": accuracy_table,
    "cost": cost_table,
    "cost_summary": cost_summary_table,
    "modulo": modulo_table,
    "curves": curve_table,
    "difficulty": difficulty_table,
    "negatives": negatives_table,
}


def render_text(rows: list, title: str = "") -> str:
    if not rows:
        return (title + "\n" if title else "") + "(no rows)\n"
    cols = list(rows[0])
    cells = [[("-" if row[c] is None else str(row[c])) for c in cols] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]

    def line(vals):
        return "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()

    out = [title] if title else []
    out += [line(cols), line(["-" * w for w in widths])] + [line(r) for r in cells]
    return "\n".join(out) + "\n"


def build_report(paths, cost_model: CostModel | None = None) -> dict:
    dirs = load_run_dirs(paths)
    out = {}
    for name, fn in TABLES.items():
        out[name] = fn(dirs, cost_model) if name.startswith("cost") else fn(dirs)
    return out


def write_report(tables: dict, out) -> list:
    """Write one CSV per table plus ``report.txt``; returns the written paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in tables.items():
        p = out / f"{name}.csv"
        p.write_text(rows_csv(rows), encoding="utf-8")
        written.append(p)
    p = out / "report.txt"
    p.write_text("\n".join(render_text(rows, name) for name, rows in tables.items()), encoding="utf-8")
    written.append(p)
    return written
