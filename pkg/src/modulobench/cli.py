"""Command line: gen, obfuscate, solve, validate, run, report.

``--config`` names a TOML file.  ``run`` reads its run manifest from it,
``report`` reads model rates (a ``[models]`` table or a ``cost_model`` path),
and ``gen`` reads generator parameters from a ``[params]`` table.
Credentials come only from the environment variable named in the config.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .clients import AuthError, GeneratorError
from .instances.io import DEFAULTS, SET_KINDS, generate_set, load_tasks, obfuscate_set, write_plan
from .loop import CostModel, UnknownModel, tomllib
from .obfuscation import NAMED_MYSTERY, RANDOMIZED
from .pddl import parse_domain, parse_problem
from .report import TABLES, ReportError, build_report, render_text, write_report
from .search import BREADTH_FIRST, GREEDY, SOLVED, SearchLimits, solve
from .tasks import PLANNING, evaluate, oracle_answer
from .validator import build_backprompt, classify_response, validate_plan


class CliError(Exception):
    pass


def _load_config(path) -> tuple:
    if not path:
        return {}, None
    p = Path(path)
    if not p.exists():
        raise CliError(f"config file {p} not found")
    return tomllib.loads(p.read_text(encoding="utf-8")), p.parent


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text.lower(), text)


def cmd_gen(args, config, base) -> int:
    params = dict(config.get("params", {}))
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"--param expects key=value, got {item!r}")
        params[key] = _parse_value(value)
    out = generate_set(args.kind, args.count, args.seed, _need_out(args), params)
    print(f"wrote {args.count} {args.kind} instances to {out}")
    return 0


def cmd_obfuscate(args, config, base) -> int:
    out = obfuscate_set(args.set, _need_out(args), args.scheme, args.seed, args.rename_objects)
    print(f"wrote {args.scheme} copy of {args.set} to {out}")
    return 0


def _limits(args) -> SearchLimits:
    return SearchLimits(args.max_nodes, args.max_seconds)


def cmd_solve(args, config, base) -> int:
    target = Path(args.target)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    strategy = BREADTH_FIRST if args.strategy == "bfs" else GREEDY
    if not target.is_dir():
        if not args.domain:
            raise CliError("solving a single problem file needs --domain")
        domain = parse_domain(Path(args.domain).read_text(encoding="utf-8"))
        problem = parse_problem(target.read_text(encoding="utf-8"), domain)
        res = solve(domain, problem, strategy, _limits(args))
        print(f"{target.name}\t{res.status}\t{len(res.plan) if res.plan else '-'}\t{res.expanded_nodes}\t"
              f"{res.elapsed_s:.3f}s")
        if res.status == SOLVED:
            if out:
                write_plan(out / (target.stem + ".plan"), res.plan)
            else:
                print("\n".join(str(s) for s in res.plan.steps))
        return 0
    total, t0 = 0, time.perf_counter()
    for task in load_tasks(target):
        total += 1
        if task.kind == PLANNING:
            res = solve(task.instance.domain, task.instance.problem, strategy, _limits(args))
            print(f"{task.id}\t{res.status}\t{len(res.plan) if res.plan else '-'}\t{res.expanded_nodes}\t"
                  f"{res.elapsed_s:.3f}s")
            if out and res.status == SOLVED:
                write_plan(out / f"{task.id}.plan", res.plan)
        else:
            answer = oracle_answer(task, _limits(args))
            print(f"{task.id}\t{answer.splitlines()[0] if answer else ''}")
            if out:
                (out / f"{task.id}.txt").write_text(answer + "\n", encoding="utf-8")
    elapsed = time.perf_counter() - t0
    print(f"{total} instances, {elapsed:.2f}s total, {elapsed / max(total, 1):.4f}s per instance")
    return 0


def cmd_validate(args, config, base) -> int:
    response = Path(args.response).read_text(encoding="utf-8")
    if args.set:
        if not args.instance:
            raise CliError("--set needs --instance")
        tasks = {t.id: t for t in load_tasks(args.set)}
        if args.instance not in tasks:
            raise CliError(f"no instance {args.instance!r} in {args.set}")
        ev = evaluate(tasks[args.instance], response)
        print(json.dumps({"valid": ev.valid, "outcome": ev.outcome, "report": ev.report}, indent=2, sort_keys=True))
        if ev.feedback:
            print(ev.feedback, end="" if ev.feedback.endswith("\n") else "\n")
        return 0 if ev.valid else 1
    if not (args.domain and args.problem):
        raise CliError("give either --set and --instance, or --domain and --problem")
    domain = parse_domain(Path(args.domain).read_text(encoding="utf-8"))
    problem = parse_problem(Path(args.problem).read_text(encoding="utf-8"), domain)
    cls = classify_response(response, domain, problem)
    report = validate_plan(domain, problem, cls.extracted) if cls.extracted is not None else None
    print(json.dumps({"response_kind": cls.kind, "report": report.to_dict() if report else None},
                     indent=2, sort_keys=True))
    if report is not None and not report.valid:
        print(build_backprompt(report))
    return 0 if report is not None and report.valid else 1


def _abs(path):
    # paths given on the command line are relative to the working directory, not the config file
    return None if path is None else str(Path(path).resolve())


def _run_manifest(args, config, base):
    from .harness import RunManifest

    d = dict(config)
    gen = dict(d.get("generator", {}))
    overrides = {"kind": args.generator, "model": args.model, "endpoint": args.endpoint,
                 "api_key_env": args.api_key_env, "transcript": _abs(args.transcript)}
    gen.update({k: v for k, v in overrides.items() if v is not None})
    if "kind" not in gen:
        gen["kind"] = "oracle"
    d["generator"] = gen
    policy = dict(d.get("policy", {}))
    for key, value in (("max_iterations", args.max_iterations), ("stall_window", args.stall_window),
                       ("dollar_budget", args.budget), ("history", args.history)):
        if value is not None:
            policy[key] = value
    if args.no_stall_stop:
        policy["stall_window"] = None
    d["policy"] = policy
    for key in ("label", "style", "shots", "parallelism"):
        value = getattr(args, key)
        if value is not None:
            d[key] = value
    if args.cost_model:
        d["cost_model"] = _abs(args.cost_model)
    if args.set:
        d["instance_set"] = _abs(args.set)
    d["seed"] = args.seed
    if "instance_set" not in d:
        raise CliError("run needs an instance set (positional argument or instance_set in --config)")
    return RunManifest.from_dict(d, base)


def cmd_run(args, config, base) -> int:
    from .harness import ManifestError, execute_run

    try:
        manifest = _run_manifest(args, config, base)
        batch = execute_run(manifest, _need_out(args))
    except ManifestError as exc:
        raise CliError(str(exc)) from None
    print(batch.table(), end="")
    return 0


def cmd_report(args, config, base) -> int:
    cost_model = None
    if "models" in config:
        cost_model = CostModel({m: (float(r["input"]), float(r["output"])) for m, r in config["models"].items()})
    elif config.get("cost_model"):
        p = Path(config["cost_model"])
        cost_model = CostModel.load(p if p.is_absolute() or base is None else base / p)
    try:
        tables = build_report(args.runs, cost_model)
    except ReportError as exc:
        raise CliError(str(exc)) from None
    names = args.tables or list(TABLES)
    tables = {k: v for k, v in tables.items() if k in names}
    if args.out:
        for p in write_report(tables, args.out):
            print(f"wrote {p}")
    else:
        print("\n".join(render_text(rows, name) for name, rows in tables.items()), end="")
    return 0


def _need_out(args) -> Path:
    if not args.out:
        raise CliError(f"{args.command} needs --out")
    return Path(args.out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML configuration file")

    parser = argparse.ArgumentParser(prog="modulobench", parents=[common],
                                     description="Planning and scheduling benchmarks with a verifier loop.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate an instance set")
    p.add_argument("kind", choices=SET_KINDS)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="generator parameter; known keys per kind: "
                        + "; ".join(f"{k}: {', '.join(v)}" for k, v in DEFAULTS.items()))
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("obfuscate", parents=[common], help="rename a planning set's vocabulary")
    p.add_argument("set")
    p.add_argument("--scheme", choices=[NAMED_MYSTERY, RANDOMIZED], default=RANDOMIZED)
    p.add_argument("--rename-objects", action="store_true")
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("solve", parents=[common], help="solve a set or a problem file with the oracle")
    p.add_argument("target", help="instance set directory or PDDL problem file")
    p.add_argument("--domain", help="PDDL domain file, for a single problem")
    p.add_argument("--strategy", choices=["bfs", "greedy"], default="bfs")
    p.add_argument("--max-nodes", type=int, default=2_000_000)
    p.add_argument("--max-seconds", type=float, default=120.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", parents=[common], help="check an answer; exit 0 iff valid")
    p.add_argument("response", help="file holding the answer text")
    p.add_argument("--set")
    p.add_argument("--instance")
    p.add_argument("--domain")
    p.add_argument("--problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", parents=[common], help="run the verifier loop over a set (resumable)")
    p.add_argument("set", nargs="?")
    p.add_argument("--generator", choices=["oracle", "replay", "scripted", "remote"])
    p.add_argument("--model")
    p.add_argument("--endpoint")
    p.add_argument("--api-key-env", help="name of the environment variable holding the API key")
    p.add_argument("--transcript", help="transcript to replay")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--stall-window", type=int)
    p.add_argument("--no-stall-stop", action="store_true")
    p.add_argument("--budget", type=float, help="dollar budget for the batch")
    p.add_argument("--history", choices=["latest", "full"])
    p.add_argument("--style", choices=["pddl", "natural"])
    p.add_argument("--shots", type=int)
    p.add_argument("--parallelism", type=int)
    p.add_argument("--cost-model", help="TOML file of model rates")
    p.add_argument("--label")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", parents=[common], help="tables over finished run directories")
    p.add_argument("runs", nargs="*")
    p.add_argument("--tables", nargs="+", choices=list(TABLES))
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", 0), ("out", None), ("config", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        config, base = _load_config(args.config)
        return args.func(args, config, base)
    except UnknownModel as exc:
        print(f"error: cost model: {exc.args[0]}", file=sys.stderr)
        return 2
    except (CliError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AuthError as exc:
        print(f"error: credentials: {exc}", file=sys.stderr)
        return 3
    except GeneratorError as exc:
        print(f"error: generator: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
