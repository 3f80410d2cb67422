import pytest

from modulobench.clients import GeneratorConfig
from modulobench.harness import RunManifest, execute_run
from modulobench.instances.io import generate_set
from modulobench.loop import CostModel, StopPolicy
from modulobench.report import (
    TABLES, ReportError, build_report, cost_summary_table, cost_table, load_run_dirs, negatives_table, render_text,
    write_report,
)
from modulobench.resources import read_asset
from modulobench.tasks import IMPOSSIBLE_ANSWER


@pytest.fixture(scope="module")
def sets(tmp_path_factory):
    base = tmp_path_factory.mktemp("sets")
    return {"solvable": generate_set("blocksworld", 4, 11, base / "bw"),
            "unsolvable": generate_set("blocksworld-unsolvable", 4, 11, base / "bwu")}


def _run(set_dir, out, kind="oracle", script=(), max_iterations=10, model=None, rates=None):
    m = RunManifest(str(set_dir), GeneratorConfig(kind, model=model), StopPolicy(max_iterations=max_iterations),
                    cost_model=rates, script=tuple(script))
    execute_run(m, out)
    return out


@pytest.fixture(scope="module")
def runs(sets, tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    rates = base / "rates.toml"
    rates.write_text('[models."paid"]\ninput = 15.0\noutput = 60.0\n')
    return {
        "direct": _run(sets["solvable"], base / "direct", max_iterations=1),
        "modulo": _run(sets["solvable"], base / "modulo"),
        "claims": _run(sets["unsolvable"], base / "claims", "scripted", [IMPOSSIBLE_ANSWER], model="paid",
                       rates=str(rates)),
        "refuser": _run(sets["solvable"], base / "refuser", "scripted", [IMPOSSIBLE_ANSWER], max_iterations=1,
                        model="paid", rates=str(rates)),
    }


def test_direct_vs_modulo(runs):
    rows = build_report([runs["modulo"], runs["direct"]])["modulo"]
    assert [r["mode"] for r in rows] == ["direct", "modulo"]
    assert all(r["pct_correct"] == 100.0 for r in rows)
    assert rows[0]["max_iters"] == 1 and rows[1]["max_iters"] == 10


def test_negatives_table(runs):
    rows = negatives_table(load_run_dirs([runs["claims"], runs["refuser"]]))
    assert len(rows) == 1
    row = rows[0]
    assert row["domain"] == "blocksworld" and row["model"] == "paid"
    assert (row["unsolvable"], row["true_negative_pct"]) == (4, 100.0)
    assert (row["solvable"], row["false_negative_pct"]) == (4, 100.0)


def test_negatives_oracle_never_false_negative(runs):
    rows = negatives_table(load_run_dirs([runs["modulo"]]))
    assert rows[0]["false_negative_pct"] == 0.0 and rows[0]["true_negative_pct"] is None


def test_cost_tables(runs):
    dirs = load_run_dirs([runs["modulo"], runs["claims"]])
    assert all(r["cost_per_100"] == 0 for r in cost_table(dirs))
    cm = CostModel({"paid": (15.0, 60.0), "oracle": (1.0, 1.0)})
    rows = cost_table(dirs, cm)
    assert rows[1]["input_tokens_per_100"] == 0
    summary = cost_summary_table(dirs, cm)
    assert set(summary[0]) == {"oracle", "paid"}


def test_cost_per_100_from_sample_config(runs):
    cm = CostModel.from_toml(read_asset("config/costs.toml"))
    rows = cost_table(load_run_dirs([runs["direct"]]), cm)
    text = render_text(rows, "cost")
    assert "cost_per_100" in text.splitlines()[1]


def test_tables_render_and_write(tmp_path, runs):
    tables = build_report(list(runs.values()))
    assert set(tables) == set(TABLES)
    for name, rows in tables.items():
        assert render_text(rows, name).startswith(name)
    written = write_report(tables, tmp_path / "rep")
    assert {p.name for p in written} == {f"{n}.csv" for n in TABLES} | {"report.txt"}
    curves = tables["curves"]
    assert len([r for r in curves if r["domain"] == "blocksworld"]) >= 10


def test_difficulty_rows(runs):
    rows = build_report([runs["modulo"]])["difficulty"]
    assert len(rows) == 4
    assert all(r["reasoning_tokens"] == 0 and r["optimal_length"] >= 1 for r in rows)


def test_empty_and_bad_inputs(tmp_path):
    with pytest.raises(ReportError):
        build_report([])
    with pytest.raises(ReportError):
        build_report([tmp_path])
    assert render_text([], "x") == "x\n(no rows)\n"
