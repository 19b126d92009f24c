"""Matrix runner: persistence, resumability, fault isolation, rendering."""

import csv
import io
import json
from pathlib import Path

import pytest
import yaml

from dagforge.cli import main as cli_main
from dagforge.evaluation import EvaluationReport
from dagforge.gateway import ProviderConfig
from dagforge.harness import (
    ExperimentCell,
    MatrixConfig,
    build_matrix_report,
    load_run_dir,
    render_report,
    run_matrix,
)

from conftest import CASES_DIR, FIXTURES_DIR, MODEL


def make_config(tmp_path, cases=None, methods=("templated",), models=(MODEL,),
                judge=False):
    case_ids = cases or (
        "dm_sequential",
        "dm_parallel",
        "dm_task_parallel",
        "multilingual_review",
        "procurement_validation",
    )
    return MatrixConfig(
        run_dir=tmp_path / "run",
        cases={cid: str(CASES_DIR / f"{cid}.txt") for cid in case_ids},
        models=tuple(models),
        methods=tuple(methods),
        provider=ProviderConfig(name="azureopenai"),
        mode="replay",
        fixtures_dir=FIXTURES_DIR,
        workers=4,
        judge_enabled=judge,
        judge_model="deepseek-chat",
        fallback_image="python:3.11-slim",
    )


def make_report(loadable=1, sat=8.0, dst=9.0, pct=9.5):
    if not loadable:
        sat = dst = pct = 0.0
    return EvaluationReport(
        loadable=loadable, sat=sat, dst=dst, pct=pct, s_struct=90.0,
        s_config=100.0, dryrun_ratio=1.0, bonus=1.0, violations=(),
        penalized=True,
    )


def make_cell(case, method, loadable=1, sat=8.0, dst=9.0, pct=9.5,
              tokens=1000, size=2048):
    cell = ExperimentCell(case=case, model=MODEL, method=method)
    cell.report = make_report(loadable, sat, dst, pct)
    cell.tokens = {"grand_total": {"total_tokens": tokens}}
    cell.byte_size = size
    cell.dag_path = "dag.py"
    return cell


def test_replay_matrix_five_templated_cells_all_loadable(tmp_path):
    config = make_config(tmp_path)
    matrix = run_matrix(config)
    assert len(matrix.cells) == 5
    assert all(cell.status == "ok" for cell in matrix.cells)
    assert all(cell.report.loadable == 1 for cell in matrix.cells)
    (stats,) = matrix.method_stats
    assert stats.method == "templated"
    assert stats.n == 5 and stats.success_count == 5
    assert stats.success_rate == 100.0
    run_dir = config.run_dir
    for cell in matrix.cells:
        cell_dir = run_dir / cell.case / cell.model / cell.method
        for name in ("analysis.json", "workflow.yaml", "dag.py", "eval.json",
                     "tokens.json", "report.md"):
            assert (cell_dir / name).is_file(), name
        assert (cell_dir / "stages" / "components.txt").is_file()


def test_missing_fixture_cell_is_isolated(tmp_path):
    config = make_config(tmp_path, models=(MODEL, "unknown-model"))
    matrix = run_matrix(config)
    assert len(matrix.cells) == 10
    errored = [c for c in matrix.cells if c.status == "error"]
    ok = [c for c in matrix.cells if c.status == "ok"]
    assert len(errored) == 5 and len(ok) == 5
    assert all("MISSING_FIXTURE" in c.error for c in errored)
    assert all(c.report.loadable == 0 for c in errored)
    # errored cells contribute zeros, so penalized stats cover all ten
    (stats,) = matrix.method_stats
    assert stats.n == 10 and stats.success_count == 5
    assert matrix.missing_artifacts == {"templated": 5}


def test_full_matrix_enumerates_260_cells(tmp_path):
    # 13 models x 5 cases x 4 methods; no fixtures, so every cell errors,
    # but the matrix still completes with one n=65 row per method.
    config = MatrixConfig(
        run_dir=tmp_path / "run",
        cases={
            cid: str(CASES_DIR / f"{cid}.txt")
            for cid in (
                "dm_sequential",
                "dm_parallel",
                "dm_task_parallel",
                "multilingual_review",
                "procurement_validation",
            )
        },
        models=tuple(f"model_{i:02d}" for i in range(13)),
        methods=("templated", "hybrid", "llm_only", "direct"),
        provider=ProviderConfig(name="stub"),
        mode="replay",
        fixtures_dir=tmp_path / "no_fixtures",
        workers=8,
    )
    matrix = run_matrix(config)
    assert len(matrix.cells) == 260
    assert all(cell.status == "error" for cell in matrix.cells)
    assert {stats.method: stats.n for stats in matrix.method_stats} == {
        "templated": 65,
        "hybrid": 65,
        "llm_only": 65,
        "direct": 65,
    }


def test_matrix_resumes_from_completed_cells(tmp_path):
    config = make_config(tmp_path, cases=("dm_sequential", "procurement_validation"))
    first = run_matrix(config)
    eval_path = (
        config.run_dir / "dm_sequential" / MODEL / "templated" / "eval.json"
    )
    stamp = eval_path.stat().st_mtime_ns

    second = run_matrix(config)
    assert eval_path.stat().st_mtime_ns == stamp  # untouched on rerun
    assert render_report(first, "json") == render_report(second, "json")


def test_interrupted_run_resumes_to_identical_report(tmp_path):
    from dagforge.harness import run_cell

    # simulate an interruption: one cell completed, then the full matrix
    partial = make_config(tmp_path / "partial")
    run_cell(partial, "dm_sequential", MODEL, "templated")
    resumed = run_matrix(partial)

    fresh = run_matrix(make_config(tmp_path / "fresh"))
    assert render_report(resumed, "json") == render_report(fresh, "json")


def test_two_full_replay_runs_identical(tmp_path):
    first = run_matrix(make_config(tmp_path / "a"))
    second = run_matrix(make_config(tmp_path / "b"))
    assert render_report(first, "json") == render_report(second, "json")
    for cell_a, cell_b in zip(first.cells, second.cells):
        dag_a = Path(cell_a.dag_path).read_bytes()
        dag_b = Path(cell_b.dag_path).read_bytes()
        assert dag_a == dag_b


def test_judge_fixture_recorded_for_sequential_case(tmp_path):
    config = make_config(tmp_path, cases=("dm_sequential",), judge=True)
    matrix = run_matrix(config)
    (cell,) = matrix.cells
    assert cell.fidelity is not None
    assert cell.fidelity.summary_metrics["total_issues"] == 1
    fidelity_path = (
        config.run_dir / "dm_sequential" / MODEL / "templated" / "fidelity.json"
    )
    assert fidelity_path.is_file()


def test_report_loadable_from_run_dir(tmp_path):
    config = make_config(tmp_path, cases=("dm_sequential",))
    run_matrix(config)
    matrix = load_run_dir(config.run_dir)
    (stats,) = matrix.method_stats
    assert stats.n == 1 and stats.success_count == 1


def test_synthetic_matrix_table_values():
    cells = [
        make_cell("case_a", "templated", sat=9.0, dst=10.0, pct=10.0, tokens=1000),
        make_cell("case_b", "templated", sat=7.0, dst=8.0, pct=9.0, tokens=3000),
        make_cell("case_a", "direct", loadable=0, tokens=500),
        make_cell("case_b", "direct", sat=6.0, dst=6.0, pct=7.0, tokens=1500),
    ]
    matrix = build_matrix_report(cells)
    stats = {s.method: s for s in matrix.method_stats}
    assert stats["templated"].sat_mean == pytest.approx(8.0)
    assert stats["templated"].dst_mean == pytest.approx(9.0)
    assert stats["templated"].mean_tokens == pytest.approx(2000.0)
    assert stats["templated"].success_rate == 100.0
    assert stats["direct"].success_rate == 50.0
    assert stats["direct"].sat_mean == pytest.approx(3.0)  # penalized mean
    assert matrix.per_case["case_a"]["templated"]["pct"] == 10.0


def test_empty_method_column_renders_with_dashes():
    cells = [make_cell("case_a", "templated")]
    matrix = build_matrix_report(cells, methods=("templated", "hybrid"))
    stats = {s.method: s for s in matrix.method_stats}
    assert stats["hybrid"].n == 0
    text = render_report(matrix, "text")
    hybrid_row = next(line for line in text.splitlines() if line.startswith("hybrid"))
    assert "--" in hybrid_row


def test_csv_and_text_renderings_share_values():
    cells = [
        make_cell("case_a", "templated", sat=9.12, dst=9.34, pct=9.56),
        make_cell("case_b", "templated", sat=8.0, dst=8.5, pct=9.0),
    ]
    matrix = build_matrix_report(cells)
    text = render_report(matrix, "text")
    csv_text = render_report(matrix, "csv")
    rows = [
        row for row in csv.reader(io.StringIO(csv_text))
        if row and row[0] == "methods"
    ]
    assert rows
    for row in rows:
        for value in row[2:]:
            assert value in text


def test_config_file_round_trip(tmp_path):
    config_path = tmp_path / "matrix.yaml"
    config_path.write_text(
        yaml.safe_dump(
            {
                "run_dir": "runs/demo",
                "mode": "replay",
                "fixtures_dir": str(FIXTURES_DIR),
                "workers": 2,
                "provider": {"name": "azureopenai"},
                "models": [MODEL],
                "cases": {"dm_sequential": str(CASES_DIR / "dm_sequential.txt")},
                "methods": ["templated"],
                "judge": {"enabled": False},
            }
        ),
        encoding="utf-8",
    )
    config = MatrixConfig.from_file(config_path)
    assert config.mode == "replay"
    assert config.workers == 2
    assert config.models == (MODEL,)
    assert config.run_dir == tmp_path / "runs/demo"
    matrix = run_matrix(config)
    assert len(matrix.cells) == 1
    assert matrix.cells[0].report.loadable == 1


# -- CLI ---------------------------------------------------------------------------


def test_cli_full_pipeline_round_trip(tmp_path):
    out_dir = tmp_path / "out"
    rc = cli_main([
        "analyze", str(CASES_DIR / "dm_sequential.txt"),
        "--out", str(out_dir),
        "--fixtures", str(FIXTURES_DIR),
        "--provider-name", "azureopenai",
    ])
    assert rc == 0
    analysis = out_dir / "dm_sequential.analysis.json"
    assert analysis.is_file()

    rc = cli_main(["transform", str(analysis)])
    assert rc == 0
    workflow = out_dir / "dm_sequential.workflow.yaml"
    assert workflow.is_file()

    dag_out = out_dir / "dm_sequential.templated.dag.py"
    rc = cli_main([
        "generate", str(workflow), "--method", "templated",
        "--out", str(dag_out), "--fallback-image", "python:3.11-slim",
    ])
    assert rc == 0
    assert dag_out.is_file()

    eval_json = out_dir / "eval.json"
    rc = cli_main(["evaluate", str(dag_out), "--json", str(eval_json)])
    assert rc == 0
    report = json.loads(eval_json.read_text())
    assert report["loadable"] == 1
    assert report["task_count"] == 5

    judge_out = out_dir / "fidelity.json"
    rc = cli_main([
        "judge", str(CASES_DIR / "dm_sequential.txt"), str(analysis),
        str(workflow), "--fixtures", str(FIXTURES_DIR),
        "--model", "deepseek-chat", "--out", str(judge_out),
    ])
    assert rc == 0
    assert json.loads(judge_out.read_text())["summary_metrics"]["total_issues"] == 1


def test_cli_poor_score_still_exits_zero(tmp_path):
    bad = tmp_path / "broken.dag.py"
    bad.write_text("this is not python {{{", encoding="utf-8")
    assert cli_main(["evaluate", str(bad)]) == 0


def test_cli_operation_error_exits_nonzero(tmp_path):
    rc = cli_main([
        "analyze", str(CASES_DIR / "dm_sequential.txt"),
        "--out", str(tmp_path),
        "--fixtures", str(tmp_path / "empty_fixtures"),
    ])
    assert rc == 1


def test_cli_run_matrix_and_report(tmp_path):
    config_path = tmp_path / "matrix.yaml"
    config_path.write_text(
        yaml.safe_dump(
            {
                "run_dir": str(tmp_path / "run"),
                "mode": "replay",
                "fixtures_dir": str(FIXTURES_DIR),
                "provider": {"name": "azureopenai"},
                "models": [MODEL],
                "cases": {
                    "dm_sequential": str(CASES_DIR / "dm_sequential.txt"),
                    "procurement_validation": str(
                        CASES_DIR / "procurement_validation.txt"
                    ),
                },
                "methods": ["templated"],
            }
        ),
        encoding="utf-8",
    )
    assert cli_main(["run-matrix", "--config", str(config_path)]) == 0
    assert (tmp_path / "run" / "matrix_report.txt").is_file()
    assert cli_main(["report", str(tmp_path / "run"), "--format", "csv"]) == 0
