"""Experiment matrix runner: cases x models x methods, with persisted artifacts.

Each cell runs the full stage chain for its method, persists every
intermediate artifact under ``run_dir/<case>/<model>/<method>/`` and records
an evaluation.  Cell failures are recorded, never fatal; completed cells are
skipped on rerun, so interrupted matrices resume cleanly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import yaml

from .analysis import run_analysis
from .codegen import (
    GenerationMethod,
    GeneratorConfig,
    generate_direct,
    generate_hybrid,
    generate_llm_only,
    generate_templated,
)
from .errors import DagforgeError, EmptyInputError
from .evaluation import (
    EvalRecord,
    EvaluationReport,
    aggregate_stats,
    empty_method_stats,
    evaluate,
)
from .fidelity import FidelityReport, assess, parse_judge_response, summarize
from .gateway import REPLAY, Gateway, ProviderConfig, TokenLedger
from .transform import serialize_workflow, transform

logger = logging.getLogger(__name__)

# Pinned clock for replay runs so artifacts are byte-identical across runs.
REPLAY_EPOCH = datetime(2025, 1, 1, 0, 0, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class MatrixConfig:
    run_dir: Path
    cases: dict  # case id -> description file path
    models: tuple
    methods: tuple
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    mode: str = REPLAY
    fixtures_dir: Path = Path("fixtures/llm")
    workers: int = 4
    judge_enabled: bool = False
    judge_model: str = "deepseek-chat"
    fallback_image: Optional[str] = "python:3.11-slim"

    @classmethod
    def from_file(cls, path: str | Path) -> "MatrixConfig":
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        provider_data = data.get("provider") or {}
        judge = data.get("judge") or {}
        base = Path(path).parent
        cases = {
            case_id: str((base / case_path) if not Path(case_path).is_absolute() else case_path)
            for case_id, case_path in (data.get("cases") or {}).items()
        }
        fixtures = data.get("fixtures_dir", "fixtures/llm")
        fixtures_path = Path(fixtures)
        if not fixtures_path.is_absolute():
            fixtures_path = base / fixtures_path
        run_dir = Path(data.get("run_dir", "runs/latest"))
        if not run_dir.is_absolute():
            run_dir = base / run_dir
        return cls(
            run_dir=run_dir,
            cases=cases,
            models=tuple(data.get("models") or ()),
            methods=tuple(data.get("methods") or ()),
            provider=ProviderConfig(
                name=provider_data.get("name", "replay"),
                base_url=provider_data.get("base_url", ""),
                credential_env=provider_data.get("credential_env", ""),
                model_keys=provider_data.get("model_keys") or {},
                timeout_seconds=float(provider_data.get("timeout_seconds", 60.0)),
                max_retries=int(provider_data.get("max_retries", 2)),
                min_interval_seconds=float(provider_data.get("min_interval_seconds", 0.0)),
            ),
            mode=data.get("mode", REPLAY),
            fixtures_dir=fixtures_path,
            workers=int(data.get("workers", 4)),
            judge_enabled=bool(judge.get("enabled", False)),
            judge_model=judge.get("model_key", "deepseek-chat"),
            fallback_image=data.get("fallback_image", "python:3.11-slim"),
        )


@dataclass
class ExperimentCell:
    case: str
    model: str
    method: str
    status: str = "ok"  # ok | error
    error: str = ""
    dag_path: Optional[str] = None
    byte_size: int = 0
    report: Optional[EvaluationReport] = None
    tokens: dict = field(default_factory=dict)
    fidelity: Optional[FidelityReport] = None
    warnings: tuple = ()

    @property
    def key(self) -> tuple:
        return (self.case, self.model, self.method)

    def total_tokens(self) -> int:
        """Analysis + generation token spend (judge usage is tracked separately)."""
        stage_totals = self.tokens.get("stage_totals")
        if stage_totals is None:
            grand = self.tokens.get("grand_total") or {}
            return int(grand.get("total_tokens", 0))
        total = 0
        for stage, bucket in stage_totals.items():
            if stage.split(":")[0] in ("step1", "step3"):
                total += bucket.get("input_tokens", 0) + bucket.get("output_tokens", 0)
        return int(total)


@dataclass(frozen=True)
class MatrixReport:
    cells: tuple
    method_stats: tuple
    size_rows: tuple
    per_case: dict  # case -> method -> {sat, dst, pct, loadable}
    token_table: dict  # method -> step -> {input, output, subtotal}; plus total
    fidelity_summary: Optional[dict]
    missing_artifacts: dict  # method -> count of cells without a generated DAG


def _zero_report() -> EvaluationReport:
    return EvaluationReport(
        loadable=0,
        sat=0.0,
        dst=0.0,
        pct=0.0,
        s_struct=0.0,
        s_config=0.0,
        dryrun_ratio=0.0,
        bonus=0.0,
        violations=(),
        penalized=True,
    )


def _report_from_dict(data: dict) -> EvaluationReport:
    return EvaluationReport(
        loadable=int(data.get("loadable", 0)),
        sat=float(data.get("sat", 0.0)),
        dst=float(data.get("dst", 0.0)),
        pct=float(data.get("pct", 0.0)),
        s_struct=float(data.get("s_struct", 0.0)),
        s_config=float(data.get("s_config", 0.0)),
        dryrun_ratio=float(data.get("dryrun_ratio", 0.0)),
        bonus=float(data.get("bonus", 0.0)),
        violations=(),
        penalized=bool(data.get("penalized", True)),
        structural_gate_pass=bool(data.get("structural_gate_pass", False)),
        task_count=int(data.get("task_count", 0)),
        sat_scores=data.get("sat_scores") or {},
        sat_weights=data.get("sat_weights") or {},
    )


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def run_cell(config: MatrixConfig, case: str, model: str, method: str) -> ExperimentCell:
    cell = ExperimentCell(case=case, model=model, method=method)
    cell_dir = config.run_dir / case / model / method
    eval_path = cell_dir / "eval.json"

    if eval_path.is_file():
        # Completed on a previous run; reuse the persisted results.
        cell.report = _report_from_dict(json.loads(eval_path.read_text(encoding="utf-8")))
        tokens_path = cell_dir / "tokens.json"
        if tokens_path.is_file():
            cell.tokens = json.loads(tokens_path.read_text(encoding="utf-8"))
        dag_path = cell_dir / "dag.py"
        if dag_path.is_file():
            cell.dag_path = str(dag_path)
            cell.byte_size = dag_path.stat().st_size
        fidelity_path = cell_dir / "fidelity.json"
        if fidelity_path.is_file():
            try:
                cell.fidelity = parse_judge_response(
                    fidelity_path.read_text(encoding="utf-8")
                )
            except DagforgeError:
                cell.fidelity = None
        return cell

    cell_dir.mkdir(parents=True, exist_ok=True)
    ledger = TokenLedger()
    gateway = Gateway(
        provider=config.provider,
        mode=config.mode,
        fixtures_dir=config.fixtures_dir,
        ledger=ledger,
    )
    clock = (lambda: REPLAY_EPOCH) if config.mode == REPLAY else None

    description_path = Path(config.cases[case])
    warnings: list[str] = []
    try:
        description = description_path.read_text(encoding="utf-8")

        stages_dir = cell_dir / "stages"
        stages_dir.mkdir(exist_ok=True)

        def sink(output):
            (stages_dir / f"{output.stage.value}.txt").write_text(
                output.raw_text, encoding="utf-8"
            )

        analysis_kwargs = {"stage_sink": sink}
        if clock is not None:
            analysis_kwargs["clock"] = clock
        # Only the file name goes into metadata so replay fixtures stay
        # portable across checkouts.
        artifact, report_text = run_analysis(
            description,
            description_path.name,
            gateway,
            model,
            provider_name=config.provider.name,
            **analysis_kwargs,
        )
        (cell_dir / "analysis.json").write_text(
            json.dumps(artifact.to_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        (cell_dir / "report.md").write_text(report_text + "\n", encoding="utf-8")

        spec = transform(artifact)
        workflow_text = serialize_workflow(spec)
        (cell_dir / "workflow.yaml").write_text(workflow_text, encoding="utf-8")

        generator_config = GeneratorConfig(
            source_name="workflow.yaml",
            fallback_image=config.fallback_image,
        )
        if method == GenerationMethod.TEMPLATED.value:
            dag = generate_templated(spec, generator_config)
        elif method == GenerationMethod.HYBRID.value:
            dag = generate_hybrid(spec, gateway, model, generator_config)
        elif method == GenerationMethod.LLM_ONLY.value:
            dag = generate_llm_only(spec, gateway, model, generator_config)
        elif method == GenerationMethod.DIRECT.value:
            direct_kwargs = {"source_name": description_path.name}
            if clock is not None:
                direct_kwargs["clock"] = lambda: REPLAY_EPOCH.replace(
                    tzinfo=None
                ).strftime("%Y-%m-%dT%H:%M:%S.%f")
            dag = generate_direct(description, gateway, model, **direct_kwargs)
        else:
            raise DagforgeError(f"unknown generation method {method!r}")
        warnings.extend(dag.warnings)

        dag_path = cell_dir / "dag.py"
        dag_path.write_text(dag.source_text, encoding="utf-8")
        cell.dag_path = str(dag_path)
        cell.byte_size = dag.byte_size

        cell.report = evaluate(dag)
        _write_json(cell_dir / "eval.json", cell.report.to_dict())

        if config.judge_enabled:
            try:
                cell.fidelity = assess(description, artifact, spec, gateway, config.judge_model)
                (cell_dir / "fidelity.json").write_text(
                    cell.fidelity.to_json(), encoding="utf-8"
                )
            except DagforgeError as exc:
                warnings.append(f"fidelity assessment skipped: {exc}")
    except Exception as exc:  # fault isolation: a cell never aborts the matrix
        cell.status = "error"
        cell.error = str(exc)
        cell.report = _zero_report()
        _write_json(cell_dir / "error.json", {"error": str(exc)})
        logger.warning("cell %s/%s/%s failed: %s", case, model, method, exc)
    finally:
        cell.tokens = ledger.to_dict()
        _write_json(cell_dir / "tokens.json", cell.tokens)
        cell.warnings = tuple(warnings)
    return cell


def run_matrix(config: MatrixConfig) -> MatrixReport:
    """Execute every (case, model, method) cell under a bounded worker pool."""
    keys = [
        (case, model, method)
        for case in config.cases
        for model in config.models
        for method in config.methods
    ]
    cells: dict[tuple, ExperimentCell] = {}
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        futures = {
            pool.submit(run_cell, config, case, model, method): (case, model, method)
            for case, model, method in keys
        }
        for future, key in futures.items():
            cells[key] = future.result()

    ordered = tuple(cells[key] for key in keys)
    return build_matrix_report(ordered, methods=config.methods)


def build_matrix_report(cells, methods=None) -> MatrixReport:
    cells = tuple(cells)

    records = [
        EvalRecord(
            method=cell.method,
            report=cell.report if cell.report else _zero_report(),
            total_tokens=cell.total_tokens(),
            byte_size=cell.byte_size,
        )
        for cell in cells
    ]
    method_stats, _ = aggregate_stats(records) if records else ((), ())
    if methods:
        # Configured methods with no cells still get a row (n=0, dashes).
        present = {stats.method for stats in method_stats}
        method_stats = list(method_stats) + [
            empty_method_stats(method) for method in methods if method not in present
        ]

    artifact_records = [
        EvalRecord(
            method=cell.method,
            report=cell.report if cell.report else _zero_report(),
            total_tokens=cell.total_tokens(),
            byte_size=cell.byte_size,
        )
        for cell in cells
        if cell.dag_path is not None
    ]
    if artifact_records:
        _, size_rows = aggregate_stats(artifact_records)
    else:
        size_rows = []

    per_case: dict[str, dict[str, dict]] = {}
    for cell in cells:
        report = cell.report or _zero_report()
        per_case.setdefault(cell.case, {})[cell.method] = {
            "sat": report.sat,
            "dst": report.dst,
            "pct": report.pct,
            "loadable": report.loadable,
        }

    token_table = _token_table(cells)

    fidelity_pairs = [
        (cell.fidelity, cell.report.loadable if cell.report else 0)
        for cell in cells
        if cell.fidelity is not None
    ]
    fidelity_summary = None
    if fidelity_pairs:
        try:
            fidelity_summary = summarize(fidelity_pairs).to_dict()
        except DagforgeError:
            fidelity_summary = None

    missing = {}
    for cell in cells:
        if cell.dag_path is None:
            missing[cell.method] = missing.get(cell.method, 0) + 1

    return MatrixReport(
        cells=cells,
        method_stats=tuple(method_stats),
        size_rows=tuple(size_rows),
        per_case=per_case,
        token_table=token_table,
        fidelity_summary=fidelity_summary,
        missing_artifacts=missing,
    )


def _token_table(cells) -> dict:
    """Mean token spend per method and step, over successful cells."""
    table: dict[str, dict] = {}
    by_method: dict[str, list] = {}
    for cell in cells:
        by_method.setdefault(cell.method, []).append(cell)
    for method, members in by_method.items():
        successful = [
            c for c in members if c.report is not None and c.report.loadable
        ]
        pool = successful or []
        steps = {
            "step1": {"input": 0.0, "output": 0.0, "subtotal": 0.0},
            "step3": {"input": 0.0, "output": 0.0, "subtotal": 0.0},
        }
        total = 0.0
        if pool:
            for cell in pool:
                for stage, bucket in (cell.tokens.get("stage_totals") or {}).items():
                    step = stage.split(":")[0]
                    if step not in steps:
                        continue
                    steps[step]["input"] += bucket.get("input_tokens", 0)
                    steps[step]["output"] += bucket.get("output_tokens", 0)
            for step in steps.values():
                step["input"] /= len(pool)
                step["output"] /= len(pool)
                step["subtotal"] = step["input"] + step["output"]
            total = steps["step1"]["subtotal"] + steps["step3"]["subtotal"]
        table[method] = {**steps, "total": total, "n": len(pool)}
    return table


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _fmt(value, digits: int = 2) -> str:
    if value is None:
        return "--"
    return f"{value:.{digits}f}"


def render_report(matrix: MatrixReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(_matrix_dict(matrix), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return _render_csv(matrix)
    if fmt == "text":
        return _render_text(matrix)
    raise ValueError(f"unknown report format {fmt!r}")


def _matrix_dict(matrix: MatrixReport) -> dict:
    return {
        "methods": [stats.to_dict() for stats in matrix.method_stats],
        "file_sizes": [row.to_dict() for row in matrix.size_rows],
        "per_case": matrix.per_case,
        "tokens": matrix.token_table,
        "fidelity": matrix.fidelity_summary,
        "missing_artifacts": matrix.missing_artifacts,
        "cells": [
            {
                "case": cell.case,
                "model": cell.model,
                "method": cell.method,
                "status": cell.status,
                "error": cell.error,
                "loadable": cell.report.loadable if cell.report else 0,
                "sat": cell.report.sat if cell.report else 0.0,
                "dst": cell.report.dst if cell.report else 0.0,
                "pct": cell.report.pct if cell.report else 0.0,
                "tokens": cell.total_tokens(),
                "byte_size": cell.byte_size,
            }
            for cell in matrix.cells
        ],
    }


_METHOD_COLUMNS = ("method", "n", "success_rate", "sat_mean", "sat_std",
                   "dst_mean", "dst_std", "pct_mean", "pct_std",
                   "mean_tokens", "tokens_per_success")


def _method_rows(matrix: MatrixReport):
    for stats in matrix.method_stats:
        yield {
            "method": stats.method,
            "n": stats.n,
            "success_rate": _fmt(stats.success_rate, 1) if stats.n else "--",
            "sat_mean": _fmt(stats.sat_mean),
            "sat_std": _fmt(stats.sat_std),
            "dst_mean": _fmt(stats.dst_mean),
            "dst_std": _fmt(stats.dst_std),
            "pct_mean": _fmt(stats.pct_mean),
            "pct_std": _fmt(stats.pct_std),
            "mean_tokens": _fmt(stats.mean_tokens, 1),
            "tokens_per_success": _fmt(stats.tokens_per_success, 1),
        }


_SIZE_COLUMNS = ("method", "failed_count", "failed_kb_mean", "failed_kb_std",
                 "success_count", "success_kb_mean", "success_kb_std")


def _size_rows(matrix: MatrixReport):
    for row in matrix.size_rows:
        yield {
            "method": row.method,
            "failed_count": row.failed.count,
            "failed_kb_mean": _fmt(row.failed.mean_kb),
            "failed_kb_std": _fmt(row.failed.std_kb),
            "success_count": row.successful.count,
            "success_kb_mean": _fmt(row.successful.mean_kb),
            "success_kb_std": _fmt(row.successful.std_kb),
        }


_TOKEN_COLUMNS = ("method", "step1_input", "step1_output", "step1_subtotal",
                  "step3_input", "step3_output", "step3_subtotal", "total")


def _token_rows(matrix: MatrixReport):
    for method, data in matrix.token_table.items():
        yield {
            "method": method,
            "step1_input": _fmt(data["step1"]["input"], 1),
            "step1_output": _fmt(data["step1"]["output"], 1),
            "step1_subtotal": _fmt(data["step1"]["subtotal"], 1),
            "step3_input": _fmt(data["step3"]["input"], 1),
            "step3_output": _fmt(data["step3"]["output"], 1),
            "step3_subtotal": _fmt(data["step3"]["subtotal"], 1),
            "total": _fmt(data["total"], 1),
        }


def _render_table(title: str, columns, rows) -> str:
    rows = list(rows)
    widths = {col: len(col) for col in columns}
    for row in rows:
        for col in columns:
            widths[col] = max(widths[col], len(str(row[col])))
    lines = [title, ""]
    lines.append("  ".join(col.ljust(widths[col]) for col in columns))
    lines.append("  ".join("-" * widths[col] for col in columns))
    for row in rows:
        lines.append("  ".join(str(row[col]).ljust(widths[col]) for col in columns))
    return "\n".join(lines)


def _render_text(matrix: MatrixReport) -> str:
    sections = [
        _render_table("== Generation methods ==", _METHOD_COLUMNS, _method_rows(matrix)),
        _render_table("== DAG file sizes (KB) ==", _SIZE_COLUMNS, _size_rows(matrix)),
        _render_table("== Token usage by step (successful runs) ==", _TOKEN_COLUMNS, _token_rows(matrix)),
    ]
    if matrix.missing_artifacts:
        missing_lines = ["== Cells without generated DAG =="]
        for method, count in sorted(matrix.missing_artifacts.items()):
            missing_lines.append(f"{method}: {count}")
        sections.append("\n".join(missing_lines))
    if matrix.fidelity_summary:
        lines = ["== Fidelity (judge) =="]
        for label, means in matrix.fidelity_summary["group_means"].items():
            rendered = ", ".join(f"{k}={v:.2f}" for k, v in means.items())
            lines.append(f"{label} (n={matrix.fidelity_summary['group_counts'][label]}): {rendered}")
        correlations = ", ".join(
            f"{k}={_fmt(v)}" for k, v in matrix.fidelity_summary["correlations"].items()
        )
        lines.append(f"correlation with success: {correlations}")
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"


def _render_csv(matrix: MatrixReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["table"] + list(_METHOD_COLUMNS))
    for row in _method_rows(matrix):
        writer.writerow(["methods"] + [row[col] for col in _METHOD_COLUMNS])
    writer.writerow(["table"] + list(_SIZE_COLUMNS))
    for row in _size_rows(matrix):
        writer.writerow(["file_sizes"] + [row[col] for col in _SIZE_COLUMNS])
    writer.writerow(["table"] + list(_TOKEN_COLUMNS))
    for row in _token_rows(matrix):
        writer.writerow(["tokens"] + [row[col] for col in _TOKEN_COLUMNS])
    return buffer.getvalue()


def load_run_dir(run_dir: str | Path) -> MatrixReport:
    """Rebuild a matrix report from persisted cell artifacts."""
    run_path = Path(run_dir)
    cells = []
    for eval_path in sorted(run_path.glob("*/*/*/eval.json")):
        method_dir = eval_path.parent
        model_dir = method_dir.parent
        case_dir = model_dir.parent
        cell = ExperimentCell(
            case=case_dir.name, model=model_dir.name, method=method_dir.name
        )
        cell.report = _report_from_dict(json.loads(eval_path.read_text(encoding="utf-8")))
        tokens_path = method_dir / "tokens.json"
        if tokens_path.is_file():
            cell.tokens = json.loads(tokens_path.read_text(encoding="utf-8"))
        dag_path = method_dir / "dag.py"
        if dag_path.is_file():
            cell.dag_path = str(dag_path)
            cell.byte_size = dag_path.stat().st_size
        fidelity_path = method_dir / "fidelity.json"
        if fidelity_path.is_file():
            try:
                cell.fidelity = parse_judge_response(
                    fidelity_path.read_text(encoding="utf-8")
                )
            except DagforgeError:
                cell.fidelity = None
        cells.append(cell)
    if not cells:
        raise EmptyInputError(f"no evaluated cells under {run_dir}")
    return build_matrix_report(cells)
