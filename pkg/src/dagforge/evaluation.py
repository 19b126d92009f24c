"""Penalized quality scoring for generated DAG scripts.

Three metrics on the 0-10 scale:

* static analysis (security, lint, style, complexity) with a weighted
  penalty model,
* structural/configuration scoring with a 0.7/0.3 split between graph shape
  and operator configuration,
* platform conformance built from the binary loadability gate, a lenient
  structural gate, a dry-run band and a structure bonus.

A DAG that fails the loadability gate is unusable: all three scores are
forced to zero so aggregate means reflect reliability, not just the quality
of the survivors.
"""

from __future__ import annotations

import ast
import json
import math
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .codegen import GeneratedDag
from .errors import AdapterUnavailableError, DagforgeError, EmptyInputError
from .graphs import (
    CONTAINER_OPERATOR_KINDS,
    DagGraph,
    GraphMetrics,
    StructuralViolation,
    ViolationKind,
    analyze_structure,
    extract_operator_configs,
    parse_dag_source,
)

NATIVE = "native"
ADAPTER = "adapter"

# Violation kinds charged against the structure sub-score; missing operator
# parameters are charged per operator on the configuration side.
STRUCT_KINDS = (
    ViolationKind.CYCLE,
    ViolationKind.DISCONNECTED_COMPONENT,
    ViolationKind.ISOLATED_TASK,
    ViolationKind.INVALID_DEPENDENCY,
    ViolationKind.EMPTY_TASK_GROUP,
)


@dataclass(frozen=True)
class PenaltyCatalog:
    """Per-violation deductions on the 0-10 scale (defaults per catalog)."""

    sat: dict = field(
        default_factory=lambda: {
            "security_high": 0.25,
            "lint_medium": 0.05,
            "style_minor": 0.02,
            "complexity_high": 0.10,
        }
    )
    dst: dict = field(
        default_factory=lambda: {
            ViolationKind.CYCLE.value: 0.50,
            ViolationKind.DISCONNECTED_COMPONENT.value: 0.30,
            ViolationKind.ISOLATED_TASK.value: 0.10,
            ViolationKind.MISSING_REQUIRED_PARAMETER.value: 0.15,
            ViolationKind.INVALID_DEPENDENCY.value: 0.20,
            ViolationKind.EMPTY_TASK_GROUP.value: 0.05,
        }
    )
    pct: dict = field(
        default_factory=lambda: {
            "loading_failure": 1.00,
            "parsing_warning": 0.05,
            "dryrun_error": 0.20,
            "platform_validation_error": 0.50,
        }
    )


@dataclass(frozen=True)
class SatWeights:
    security: float = 0.25
    lint: float = 0.25
    style: float = 0.25
    complexity: float = 0.25

    def __post_init__(self):
        total = self.security + self.lint + self.style + self.complexity
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"weights must sum to 1, got {total}")

    def as_dict(self) -> dict:
        return {
            "security": self.security,
            "lint": self.lint,
            "style": self.style,
            "complexity": self.complexity,
        }


@dataclass(frozen=True)
class Finding:
    dimension: str
    code: str
    message: str
    line: int = 0


# --------------------------------------------------------------------------
# static analyzers
# --------------------------------------------------------------------------

_CREDENTIAL_NAME_RE = re.compile(
    r"(password|passwd|secret|token|api_?key|credential|access_key|auth_key)",
    re.IGNORECASE,
)


def _try_parse(source: str) -> Optional[ast.Module]:
    try:
        return ast.parse(source)
    except SyntaxError:
        return None


def _security_findings(source: str, tree: Optional[ast.Module]) -> list[Finding]:
    findings: list[Finding] = []
    if tree is None:
        return findings

    def flag(name: str, node: ast.AST) -> None:
        findings.append(
            Finding(
                "security",
                "hardcoded_credential",
                f"credential-like name {name!r} bound to a string literal",
                getattr(node, "lineno", 0),
            )
        )

    for node in ast.walk(tree):
        if isinstance(node, ast.Assign):
            for target in node.targets:
                if (
                    isinstance(target, ast.Name)
                    and _CREDENTIAL_NAME_RE.search(target.id)
                    and isinstance(node.value, ast.Constant)
                    and isinstance(node.value.value, str)
                    and node.value.value
                ):
                    flag(target.id, node)
        elif isinstance(node, ast.Dict):
            for key, value in zip(node.keys, node.values):
                if (
                    isinstance(key, ast.Constant)
                    and isinstance(key.value, str)
                    and _CREDENTIAL_NAME_RE.search(key.value)
                    and isinstance(value, ast.Constant)
                    and isinstance(value.value, str)
                    and value.value
                ):
                    flag(key.value, key)
        elif isinstance(node, ast.Call):
            for kw in node.keywords:
                if (
                    kw.arg
                    and _CREDENTIAL_NAME_RE.search(kw.arg)
                    and isinstance(kw.value, ast.Constant)
                    and isinstance(kw.value.value, str)
                    and kw.value.value
                ):
                    flag(kw.arg, kw.value)
        if (
            isinstance(node, ast.Constant)
            and isinstance(node.value, str)
            and node.value == "0.0.0.0"
        ):
            findings.append(
                Finding(
                    "security",
                    "world_open_bind",
                    "binds to all interfaces (0.0.0.0)",
                    getattr(node, "lineno", 0),
                )
            )
    return findings


def _lint_findings(source: str, tree: Optional[ast.Module]) -> list[Finding]:
    findings: list[Finding] = []
    if tree is None:
        return findings

    import builtins as _builtins

    imported: dict[str, int] = {}
    bound: set[str] = set()
    used: set[str] = set()
    loads: list[tuple[str, int]] = []
    task_ids: dict[str, int] = {}
    builtins_names = set(dir(_builtins))

    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                name = alias.asname or alias.name.split(".")[0]
                imported[name] = node.lineno
        elif isinstance(node, ast.ImportFrom):
            for alias in node.names:
                name = alias.asname or alias.name
                imported[name] = node.lineno
        elif isinstance(node, ast.Name):
            if isinstance(node.ctx, ast.Load):
                used.add(node.id)
                loads.append((node.id, node.lineno))
            else:
                bound.add(node.id)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            bound.add(node.name)
            args = getattr(node, "args", None)
            if args is not None:
                for arg in (
                    list(args.posonlyargs)
                    + list(args.args)
                    + list(args.kwonlyargs)
                    + ([args.vararg] if args.vararg else [])
                    + ([args.kwarg] if args.kwarg else [])
                ):
                    bound.add(arg.arg)
        elif isinstance(node, (ast.withitem,)) and node.optional_vars is not None:
            if isinstance(node.optional_vars, ast.Name):
                bound.add(node.optional_vars.id)
        elif isinstance(node, ast.ExceptHandler) and node.name:
            bound.add(node.name)
        elif isinstance(node, ast.Call):
            callee = node.func
            callee_name = (
                callee.id
                if isinstance(callee, ast.Name)
                else callee.attr if isinstance(callee, ast.Attribute) else ""
            )
            if callee_name.endswith("Operator"):
                for kw in node.keywords:
                    if (
                        kw.arg == "task_id"
                        and isinstance(kw.value, ast.Constant)
                        and isinstance(kw.value.value, str)
                    ):
                        task_ids[kw.value.value] = task_ids.get(kw.value.value, 0) + 1

    for name, lineno in sorted(imported.items()):
        if name not in used:
            findings.append(
                Finding("lint", "unused_import", f"import {name!r} is never used", lineno)
            )

    defined = set(imported) | bound | builtins_names | {"__name__", "__file__", "__doc__"}
    flagged: set[str] = set()
    for name, lineno in loads:
        if name not in defined and name not in flagged:
            flagged.add(name)
            findings.append(
                Finding("lint", "undefined_name", f"name {name!r} is not defined", lineno)
            )

    for task_id, count in sorted(task_ids.items()):
        if count > 1:
            findings.append(
                Finding(
                    "lint",
                    "duplicate_task_id",
                    f"task_id {task_id!r} declared {count} times",
                )
            )
    return findings


def _style_findings(source: str) -> list[Finding]:
    findings: list[Finding] = []
    lines = source.split("\n")
    for lineno, line in enumerate(lines, start=1):
        if len(line) > 79:
            findings.append(
                Finding("style", "line_too_long", f"line is {len(line)} chars", lineno)
            )
        if line != line.rstrip(" \t"):
            findings.append(Finding("style", "trailing_whitespace", "trailing whitespace", lineno))
    if source and not source.endswith("\n"):
        findings.append(Finding("style", "missing_final_newline", "no final newline", len(lines)))
    return findings


def _complexity_findings(source: str, tree: Optional[ast.Module]) -> list[Finding]:
    findings: list[Finding] = []
    if tree is None:
        return findings
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            complexity = _cyclomatic_complexity(node)
            if complexity > 10:
                findings.append(
                    Finding(
                        "complexity",
                        "high_cyclomatic_complexity",
                        f"function {node.name!r} has complexity {complexity}",
                        node.lineno,
                    )
                )
    return findings


def _cyclomatic_complexity(func: ast.AST) -> int:
    count = 1
    for node in ast.walk(func):
        if isinstance(node, (ast.If, ast.For, ast.While, ast.AsyncFor, ast.IfExp, ast.Assert)):
            count += 1
        elif isinstance(node, ast.ExceptHandler):
            count += 1
        elif isinstance(node, ast.BoolOp):
            count += len(node.values) - 1
        elif isinstance(node, ast.comprehension):
            count += 1 + len(node.ifs)
    return count


_SAT_DELTA_KEY = {
    "security": "security_high",
    "lint": "lint_medium",
    "style": "style_minor",
    "complexity": "complexity_high",
}


@dataclass(frozen=True)
class SatResult:
    sat: float
    scores: dict
    findings: tuple


def score_sat(
    source: str,
    catalog: Optional[PenaltyCatalog] = None,
    weights: Optional[SatWeights] = None,
) -> SatResult:
    """Weighted penalty score over the four static-analysis dimensions."""
    catalog = catalog or PenaltyCatalog()
    weights = weights or SatWeights()
    tree = _try_parse(source)

    findings = (
        _security_findings(source, tree)
        + _lint_findings(source, tree)
        + _style_findings(source)
        + _complexity_findings(source, tree)
    )

    scores: dict[str, float] = {}
    for dimension in ("security", "lint", "style", "complexity"):
        delta = catalog.sat[_SAT_DELTA_KEY[dimension]]
        hits = sum(1 for f in findings if f.dimension == dimension)
        scores[dimension] = max(0.0, 10.0 - delta * hits)

    weight_map = weights.as_dict()
    sat = sum(weight_map[d] * scores[d] for d in scores)
    sat = min(10.0, max(0.0, sat))
    return SatResult(sat=sat, scores=scores, findings=tuple(findings))


# --------------------------------------------------------------------------
# structural / configuration scoring
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DstResult:
    dst: float
    s_struct: float
    s_config: float


def score_dst(
    violations,
    operator_issues,
    catalog: Optional[PenaltyCatalog] = None,
    w_struct: float = 0.7,
    w_config: float = 0.3,
) -> DstResult:
    """Structure/configuration composite.

    Catalog deductions live on the 0-10 scale; sub-scores live on 0-100, so
    each deduction is multiplied by 10 when charged.  ``operator_issues``
    must contain one entry per operator (clean operators included) so the
    configuration average is over all of them; a graph with zero operators
    scores 0 on the configuration side.
    """
    catalog = catalog or PenaltyCatalog()

    struct_penalty = 0.0
    for violation in violations:
        delta = catalog.dst.get(violation.kind.value, 0.0)
        struct_penalty += delta * 10.0 * violation.count
    s_struct = max(0.0, 100.0 - struct_penalty)

    if operator_issues:
        per_operator = []
        for _, issues in operator_issues:
            q_total = sum(
                catalog.dst.get(issue.kind.value, 0.0) * 10.0 * issue.count
                for issue in issues
            )
            per_operator.append(max(0.0, 100.0 - q_total))
        s_config = float(sum(per_operator)) / len(per_operator)
    else:
        s_config = 0.0

    dst = (w_struct * s_struct + w_config * s_config) / 10.0
    return DstResult(dst=dst, s_struct=s_struct, s_config=s_config)


# --------------------------------------------------------------------------
# dry-run simulation and platform conformance
# --------------------------------------------------------------------------

SUCCESS = "success"
SUCCESS_WITH_WARNING = "success_with_warning"
FAILURE = "failure"


@dataclass(frozen=True)
class TaskDryRun:
    task_id: str
    status: str
    message: str = ""


@dataclass(frozen=True)
class DryRunReport:
    results: tuple
    ratio: Optional[float]  # None when the graph has no tasks


def simulate_dry_run(graph: DagGraph) -> DryRunReport:
    """Native per-task simulation of configuration readiness.

    Container tasks that would fail only because no container daemon is
    available count as successes with a warning.
    """
    results: list[TaskDryRun] = []
    from .graphs import DEFAULT_REQUIRED, REQUIRED_PARAMS

    for task in graph.tasks:
        required = REQUIRED_PARAMS.get(task.operator_kind, DEFAULT_REQUIRED)
        missing = [name for name in required if not task.config.has(name)]
        if missing:
            results.append(
                TaskDryRun(
                    task.task_id,
                    FAILURE,
                    f"missing required parameter(s): {', '.join(missing)}",
                )
            )
        elif task.operator_kind in CONTAINER_OPERATOR_KINDS:
            results.append(
                TaskDryRun(
                    task.task_id,
                    SUCCESS_WITH_WARNING,
                    "container daemon unavailable; counted as success",
                )
            )
        else:
            results.append(TaskDryRun(task.task_id, SUCCESS))

    if not results:
        return DryRunReport(results=(), ratio=None)
    passed = sum(1 for r in results if r.status in (SUCCESS, SUCCESS_WITH_WARNING))
    return DryRunReport(results=tuple(results), ratio=passed / len(results))


@dataclass(frozen=True)
class PctResult:
    pct: float
    executability: float
    bonus: float


def score_pct(
    loadable: int,
    structural_gate_pass: bool,
    dryrun_ratio: Optional[float],
    s_struct: float,
) -> PctResult:
    """Loadability gate times the weighted executability score.

    Base points: 3 for loading, 2 for passing the structural gate; the
    structure bonus adds up to 1 and the dry-run band up to 4, capped at 10.
    A loadable DAG that fails the structural gate keeps only the loading
    points.
    """
    if not loadable:
        return PctResult(pct=0.0, executability=0.0, bonus=0.0)
    if not structural_gate_pass:
        return PctResult(pct=3.0, executability=3.0, bonus=0.0)
    if s_struct >= 70:
        bonus = 1.0
    elif s_struct >= 50:
        bonus = 0.5
    else:
        bonus = 0.0
    ratio = dryrun_ratio or 0.0
    executability = min(10.0, 3.0 + 2.0 + bonus + 4.0 * ratio)
    return PctResult(pct=float(loadable) * executability, executability=executability, bonus=bonus)


# --------------------------------------------------------------------------
# loadability gate
# --------------------------------------------------------------------------


def loadability_gate(
    source: str,
    mode: str = NATIVE,
    adapter_cmd: Optional[list] = None,
) -> int:
    """1 iff the script would load: native static check or real-platform probe."""
    if mode == NATIVE:
        try:
            parse_dag_source(source)
        except DagforgeError:
            return 0
        return 1
    if mode != ADAPTER:
        raise ValueError(f"unknown gate mode {mode!r}")
    if not adapter_cmd:
        raise AdapterUnavailableError("adapter mode requested but no adapter configured")
    result = run_conformance_adapter(source, adapter_cmd)
    return 1 if result.get("loadable") else 0


def run_conformance_adapter(source: str, adapter_cmd: list) -> dict:
    """Invoke the external conformance probe on a temp copy of the script."""
    with tempfile.TemporaryDirectory(prefix="dag-eval-") as tmp:
        dag_path = Path(tmp) / "candidate_dag.py"
        dag_path.write_text(source, encoding="utf-8")
        proc = subprocess.run(
            list(adapter_cmd) + [str(dag_path)],
            capture_output=True,
            text=True,
        )
    if proc.returncode == 2:
        raise AdapterUnavailableError(
            f"conformance adapter reports missing runtime: {proc.stdout.strip() or proc.stderr.strip()}"
        )
    try:
        return json.loads(proc.stdout)
    except json.JSONDecodeError as exc:
        raise AdapterUnavailableError(
            f"conformance adapter emitted invalid JSON: {exc}"
        ) from exc


# --------------------------------------------------------------------------
# end-to-end evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluationReport:
    loadable: int
    sat: float
    dst: float
    pct: float
    s_struct: float
    s_config: float
    dryrun_ratio: float
    bonus: float
    violations: tuple
    penalized: bool = True
    structural_gate_pass: bool = False
    task_count: int = 0
    sat_scores: dict = field(default_factory=dict)
    sat_weights: dict = field(default_factory=dict)
    metrics: Optional[GraphMetrics] = None
    dry_run: tuple = ()
    parse_warnings: tuple = ()

    def to_dict(self) -> dict:
        return {
            "loadable": self.loadable,
            "sat": self.sat,
            "dst": self.dst,
            "pct": self.pct,
            "s_struct": self.s_struct,
            "s_config": self.s_config,
            "dryrun_ratio": self.dryrun_ratio,
            "bonus": self.bonus,
            "penalized": self.penalized,
            "structural_gate_pass": self.structural_gate_pass,
            "task_count": self.task_count,
            "sat_scores": self.sat_scores,
            "sat_weights": self.sat_weights,
            "violations": [
                {
                    "kind": v.kind.value,
                    "count": v.count,
                    "severity": v.severity,
                    "detail": v.detail,
                }
                for v in self.violations
            ],
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "dry_run": [
                {"task_id": r.task_id, "status": r.status, "message": r.message}
                for r in self.dry_run
            ],
            "parse_warnings": list(self.parse_warnings),
        }


def _adapter_dry_run(adapter_result: dict) -> Optional[DryRunReport]:
    per_task = adapter_result.get("per_task") or []
    if not per_task:
        return None
    status_map = {"success": SUCCESS, "warning": SUCCESS_WITH_WARNING}
    results = tuple(
        TaskDryRun(
            task_id=str(entry.get("task_id", "")),
            status=status_map.get(entry.get("dryrun"), FAILURE),
            message=str(entry.get("message", "")),
        )
        for entry in per_task
    )
    passed = sum(1 for r in results if r.status in (SUCCESS, SUCCESS_WITH_WARNING))
    return DryRunReport(results=results, ratio=passed / len(results))


def evaluate(
    dag,
    catalog: Optional[PenaltyCatalog] = None,
    weights: Optional[SatWeights] = None,
    mode: str = NATIVE,
    adapter_cmd: Optional[list] = None,
) -> EvaluationReport:
    """Gate, parse, score; all failures become data in the report."""
    source = dag.source_text if isinstance(dag, GeneratedDag) else str(dag)
    catalog = catalog or PenaltyCatalog()
    weights = weights or SatWeights()

    adapter_result: Optional[dict] = None
    if mode == ADAPTER:
        if not adapter_cmd:
            raise AdapterUnavailableError(
                "adapter mode requested but no adapter configured"
            )
        adapter_result = run_conformance_adapter(source, adapter_cmd)
        loadable = 1 if adapter_result.get("loadable") else 0
    else:
        loadable = loadability_gate(source, mode=mode)
    if not loadable:
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
            structural_gate_pass=False,
            sat_weights=weights.as_dict(),
        )

    try:
        graph = parse_dag_source(source)
    except DagforgeError:
        # Only reachable in adapter mode: the platform loaded a script our
        # static parser cannot read.  The structural gate fails closed.
        sat_result = score_sat(source, catalog, weights)
        pct_result = score_pct(1, False, None, 0.0)
        return EvaluationReport(
            loadable=1,
            sat=sat_result.sat,
            dst=0.0,
            pct=pct_result.pct,
            s_struct=0.0,
            s_config=0.0,
            dryrun_ratio=0.0,
            bonus=0.0,
            violations=(),
            penalized=True,
            structural_gate_pass=False,
            sat_scores=sat_result.scores,
            sat_weights=weights.as_dict(),
        )

    structural, metrics = analyze_structure(graph)
    raw_configs = extract_operator_configs(graph)

    task_ids = set(graph.task_ids())
    operator_issues: list[tuple[str, list[StructuralViolation]]] = []
    struct_violations = list(structural)
    for owner, issues in raw_configs:
        if owner in task_ids:
            operator_issues.append((owner, issues))
        else:
            struct_violations.extend(issues)

    sat_result = score_sat(source, catalog, weights)
    dst_result = score_dst(struct_violations, operator_issues, catalog)
    dry = simulate_dry_run(graph)
    if adapter_result is not None:
        # The real platform's dry-run verdicts win when the adapter ran.
        delegated = _adapter_dry_run(adapter_result)
        if delegated is not None:
            dry = delegated

    gate_pass = metrics.is_acyclic and metrics.task_count > 0
    pct_result = score_pct(loadable, gate_pass, dry.ratio, dst_result.s_struct)

    return EvaluationReport(
        loadable=loadable,
        sat=sat_result.sat,
        dst=dst_result.dst,
        pct=pct_result.pct,
        s_struct=dst_result.s_struct,
        s_config=dst_result.s_config,
        dryrun_ratio=dry.ratio if dry.ratio is not None else 0.0,
        bonus=pct_result.bonus,
        violations=tuple(struct_violations)
        + tuple(issue for _, issues in operator_issues for issue in issues),
        penalized=True,
        structural_gate_pass=gate_pass,
        task_count=metrics.task_count,
        sat_scores=sat_result.scores,
        sat_weights=weights.as_dict(),
        metrics=metrics,
        dry_run=dry.results,
        parse_warnings=graph.parse_warnings,
    )


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalRecord:
    method: str
    report: EvaluationReport
    total_tokens: int = 0
    byte_size: int = 0


@dataclass(frozen=True)
class MethodStats:
    method: str
    n: int
    success_count: int
    success_rate: float  # percent
    sat_mean: Optional[float]
    sat_std: Optional[float]
    dst_mean: Optional[float]
    dst_std: Optional[float]
    pct_mean: Optional[float]
    pct_std: Optional[float]
    mean_tokens: Optional[float]
    tokens_per_success: Optional[float]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "success_count": self.success_count,
            "success_rate": self.success_rate,
            "sat_mean": self.sat_mean,
            "sat_std": self.sat_std,
            "dst_mean": self.dst_mean,
            "dst_std": self.dst_std,
            "pct_mean": self.pct_mean,
            "pct_std": self.pct_std,
            "mean_tokens": self.mean_tokens,
            "tokens_per_success": self.tokens_per_success,
        }


@dataclass(frozen=True)
class SizeGroup:
    count: int
    mean_kb: Optional[float]
    std_kb: Optional[float]


@dataclass(frozen=True)
class FileSizeRow:
    method: str
    failed: SizeGroup
    successful: SizeGroup

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "failed": vars(self.failed),
            "successful": vars(self.successful),
        }


def _mean_std(values) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if len(arr) > 1 else None
    return mean, std


def success_rate(success_count: int, n: int) -> float:
    return 100.0 * success_count / n


def tokens_per_success(mean_tokens: Optional[float], rate_percent: float) -> Optional[float]:
    if mean_tokens is None or rate_percent <= 0:
        return None
    return mean_tokens / (rate_percent / 100.0)


def empty_method_stats(method: str) -> MethodStats:
    return MethodStats(
        method=method,
        n=0,
        success_count=0,
        success_rate=0.0,
        sat_mean=None,
        sat_std=None,
        dst_mean=None,
        dst_std=None,
        pct_mean=None,
        pct_std=None,
        mean_tokens=None,
        tokens_per_success=None,
    )


def aggregate_stats(records) -> tuple[list[MethodStats], list[FileSizeRow]]:
    """Per-method penalized statistics plus the size-by-outcome summary."""
    records = list(records)
    if not records:
        raise EmptyInputError("no records to aggregate")

    by_method: dict[str, list[EvalRecord]] = {}
    for record in records:
        by_method.setdefault(record.method, []).append(record)

    stats: list[MethodStats] = []
    sizes: list[FileSizeRow] = []
    for method, group in by_method.items():
        n = len(group)
        successes = sum(r.report.loadable for r in group)
        rate = success_rate(successes, n)
        sat_mean, sat_std = _mean_std([r.report.sat for r in group])
        dst_mean, dst_std = _mean_std([r.report.dst for r in group])
        pct_mean, pct_std = _mean_std([r.report.pct for r in group])
        mean_tokens, _ = _mean_std([r.total_tokens for r in group])
        stats.append(
            MethodStats(
                method=method,
                n=n,
                success_count=successes,
                success_rate=rate,
                sat_mean=sat_mean,
                sat_std=sat_std,
                dst_mean=dst_mean,
                dst_std=dst_std,
                pct_mean=pct_mean,
                pct_std=pct_std,
                mean_tokens=mean_tokens,
                tokens_per_success=tokens_per_success(mean_tokens, rate),
            )
        )

        failed = [r.byte_size / 1024.0 for r in group if not r.report.loadable]
        passed = [r.byte_size / 1024.0 for r in group if r.report.loadable]
        f_mean, f_std = _mean_std(failed)
        p_mean, p_std = _mean_std(passed)
        sizes.append(
            FileSizeRow(
                method=method,
                failed=SizeGroup(len(failed), f_mean, f_std),
                successful=SizeGroup(len(passed), p_mean, p_std),
            )
        )

    all_failed = [r.byte_size / 1024.0 for r in records if not r.report.loadable]
    all_passed = [r.byte_size / 1024.0 for r in records if r.report.loadable]
    f_mean, f_std = _mean_std(all_failed)
    p_mean, p_std = _mean_std(all_passed)
    sizes.append(
        FileSizeRow(
            method="overall",
            failed=SizeGroup(len(all_failed), f_mean, f_std),
            successful=SizeGroup(len(all_passed), p_mean, p_std),
        )
    )
    return stats, sizes
