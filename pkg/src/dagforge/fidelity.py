"""Judge-based fidelity assessment of analysis artifacts against descriptions.

An external model audits the structured artifacts for MISSING, HALLUCINATED
and INCONSISTENT elements against a closed issue catalog.  Judge responses
are advisory data: their arithmetic is never trusted, counts are always
recomputed locally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import extract_payload
from .errors import (
    InsufficientDataError,
    InvalidInputError,
    JudgeParseError,
    StageParseError,
    UnknownIssueCodeError,
)
from .gateway import ChatRequest, Gateway
from .ir import (
    AnalysisArtifact,
    WorkflowSpec,
    validate_analysis,
    validate_workflow,
)
from .transform import serialize_workflow

ISSUE_TYPES = ("MISSING", "HALLUCINATION", "INCONSISTENCY")
SEVERITIES = ("HIGH", "MEDIUM", "LOW")
SUMMARY_SECTIONS = ("components", "parameters", "integrations", "workflow")
CLASSIFICATIONS = ISSUE_TYPES + ("CORRECT",)

ISSUE_CATALOG: dict[str, tuple[str, str]] = {
    # code -> (category, description)
    "DS01": ("structural", "Task Missing in Pipeline Definition"),
    "DS02": ("structural", "Incorrect Task Dependencies"),
    "DS03": ("structural", "Parameter/Config Mismatch"),
    "DS04": ("structural", "Incorrect Parallelism Implementation"),
    "DS05": ("structural", "Missing Required Input/Output Patterns"),
    "IF01": ("information_fidelity", "Hallucinated Parameter or Value"),
    "IF02": ("information_fidelity", "Missing Critical Information"),
    "IF03": ("information_fidelity", "Placeholder Used When Actual Data Available"),
    "IF04": ("information_fidelity", "Incorrect Component Type Assignment"),
    "IG01": ("integration", "Missing Integration Point"),
    "IG02": ("integration", "Incorrect Service Configuration"),
    "IG03": ("integration", "Data Source/Sink Mismatch"),
    "EE01": ("execution_environment", "Incorrect Environment Type"),
    "EE02": ("execution_environment", "Missing Infrastructure Dependency"),
    "IC01": ("internal_consistency", "Workflow-Structure Mismatch"),
    "IC02": ("internal_consistency", "Component-Parameter Mismatch"),
}

JUDGE_SYSTEM_PROMPT = """\
You are an expert pipeline quality assessor. Your task is to evaluate a pipeline implementation
against its original description using a predefined issue catalog. Follow these steps:

1. Carefully compare the pipeline description with:
   - Step 1 analysis (JSON)
   - Step 2 workflow definition (YAML)

2. For each element (components, parameters, integrations, workflow structure), classify into:
   - MISSING: Present in description but missing in outputs
   - HALLUCINATION: Present in outputs but not in description
   - INCONSISTENCY: Present in both but with mismatched details
   - CORRECT: Accurate representation in both

3. Identify and annotate specific issues using ONLY the official issue codes
   provided in the issue catalog.

4. For each issue found, include:
   - The exact issue code (e.g., DS01)
   - Classification: MISSING, HALLUCINATION, or INCONSISTENCY
   - A clear description of the issue and its impact
   - Severity: HIGH, MEDIUM, or LOW
   - Specific evidence (cited) from the description or artifacts

5. Structure your response as valid JSON with this format:
{
  "pipeline_name": "name_from_yaml",
  "validation_summary": {
    "components": {
      "MISSING": ["list", "of", "ids"],
      "HALLUCINATION": ["list", "of", "ids"],
      "INCONSISTENCY": ["list", "of", "ids"],
      "CORRECT": ["list", "of", "ids"]
    },
    "parameters": { ... },
    "integrations": { ... },
    "workflow": { ... }
  },
  "issues": [
    {
      "code": "ISSUE_CODE",
      "type": "MISSING|HALLUCINATION|INCONSISTENCY",
      "description": "Issue description",
      "severity": "SEVERITY_LEVEL",
      "evidence": "Quoted evidence"
    }
  ],
  "summary_metrics": {
    "total_issues": 0,
    "missing_count": 0,
    "hallucination_count": 0,
    "inconsistency_count": 0,
    "correct_count": 0
  }
}

Guidelines:
- Be critical but fair—do not report superficial or ambiguous issues.
- Focus on accuracy, completeness, and consistency.
- Pay special attention to missing or hallucinated components, incorrect dependencies, parameter fidelity, and integration patterns.
- Use the EXACT issue codes from the catalog.
- Output ONLY valid, pretty-printed JSON, no extra text.
"""


def _catalog_block() -> str:
    lines = ["Issue catalog:"]
    for code, (category, description) in ISSUE_CATALOG.items():
        lines.append(f"- {code} ({category}): {description}")
    return "\n".join(lines)


@dataclass(frozen=True)
class Issue:
    code: str
    type: str
    description: str
    severity: str
    evidence: str = ""

    @property
    def category(self) -> str:
        return ISSUE_CATALOG[self.code][0]

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "type": self.type,
            "description": self.description,
            "severity": self.severity,
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class FidelityReport:
    pipeline_name: str
    validation_summary: dict
    issues: tuple
    summary_metrics: dict
    warnings: tuple = ()

    def to_dict(self) -> dict:
        return {
            "pipeline_name": self.pipeline_name,
            "validation_summary": self.validation_summary,
            "issues": [issue.to_dict() for issue in self.issues],
            "summary_metrics": dict(self.summary_metrics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def recount_metrics(issues, validation_summary: dict) -> dict:
    """Authoritative local arithmetic over the issue list and summary lists."""
    missing = sum(1 for i in issues if i.type == "MISSING")
    hallucinated = sum(1 for i in issues if i.type == "HALLUCINATION")
    inconsistent = sum(1 for i in issues if i.type == "INCONSISTENCY")
    correct = 0
    for section in SUMMARY_SECTIONS:
        entries = validation_summary.get(section) or {}
        correct += len(entries.get("CORRECT") or ())
    return {
        "total_issues": missing + hallucinated + inconsistent,
        "missing_count": missing,
        "hallucination_count": hallucinated,
        "inconsistency_count": inconsistent,
        "correct_count": correct,
    }


def parse_judge_response(text: str) -> FidelityReport:
    """Validate and normalize a raw judge response."""
    try:
        payload = extract_payload(text)
    except StageParseError as exc:
        raise JudgeParseError(f"judge response is not parseable JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise JudgeParseError("judge response must be a JSON object")

    raw_issues = payload.get("issues")
    if not isinstance(raw_issues, list):
        raise JudgeParseError("judge response lacks an issues list")

    issues: list[Issue] = []
    for raw in raw_issues:
        code = raw.get("code", "")
        if code not in ISSUE_CATALOG:
            raise UnknownIssueCodeError(
                f"judge cited unknown issue code {code!r}", code=code
            )
        issue_type = raw.get("type", "")
        if issue_type not in ISSUE_TYPES:
            raise JudgeParseError(f"issue type {issue_type!r} is not allowed")
        severity = raw.get("severity", "")
        if severity not in SEVERITIES:
            raise JudgeParseError(f"severity {severity!r} is not allowed")
        issues.append(
            Issue(
                code=code,
                type=issue_type,
                description=raw.get("description", ""),
                severity=severity,
                evidence=raw.get("evidence", ""),
            )
        )

    summary = payload.get("validation_summary") or {}
    if not isinstance(summary, dict):
        raise JudgeParseError("validation_summary must be an object")

    warnings: list[str] = []
    local = recount_metrics(issues, summary)
    reported = payload.get("summary_metrics") or {}
    if reported != local:
        warnings.append(
            "judge summary_metrics disagreed with local recount; recount wins "
            f"(judge: {reported}, local: {local})"
        )

    return FidelityReport(
        pipeline_name=str(payload.get("pipeline_name", "")),
        validation_summary=summary,
        issues=tuple(issues),
        summary_metrics=local,
        warnings=tuple(warnings),
    )


def assess(
    description: str,
    artifact: AnalysisArtifact,
    spec: WorkflowSpec,
    gateway: Gateway,
    model_key: str,
) -> FidelityReport:
    """One judge completion over the description and both artifacts."""
    if not validate_analysis(artifact).ok:
        raise InvalidInputError("analysis artifact fails validation")
    if not validate_workflow(spec).ok:
        raise InvalidInputError("workflow spec fails validation")

    user_prompt = (
        f"{_catalog_block()}\n\n"
        f"Pipeline Description:\n{description}\n\n"
        "Step 1 Analysis (JSON):\n"
        f"{json.dumps(artifact.to_dict(), indent=2, ensure_ascii=False)}\n\n"
        "Step 2 Workflow Definition (YAML):\n"
        f"{serialize_workflow(spec)}"
    )
    request = ChatRequest(
        system_prompt=JUDGE_SYSTEM_PROMPT,
        user_prompt=user_prompt,
        model_key=model_key,
    )
    response = gateway.complete(request, stage="judge")
    return parse_judge_response(response.text)


# --------------------------------------------------------------------------
# summary statistics
# --------------------------------------------------------------------------

METRIC_KEYS = (
    "total_issues",
    "missing_count",
    "hallucination_count",
    "inconsistency_count",
    "correct_count",
)


def point_biserial(values, outcomes) -> Optional[float]:
    """Pearson correlation between a count and a binary outcome.

    Returns None when either side has zero variance (undefined estimator).
    """
    x = np.asarray(values, dtype=float)
    y = np.asarray(outcomes, dtype=float)
    if x.std() == 0.0 or y.std() == 0.0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


@dataclass(frozen=True)
class FidelitySummary:
    group_means: dict  # outcome label -> {metric -> mean}
    group_counts: dict
    severity_histogram: dict
    category_breakdown: dict
    correlations: dict  # metric -> r (None when undefined)

    def to_dict(self) -> dict:
        return {
            "group_means": self.group_means,
            "group_counts": self.group_counts,
            "severity_histogram": self.severity_histogram,
            "category_breakdown": self.category_breakdown,
            "correlations": self.correlations,
        }


def summarize(reports_with_outcomes) -> FidelitySummary:
    """Group means, histograms and success correlations over judged runs."""
    pairs = list(reports_with_outcomes)
    if len(pairs) < 2:
        raise InsufficientDataError("need at least two judged runs")
    outcomes = [int(outcome) for _, outcome in pairs]
    if len(set(outcomes)) < 2:
        raise InsufficientDataError("need both failed and successful runs")

    groups = {"failed": [], "successful": []}
    for report, outcome in pairs:
        groups["successful" if outcome else "failed"].append(report)

    group_means = {}
    group_counts = {}
    for label, members in groups.items():
        group_counts[label] = len(members)
        group_means[label] = {
            key: float(np.mean([m.summary_metrics[key] for m in members]))
            for key in METRIC_KEYS
        }

    severity_histogram = {severity: 0 for severity in SEVERITIES}
    category_breakdown: dict[str, int] = {}
    for report, _ in pairs:
        for issue in report.issues:
            severity_histogram[issue.severity] += 1
            category_breakdown[issue.category] = (
                category_breakdown.get(issue.category, 0) + 1
            )

    correlations = {
        key: point_biserial(
            [report.summary_metrics[key] for report, _ in pairs], outcomes
        )
        for key in METRIC_KEYS
    }

    return FidelitySummary(
        group_means=group_means,
        group_counts=group_counts,
        severity_histogram=severity_histogram,
        category_breakdown=category_breakdown,
        correlations=correlations,
    )
