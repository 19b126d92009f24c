"""Staged analysis of a pipeline description into the structured artifact.

Six stages run in a fixed total order (environment, components, flow,
parameters, integrations, report).  Each stage issues exactly one chat
completion with its dedicated system prompt; a stage whose payload cannot be
extracted is retried once with a corrective instruction before failing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Callable, Mapping, Optional

from ..errors import AggregationError, MissingPriorError, StageParseError
from ..gateway import ChatRequest, Gateway
from ..ir import (
    ANALYSIS_SCHEMA_VERSION,
    EXECUTION_ENVIRONMENTS,
    AnalysisArtifact,
    AnalysisMetadata,
    FlowStructure,
    Integrations,
    ParameterSchema,
    PipelineSummary,
    ComponentSpec,
    validate_analysis,
)
from . import prompts

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)

JSON_VALUE = "json-value"
BARE_TOKEN = "bare-token"


class AnalysisStage(str, Enum):
    ENVIRONMENT = "environment"
    COMPONENTS = "components"
    FLOW = "flow"
    PARAMETERS = "parameters"
    INTEGRATIONS = "integrations"
    REPORT = "report"


STAGE_ORDER = (
    AnalysisStage.ENVIRONMENT,
    AnalysisStage.COMPONENTS,
    AnalysisStage.FLOW,
    AnalysisStage.PARAMETERS,
    AnalysisStage.INTEGRATIONS,
    AnalysisStage.REPORT,
)

# Stages whose output a given stage consumes.
STAGE_PRIORS: dict[AnalysisStage, tuple[AnalysisStage, ...]] = {
    AnalysisStage.ENVIRONMENT: (),
    AnalysisStage.COMPONENTS: (),
    AnalysisStage.FLOW: (AnalysisStage.COMPONENTS,),
    AnalysisStage.PARAMETERS: (AnalysisStage.COMPONENTS,),
    AnalysisStage.INTEGRATIONS: (AnalysisStage.COMPONENTS,),
    AnalysisStage.REPORT: (
        AnalysisStage.ENVIRONMENT,
        AnalysisStage.COMPONENTS,
        AnalysisStage.FLOW,
        AnalysisStage.PARAMETERS,
        AnalysisStage.INTEGRATIONS,
    ),
}

_SYSTEM_PROMPTS = {
    AnalysisStage.ENVIRONMENT: prompts.ENVIRONMENT_SYSTEM_PROMPT,
    AnalysisStage.COMPONENTS: prompts.COMPONENTS_SYSTEM_PROMPT,
    AnalysisStage.FLOW: prompts.FLOW_SYSTEM_PROMPT,
    AnalysisStage.PARAMETERS: prompts.PARAMETERS_SYSTEM_PROMPT,
    AnalysisStage.INTEGRATIONS: prompts.INTEGRATIONS_SYSTEM_PROMPT,
    AnalysisStage.REPORT: prompts.REPORT_SYSTEM_PROMPT,
}


@dataclass(frozen=True)
class StageOutput:
    stage: AnalysisStage
    raw_text: str
    parsed: Any = None


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def _format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is not None:
        moment = moment.astimezone(timezone.utc).replace(tzinfo=None)
    return moment.strftime("%Y-%m-%dT%H:%M:%S.%f")


def extract_payload(raw_text: str, expected_shape: str = JSON_VALUE) -> Any:
    """Pull the structured payload out of a possibly decorated response.

    Handles code fences and surrounding prose: for JSON payloads the first
    complete JSON value wins; for bare tokens the whole (unfenced) response
    must be a single word.
    """
    if expected_shape == BARE_TOKEN:
        candidate = raw_text
        fenced = _FENCE_RE.search(candidate)
        if fenced:
            candidate = fenced.group(1)
        candidate = candidate.strip()
        if not candidate or any(ch.isspace() for ch in candidate):
            raise StageParseError(
                f"expected a single bare token, got {candidate[:60]!r}"
            )
        return candidate.lower()

    if expected_shape != JSON_VALUE:
        raise ValueError(f"unknown expected shape {expected_shape!r}")

    candidates = [m.group(1) for m in _FENCE_RE.finditer(raw_text)]
    candidates.append(raw_text)
    decoder = json.JSONDecoder()
    for text in candidates:
        for start in _json_starts(text):
            try:
                value, _ = decoder.raw_decode(text, start)
            except ValueError:
                continue
            return value
    raise StageParseError(f"no JSON value found in response ({raw_text[:60]!r}...)")


def _json_starts(text: str):
    for idx, ch in enumerate(text):
        if ch in "{[":
            yield idx


def _canon(value: Any) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False)


def _build_request(
    stage: AnalysisStage,
    description: str,
    prior: Mapping[AnalysisStage, StageOutput],
    model_key: str,
) -> ChatRequest:
    if stage in (AnalysisStage.ENVIRONMENT, AnalysisStage.COMPONENTS):
        user = prompts.description_input(description)
    elif stage in (AnalysisStage.FLOW, AnalysisStage.PARAMETERS, AnalysisStage.INTEGRATIONS):
        components = prior[AnalysisStage.COMPONENTS].parsed
        user = prompts.description_with_components_input(description, _canon(components))
    else:
        user = prompts.report_input(
            environment=prior[AnalysisStage.ENVIRONMENT].parsed,
            components_json=_canon(prior[AnalysisStage.COMPONENTS].parsed),
            flow_json=_canon(prior[AnalysisStage.FLOW].parsed),
            parameters_json=_canon(prior[AnalysisStage.PARAMETERS].parsed),
            integrations_json=_canon(prior[AnalysisStage.INTEGRATIONS].parsed),
        )
    return ChatRequest(
        system_prompt=_SYSTEM_PROMPTS[stage],
        user_prompt=user,
        model_key=model_key,
    )


def _parse_stage(stage: AnalysisStage, raw_text: str) -> Any:
    if stage == AnalysisStage.REPORT:
        return raw_text.strip()
    if stage == AnalysisStage.ENVIRONMENT:
        token = extract_payload(raw_text, BARE_TOKEN)
        if token not in EXECUTION_ENVIRONMENTS:
            raise StageParseError(f"{token!r} is not a known execution environment")
        return token
    value = extract_payload(raw_text, JSON_VALUE)
    if stage == AnalysisStage.COMPONENTS:
        if not isinstance(value, list):
            raise StageParseError("components stage must yield a JSON list")
        return value
    if not isinstance(value, dict):
        raise StageParseError(f"{stage.value} stage must yield a JSON object")
    if stage == AnalysisStage.FLOW and "flow_structure" in value:
        inner = value["flow_structure"]
        if not isinstance(inner, dict):
            raise StageParseError("flow_structure must be a JSON object")
        return inner
    return value


def run_stage(
    stage: AnalysisStage,
    description: str,
    prior: Mapping[AnalysisStage, StageOutput],
    gateway: Gateway,
    model_key: str,
) -> StageOutput:
    """Issue the stage's completion and extract its structured payload."""
    for needed in STAGE_PRIORS[stage]:
        if needed not in prior:
            raise MissingPriorError(
                f"stage {stage.value!r} requires prior stage {needed.value!r}"
            )

    request = _build_request(stage, description, prior, model_key)
    label = f"step1:{stage.value}"
    response = gateway.complete(request, stage=label)
    try:
        parsed = _parse_stage(stage, response.text)
        return StageOutput(stage=stage, raw_text=response.text, parsed=parsed)
    except StageParseError:
        retry = ChatRequest(
            system_prompt=request.system_prompt,
            user_prompt=request.user_prompt + prompts.RETRY_SUFFIX,
            model_key=model_key,
        )
        retried = gateway.complete(retry, stage=label)
        try:
            parsed = _parse_stage(stage, retried.text)
        except StageParseError as exc:
            raise StageParseError(
                f"stage {stage.value!r} yielded no extractable payload after retry: {exc}"
            ) from exc
        return StageOutput(stage=stage, raw_text=retried.text, parsed=parsed)


def _first_sentence(text: str) -> str:
    for line in text.splitlines():
        stripped = line.strip()
        if (
            not stripped
            or stripped.startswith("#")
            or set(stripped) <= {"=", "-", "*"}
        ):
            continue
        match = re.search(r"(.+?[.!?])(\s|$)", stripped)
        return match.group(1) if match else stripped
    return text.strip()


def run_analysis(
    description: str,
    source_file: str,
    gateway: Gateway,
    model_key: str,
    provider_name: str = "",
    clock: Callable[[], datetime] = utc_now,
    stage_sink: Optional[Callable[[StageOutput], None]] = None,
) -> tuple[AnalysisArtifact, str]:
    """Run all six stages in order and assemble the validated artifact.

    ``stage_sink`` receives each stage output as it completes, so callers can
    persist the raw responses as debugging artifacts.
    """
    if not description.strip():
        raise AggregationError("description is empty")

    outputs: dict[AnalysisStage, StageOutput] = {}
    for stage in STAGE_ORDER:
        outputs[stage] = run_stage(stage, description, outputs, gateway, model_key)
        if stage_sink is not None:
            stage_sink(outputs[stage])

    components = tuple(
        ComponentSpec.from_dict(raw) for raw in outputs[AnalysisStage.COMPONENTS].parsed
    )
    flow = FlowStructure.from_dict(outputs[AnalysisStage.FLOW].parsed)
    parameters = ParameterSchema.from_dict(outputs[AnalysisStage.PARAMETERS].parsed)
    integrations = Integrations.from_dict(outputs[AnalysisStage.INTEGRATIONS].parsed)
    report_text = outputs[AnalysisStage.REPORT].parsed

    _reconcile_ids(components, flow, parameters, integrations)

    if flow.parallel_blocks:
        blocks = len(flow.parallel_blocks)
        pattern = (
            f"Parallel flow with {len(components)} components and "
            f"{blocks} parallel block{'s' if blocks != 1 else ''}"
        )
    else:
        pattern = f"Sequential flow with {len(components)} components"

    summary_description = _first_sentence(report_text) if report_text else ""
    if not summary_description:
        summary_description = _first_sentence(description)

    artifact = AnalysisArtifact(
        metadata=AnalysisMetadata(
            analysis_version=ANALYSIS_SCHEMA_VERSION,
            timestamp=_format_timestamp(clock()),
            source_description_file=str(source_file),
            llm_provider=provider_name or gateway.provider.name,
            llm_model_key=model_key,
        ),
        pipeline_summary=PipelineSummary(
            name=f"{components[0].id}_analysis" if components else "pipeline_analysis",
            description=summary_description,
            execution_environment=outputs[AnalysisStage.ENVIRONMENT].parsed,
            flow_pattern_summary=pattern,
        ),
        components=components,
        detailed_flow_structure=flow,
        parameters=parameters,
        integrations=integrations,
    )

    result = validate_analysis(artifact)
    if not result.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in result.errors)
        raise AggregationError(f"assembled artifact fails validation: {details}")
    return artifact, report_text


def _reconcile_ids(
    components: tuple,
    flow: FlowStructure,
    parameters: ParameterSchema,
    integrations: Integrations,
) -> None:
    # Exact-match resolution only: a reference either names a component (or
    # declared parallel block, for flow refs) or the aggregation fails.
    known = {c.id for c in components}
    flow_known = known | set(flow.parallel_blocks)

    unresolved: list[str] = []

    def check(ref: Optional[str], source: str, allowed: set) -> None:
        if ref is not None and ref not in allowed:
            unresolved.append(f"{source} references unknown id {ref!r}")

    for entry in flow.entry_points:
        check(entry, "flow.entry_points", flow_known)
    for node_id, node in flow.nodes.items():
        check(node_id, "flow.nodes", flow_known)
        for target in node.next_nodes:
            check(target, f"flow.nodes.{node_id}.next_nodes", flow_known)
    for block_id, block in flow.parallel_blocks.items():
        for ref in block.triggered_by_nodes:
            check(ref, f"flow.parallel_blocks.{block_id}", flow_known)
        for ref in block.task_sequence_types:
            check(ref, f"flow.parallel_blocks.{block_id}", known)
        check(block.synchronization_node, f"flow.parallel_blocks.{block_id}", flow_known)

    for comp_id in parameters.components:
        check(comp_id, "parameters.components", known)
    for idx, point in enumerate(integrations.integration_points):
        for ref in point.components:
            check(ref, f"integrations.integration_points[{idx}]", known)

    if unresolved:
        raise AggregationError(
            "cross-stage id reconciliation failed: " + "; ".join(unresolved)
        )
