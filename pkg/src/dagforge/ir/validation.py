"""Schema validation for both intermediate representations.

Validators never raise: every violation is returned as data with a stable
code, a path expression pointing at the offending field, and a message.
Both functions are pure, so identical input always yields an identical
result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .types import (
    ANALYSIS_SCHEMA_VERSION,
    COMPONENT_TYPE_NAMES,
    EXECUTION_ENVIRONMENTS,
    INTEGRATION_DIRECTIONS,
    PARALLEL_FOR_EACH,
    PARAM_TYPES,
    WORKFLOW_SCHEMA_VERSION,
    AnalysisArtifact,
    ComponentType,
    WorkflowSpec,
)

SNAKE_CASE_RE = re.compile(r"^[a-z][a-z0-9_]*$")

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    path: str
    message: str
    severity: str = ERROR


@dataclass(frozen=True)
class ValidationResult:
    issues: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> tuple:
        return tuple(i for i in self.issues if i.severity == ERROR)

    @property
    def warnings(self) -> tuple:
        return tuple(i for i in self.issues if i.severity == WARNING)

    def codes(self) -> tuple:
        return tuple(i.code for i in self.issues)


class _Collector:
    def __init__(self):
        self.issues: list[ValidationIssue] = []

    def error(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, path, message, ERROR))

    def warning(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, path, message, WARNING))

    def result(self) -> ValidationResult:
        return ValidationResult(tuple(self.issues))


def validate_analysis(artifact: AnalysisArtifact) -> ValidationResult:
    """Check every analysis-artifact invariant; violations come back as data."""
    out = _Collector()

    if artifact.metadata.analysis_version != ANALYSIS_SCHEMA_VERSION:
        out.error(
            "UNSUPPORTED_VERSION",
            "metadata.analysis_version",
            f"expected {ANALYSIS_SCHEMA_VERSION!r}, "
            f"got {artifact.metadata.analysis_version!r}",
        )

    env = artifact.pipeline_summary.execution_environment
    if env not in EXECUTION_ENVIRONMENTS:
        out.error(
            "INVALID_ENVIRONMENT",
            "pipeline_summary.execution_environment",
            f"{env!r} is not one of {', '.join(EXECUTION_ENVIRONMENTS)}",
        )

    if not artifact.components:
        out.error("EMPTY_COMPONENTS", "components", "component list is empty")

    seen_ids: set[str] = set()
    for idx, component in enumerate(artifact.components):
        path = f"components[{idx}]"
        if not component.id or not SNAKE_CASE_RE.match(component.id):
            out.error(
                "INVALID_COMPONENT_ID",
                f"{path}.id",
                f"component id {component.id!r} must be nonempty snake_case",
            )
        if component.id in seen_ids:
            out.error(
                "DUPLICATE_COMPONENT_ID",
                f"{path}.id",
                f"component id {component.id!r} appears more than once",
            )
        seen_ids.add(component.id)
        if component.type not in COMPONENT_TYPE_NAMES:
            out.error(
                "UNKNOWN_COMPONENT_TYPE",
                f"{path}.type",
                f"{component.type!r} is not in the ten-value taxonomy",
            )
        elif component.type == ComponentType.OTHER.value:
            out.warning(
                "OTHER_COMPONENT_TYPE",
                f"{path}.type",
                f"component {component.id!r} uses the catch-all type Other",
            )

    flow = artifact.detailed_flow_structure
    known = seen_ids | set(flow.parallel_blocks)
    component_types = {c.id: c.type for c in artifact.components}

    if not flow.entry_points:
        out.error(
            "EMPTY_ENTRY_POINTS",
            "detailed_flow_structure.entry_points",
            "a valid pipeline declares at least one entry point",
        )
    for entry in flow.entry_points:
        if entry not in known:
            out.error(
                "DANGLING_FLOW_REF",
                "detailed_flow_structure.entry_points",
                f"entry point {entry!r} is not a component or parallel block",
            )

    for node_id, node in flow.nodes.items():
        if node_id not in known:
            out.error(
                "DANGLING_FLOW_REF",
                "detailed_flow_structure.nodes",
                f"node {node_id!r} is not a declared component",
            )
        elif node_id in component_types and node.type != component_types[node_id]:
            out.error(
                "NODE_TYPE_MISMATCH",
                f"detailed_flow_structure.nodes.{node_id}.type",
                f"node type {node.type!r} does not match component type "
                f"{component_types[node_id]!r}",
            )
        for target in node.next_nodes:
            if target not in known:
                out.error(
                    "DANGLING_FLOW_REF",
                    "detailed_flow_structure.nodes",
                    f"node {node_id!r} points at unknown id {target!r}",
                )

    for block_id, block in flow.parallel_blocks.items():
        path = f"detailed_flow_structure.parallel_blocks.{block_id}"
        if not block.task_sequence_types:
            out.error(
                "EMPTY_TASK_SEQUENCE",
                f"{path}.task_sequence_types",
                "parallel block declares no task sequence",
            )
        for ref in block.triggered_by_nodes:
            if ref not in known:
                out.error(
                    "DANGLING_FLOW_REF",
                    f"{path}.triggered_by_nodes",
                    f"unknown trigger id {ref!r}",
                )
        for ref in block.task_sequence_types:
            if ref not in seen_ids:
                out.error(
                    "DANGLING_FLOW_REF",
                    f"{path}.task_sequence_types",
                    f"unknown component id {ref!r}",
                )
        sync = block.synchronization_node
        if sync is not None and sync not in known:
            out.error(
                "DANGLING_FLOW_REF",
                f"{path}.synchronization_node",
                f"unknown synchronization node {sync!r}",
            )

    _check_params(artifact, out)

    for idx, point in enumerate(artifact.integrations.integration_points):
        if point.direction not in INTEGRATION_DIRECTIONS:
            out.error(
                "INVALID_DIRECTION",
                f"integrations.integration_points[{idx}].direction",
                f"{point.direction!r} is not one of "
                f"{', '.join(INTEGRATION_DIRECTIONS)}",
            )

    return out.result()


def _check_params(artifact: AnalysisArtifact, out: _Collector) -> None:
    def check_def(param, path: str) -> None:
        if param.type not in PARAM_TYPES:
            out.error(
                "INVALID_PARAM_TYPE",
                f"{path}.type",
                f"{param.type!r} is not one of {', '.join(PARAM_TYPES)}",
            )
        if not isinstance(param.required, bool):
            out.error(
                "INVALID_REQUIRED_FLAG",
                f"{path}.required",
                "required must be a boolean",
            )

    for name, param in artifact.parameters.global_params.items():
        check_def(param, f"parameters.global.{name}")
    for comp_id, params in artifact.parameters.components.items():
        for name, param in params.items():
            check_def(param, f"parameters.components.{comp_id}.{name}")


def validate_workflow(spec: WorkflowSpec) -> ValidationResult:
    """Check workflow-spec, task and flow-construct invariants."""
    out = _Collector()

    if spec.pipeline_definition_version != WORKFLOW_SCHEMA_VERSION:
        out.error(
            "UNSUPPORTED_VERSION",
            "pipeline_definition_version",
            f"expected {WORKFLOW_SCHEMA_VERSION!r}, "
            f"got {spec.pipeline_definition_version!r}",
        )

    component_ids = {c.id for c in spec.component_types}
    graph = spec.workflow
    referable = set(graph.tasks) | set(graph.flow_constructs)

    if not graph.entry_points:
        out.error(
            "EMPTY_ENTRY_POINTS",
            "workflow.entry_points",
            "a valid workflow declares at least one entry point",
        )
    for entry in graph.entry_points:
        if entry not in referable:
            out.error(
                "DANGLING_TASK_REF",
                "workflow.entry_points",
                f"entry point {entry!r} is not a task or construct",
            )

    def check_task(task_id: str, task, path: str, local: set[str]) -> None:
        if task.component_type_id not in component_ids:
            out.error(
                "UNKNOWN_COMPONENT_TYPE_ID",
                f"{path}.component_type_id",
                f"{task.component_type_id!r} is not a declared component type",
            )
        if task_id in task.depends_on:
            out.error(
                "SELF_DEPENDENCY",
                f"{path}.depends_on",
                f"task {task_id!r} depends on itself",
            )
        for ref in task.depends_on:
            if ref not in local:
                out.error(
                    "DANGLING_TASK_REF",
                    f"{path}.depends_on",
                    f"unknown id {ref!r}",
                )
        for ref in task.triggers:
            if ref not in local:
                out.error(
                    "DANGLING_TASK_REF",
                    f"{path}.triggers",
                    f"unknown id {ref!r}",
                )

    for task_id, task in graph.tasks.items():
        check_task(task_id, task, f"workflow.tasks.{task_id}", referable)

    for construct_id, construct in graph.flow_constructs.items():
        path = f"workflow.flow_constructs.{construct_id}"
        if construct.type != PARALLEL_FOR_EACH:
            # Nested or unknown construct kinds are rejected outright.
            out.error(
                "UNSUPPORTED_CONSTRUCT_TYPE",
                f"{path}.type",
                f"{construct.type!r} is not a supported flow construct",
            )
        if construct.type == PARALLEL_FOR_EACH and not construct.body.tasks:
            out.error(
                "EMPTY_CONSTRUCT_BODY",
                f"{path}.body.tasks",
                "parallel_for_each requires a nonempty body",
            )
        for ref in tuple(construct.depends_on) + tuple(construct.triggers):
            if ref not in referable:
                out.error(
                    "DANGLING_TASK_REF",
                    path,
                    f"unknown id {ref!r}",
                )
        body_ids = set(construct.body.tasks)
        for entry in construct.body.entry_points:
            if entry not in body_ids:
                out.error(
                    "DANGLING_TASK_REF",
                    f"{path}.body.entry_points",
                    f"unknown body task {entry!r}",
                )
        for task_id, task in construct.body.tasks.items():
            check_task(task_id, task, f"{path}.body.tasks.{task_id}", body_ids)

    return out.result()
