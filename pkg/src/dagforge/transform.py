"""Deterministic transform from the analysis artifact to the workflow spec.

Dependency edges are derived, never trusted: ``depends_on`` is the inversion
of the forward ``next_nodes`` / trigger relation, so edge symmetry
(A in depends_on(B) iff B in triggers(A)) holds by construction.
"""

from __future__ import annotations

from .errors import InvalidInputError
from .ir import (
    PARALLEL_FOR_EACH,
    WORKFLOW_SCHEMA_VERSION,
    AnalysisArtifact,
    ConstructBody,
    ExecutionEnvironment,
    FlowConstruct,
    TaskInstance,
    WorkflowGraph,
    WorkflowSpec,
    serialize_workflow_dict,
    validate_analysis,
    validate_workflow,
)


def transform(artifact: AnalysisArtifact) -> WorkflowSpec:
    """Build the execution-centric workflow spec from a valid artifact."""
    result = validate_analysis(artifact)
    if not result.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in result.errors)
        raise InvalidInputError(f"artifact fails validation: {details}")

    flow = artifact.detailed_flow_structure

    # Forward trigger sets in declaration order.  A triggering node listed in
    # a block's triggered_by_nodes gains the construct even when its
    # next_nodes omit it, keeping the edge relation symmetric.
    triggers: dict[str, list[str]] = {
        node_id: list(node.next_nodes) for node_id, node in flow.nodes.items()
    }
    for block_id, block in flow.parallel_blocks.items():
        for source in block.triggered_by_nodes:
            if source in triggers and block_id not in triggers[source]:
                triggers[source].append(block_id)
        sync = block.synchronization_node
        triggers[block_id] = [sync] if sync else []

    ordered_ids = list(flow.nodes) + list(flow.parallel_blocks)
    depends_on: dict[str, list[str]] = {target: [] for target in ordered_ids}
    for source in ordered_ids:
        for target in triggers.get(source, ()):
            if target in depends_on and source not in depends_on[target]:
                depends_on[target].append(source)

    tasks = {
        node_id: TaskInstance(
            component_type_id=node_id,
            depends_on=tuple(depends_on[node_id]),
            triggers=tuple(triggers[node_id]),
        )
        for node_id in flow.nodes
    }

    constructs = {}
    for block_id, block in flow.parallel_blocks.items():
        body_tasks = {}
        sequence = list(block.task_sequence_types)
        for idx, component_id in enumerate(sequence):
            body_tasks[component_id] = TaskInstance(
                component_type_id=component_id,
                depends_on=(sequence[idx - 1],) if idx > 0 else (),
                triggers=(sequence[idx + 1],) if idx < len(sequence) - 1 else (),
            )
        constructs[block_id] = FlowConstruct(
            type=PARALLEL_FOR_EACH,
            instance_parameter=block.instance_parameter,
            body=ConstructBody(
                entry_points=(sequence[0],) if sequence else (),
                tasks=body_tasks,
            ),
            depends_on=tuple(depends_on[block_id]),
            triggers=tuple(triggers[block_id]),
        )

    spec = WorkflowSpec(
        pipeline_definition_version=WORKFLOW_SCHEMA_VERSION,
        pipeline_name=artifact.pipeline_summary.name,
        description=artifact.pipeline_summary.description,
        metadata=artifact.metadata,
        execution_environment=ExecutionEnvironment(
            type=artifact.pipeline_summary.execution_environment,
            default_docker_network=_default_docker_network(artifact),
        ),
        parameters=artifact.parameters,
        component_types=artifact.components,
        integrations=artifact.integrations,
        workflow=WorkflowGraph(
            entry_points=tuple(flow.entry_points),
            tasks=tasks,
            flow_constructs=constructs,
        ),
    )

    check = validate_workflow(spec)
    if not check.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in check.errors)
        raise InvalidInputError(f"transformed spec fails validation: {details}")
    return spec


def _default_docker_network(artifact: AnalysisArtifact) -> str | None:
    # First environment variable, then global parameter, whose name mentions
    # "network" and carries a non-null default.
    for name, env_var in artifact.parameters.environment_variables.items():
        if "network" in name.lower() and env_var.default is not None:
            return str(env_var.default)
    for name, param in artifact.parameters.global_params.items():
        if "network" in name.lower() and param.default is not None:
            return str(param.default)
    return None


def serialize_workflow(spec: WorkflowSpec) -> str:
    """Emit the byte-stable YAML form of a valid workflow spec."""
    result = validate_workflow(spec)
    if not result.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in result.errors)
        raise InvalidInputError(f"spec fails validation: {details}")
    return serialize_workflow_dict(spec.to_dict())
