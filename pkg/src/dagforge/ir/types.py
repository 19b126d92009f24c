"""Value objects for the two intermediate representations.

Two document schemas are modeled here:

* the analysis artifact (JSON, schema ``1.3``) produced by the staged
  description analysis, and
* the platform-neutral workflow spec (YAML, schema ``1.0``) produced by the
  deterministic transform.

All types are immutable in spirit (plain dataclasses, never mutated after
construction) and round-trip through ``from_dict``/``to_dict``.  Unknown
fields found in input documents are kept in ``extras`` and re-emitted on
serialization, but validation ignores them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

ANALYSIS_SCHEMA_VERSION = "1.3"
WORKFLOW_SCHEMA_VERSION = "1.0"

EXECUTION_ENVIRONMENTS = (
    "docker",
    "native",
    "cloudfunction",
    "python",
    "kubernetes",
    "spark",
    "auto",
    "unknown",
)

PARAM_TYPES = (
    "string",
    "integer",
    "float",
    "boolean",
    "array",
    "object",
    "file",
    "directory",
)

INTEGRATION_DIRECTIONS = ("input", "output", "both")

PARALLEL_FOR_EACH = "parallel_for_each"


class ComponentType(str, Enum):
    """Ten-value component taxonomy used by the analysis stages."""

    DATA_LOADER = "DataLoader"
    TRANSFORMER = "Transformer"
    RECONCILIATOR = "Reconciliator"
    ENRICHER = "Enricher"
    EXPORTER = "Exporter"
    QUALITY_CHECK = "QualityCheck"
    SPLITTER = "Splitter"
    MERGER = "Merger"
    ORCHESTRATOR = "Orchestrator"
    OTHER = "Other"


COMPONENT_TYPE_NAMES = tuple(member.value for member in ComponentType)


def _split_extras(data: dict, known: tuple[str, ...]) -> dict:
    return {k: v for k, v in data.items() if k not in known}


# --------------------------------------------------------------------------
# analysis artifact (schema 1.3)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisMetadata:
    analysis_version: str = ANALYSIS_SCHEMA_VERSION
    timestamp: str = ""
    source_description_file: str = ""
    llm_provider: str = ""
    llm_model_key: str = ""
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "analysis_version",
        "timestamp",
        "source_description_file",
        "llm_provider",
        "llm_model_key",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisMetadata":
        return cls(
            analysis_version=data.get("analysis_version", ""),
            timestamp=data.get("timestamp", ""),
            source_description_file=data.get("source_description_file", ""),
            llm_provider=data.get("llm_provider", ""),
            llm_model_key=data.get("llm_model_key", ""),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "analysis_version": self.analysis_version,
            "timestamp": self.timestamp,
            "source_description_file": self.source_description_file,
            "llm_provider": self.llm_provider,
            "llm_model_key": self.llm_model_key,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class PipelineSummary:
    name: str = ""
    description: str = ""
    execution_environment: str = "unknown"
    flow_pattern_summary: str = ""
    extras: dict = field(default_factory=dict)

    _KEYS = ("name", "description", "execution_environment", "flow_pattern_summary")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineSummary":
        return cls(
            name=data.get("name", ""),
            description=data.get("description", ""),
            execution_environment=data.get("execution_environment", "unknown"),
            flow_pattern_summary=data.get("flow_pattern_summary", ""),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "description": self.description,
            "execution_environment": self.execution_environment,
            "flow_pattern_summary": self.flow_pattern_summary,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class ComponentSpec:
    """One processing-step type identified in the description.

    ``type`` is kept as a plain string so malformed documents can still be
    parsed; taxonomy membership is a validation concern, not a parse error.
    """

    id: str
    name: str = ""
    type: str = ComponentType.OTHER.value
    description: str = ""
    inputs: tuple = ()
    outputs: tuple = ()
    image: Optional[str] = None
    is_internally_parallelized: bool = False
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "id",
        "name",
        "type",
        "description",
        "inputs",
        "outputs",
        "image",
        "is_internally_parallelized",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "ComponentSpec":
        return cls(
            id=data.get("id", ""),
            name=data.get("name", ""),
            type=data.get("type", ComponentType.OTHER.value),
            description=data.get("description", ""),
            inputs=tuple(data.get("inputs") or ()),
            outputs=tuple(data.get("outputs") or ()),
            image=data.get("image"),
            is_internally_parallelized=bool(data.get("is_internally_parallelized", False)),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "name": self.name,
            "type": self.type,
            "description": self.description,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "image": self.image,
            "is_internally_parallelized": self.is_internally_parallelized,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class FlowNode:
    type: str
    next_nodes: tuple = ()
    extras: dict = field(default_factory=dict)

    _KEYS = ("type", "next_nodes")

    @classmethod
    def from_dict(cls, data: dict) -> "FlowNode":
        return cls(
            type=data.get("type", ""),
            next_nodes=tuple(data.get("next_nodes") or ()),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {"type": self.type, "next_nodes": list(self.next_nodes)}
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class ParallelBlock:
    """Scatter-gather section: identical task sequence fanned out per instance."""

    triggered_by_nodes: tuple = ()
    instance_parameter: Optional[str] = None
    task_sequence_types: tuple = ()
    synchronization_node: Optional[str] = None
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "triggered_by_nodes",
        "instance_parameter",
        "task_sequence_types",
        "synchronization_node",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "ParallelBlock":
        return cls(
            triggered_by_nodes=tuple(data.get("triggered_by_nodes") or ()),
            instance_parameter=data.get("instance_parameter"),
            task_sequence_types=tuple(data.get("task_sequence_types") or ()),
            synchronization_node=data.get("synchronization_node"),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "triggered_by_nodes": list(self.triggered_by_nodes),
            "instance_parameter": self.instance_parameter,
            "task_sequence_types": list(self.task_sequence_types),
            "synchronization_node": self.synchronization_node,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class FlowStructure:
    entry_points: tuple = ()
    nodes: dict = field(default_factory=dict)  # id -> FlowNode
    parallel_blocks: dict = field(default_factory=dict)  # id -> ParallelBlock
    extras: dict = field(default_factory=dict)

    _KEYS = ("entry_points", "nodes", "parallel_blocks")

    @classmethod
    def from_dict(cls, data: dict) -> "FlowStructure":
        return cls(
            entry_points=tuple(data.get("entry_points") or ()),
            nodes={
                node_id: FlowNode.from_dict(node)
                for node_id, node in (data.get("nodes") or {}).items()
            },
            parallel_blocks={
                block_id: ParallelBlock.from_dict(block)
                for block_id, block in (data.get("parallel_blocks") or {}).items()
            },
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "entry_points": list(self.entry_points),
            "nodes": {node_id: node.to_dict() for node_id, node in self.nodes.items()},
            "parallel_blocks": {
                block_id: block.to_dict()
                for block_id, block in self.parallel_blocks.items()
            },
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class ParamDef:
    description: str = ""
    type: str = "string"
    default: Any = None
    required: bool = False
    constraints: Optional[str] = None
    extras: dict = field(default_factory=dict)

    _KEYS = ("description", "type", "default", "required", "constraints")

    @classmethod
    def from_dict(cls, data: dict) -> "ParamDef":
        return cls(
            description=data.get("description", ""),
            type=data.get("type", "string"),
            default=data.get("default"),
            required=data.get("required", False),
            constraints=data.get("constraints"),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "description": self.description,
            "type": self.type,
            "default": self.default,
            "required": self.required,
            "constraints": self.constraints,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class EnvVarDef:
    description: str = ""
    default: Any = None
    associated_component_id: Optional[str] = None
    extras: dict = field(default_factory=dict)

    _KEYS = ("description", "default", "associated_component_id")

    @classmethod
    def from_dict(cls, data: dict) -> "EnvVarDef":
        return cls(
            description=data.get("description", ""),
            default=data.get("default"),
            associated_component_id=data.get("associated_component_id"),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "description": self.description,
            "default": self.default,
            "associated_component_id": self.associated_component_id,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class ParameterSchema:
    global_params: dict = field(default_factory=dict)  # name -> ParamDef
    components: dict = field(default_factory=dict)  # component id -> {name -> ParamDef}
    environment_variables: dict = field(default_factory=dict)  # NAME -> EnvVarDef
    extras: dict = field(default_factory=dict)

    _KEYS = ("global", "components", "environment_variables")

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSchema":
        return cls(
            global_params={
                name: ParamDef.from_dict(p)
                for name, p in (data.get("global") or {}).items()
            },
            components={
                comp_id: {name: ParamDef.from_dict(p) for name, p in params.items()}
                for comp_id, params in (data.get("components") or {}).items()
            },
            environment_variables={
                name: EnvVarDef.from_dict(v)
                for name, v in (data.get("environment_variables") or {}).items()
            },
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "global": {name: p.to_dict() for name, p in self.global_params.items()},
            "components": {
                comp_id: {name: p.to_dict() for name, p in params.items()}
                for comp_id, params in self.components.items()
            },
            "environment_variables": {
                name: v.to_dict() for name, v in self.environment_variables.items()
            },
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class IntegrationPoint:
    id: str = ""
    name: str = ""
    type: str = ""
    connection: dict = field(default_factory=dict)
    authentication: dict = field(default_factory=dict)
    components: tuple = ()
    direction: str = "output"
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "id",
        "name",
        "type",
        "connection",
        "authentication",
        "components",
        "direction",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "IntegrationPoint":
        return cls(
            id=data.get("id", ""),
            name=data.get("name", ""),
            type=data.get("type", ""),
            connection=dict(data.get("connection") or {}),
            authentication=dict(data.get("authentication") or {}),
            components=tuple(data.get("components") or ()),
            direction=data.get("direction", "output"),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "name": self.name,
            "type": self.type,
            "connection": dict(self.connection),
            "authentication": dict(self.authentication),
            "components": list(self.components),
            "direction": self.direction,
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class Integrations:
    integration_points: tuple = ()
    data_sources: tuple = ()
    data_sinks: tuple = ()
    extras: dict = field(default_factory=dict)

    _KEYS = ("integration_points", "data_sources", "data_sinks")

    @classmethod
    def from_dict(cls, data: dict) -> "Integrations":
        return cls(
            integration_points=tuple(
                IntegrationPoint.from_dict(p)
                for p in (data.get("integration_points") or ())
            ),
            data_sources=tuple(data.get("data_sources") or ()),
            data_sinks=tuple(data.get("data_sinks") or ()),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "integration_points": [p.to_dict() for p in self.integration_points],
            "data_sources": list(self.data_sources),
            "data_sinks": list(self.data_sinks),
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class AnalysisArtifact:
    """Aggregated structured pipeline model extracted from a description."""

    metadata: AnalysisMetadata
    pipeline_summary: PipelineSummary
    components: tuple = ()
    detailed_flow_structure: FlowStructure = field(default_factory=FlowStructure)
    parameters: ParameterSchema = field(default_factory=ParameterSchema)
    integrations: Integrations = field(default_factory=Integrations)
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "metadata",
        "pipeline_summary",
        "components",
        "detailed_flow_structure",
        "parameters",
        "integrations",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisArtifact":
        return cls(
            metadata=AnalysisMetadata.from_dict(data.get("metadata") or {}),
            pipeline_summary=PipelineSummary.from_dict(data.get("pipeline_summary") or {}),
            components=tuple(
                ComponentSpec.from_dict(c) for c in (data.get("components") or ())
            ),
            detailed_flow_structure=FlowStructure.from_dict(
                data.get("detailed_flow_structure") or {}
            ),
            parameters=ParameterSchema.from_dict(data.get("parameters") or {}),
            integrations=Integrations.from_dict(data.get("integrations") or {}),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "metadata": self.metadata.to_dict(),
            "pipeline_summary": self.pipeline_summary.to_dict(),
            "components": [c.to_dict() for c in self.components],
            "detailed_flow_structure": self.detailed_flow_structure.to_dict(),
            "parameters": self.parameters.to_dict(),
            "integrations": self.integrations.to_dict(),
        }
        out.update(self.extras)
        return out

    def component_ids(self) -> tuple:
        return tuple(c.id for c in self.components)

    def component_by_id(self, component_id: str) -> Optional[ComponentSpec]:
        for component in self.components:
            if component.id == component_id:
                return component
        return None


# --------------------------------------------------------------------------
# workflow spec (schema 1.0)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExecutionEnvironment:
    type: str = "unknown"
    default_docker_network: Optional[str] = None
    extras: dict = field(default_factory=dict)

    _KEYS = ("type", "default_docker_network")

    @classmethod
    def from_dict(cls, data: dict) -> "ExecutionEnvironment":
        return cls(
            type=data.get("type", "unknown"),
            default_docker_network=data.get("default_docker_network"),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out: dict = {"type": self.type}
        if self.default_docker_network is not None:
            out["default_docker_network"] = self.default_docker_network
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class TaskInstance:
    component_type_id: str
    depends_on: tuple = ()
    triggers: tuple = ()
    extras: dict = field(default_factory=dict)

    _KEYS = ("component_type_id", "depends_on", "triggers")

    @classmethod
    def from_dict(cls, data: dict) -> "TaskInstance":
        return cls(
            component_type_id=data.get("component_type_id", ""),
            depends_on=tuple(data.get("depends_on") or ()),
            triggers=tuple(data.get("triggers") or ()),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "component_type_id": self.component_type_id,
            "depends_on": list(self.depends_on),
            "triggers": list(self.triggers),
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class ConstructBody:
    entry_points: tuple = ()
    tasks: dict = field(default_factory=dict)  # task id -> TaskInstance
    extras: dict = field(default_factory=dict)

    _KEYS = ("entry_points", "tasks")

    @classmethod
    def from_dict(cls, data: dict) -> "ConstructBody":
        return cls(
            entry_points=tuple(data.get("entry_points") or ()),
            tasks={
                task_id: TaskInstance.from_dict(t)
                for task_id, t in (data.get("tasks") or {}).items()
            },
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "entry_points": list(self.entry_points),
            "tasks": {task_id: t.to_dict() for task_id, t in self.tasks.items()},
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class FlowConstruct:
    type: str = PARALLEL_FOR_EACH
    instance_parameter: Optional[str] = None
    body: ConstructBody = field(default_factory=ConstructBody)
    depends_on: tuple = ()
    triggers: tuple = ()
    extras: dict = field(default_factory=dict)

    _KEYS = ("type", "instance_parameter", "body", "depends_on", "triggers")

    @classmethod
    def from_dict(cls, data: dict) -> "FlowConstruct":
        return cls(
            type=data.get("type", PARALLEL_FOR_EACH),
            instance_parameter=data.get("instance_parameter"),
            body=ConstructBody.from_dict(data.get("body") or {}),
            depends_on=tuple(data.get("depends_on") or ()),
            triggers=tuple(data.get("triggers") or ()),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        out = {
            "type": self.type,
            "instance_parameter": self.instance_parameter,
            "body": self.body.to_dict(),
            "depends_on": list(self.depends_on),
            "triggers": list(self.triggers),
        }
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class WorkflowGraph:
    entry_points: tuple = ()
    tasks: dict = field(default_factory=dict)  # task id -> TaskInstance
    flow_constructs: dict = field(default_factory=dict)  # id -> FlowConstruct

    @classmethod
    def from_dict(cls, data: dict) -> "WorkflowGraph":
        return cls(
            entry_points=tuple(data.get("entry_points") or ()),
            tasks={
                task_id: TaskInstance.from_dict(t)
                for task_id, t in (data.get("tasks") or {}).items()
            },
            flow_constructs={
                construct_id: FlowConstruct.from_dict(c)
                for construct_id, c in (data.get("flow_constructs") or {}).items()
            },
        )

    def to_dict(self) -> dict:
        return {
            "entry_points": list(self.entry_points),
            "tasks": {task_id: t.to_dict() for task_id, t in self.tasks.items()},
            "flow_constructs": {
                construct_id: c.to_dict()
                for construct_id, c in self.flow_constructs.items()
            },
        }


@dataclass(frozen=True)
class WorkflowSpec:
    """Execution-centric workflow document (YAML, schema 1.0)."""

    pipeline_definition_version: str = WORKFLOW_SCHEMA_VERSION
    pipeline_name: str = ""
    description: str = ""
    metadata: AnalysisMetadata = field(default_factory=AnalysisMetadata)
    execution_environment: ExecutionEnvironment = field(default_factory=ExecutionEnvironment)
    parameters: ParameterSchema = field(default_factory=ParameterSchema)
    component_types: tuple = ()
    integrations: Integrations = field(default_factory=Integrations)
    workflow: WorkflowGraph = field(default_factory=WorkflowGraph)
    extras: dict = field(default_factory=dict)

    _KEYS = (
        "pipeline_definition_version",
        "pipeline_name",
        "description",
        "metadata",
        "execution_environment",
        "parameters",
        "component_types",
        "integrations",
        "workflow",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "WorkflowSpec":
        return cls(
            pipeline_definition_version=data.get("pipeline_definition_version", ""),
            pipeline_name=data.get("pipeline_name", ""),
            description=data.get("description", ""),
            metadata=AnalysisMetadata.from_dict(data.get("metadata") or {}),
            execution_environment=ExecutionEnvironment.from_dict(
                data.get("execution_environment") or {}
            ),
            parameters=ParameterSchema.from_dict(data.get("parameters") or {}),
            component_types=tuple(
                ComponentSpec.from_dict(c) for c in (data.get("component_types") or ())
            ),
            integrations=Integrations.from_dict(data.get("integrations") or {}),
            workflow=WorkflowGraph.from_dict(data.get("workflow") or {}),
            extras=_split_extras(data, cls._KEYS),
        )

    def to_dict(self) -> dict:
        # Key order mirrors the schema declaration order for byte-stable output.
        out = {
            "pipeline_definition_version": self.pipeline_definition_version,
            "pipeline_name": self.pipeline_name,
            "description": self.description,
            "metadata": self.metadata.to_dict(),
            "execution_environment": self.execution_environment.to_dict(),
            "parameters": self.parameters.to_dict(),
            "component_types": [c.to_dict() for c in self.component_types],
            "integrations": self.integrations.to_dict(),
            "workflow": self.workflow.to_dict(),
        }
        out.update(self.extras)
        return out

    def component_type_by_id(self, component_id: str) -> Optional[ComponentSpec]:
        for component in self.component_types:
            if component.id == component_id:
                return component
        return None
