"""Intermediate representations: analysis artifact (JSON) and workflow spec (YAML)."""

from .io import (
    dumps_analysis,
    loads_analysis,
    parse_workflow,
    serialize_workflow_dict,
)
from .types import (
    ANALYSIS_SCHEMA_VERSION,
    COMPONENT_TYPE_NAMES,
    EXECUTION_ENVIRONMENTS,
    INTEGRATION_DIRECTIONS,
    PARALLEL_FOR_EACH,
    PARAM_TYPES,
    WORKFLOW_SCHEMA_VERSION,
    AnalysisArtifact,
    AnalysisMetadata,
    ComponentSpec,
    ComponentType,
    ConstructBody,
    EnvVarDef,
    ExecutionEnvironment,
    FlowConstruct,
    FlowNode,
    FlowStructure,
    IntegrationPoint,
    Integrations,
    ParallelBlock,
    ParamDef,
    ParameterSchema,
    PipelineSummary,
    TaskInstance,
    WorkflowGraph,
    WorkflowSpec,
)
from .validation import (
    ValidationIssue,
    ValidationResult,
    validate_analysis,
    validate_workflow,
)

__all__ = [
    "ANALYSIS_SCHEMA_VERSION",
    "COMPONENT_TYPE_NAMES",
    "EXECUTION_ENVIRONMENTS",
    "INTEGRATION_DIRECTIONS",
    "PARALLEL_FOR_EACH",
    "PARAM_TYPES",
    "WORKFLOW_SCHEMA_VERSION",
    "AnalysisArtifact",
    "AnalysisMetadata",
    "ComponentSpec",
    "ComponentType",
    "ConstructBody",
    "EnvVarDef",
    "ExecutionEnvironment",
    "FlowConstruct",
    "FlowNode",
    "FlowStructure",
    "IntegrationPoint",
    "Integrations",
    "ParallelBlock",
    "ParamDef",
    "ParameterSchema",
    "PipelineSummary",
    "TaskInstance",
    "ValidationIssue",
    "ValidationResult",
    "WorkflowGraph",
    "WorkflowSpec",
    "dumps_analysis",
    "loads_analysis",
    "parse_workflow",
    "serialize_workflow_dict",
    "validate_analysis",
    "validate_workflow",
]
