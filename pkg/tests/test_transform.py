"""Deterministic artifact-to-workflow transform and YAML serialization."""

import random

import pytest

from dagforge.errors import InvalidInputError
from dagforge.ir import (
    AnalysisArtifact,
    parse_workflow,
    serialize_workflow_dict,
    validate_workflow,
)
from dagforge.transform import serialize_workflow, transform

from genutils import random_artifact


def edge_symmetry_holds(spec) -> bool:
    graph = spec.workflow
    nodes = {**graph.tasks, **graph.flow_constructs}
    for node_id, node in nodes.items():
        for dep in node.depends_on:
            if node_id not in nodes[dep].triggers:
                return False
        for target in node.triggers:
            if node_id not in nodes[target].depends_on:
                return False
    return True


def test_sequential_artifact_transforms_to_linear_chain(sequential_spec):
    tasks = sequential_spec.workflow.tasks
    assert len(tasks) == 5
    assert sequential_spec.workflow.flow_constructs == {}
    order = list(tasks)
    for idx, task_id in enumerate(order):
        task = tasks[task_id]
        assert task.depends_on == ((order[idx - 1],) if idx > 0 else ())
        assert task.triggers == ((order[idx + 1],) if idx < 4 else ())
    assert sequential_spec.pipeline_definition_version == "1.0"
    assert sequential_spec.workflow.entry_points == ("load_and_modify_data",)


def test_metadata_parameters_integrations_copied_verbatim(
    sequential_artifact, sequential_spec
):
    assert sequential_spec.metadata == sequential_artifact.metadata
    assert sequential_spec.parameters == sequential_artifact.parameters
    assert sequential_spec.integrations == sequential_artifact.integrations
    assert sequential_spec.component_types == sequential_artifact.components
    assert sequential_spec.pipeline_name == sequential_artifact.pipeline_summary.name


def test_docker_network_extracted_from_parameters(sequential_spec):
    env = sequential_spec.execution_environment
    assert env.type == "docker"
    assert env.default_docker_network == "app_network"


def test_docker_network_absent_without_network_parameter():
    rng = random.Random(123)
    artifact = random_artifact(rng)
    data = artifact.to_dict()
    data["parameters"]["global"].pop("docker_network", None)
    data["parameters"]["environment_variables"] = {
        k: v
        for k, v in data["parameters"]["environment_variables"].items()
        if "network" not in k.lower()
    }
    spec = transform(AnalysisArtifact.from_dict(data))
    assert spec.execution_environment.default_docker_network is None
    assert "default_docker_network" not in spec.to_dict()["execution_environment"]


def test_parallel_block_becomes_flow_construct(parallel_spec):
    assert set(parallel_spec.workflow.tasks) == {
        "split_dataset",
        "wait_for_all_chunks",
        "concatenate_results",
    }
    constructs = parallel_spec.workflow.flow_constructs
    assert len(constructs) == 1
    construct = constructs["parallel_enrichment_branches"]
    assert construct.type == "parallel_for_each"
    assert construct.instance_parameter == "NUM_PARALLEL_PROCESSES"
    assert construct.depends_on == ("split_dataset",)
    assert construct.triggers == ("wait_for_all_chunks",)
    assert len(construct.body.tasks) == 5
    assert construct.body.entry_points == ("load_and_modify_data",)
    body_order = list(construct.body.tasks)
    assert construct.body.tasks[body_order[0]].depends_on == ()
    assert construct.body.tasks[body_order[-1]].triggers == ()


def test_singleton_artifact_yields_single_task():
    artifact = AnalysisArtifact.from_dict(
        {
            "metadata": {
                "analysis_version": "1.3",
                "timestamp": "2025-01-01T00:00:00.000000",
                "source_description_file": "one.txt",
                "llm_provider": "stub",
                "llm_model_key": "stub",
            },
            "pipeline_summary": {
                "name": "solo_analysis",
                "description": "One step.",
                "execution_environment": "docker",
                "flow_pattern_summary": "Sequential flow with 1 components",
            },
            "components": [
                {
                    "id": "solo",
                    "name": "Solo",
                    "type": "DataLoader",
                    "description": "d",
                    "inputs": [],
                    "outputs": [],
                    "image": "solo:latest",
                    "is_internally_parallelized": False,
                }
            ],
            "detailed_flow_structure": {
                "entry_points": ["solo"],
                "nodes": {"solo": {"type": "DataLoader", "next_nodes": []}},
                "parallel_blocks": {},
            },
            "parameters": {
                "global": {},
                "components": {},
                "environment_variables": {},
            },
            "integrations": {
                "integration_points": [],
                "data_sources": [],
                "data_sinks": [],
            },
        }
    )
    spec = transform(artifact)
    assert list(spec.workflow.tasks) == ["solo"]
    task = spec.workflow.tasks["solo"]
    assert task.depends_on == () and task.triggers == ()


def test_invalid_artifact_rejected(sequential_artifact):
    data = sequential_artifact.to_dict()
    data["components"] = []
    with pytest.raises(InvalidInputError):
        transform(AnalysisArtifact.from_dict(data))


def test_serialization_deterministic_and_versioned(sequential_spec):
    first = serialize_workflow(sequential_spec)
    second = serialize_workflow(sequential_spec)
    assert first == second
    assert first.startswith('pipeline_definition_version: "1.0"\n')
    assert first.endswith("\n")
    assert "\r" not in first


def test_serialize_rejects_invalid_spec(sequential_spec):
    data = sequential_spec.to_dict()
    data["pipeline_definition_version"] = "9.9"
    broken = parse_workflow(serialize_workflow_dict(data))
    with pytest.raises(InvalidInputError):
        serialize_workflow(broken)


def test_edge_symmetry_and_preservation_on_random_artifacts():
    rng = random.Random(2024)
    for _ in range(60):
        artifact = random_artifact(rng)
        spec = transform(artifact)
        assert validate_workflow(spec).ok
        assert edge_symmetry_holds(spec)
        assert {c.id for c in spec.component_types} == {
            c.id for c in artifact.components
        }
        assert set(spec.parameters.global_params) == set(
            artifact.parameters.global_params
        )
        for name, p in artifact.parameters.global_params.items():
            assert spec.parameters.global_params[name].default == p.default
        assert [p.id for p in spec.integrations.integration_points] == [
            p.id for p in artifact.integrations.integration_points
        ]
        text = serialize_workflow(spec)
        assert parse_workflow(text).to_dict() == spec.to_dict()
