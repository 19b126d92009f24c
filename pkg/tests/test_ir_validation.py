"""Schema validation and round-trip behavior of both IR documents."""

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagforge.ir import (
    AnalysisArtifact,
    dumps_analysis,
    loads_analysis,
    parse_workflow,
    serialize_workflow_dict,
    validate_analysis,
    validate_workflow,
)
from dagforge.transform import serialize_workflow, transform

from genutils import random_artifact


def mutate(artifact: AnalysisArtifact, **changes) -> AnalysisArtifact:
    data = artifact.to_dict()
    for path, value in changes.items():
        cursor = data
        parts = path.split(".")
        for part in parts[:-1]:
            cursor = cursor[part]
        cursor[parts[-1]] = value
    return AnalysisArtifact.from_dict(data)


def test_replayed_artifact_validates_ok(sequential_artifact):
    result = validate_analysis(sequential_artifact)
    assert result.ok, result.issues
    assert sequential_artifact.metadata.analysis_version == "1.3"


def test_empty_components_rejected(sequential_artifact):
    broken = mutate(sequential_artifact, components=[])
    result = validate_analysis(broken)
    assert not result.ok
    assert "EMPTY_COMPONENTS" in result.codes()


def test_dangling_flow_ref_flagged_once(sequential_artifact):
    data = sequential_artifact.to_dict()
    data["detailed_flow_structure"]["nodes"]["save_final_data"]["next_nodes"] = [
        "ghost_task"
    ]
    result = validate_analysis(AnalysisArtifact.from_dict(data))
    dangling = [i for i in result.issues if i.code == "DANGLING_FLOW_REF"]
    assert len(dangling) == 1
    assert dangling[0].path.startswith("detailed_flow_structure.nodes")
    assert not result.ok


def test_unknown_component_type_rejected(sequential_artifact):
    data = sequential_artifact.to_dict()
    data["components"][0]["type"] = "Widget"
    result = validate_analysis(AnalysisArtifact.from_dict(data))
    assert "UNKNOWN_COMPONENT_TYPE" in result.codes()
    # the flow node now disagrees with the (unknown) type as well
    assert not result.ok


def test_other_type_is_warning_only(sequential_artifact):
    data = sequential_artifact.to_dict()
    data["components"][4]["type"] = "Other"
    data["detailed_flow_structure"]["nodes"]["save_final_data"]["type"] = "Other"
    result = validate_analysis(AnalysisArtifact.from_dict(data))
    assert result.ok
    assert "OTHER_COMPONENT_TYPE" in result.codes()


def test_invalid_environment_rejected(sequential_artifact):
    broken = mutate(
        sequential_artifact, **{"pipeline_summary.execution_environment": "mainframe"}
    )
    result = validate_analysis(broken)
    assert "INVALID_ENVIRONMENT" in result.codes()


def test_transformed_workflow_validates_ok(sequential_spec):
    result = validate_workflow(sequential_spec)
    assert result.ok, result.issues


def test_workflow_self_dependency_rejected(sequential_spec):
    data = sequential_spec.to_dict()
    data["workflow"]["tasks"]["load_and_modify_data"]["depends_on"] = [
        "load_and_modify_data"
    ]
    result = validate_workflow(parse_workflow(serialize_workflow_dict(data)))
    assert "SELF_DEPENDENCY" in result.codes()


def test_workflow_version_mismatch_rejected(sequential_spec):
    data = sequential_spec.to_dict()
    data["pipeline_definition_version"] = "2.0"
    result = validate_workflow(parse_workflow(serialize_workflow_dict(data)))
    assert "UNSUPPORTED_VERSION" in result.codes()


def test_validation_is_deterministic(sequential_artifact):
    first = validate_analysis(sequential_artifact)
    second = validate_analysis(sequential_artifact)
    assert first == second


def test_unknown_fields_preserved_but_ignored(sequential_artifact):
    data = sequential_artifact.to_dict()
    data["x_vendor_extension"] = {"custom": True}
    data["metadata"]["x_trace_id"] = "abc123"
    artifact = AnalysisArtifact.from_dict(data)
    assert validate_analysis(artifact).ok
    round_tripped = loads_analysis(dumps_analysis(artifact)).to_dict()
    assert round_tripped["x_vendor_extension"] == {"custom": True}
    assert round_tripped["metadata"]["x_trace_id"] == "abc123"


def test_optional_fields_serialize_as_null():
    rng = random.Random(7)
    artifact = random_artifact(rng)
    data = json.loads(dumps_analysis(artifact))
    assert all("image" in c for c in data["components"])
    text = dumps_analysis(artifact)
    if any(c.image is None for c in artifact.components):
        assert '"image": null' in text


def test_json_round_trip_structural_equality(sequential_artifact):
    text = dumps_analysis(sequential_artifact)
    assert loads_analysis(text).to_dict() == sequential_artifact.to_dict()


def test_yaml_round_trip_structural_equality(sequential_spec):
    text = serialize_workflow(sequential_spec)
    assert parse_workflow(text).to_dict() == sequential_spec.to_dict()


def test_yaml_serialization_idempotent(sequential_spec):
    once = serialize_workflow(sequential_spec)
    again = serialize_workflow(parse_workflow(once))
    assert once == again


def test_yaml_emitter_handles_awkward_shapes():
    import yaml as pyyaml

    document = {
        "items": [
            {"nested": {"url": "http://x", "port": 3003}, "id": "first"},
            {"sequence": ["a", "b"], "empty_map": {}, "empty_list": []},
            [["deep", "list"], "tail"],
            "plain",
            None,
            True,
            2.5,
        ],
        "tricky keys": {"on": "quoted", "1.0": "also quoted", "UPPER_NAME": 1},
        "strings": {"versionish": "1.0", "multi": "line one\nline two"},
    }
    text = serialize_workflow_dict(document)
    assert pyyaml.safe_load(text) == document
    # string values stay strings and booleans stay booleans on reparse
    reparsed = pyyaml.safe_load(text)
    assert reparsed["strings"]["versionish"] == "1.0"
    assert reparsed["items"][5] is True


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_random_valid_artifacts_validate_ok(seed):
    artifact = random_artifact(random.Random(seed))
    result = validate_analysis(artifact)
    assert result.ok, result.issues


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), data=st.data())
def test_deleting_referenced_component_breaks_validation(seed, data):
    artifact = random_artifact(random.Random(seed))
    index = data.draw(
        st.integers(min_value=0, max_value=len(artifact.components) - 1)
    )
    raw = artifact.to_dict()
    del raw["components"][index]
    result = validate_analysis(AnalysisArtifact.from_dict(raw))
    assert not result.ok


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_transformed_random_artifacts_validate_ok(seed):
    artifact = random_artifact(random.Random(seed))
    spec = transform(artifact)
    assert validate_workflow(spec).ok
