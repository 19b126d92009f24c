"""LLM-backed generation methods against the recorded fixture sessions."""

import pytest

from dagforge.codegen import (
    GeneratorConfig,
    GenerationMethod,
    extract_code_block,
    generate_direct,
    generate_hybrid,
    generate_llm_only,
    generate_templated,
)
from dagforge.errors import (
    GenerationParseError,
    InvalidInputError,
    SlotFillError,
)
from dagforge.evaluation import evaluate
from dagforge.gateway import RECORD, REPLAY, Gateway, ProviderConfig, TokenLedger
from dagforge.graphs import parse_dag_source
from dagforge.ir import WorkflowSpec

from conftest import MODEL, ScriptedGateway, make_replay_gateway, two_task_spec

GEN_CONFIG = GeneratorConfig(source_name="workflow.yaml", fallback_image="python:3.11-slim")


# -- code extraction ------------------------------------------------------------


def test_extract_code_block_prefers_largest_fence():
    text = "```python\nshort = 1\n```\nmore\n```python\nlonger = 1\nlonger_still = 2\n```"
    assert extract_code_block(text) == "longer = 1\nlonger_still = 2"


def test_extract_code_block_handles_unterminated_fence():
    text = "prose\n```python\nx = DockerOperator(\n    task_id='x',"
    assert extract_code_block(text) == "x = DockerOperator(\n    task_id='x',"


def test_extract_code_block_empty_without_fence():
    assert extract_code_block("no code at all") == ""


# -- llm_only --------------------------------------------------------------------


def test_llm_only_replay_produces_five_tasks(sequential_spec):
    gateway = make_replay_gateway()
    dag = generate_llm_only(sequential_spec, gateway, MODEL, GEN_CONFIG)
    assert dag.method is GenerationMethod.LLM_ONLY
    graph = parse_dag_source(dag.source_text)
    assert len(graph.tasks) == 5
    assert len(graph.edges) == 4
    lines = dag.source_text.splitlines()
    assert lines[0].startswith("# Generated by: ")
    assert evaluate(dag).loadable == 1


def test_llm_only_fenced_responses_are_stripped(sequential_spec):
    gateway = make_replay_gateway()
    dag = generate_llm_only(sequential_spec, gateway, MODEL, GEN_CONFIG)
    assert "```" not in dag.source_text


def test_llm_only_rejects_empty_spec_before_any_call():
    spec = two_task_spec()
    data = spec.to_dict()
    data["workflow"]["tasks"] = {}
    data["workflow"]["entry_points"] = []
    gateway = ScriptedGateway(fail_if_called=True)
    with pytest.raises(InvalidInputError):
        generate_llm_only(WorkflowSpec.from_dict(data), gateway, MODEL, GEN_CONFIG)


def test_llm_only_phase_parse_failure_after_retry():
    gateway = ScriptedGateway(["", ""])
    with pytest.raises(GenerationParseError):
        generate_llm_only(two_task_spec(), gateway, MODEL, GEN_CONFIG)
    assert len(gateway.calls) == 2


# -- hybrid ---------------------------------------------------------------------


def test_hybrid_scaffold_matches_templated_outside_stanzas(sequential_spec):
    gateway = make_replay_gateway()
    hybrid = generate_hybrid(sequential_spec, gateway, MODEL, GEN_CONFIG)
    templated = generate_templated(sequential_spec, GEN_CONFIG)

    hybrid_text = hybrid.source_text.replace(
        "# Generated by: hybrid_dag_generator",
        "# Generated by: templated_dag_generator",
    )
    marker = ") as dag:\n"
    hybrid_prefix = hybrid_text.split(marker)[0]
    templated_prefix = templated.source_text.split(marker)[0]
    assert hybrid_prefix == templated_prefix

    dep_marker = "    # Set dependencies\n"
    assert hybrid_text.split(dep_marker)[1] == templated.source_text.split(dep_marker)[1]

    # interiors differ: the recorded stanzas carry an extra argument
    assert "mount_tmp_dir=False," in hybrid.source_text
    assert "mount_tmp_dir" not in templated.source_text
    assert hybrid.method is GenerationMethod.HYBRID
    assert evaluate(hybrid).loadable == 1
    graph = parse_dag_source(hybrid.source_text)
    assert len(graph.tasks) == 5


def test_hybrid_unbalanced_slot_reply_names_the_task():
    replies = ["load_data = DockerOperator(", "load_data = DockerOperator("]
    gateway = ScriptedGateway(replies)
    with pytest.raises(SlotFillError) as err:
        generate_hybrid(two_task_spec(), gateway, MODEL, GEN_CONFIG)
    assert err.value.context["task_id"] == "load_data"


def test_hybrid_rejects_zero_slot_spec():
    spec = two_task_spec()
    data = spec.to_dict()
    data["workflow"]["tasks"] = {}
    data["workflow"]["entry_points"] = []
    gateway = ScriptedGateway(fail_if_called=True)
    with pytest.raises(InvalidInputError):
        generate_hybrid(WorkflowSpec.from_dict(data), gateway, MODEL, GEN_CONFIG)


# -- direct ----------------------------------------------------------------------


def test_direct_replay_stores_fixture_payload_verbatim():
    gateway = make_replay_gateway()
    description = open("cases/dm_sequential.txt").read()
    dag = generate_direct(
        description,
        gateway,
        MODEL,
        source_name="dm_sequential.txt",
        clock=lambda: "2025-01-01T00:00:00.000000",
    )
    assert dag.method is GenerationMethod.DIRECT
    lines = dag.source_text.splitlines()
    assert lines[0].startswith("# Generated by: ")
    assert lines[1].startswith("# Source description: ")
    assert lines[2].startswith("# Generated at: ")
    header_end = dag.source_text.index("\n\n") + 2
    body = dag.source_text[header_end:]

    # the body must be byte-identical to the fixture's fenced payload
    from dagforge.gateway import ChatRequest
    from dagforge.codegen.llm import DIRECT_SYSTEM_PROMPT

    fixture = gateway._load_fixture(
        ChatRequest(
            system_prompt=DIRECT_SYSTEM_PROMPT,
            user_prompt=description,
            model_key=MODEL,
        )
    )
    assert body == extract_code_block(fixture.text) + "\n"
    assert evaluate(dag).loadable == 1


def test_direct_without_code_block_fails():
    gateway = ScriptedGateway(["There is no code here, sorry."])
    with pytest.raises(GenerationParseError):
        generate_direct("some description", gateway, MODEL)


def test_direct_empty_description_rejected():
    gateway = ScriptedGateway(fail_if_called=True)
    with pytest.raises(InvalidInputError):
        generate_direct("   ", gateway, MODEL)


def test_direct_truncated_fixture_fails_loadability_gate(tmp_path):
    truncated = (
        "```python\n"
        "from airflow import DAG\n"
        "from airflow.providers.docker.operators.docker import DockerOperator\n"
        "\n"
        "with DAG(dag_id='truncated_pipeline') as dag:\n"
        "    load_data = DockerOperator(\n"
        "        task_id='load_data',\n"
        "        image='loader:la"
    )

    def transport(url, payload, headers, timeout):
        return {"choices": [{"message": {"content": truncated}}]}

    recorder = Gateway(
        provider=ProviderConfig(name="stub"),
        mode=RECORD,
        fixtures_dir=tmp_path,
        ledger=TokenLedger(),
        transport=transport,
    )
    dag = generate_direct("truncated pipeline description", recorder, MODEL)
    assert dag.source_text  # artifact produced despite truncation

    report = evaluate(dag)
    assert report.loadable == 0
    assert (report.sat, report.dst, report.pct) == (0.0, 0.0, 0.0)
    assert report.penalized
