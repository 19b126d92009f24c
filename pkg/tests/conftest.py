"""Shared fixtures: replay gateways, pipeline artifacts, reference scripts."""

from __future__ import annotations

from pathlib import Path

import pytest

from dagforge.analysis import run_analysis
from dagforge.gateway import (
    REPLAY,
    ChatResponse,
    Gateway,
    ProviderConfig,
    TokenLedger,
    count_tokens,
)
from dagforge.harness import REPLAY_EPOCH
from dagforge.ir import (
    AnalysisMetadata,
    ComponentSpec,
    ExecutionEnvironment,
    Integrations,
    ParameterSchema,
    TaskInstance,
    WorkflowGraph,
    WorkflowSpec,
)
from dagforge.transform import transform

REPO = Path(__file__).resolve().parent.parent
CASES_DIR = REPO / "cases"
FIXTURES_DIR = REPO / "fixtures" / "llm"

MODEL = "gpt-4o-mini"
JUDGE_MODEL = "deepseek-chat"

CASE_IDS = (
    "dm_sequential",
    "dm_parallel",
    "dm_task_parallel",
    "multilingual_review",
    "procurement_validation",
)

# Mirrors the worked two-task example script (one loader, one processor).
TWO_TASK_LISTING = """\
# Generated by: step_3_template_based_generation.py
# Source YAML: workflow_example.yaml
# Generated at: 2024-04-22T10:30:00.000000
#==============================================================================

from airflow import DAG
from airflow.providers.docker.operators.docker import DockerOperator
from docker.types import Mount
import os
from datetime import datetime, timedelta

host_data_dir = os.getenv('HOST_DATA_DIR', '/tmp/airflow_data')
container_data_dir = '/app/data'

default_args = {
    'owner': 'airflow',
    'depends_on_past': False,
    'email_on_failure': False,
    'email_on_retry': False,
    'retries': 1,
    'retry_delay': timedelta(minutes=5),
}

with DAG(
    dag_id='example_pipeline',
    default_args=default_args,
    description='Example data processing pipeline',
    schedule_interval=None,
    start_date=datetime(2024, 1, 1),
    catchup=False,
) as dag:

    load_data = DockerOperator(
        task_id='load_data',
        image='loader:latest',
        command=['python', '/app/scripts/load_data.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', '/data'),
            'API_KEY': os.getenv('API_KEY', None)
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir, target=container_data_dir,
                      type='bind')],
        auto_remove=True,
    )

    process_data = DockerOperator(
        task_id='process_data',
        image='processor:latest',
        command=['python', '/app/scripts/process.py'],
        environment={'DATA_DIR': os.getenv('DATA_DIR', '/data')},
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir, target=container_data_dir,
                      type='bind')],
        auto_remove=True,
    )

    # Set dependencies
    load_data >> process_data
"""


class ScriptedGateway:
    """Serves a fixed sequence of response texts; records every call."""

    def __init__(self, responses=(), fail_if_called: bool = False):
        self.responses = list(responses)
        self.fail_if_called = fail_if_called
        self.ledger = TokenLedger()
        self.provider = ProviderConfig(name="scripted")
        self.calls: list = []

    def complete(self, request, stage: str = "default") -> ChatResponse:
        assert not self.fail_if_called, "gateway must not be called"
        self.calls.append((stage, request))
        text = self.responses.pop(0)
        self.ledger.add(
            stage,
            request.model_key,
            count_tokens(request.system_prompt + "\n" + request.user_prompt),
            count_tokens(text),
        )
        return ChatResponse(
            text=text,
            input_tokens=1,
            output_tokens=1,
            provider_reported=False,
        )


def make_replay_gateway(ledger: TokenLedger | None = None) -> Gateway:
    return Gateway(
        provider=ProviderConfig(name="azureopenai"),
        mode=REPLAY,
        fixtures_dir=FIXTURES_DIR,
        ledger=ledger or TokenLedger(),
    )


def replay_case(case_id: str):
    gateway = make_replay_gateway()
    description = (CASES_DIR / f"{case_id}.txt").read_text(encoding="utf-8")
    artifact, report_text = run_analysis(
        description,
        f"{case_id}.txt",
        gateway,
        MODEL,
        provider_name="azureopenai",
        clock=lambda: REPLAY_EPOCH,
    )
    return description, artifact, report_text


def two_task_spec() -> WorkflowSpec:
    components = (
        ComponentSpec(
            id="load_data",
            name="Load Data",
            type="DataLoader",
            description="Loads the input data.",
            inputs=("raw.csv",),
            outputs=("loaded.json",),
            image="loader:latest",
        ),
        ComponentSpec(
            id="process_data",
            name="Process Data",
            type="Transformer",
            description="Processes the loaded data.",
            inputs=("loaded.json",),
            outputs=("processed.json",),
            image="processor:latest",
        ),
    )
    return WorkflowSpec(
        pipeline_definition_version="1.0",
        pipeline_name="example_pipeline",
        description="Example data processing pipeline",
        metadata=AnalysisMetadata(
            analysis_version="1.3",
            timestamp="2024-04-22T10:30:00.000000",
            source_description_file="example.txt",
            llm_provider="azureopenai",
            llm_model_key=MODEL,
        ),
        execution_environment=ExecutionEnvironment(
            type="docker", default_docker_network="app_network"
        ),
        parameters=ParameterSchema(),
        component_types=components,
        integrations=Integrations(),
        workflow=WorkflowGraph(
            entry_points=("load_data",),
            tasks={
                "load_data": TaskInstance(
                    component_type_id="load_data",
                    depends_on=(),
                    triggers=("process_data",),
                ),
                "process_data": TaskInstance(
                    component_type_id="process_data",
                    depends_on=("load_data",),
                    triggers=(),
                ),
            },
        ),
    )


@pytest.fixture(scope="session")
def sequential_case():
    return replay_case("dm_sequential")


@pytest.fixture(scope="session")
def sequential_artifact(sequential_case):
    return sequential_case[1]


@pytest.fixture(scope="session")
def sequential_spec(sequential_artifact):
    return transform(sequential_artifact)


@pytest.fixture(scope="session")
def parallel_case():
    return replay_case("dm_parallel")


@pytest.fixture(scope="session")
def parallel_artifact(parallel_case):
    return parallel_case[1]


@pytest.fixture(scope="session")
def parallel_spec(parallel_artifact):
    return transform(parallel_artifact)
