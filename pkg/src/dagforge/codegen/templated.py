"""Deterministic template expansion of a workflow spec into a DAG script."""

from __future__ import annotations

import jinja2

from ..errors import InvalidInputError
from ..ir import WorkflowSpec, validate_workflow
from .base import (
    GeneratedDag,
    GenerationMethod,
    GeneratorConfig,
    RenderPlan,
    build_header,
    build_render_plan,
)
from .filters import FILTERS

SCAFFOLD_TEMPLATE = """\
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
    'retries': {{ retries }},
    'retry_delay': timedelta(minutes=5),
}

with DAG(
    dag_id={{ dag_id | pyrepr }},
    default_args=default_args,
    description={{ description | wrapped_str_arg(4, 'description=') }},
    schedule_interval=None,
    start_date=datetime(2024, 1, 1),
    catchup=False,
) as dag:
"""

OPERATOR_TEMPLATE = """\
    {{ task.task_id }} = DockerOperator(
        task_id={{ task.task_id | pyrepr }},
        image={{ task.image | pyrepr }},
        command={{ task.command | format_command_list(8, 'command=') }},
        environment={{ task.environment | format_environment_dict(8) }},
        network_mode={{ network_mode | pyrepr }},
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )
"""

DEPENDENCIES_TEMPLATE = """\
    # Set dependencies
{{ chains | format_dependency_chains(4) }}
"""

SLOT_MARKER = "    # <<OPERATOR_SLOT:{task_id}>>"

_env = jinja2.Environment(keep_trailing_newline=True, undefined=jinja2.StrictUndefined)
_env.filters.update(FILTERS)

_scaffold = _env.from_string(SCAFFOLD_TEMPLATE)
_operator = _env.from_string(OPERATOR_TEMPLATE)
_dependencies = _env.from_string(DEPENDENCIES_TEMPLATE)


def build_chains(edges) -> list[list[str]]:
    """Group edges into shift chains, following single-successor runs."""
    out_degree: dict[str, int] = {}
    for upstream, _ in edges:
        out_degree[upstream] = out_degree.get(upstream, 0) + 1

    remaining = list(edges)
    used = [False] * len(remaining)
    index_by_upstream: dict[str, list[int]] = {}
    for idx, (upstream, _) in enumerate(remaining):
        index_by_upstream.setdefault(upstream, []).append(idx)

    chains: list[list[str]] = []
    for idx, edge in enumerate(remaining):
        if used[idx]:
            continue
        used[idx] = True
        chain = [edge[0], edge[1]]
        cursor = edge[1]
        while out_degree.get(cursor, 0) == 1:
            candidates = [
                i for i in index_by_upstream.get(cursor, ()) if not used[i]
            ]
            if len(candidates) != 1:
                break
            nxt = candidates[0]
            used[nxt] = True
            chain.append(remaining[nxt][1])
            cursor = remaining[nxt][1]
        chains.append(chain)
    return chains


def render_scaffold(spec: WorkflowSpec, config: GeneratorConfig, retries: int) -> str:
    return _scaffold.render(
        dag_id=spec.pipeline_name,
        description=spec.description,
        retries=retries,
    )


def render_operator(task, network_mode: str) -> str:
    return _operator.render(task=task, network_mode=network_mode)


def render_dependencies(edges) -> str:
    return _dependencies.render(chains=build_chains(edges))


def _spec_retries(spec: WorkflowSpec, default: int) -> int:
    for params in (spec.parameters.global_params, ):
        for name, param in params.items():
            if name in ("retries", "default_retries") and param.default is not None:
                try:
                    return int(param.default)
                except (TypeError, ValueError):
                    continue
    return default


def assemble_script(
    spec: WorkflowSpec,
    config: GeneratorConfig,
    plan: RenderPlan,
    stanza_for_task,
    generator_name: str,
) -> str:
    network_mode = spec.execution_environment.default_docker_network or "bridge"
    source_name = config.source_name or f"{spec.pipeline_name}.workflow.yaml"
    header = build_header(
        generator_name, "Source YAML", source_name, spec.metadata.timestamp
    )
    parts = [header, "\n"]
    parts.append(render_scaffold(spec, config, _spec_retries(spec, config.default_retries)))
    for task in plan.tasks:
        parts.append("\n")
        parts.append(stanza_for_task(task, network_mode))
    if plan.edges:
        parts.append("\n")
        parts.append(render_dependencies(plan.edges))
    return "".join(parts)


def generate_templated(spec: WorkflowSpec, config: GeneratorConfig | None = None) -> GeneratedDag:
    """Render the full script deterministically; equal specs give equal bytes."""
    result = validate_workflow(spec)
    if not result.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in result.errors)
        raise InvalidInputError(f"spec fails validation: {details}")
    config = config or GeneratorConfig()
    generator_name = config.generator_name or "templated_dag_generator"
    plan = build_render_plan(spec, config)
    text = assemble_script(
        spec,
        config,
        plan,
        stanza_for_task=lambda task, network: render_operator(task, network),
        generator_name=generator_name,
    )
    return GeneratedDag(
        source_text=text,
        method=GenerationMethod.TEMPLATED,
        source_spec=config.source_name,
        generated_at=spec.metadata.timestamp,
        warnings=plan.warnings,
    )
