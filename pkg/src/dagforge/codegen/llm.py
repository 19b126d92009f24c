"""LLM-backed DAG generation: chained synthesis, template-guided fill, direct."""

from __future__ import annotations

import ast
import re
import textwrap
from datetime import datetime, timezone
from typing import Callable, Optional

from ..errors import GenerationParseError, InvalidInputError, SlotFillError
from ..gateway import ChatRequest, Gateway
from ..ir import WorkflowSpec, validate_workflow
from .base import (
    GeneratedDag,
    GenerationMethod,
    GeneratorConfig,
    build_header,
    build_render_plan,
)
from .templated import (
    SLOT_MARKER,
    assemble_script,
    render_operator,
)

BOILERPLATE_SYSTEM_PROMPT = """\
You are an expert Airflow DAG developer. Generate the Python DAG
boilerplate including imports, global variables, and DAG instantiation.

Include these standard imports:
- from airflow import DAG
- from airflow.providers.docker.operators.docker import DockerOperator
- from docker.types import Mount
- import os
- from datetime import datetime, timedelta

Define these global variables:
- host_data_dir = os.getenv('HOST_DATA_DIR', '/tmp/airflow_data')
- container_data_dir = '/app/data'
"""

OPERATOR_SYSTEM_PROMPT = """\
Generate a DockerOperator instantiation following this pattern:

task_name = DockerOperator(
    task_id='task_name',
    image='image:tag',
    command=[...],
    environment={...},
    network_mode='bridge',
    mounts=[Mount(source=host_data_dir, target=container_data_dir, type='bind')],
    # Standard parameters...
)
"""

DEPENDENCY_SYSTEM_PROMPT = """\
You are an expert Airflow DAG developer. Translate the listed workflow edges
into Airflow dependency statements using the >> operator, one statement per
line, referencing the task variable names exactly as given. Output ONLY
Python code.
"""

# Fixed instruction for the single-step baseline; versioned so baseline runs
# stay comparable.
DIRECT_SYSTEM_PROMPT_VERSION = "1.0"
DIRECT_SYSTEM_PROMPT = """\
You are an expert Airflow DAG developer. Generate a complete, executable
Apache Airflow DAG script in Python that implements the data pipeline
described by the user. Use DockerOperator for containerized tasks, declare
all task dependencies, and output the full script in a single Python code
block.
"""

RETRY_SUFFIX = (
    "\n\nIMPORTANT: Your previous response could not be used. "
    "Reply again with ONLY the requested Python code."
)

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n(.*?)(?:```|\Z)", re.DOTALL)


def _now_stamp() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).strftime(
        "%Y-%m-%dT%H:%M:%S.%f"
    )


def extract_code_block(text: str) -> str:
    """Largest fenced code block; an unterminated fence runs to end of text."""
    blocks = [match.group(1) for match in _FENCE_RE.finditer(text)]
    if not blocks:
        return ""
    return max(blocks, key=len).strip("\n")


def _strip_or_whole(text: str) -> str:
    block = extract_code_block(text)
    return block if block else text.strip()


def _parses(code: str) -> bool:
    try:
        ast.parse(textwrap.dedent(code))
    except SyntaxError:
        return False
    return True


def _parses_as_prelude(code: str) -> bool:
    # A boilerplate block may legitimately end with an open `with ... as dag:`
    # header whose body arrives in later phases.
    if _parses(code):
        return True
    return _parses(textwrap.dedent(code) + "\n    pass")


def _phase_completion(
    gateway: Gateway,
    request: ChatRequest,
    stage: str,
    validate: Callable[[str], bool],
    failure: str,
) -> tuple[str, bool]:
    """One completion with a single corrective retry; returns (code, retried)."""
    response = gateway.complete(request, stage=stage)
    code = _strip_or_whole(response.text)
    if code and validate(code):
        return code, False
    retry = ChatRequest(
        system_prompt=request.system_prompt,
        user_prompt=request.user_prompt + RETRY_SUFFIX,
        model_key=request.model_key,
    )
    response = gateway.complete(retry, stage=stage)
    code = _strip_or_whole(response.text)
    if code and validate(code):
        return code, True
    raise GenerationParseError(failure)


def _require_valid_spec(spec: WorkflowSpec) -> None:
    result = validate_workflow(spec)
    if not result.ok:
        details = "; ".join(f"{i.code}@{i.path}" for i in result.errors)
        raise InvalidInputError(f"spec fails validation: {details}")


def _indent_into_dag(boilerplate: str, blocks: list[str]) -> str:
    """Splice code blocks after the boilerplate, indenting into the DAG body."""
    trailing = boilerplate.rstrip("\n")
    inside_with = bool(re.search(r"with\s+DAG\s*\(", trailing)) and trailing.endswith(
        "as dag:"
    )
    parts = [trailing, ""]
    for block in blocks:
        text = textwrap.dedent(block).strip("\n")
        if inside_with:
            text = textwrap.indent(text, "    ")
        parts.append(text)
        parts.append("")
    return "\n".join(parts).rstrip("\n") + "\n"


def generate_llm_only(
    spec: WorkflowSpec,
    gateway: Gateway,
    model_key: str,
    config: Optional[GeneratorConfig] = None,
) -> GeneratedDag:
    """Three chained completions: boilerplate, one stanza per task, dependencies."""
    _require_valid_spec(spec)
    config = config or GeneratorConfig()
    plan = build_render_plan(spec, config)
    if not plan.tasks:
        raise InvalidInputError("spec declares no tasks; nothing to generate")

    warnings = list(plan.warnings)

    boiler_request = ChatRequest(
        system_prompt=BOILERPLATE_SYSTEM_PROMPT,
        user_prompt=(
            "Generate DAG configuration for:\n"
            f"DAG ID: {spec.pipeline_name!r}\n"
            f"Description: {spec.description!r}\n"
            "Schedule: None"
        ),
        model_key=model_key,
    )
    boilerplate, retried = _phase_completion(
        gateway,
        boiler_request,
        stage="step3:boilerplate",
        validate=_parses_as_prelude,
        failure="boilerplate phase yielded no usable code after retry",
    )
    if retried:
        warnings.append("boilerplate phase needed a parse retry")

    network_mode = spec.execution_environment.default_docker_network or "bridge"
    stanzas: list[str] = []
    for task in plan.tasks:
        env_names = ", ".join(entry[1] for entry in task.environment) or "none"
        request = ChatRequest(
            system_prompt=OPERATOR_SYSTEM_PROMPT,
            user_prompt=(
                f"Generate operator for task {task.task_id!r} with image "
                f"{task.image!r} and environment variables: {env_names}.\n"
                f"Use network_mode {network_mode!r} and assign the operator "
                f"to a variable named {task.task_id}."
            ),
            model_key=model_key,
        )
        stanza, retried = _phase_completion(
            gateway,
            request,
            stage="step3:operators",
            validate=_parses,
            failure=f"operator phase for task {task.task_id!r} yielded no usable code",
        )
        if retried:
            warnings.append(f"operator phase for {task.task_id!r} needed a parse retry")
        stanzas.append(stanza)

    edge_lines = "\n".join(f"{u} -> {d}" for u, d in plan.edges) or "none"
    dep_request = ChatRequest(
        system_prompt=DEPENDENCY_SYSTEM_PROMPT,
        user_prompt=(
            "Task variables: "
            + ", ".join(t.task_id for t in plan.tasks)
            + "\nEdges:\n"
            + edge_lines
        ),
        model_key=model_key,
    )
    dependencies, retried = _phase_completion(
        gateway,
        dep_request,
        stage="step3:dependencies",
        validate=_parses,
        failure="dependency phase yielded no usable code after retry",
    )
    if retried:
        warnings.append("dependency phase needed a parse retry")

    source_name = config.source_name or f"{spec.pipeline_name}.workflow.yaml"
    header = build_header(
        config.generator_name or "llm_chain_dag_generator",
        "Source YAML",
        source_name,
        spec.metadata.timestamp,
    )
    body = _indent_into_dag(boilerplate, stanzas + [dependencies])
    return GeneratedDag(
        source_text=header + "\n" + body,
        method=GenerationMethod.LLM_ONLY,
        source_spec=config.source_name,
        generated_at=spec.metadata.timestamp,
        warnings=tuple(warnings),
    )


def _slot_reply_valid(code: str, task_id: str) -> bool:
    # Slot-local closure: the reply must parse on its own and be a single
    # assignment to the slot's task variable.
    try:
        tree = ast.parse(textwrap.dedent(code))
    except SyntaxError:
        return False
    if len(tree.body) != 1 or not isinstance(tree.body[0], ast.Assign):
        return False
    targets = tree.body[0].targets
    return (
        len(targets) == 1
        and isinstance(targets[0], ast.Name)
        and targets[0].id == task_id
    )


def generate_hybrid(
    spec: WorkflowSpec,
    gateway: Gateway,
    model_key: str,
    config: Optional[GeneratorConfig] = None,
) -> GeneratedDag:
    """Template scaffold with operator stanzas filled one slot per completion."""
    _require_valid_spec(spec)
    config = config or GeneratorConfig()
    plan = build_render_plan(spec, config)
    if not plan.tasks:
        raise InvalidInputError("spec declares no tasks; nothing to fill")

    warnings = list(plan.warnings)
    network_mode = spec.execution_environment.default_docker_network or "bridge"

    scaffold = assemble_script(
        spec,
        config,
        plan,
        stanza_for_task=lambda task, network: SLOT_MARKER.format(task_id=task.task_id)
        + "\n",
        generator_name=config.generator_name or "hybrid_dag_generator",
    )

    text = scaffold
    for task in plan.tasks:
        reference = render_operator(task, network_mode)
        env_names = ", ".join(entry[1] for entry in task.environment) or "none"
        request = ChatRequest(
            system_prompt=OPERATOR_SYSTEM_PROMPT,
            user_prompt=(
                f"Generate operator for task {task.task_id!r} with image "
                f"{task.image!r} and environment variables: {env_names}.\n"
                f"Assign the operator to a variable named {task.task_id} and "
                f"set network_mode={network_mode!r}.\n"
                "Surrounding scaffold for context:\n"
                f"{reference}"
            ),
            model_key=model_key,
        )

        marker = SLOT_MARKER.format(task_id=task.task_id)
        try:
            stanza, retried = _phase_completion(
                gateway,
                request,
                stage="step3:slots",
                validate=lambda code, tid=task.task_id: _slot_reply_valid(code, tid),
                failure=f"slot for task {task.task_id!r} failed local validation",
            )
        except GenerationParseError as exc:
            raise SlotFillError(str(exc), task_id=task.task_id) from exc
        if retried:
            warnings.append(f"slot for {task.task_id!r} needed a retry")
        block = textwrap.indent(textwrap.dedent(stanza).strip("\n"), "    ")
        text = text.replace(marker, block)

    return GeneratedDag(
        source_text=text,
        method=GenerationMethod.HYBRID,
        source_spec=config.source_name,
        generated_at=spec.metadata.timestamp,
        warnings=tuple(warnings),
    )


def generate_direct(
    description: str,
    gateway: Gateway,
    model_key: str,
    source_name: str = "description.txt",
    clock: Callable[[], str] = _now_stamp,
) -> GeneratedDag:
    """Single-step baseline: one completion, fence stripping only, no repair."""
    if not description.strip():
        raise InvalidInputError("description is empty")

    request = ChatRequest(
        system_prompt=DIRECT_SYSTEM_PROMPT,
        user_prompt=description,
        model_key=model_key,
    )
    response = gateway.complete(request, stage="step3:direct")
    code = extract_code_block(response.text)
    if not code:
        raise GenerationParseError("response contains no code block")

    generated_at = clock()
    header = build_header(
        "direct_dag_generator", "Source description", source_name, generated_at
    )
    return GeneratedDag(
        source_text=header + "\n" + code + "\n",
        method=GenerationMethod.DIRECT,
        source_spec=source_name,
        generated_at=generated_at,
    )
