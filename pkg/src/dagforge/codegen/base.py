"""Shared pieces of the four DAG generation methods."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..errors import MissingImageError, UnsupportedConstructError
from ..ir import PARALLEL_FOR_EACH, WorkflowSpec

HEADER_RULE = "#" + "=" * 78


class GenerationMethod(str, Enum):
    TEMPLATED = "templated"
    HYBRID = "hybrid"
    LLM_ONLY = "llm_only"
    DIRECT = "direct"


@dataclass(frozen=True)
class GeneratedDag:
    """A generated DAG script plus provenance metadata."""

    source_text: str
    method: GenerationMethod
    source_spec: Optional[str] = None
    generated_at: str = ""
    warnings: tuple = ()
    byte_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "byte_size", len(self.source_text.encode("utf-8")))


def build_header(generator_name: str, source_label: str, source_name: str, generated_at: str) -> str:
    return (
        f"# Generated by: {generator_name}\n"
        f"# {source_label}: {source_name}\n"
        f"# Generated at: {generated_at}\n"
        f"{HEADER_RULE}\n"
    )


@dataclass(frozen=True)
class RenderTask:
    """One concrete operator to render (parallel branches already unrolled)."""

    task_id: str
    component_id: str
    image: str
    command: tuple
    environment: tuple  # ordered ("env", NAME, default) / ("lit", NAME, value)
    instance_index: Optional[int] = None


@dataclass(frozen=True)
class RenderPlan:
    tasks: tuple
    edges: tuple  # (upstream task id, downstream task id), declaration order
    warnings: tuple = ()


@dataclass(frozen=True)
class GeneratorConfig:
    generator_name: str = ""
    source_name: Optional[str] = None
    fallback_image: Optional[str] = None
    default_retries: int = 1


def resolve_instance_count(spec: WorkflowSpec, construct_id: str, parameter: Optional[str]) -> int:
    """Static instance count for a parallel construct, from parameter defaults."""
    if not parameter:
        raise UnsupportedConstructError(
            f"construct {construct_id!r} has no instance parameter; "
            "cannot unroll statically",
            construct=construct_id,
        )
    candidates = []
    env_var = spec.parameters.environment_variables.get(parameter)
    if env_var is not None:
        candidates.append(env_var.default)
    global_param = spec.parameters.global_params.get(parameter)
    if global_param is not None:
        candidates.append(global_param.default)
    for value in candidates:
        if value is None:
            continue
        try:
            count = int(value)
        except (TypeError, ValueError):
            continue
        if count > 0:
            return count
    raise UnsupportedConstructError(
        f"instance parameter {parameter!r} of construct {construct_id!r} "
        "has no usable integer default",
        construct=construct_id,
    )


def _task_environment(spec: WorkflowSpec, component_id: str, instance_index: Optional[int]) -> tuple:
    entries: list = []
    seen: set[str] = set()
    for name, env_var in spec.parameters.environment_variables.items():
        if env_var.associated_component_id in (None, component_id):
            entries.append(("env", name, env_var.default))
            seen.add(name)
    for name, param in spec.parameters.components.get(component_id, {}).items():
        env_name = name.upper()
        if env_name not in seen:
            entries.append(("env", env_name, param.default))
            seen.add(env_name)
    if instance_index is not None:
        entries.append(("lit", "INSTANCE_INDEX", str(instance_index)))
    return tuple(entries)


def _resolve_image(
    spec: WorkflowSpec,
    component_id: str,
    config: GeneratorConfig,
    warnings: list,
) -> str:
    component = spec.component_type_by_id(component_id)
    image = component.image if component is not None else None
    if image:
        return image
    if config.fallback_image:
        warnings.append(
            f"component {component_id!r} has no image; using fallback "
            f"{config.fallback_image!r}"
        )
        return config.fallback_image
    raise MissingImageError(
        f"component {component_id!r} has no image and no fallback is configured",
        component=component_id,
    )


def build_render_plan(spec: WorkflowSpec, config: GeneratorConfig) -> RenderPlan:
    """Flatten tasks and edges, statically unrolling parallel constructs."""
    warnings: list[str] = []
    tasks: list[RenderTask] = []

    # heads/tails of every referable node, used to realize trigger edges at
    # the concrete task level.
    heads: dict[str, list[str]] = {}
    tails: dict[str, list[str]] = {}

    def add_task(task_id: str, component_id: str, instance_index: Optional[int]) -> None:
        image = _resolve_image(spec, component_id, config, warnings)
        tasks.append(
            RenderTask(
                task_id=task_id,
                component_id=component_id,
                image=image,
                command=("python", f"/app/scripts/{component_id}.py"),
                environment=_task_environment(spec, component_id, instance_index),
                instance_index=instance_index,
            )
        )

    for task_id, task in spec.workflow.tasks.items():
        add_task(task_id, task.component_type_id, None)
        heads[task_id] = [task_id]
        tails[task_id] = [task_id]

    for construct_id, construct in spec.workflow.flow_constructs.items():
        if construct.type != PARALLEL_FOR_EACH:
            raise UnsupportedConstructError(
                f"unknown flow construct type {construct.type!r}",
                construct=construct_id,
            )
        count = resolve_instance_count(spec, construct_id, construct.instance_parameter)
        body_ids = list(construct.body.tasks)
        heads[construct_id] = []
        tails[construct_id] = []
        for instance in range(1, count + 1):
            suffix = f"_part{instance}"
            for body_id in body_ids:
                body_task = construct.body.tasks[body_id]
                add_task(body_id + suffix, body_task.component_type_id, instance)
                heads[body_id + suffix] = [body_id + suffix]
                tails[body_id + suffix] = [body_id + suffix]
            entry_ids = construct.body.entry_points or tuple(body_ids[:1])
            terminal_ids = [
                body_id for body_id in body_ids
                if not construct.body.tasks[body_id].triggers
            ] or body_ids[-1:]
            heads[construct_id].extend(entry + suffix for entry in entry_ids)
            tails[construct_id].extend(term + suffix for term in terminal_ids)

    edges: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()

    def add_edges(source: str, target: str) -> None:
        for upstream in tails.get(source, ()):
            for downstream in heads.get(target, ()):
                edge = (upstream, downstream)
                if edge not in seen:
                    seen.add(edge)
                    edges.append(edge)

    def trigger_pairs():
        for task_id, task in spec.workflow.tasks.items():
            for target in task.triggers:
                yield task_id, target
            for source in task.depends_on:
                yield source, task_id
        for construct_id, construct in spec.workflow.flow_constructs.items():
            for target in construct.triggers:
                yield construct_id, target
            for source in construct.depends_on:
                yield source, construct_id
            body_ids = list(construct.body.tasks)
            count = resolve_instance_count(
                spec, construct_id, construct.instance_parameter
            )
            for instance in range(1, count + 1):
                suffix = f"_part{instance}"
                for body_id in body_ids:
                    for target in construct.body.tasks[body_id].triggers:
                        yield body_id + suffix, target + suffix

    for source, target in trigger_pairs():
        add_edges(source, target)

    return RenderPlan(tasks=tuple(tasks), edges=tuple(edges), warnings=tuple(warnings))
