"""DAG script generation: templated, hybrid, LLM-chained, and direct methods."""

from .base import (
    GeneratedDag,
    GenerationMethod,
    GeneratorConfig,
    RenderPlan,
    RenderTask,
    build_header,
    build_render_plan,
)
from .filters import (
    format_command_list,
    format_dependency_chains,
    format_environment_dict,
)
from .llm import (
    DIRECT_SYSTEM_PROMPT,
    extract_code_block,
    generate_direct,
    generate_hybrid,
    generate_llm_only,
)
from .templated import SLOT_MARKER, build_chains, generate_templated

__all__ = [
    "DIRECT_SYSTEM_PROMPT",
    "SLOT_MARKER",
    "GeneratedDag",
    "GenerationMethod",
    "GeneratorConfig",
    "RenderPlan",
    "RenderTask",
    "build_chains",
    "build_header",
    "build_render_plan",
    "extract_code_block",
    "format_command_list",
    "format_dependency_chains",
    "format_environment_dict",
    "generate_direct",
    "generate_hybrid",
    "generate_llm_only",
    "generate_templated",
]
