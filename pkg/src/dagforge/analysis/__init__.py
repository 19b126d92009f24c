"""Staged description analysis (environment, components, flow, parameters, integrations, report)."""

from .chain import (
    BARE_TOKEN,
    JSON_VALUE,
    STAGE_ORDER,
    STAGE_PRIORS,
    AnalysisStage,
    StageOutput,
    extract_payload,
    run_analysis,
    run_stage,
)

__all__ = [
    "BARE_TOKEN",
    "JSON_VALUE",
    "STAGE_ORDER",
    "STAGE_PRIORS",
    "AnalysisStage",
    "StageOutput",
    "extract_payload",
    "run_analysis",
    "run_stage",
]
