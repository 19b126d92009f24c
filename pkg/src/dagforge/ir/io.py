"""Serialization for the two IR documents.

The analysis artifact travels as JSON (UTF-8, 2-space indent).  The workflow
spec travels as YAML; emission uses a small deterministic writer so two runs
on equal specs produce byte-identical text: keys stay in declaration order,
strings are always double-quoted, nulls are written as ``null`` and booleans
lowercase.  Parsing goes through ``yaml.safe_load``.
"""

from __future__ import annotations

import json
import re

import yaml

from .types import AnalysisArtifact, WorkflowSpec

_BARE_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
# YAML 1.1 resolves these bare scalars to bool/null, so quote them as keys.
_RESERVED_KEYS = {"true", "false", "yes", "no", "on", "off", "null", "none"}

_INDENT = "  "


def dumps_analysis(artifact: AnalysisArtifact) -> str:
    return json.dumps(artifact.to_dict(), indent=2, ensure_ascii=False) + "\n"


def loads_analysis(text: str) -> AnalysisArtifact:
    return AnalysisArtifact.from_dict(json.loads(text))


def serialize_workflow_dict(data: dict) -> str:
    lines: list[str] = []
    _emit_mapping(data, 0, lines)
    return "\n".join(lines) + "\n"


def parse_workflow(text: str) -> WorkflowSpec:
    return WorkflowSpec.from_dict(yaml.safe_load(text) or {})


def _scalar(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (int, float)):
        return repr(value)
    raise TypeError(f"cannot emit {type(value).__name__} as YAML scalar")


def _key(name) -> str:
    text = str(name)
    if _BARE_KEY_RE.match(text) and text.lower() not in _RESERVED_KEYS:
        return text
    return json.dumps(text, ensure_ascii=False)


def _is_scalar(value) -> bool:
    return value is None or isinstance(value, (str, bool, int, float))


def _emit_mapping(mapping: dict, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    for key, value in mapping.items():
        label = f"{pad}{_key(key)}:"
        if _is_scalar(value):
            lines.append(f"{label} {_scalar(value)}")
        elif isinstance(value, dict):
            if value:
                lines.append(label)
                _emit_mapping(value, depth + 1, lines)
            else:
                lines.append(f"{label} {{}}")
        elif isinstance(value, (list, tuple)):
            if value:
                lines.append(label)
                _emit_sequence(value, depth + 1, lines)
            else:
                lines.append(f"{label} []")
        else:
            raise TypeError(f"cannot emit {type(value).__name__} under {key!r}")


def _emit_sequence(items, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    for item in items:
        if _is_scalar(item):
            lines.append(f"{pad}- {_scalar(item)}")
        elif isinstance(item, dict):
            if not item:
                lines.append(f"{pad}- {{}}")
                continue
            sub: list[str] = []
            _emit_mapping(item, depth + 1, sub)
            # Fold the first child onto the dash line.
            first = sub[0][len(_INDENT * (depth + 1)):]
            lines.append(f"{pad}- {first}")
            lines.extend(sub[1:])
        elif isinstance(item, (list, tuple)):
            if not item:
                lines.append(f"{pad}- []")
                continue
            sub = []
            _emit_sequence(item, depth + 1, sub)
            first = sub[0][len(_INDENT * (depth + 1)):]
            lines.append(f"{pad}- {first}")
            lines.extend(sub[1:])
        else:
            raise TypeError(f"cannot emit {type(item).__name__} in sequence")
