"""Exception hierarchy shared across the toolchain.

Every error carries a stable machine-readable ``code`` so harness code and
tests can assert on failure kinds without string matching.
"""

from __future__ import annotations


class DagforgeError(Exception):
    """Base class; ``code`` identifies the failure kind."""

    code = "INTERNAL_ERROR"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context

    def __str__(self) -> str:
        base = super().__str__()
        if self.context:
            details = ", ".join(f"{k}={v}" for k, v in self.context.items())
            return f"[{self.code}] {base} ({details})"
        return f"[{self.code}] {base}"


# --- gateway ---------------------------------------------------------------

class TransportError(DagforgeError):
    code = "TRANSPORT_ERROR"


class MissingFixtureError(DagforgeError):
    code = "MISSING_FIXTURE"


class AuthError(DagforgeError):
    code = "AUTH_ERROR"


# --- analysis chain ---------------------------------------------------------

class StageParseError(DagforgeError):
    code = "STAGE_PARSE_ERROR"


class MissingPriorError(DagforgeError):
    code = "MISSING_PRIOR"


class AggregationError(DagforgeError):
    code = "AGGREGATION_ERROR"


# --- transform ---------------------------------------------------------------

class InvalidInputError(DagforgeError):
    code = "INVALID_INPUT"


# --- code generation ----------------------------------------------------------

class MissingImageError(DagforgeError):
    code = "MISSING_IMAGE"


class UnsupportedConstructError(DagforgeError):
    code = "UNSUPPORTED_CONSTRUCT"


class GenerationParseError(DagforgeError):
    code = "GENERATION_PARSE_ERROR"


class SlotFillError(DagforgeError):
    code = "SLOT_FILL_ERROR"


# --- graph extraction ---------------------------------------------------------

class DagSyntaxError(DagforgeError):
    code = "SYNTAX_ERROR"


class NoDagFoundError(DagforgeError):
    code = "NO_DAG_FOUND"


class MultipleDagsError(DagforgeError):
    code = "MULTIPLE_DAGS"


# --- evaluation ----------------------------------------------------------------

class AdapterUnavailableError(DagforgeError):
    code = "ADAPTER_UNAVAILABLE"


class EmptyInputError(DagforgeError):
    code = "EMPTY_INPUT"


# --- fidelity -------------------------------------------------------------------

class JudgeParseError(DagforgeError):
    code = "JUDGE_PARSE_ERROR"


class UnknownIssueCodeError(DagforgeError):
    code = "UNKNOWN_ISSUE_CODE"


class InsufficientDataError(DagforgeError):
    code = "INSUFFICIENT_DATA"
