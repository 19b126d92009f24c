"""Conformance probe: DagBag import plus per-task dry runs over a JSON protocol.

Invocation: ``airflow-conformance <dag_file>``.  Exactly one JSON document is
printed to stdout; all diagnostics (including anything the orchestrator logs)
go to stderr.  Exit status is 0 whenever the probe ran, even if the DAG is
broken — failures are data.  Exit status 2 means the orchestrator runtime
itself is not importable, reported as a JSON error document.

The orchestrator honors AIRFLOW_HOME from the environment; the probe does not
override it.
"""

from __future__ import annotations

import argparse
import contextlib
import importlib
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ConformanceResult:
    loadable: bool
    import_errors: list = field(default_factory=list)
    parsing_warnings: list = field(default_factory=list)
    per_task: list = field(default_factory=list)
    airflow_version: str = ""

    def to_dict(self) -> dict:
        return {
            "loadable": self.loadable,
            "import_errors": self.import_errors,
            "parsing_warnings": self.parsing_warnings,
            "per_task": self.per_task,
            "airflow_version": self.airflow_version,
        }


def _is_container_daemon_error(exc: Exception) -> bool:
    module = type(exc).__module__ or ""
    if module.startswith("docker"):
        return True
    text = str(exc).lower()
    return "docker" in text and any(
        marker in text for marker in ("socket", "daemon", "connection", "permission")
    )


def _dry_run_task(task) -> tuple[str, str]:
    try:
        task.dry_run()
        return "success", ""
    except Exception as exc:  # dry-run failures are data, never fatal
        if _is_container_daemon_error(exc):
            return "warning", f"container daemon unavailable: {exc}"
        return "failure", str(exc)


def check_conformance(dag_file: str | Path) -> ConformanceResult:
    """Import one DAG file through DagBag and dry-run every task.

    Requires the orchestrator runtime to be importable; callers handle the
    missing-runtime case (see ``main``).
    """
    import airflow
    from airflow.models.dagbag import DagBag

    dag_path = Path(dag_file)
    captured: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dagbag = DagBag(
            dag_folder=str(dag_path), include_examples=False, safe_mode=False
        )
        captured = [str(w.message) for w in caught]

    import_errors = [
        f"{source}: {message}" for source, message in dagbag.import_errors.items()
    ]
    dags = list(dagbag.dags.values())
    loadable = not import_errors and len(dags) >= 1
    if not import_errors and not dags:
        import_errors.append(f"{dag_path}: no DAG objects found")

    per_task: list = []
    if loadable:
        for dag in dags:
            for task in dag.tasks:
                status, message = _dry_run_task(task)
                per_task.append(
                    {"task_id": task.task_id, "dryrun": status, "message": message}
                )

    return ConformanceResult(
        loadable=loadable,
        import_errors=import_errors,
        parsing_warnings=captured,
        per_task=per_task,
        airflow_version=getattr(airflow, "__version__", "unknown"),
    )


def main(argv=None, import_module=importlib.import_module) -> int:
    parser = argparse.ArgumentParser(
        prog="airflow-conformance",
        description="Probe one DAG file against the live orchestrator",
    )
    parser.add_argument("dag_file")
    args = parser.parse_args(argv)

    stdout = sys.stdout
    try:
        # The orchestrator and its plugins may write to stdout while loading;
        # shunt all of that to stderr so the protocol stays one JSON document.
        with contextlib.redirect_stdout(sys.stderr):
            try:
                import_module("airflow")
            except Exception as exc:
                document = {
                    "error": "orchestrator runtime not available",
                    "detail": str(exc),
                }
                print(json.dumps(document), file=stdout)
                return 2
            result = check_conformance(args.dag_file)
    except Exception as exc:  # probe bug or unreadable file: still exit 2
        print(
            json.dumps({"error": "probe failed", "detail": str(exc)}),
            file=stdout,
        )
        return 2

    print(json.dumps(result.to_dict()), file=stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
