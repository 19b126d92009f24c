"""Command-line entry points for the whole toolchain.

Exit status is nonzero only when the invoked operation itself errors; a DAG
that merely scores poorly still exits 0.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from .analysis import run_analysis
from .codegen import (
    GenerationMethod,
    GeneratorConfig,
    generate_direct,
    generate_hybrid,
    generate_llm_only,
    generate_templated,
)
from .errors import DagforgeError
from .evaluation import evaluate
from .fidelity import assess
from .gateway import Gateway, ProviderConfig, TokenLedger
from .harness import REPLAY_EPOCH, MatrixConfig, load_run_dir, render_report, run_matrix
from .ir import loads_analysis, parse_workflow
from .transform import serialize_workflow, transform


def _gateway_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", default="replay", choices=["live", "record", "replay"])
    parser.add_argument("--fixtures", default="fixtures/llm", help="fixture directory")
    parser.add_argument("--model", default="gpt-4o-mini", help="model key")
    parser.add_argument("--provider-name", default="replay")
    parser.add_argument("--base-url", default="")
    parser.add_argument("--credential-env", default="")


def _make_gateway(args) -> Gateway:
    provider = ProviderConfig(
        name=args.provider_name,
        base_url=args.base_url,
        credential_env=args.credential_env,
    )
    return Gateway(
        provider=provider,
        mode=args.mode,
        fixtures_dir=args.fixtures,
        ledger=TokenLedger(),
    )


def _cmd_analyze(args) -> int:
    description_path = Path(args.description)
    description = description_path.read_text(encoding="utf-8")
    gateway = _make_gateway(args)
    out_dir = Path(args.out) if args.out else description_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = description_path.stem

    stages_dir = out_dir / f"{stem}.stages"
    stages_dir.mkdir(exist_ok=True)

    def sink(output):
        (stages_dir / f"{output.stage.value}.txt").write_text(
            output.raw_text, encoding="utf-8"
        )

    kwargs = {"stage_sink": sink}
    if args.mode == "replay":
        # Pinned clock keeps replay runs (and judge fixture keys) byte-stable.
        kwargs["clock"] = lambda: REPLAY_EPOCH
    artifact, report_text = run_analysis(
        description, description_path.name, gateway, args.model, **kwargs
    )
    analysis_path = out_dir / f"{stem}.analysis.json"
    analysis_path.write_text(
        json.dumps(artifact.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (out_dir / f"{stem}.report.md").write_text(report_text + "\n", encoding="utf-8")
    print(f"wrote {analysis_path}")
    return 0


def _cmd_transform(args) -> int:
    analysis_path = Path(args.analysis)
    artifact = loads_analysis(analysis_path.read_text(encoding="utf-8"))
    spec = transform(artifact)
    text = serialize_workflow(spec)
    if args.out:
        out = Path(args.out)
    else:
        stem = analysis_path.name
        for suffix in (".analysis.json", ".json"):
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
                break
        out = analysis_path.parent / f"{stem}.workflow.yaml"
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_generate(args) -> int:
    method = GenerationMethod(args.method)
    input_path = Path(args.input)
    config = GeneratorConfig(
        source_name=input_path.name, fallback_image=args.fallback_image
    )
    if method == GenerationMethod.DIRECT:
        description = input_path.read_text(encoding="utf-8")
        gateway = _make_gateway(args)
        direct_kwargs = {"source_name": input_path.name}
        if args.mode == "replay":
            direct_kwargs["clock"] = lambda: REPLAY_EPOCH.replace(
                tzinfo=None
            ).strftime("%Y-%m-%dT%H:%M:%S.%f")
        dag = generate_direct(description, gateway, args.model, **direct_kwargs)
    else:
        spec = parse_workflow(input_path.read_text(encoding="utf-8"))
        if method == GenerationMethod.TEMPLATED:
            dag = generate_templated(spec, config)
        elif method == GenerationMethod.HYBRID:
            dag = generate_hybrid(spec, _make_gateway(args), args.model, config)
        else:
            dag = generate_llm_only(spec, _make_gateway(args), args.model, config)
    out = Path(args.out) if args.out else input_path.with_name(
        f"{input_path.stem.split('.')[0]}.{method.value}.dag.py"
    )
    out.write_text(dag.source_text, encoding="utf-8")
    for warning in dag.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {out}")
    return 0


def _cmd_evaluate(args) -> int:
    source = Path(args.dag).read_text(encoding="utf-8")
    adapter_cmd = shlex.split(args.adapter_cmd) if args.adapter_cmd else None
    mode = "adapter" if adapter_cmd else "native"
    report = evaluate(source, mode=mode, adapter_cmd=adapter_cmd)
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    print(
        f"loadable={report.loadable} sat={report.sat:.4f} "
        f"dst={report.dst:.4f} pct={report.pct:.4f}"
    )
    return 0


def _cmd_judge(args) -> int:
    description = Path(args.description).read_text(encoding="utf-8")
    artifact = loads_analysis(Path(args.analysis).read_text(encoding="utf-8"))
    spec = parse_workflow(Path(args.workflow).read_text(encoding="utf-8"))
    gateway = _make_gateway(args)
    report = assess(description, artifact, spec, gateway, args.model)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_run_matrix(args) -> int:
    config = MatrixConfig.from_file(args.config)
    matrix = run_matrix(config)
    report_path = config.run_dir / "matrix_report.txt"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    text = render_report(matrix, "text")
    report_path.write_text(text, encoding="utf-8")
    print(text, end="")
    errored = [cell for cell in matrix.cells if cell.status == "error"]
    if errored:
        print(f"{len(errored)} cell(s) recorded errors", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    matrix = load_run_dir(args.run_dir)
    print(render_report(matrix, args.format), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagforge",
        description="Compile pipeline descriptions into scored Airflow DAGs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the staged description analysis")
    p.add_argument("description")
    p.add_argument("--out", default="")
    _gateway_args(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("transform", help="analysis JSON -> workflow YAML")
    p.add_argument("analysis")
    p.add_argument("--out", default="")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("generate", help="generate a DAG script")
    p.add_argument("input", help="workflow YAML (or description file for direct)")
    p.add_argument("--method", required=True,
                   choices=[m.value for m in GenerationMethod])
    p.add_argument("--out", default="")
    p.add_argument("--fallback-image", default=None)
    _gateway_args(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="score a DAG script")
    p.add_argument("dag")
    p.add_argument("--json", default="", help="write the full report here")
    p.add_argument("--adapter-cmd", default="",
                   help="conformance adapter command (enables adapter mode)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("judge", help="judge artifact fidelity against the description")
    p.add_argument("description")
    p.add_argument("analysis")
    p.add_argument("workflow")
    p.add_argument("--out", default="")
    _gateway_args(p)
    p.set_defaults(func=_cmd_judge)

    p = sub.add_parser("run-matrix", help="run the cases x models x methods matrix")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run_matrix)

    p = sub.add_parser("report", help="render a report from a finished run directory")
    p.add_argument("run_dir")
    p.add_argument("--format", default="text", choices=["text", "csv", "json"])
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DagforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
