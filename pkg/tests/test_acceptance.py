"""Acceptance suite: one test per criterion, each printing a PASS line.

Each criterion pins its stated tolerance and runtime budget.  Numeric
expectations come from hand evaluation of the scoring formulas or from
independent brute-force oracles computed inside the test, never from the
implementation under test.
"""

import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from dagforge.codegen import generate_templated
from dagforge.evaluation import (
    EvalRecord,
    EvaluationReport,
    aggregate_stats,
    evaluate,
    score_dst,
    score_pct,
    score_sat,
    success_rate,
    tokens_per_success,
)
from dagforge.graphs import (
    StructuralViolation,
    ViolationKind,
    is_acyclic,
    weak_component_sizes,
)
from dagforge.harness import MatrixConfig, render_report, run_matrix
from dagforge.fidelity import parse_judge_response, point_biserial
from dagforge.gateway import ProviderConfig
from dagforge.ir import parse_workflow, serialize_workflow_dict, validate_workflow
from dagforge.transform import transform

from conftest import CASES_DIR, FIXTURES_DIR, MODEL, two_task_spec
from genutils import random_artifact


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.monotonic()
    yield
    elapsed = time.monotonic() - start
    assert elapsed < budget_seconds, (
        f"{name} exceeded its {budget_seconds}s budget ({elapsed:.2f}s)"
    )
    print(f"PASS: {name} ({elapsed:.2f}s)")


# -- formula fidelity ---------------------------------------------------------------


def test_acceptance_pct_formula_fidelity():
    with criterion("PCT formula fidelity", 1.0):
        assert score_pct(0, True, 1.0, 100.0).pct == 0.0
        assert score_pct(1, True, 0.0, 40.0).pct == 5.0
        capped = score_pct(1, True, 1.0, 94.0)
        assert capped.bonus == 1.0
        assert capped.executability == 10.0 and capped.pct == 10.0
        assert score_pct(1, False, 1.0, 100.0).pct == 3.0


def test_acceptance_dst_formula_fidelity():
    with criterion("DST formula fidelity + monotonicity (10,000 multisets)", 5.0):
        worked = score_dst(
            [
                StructuralViolation(kind=ViolationKind.CYCLE),
                StructuralViolation(kind=ViolationKind.ISOLATED_TASK),
            ],
            [("op_a", []), ("op_b", [])],
        )
        assert worked.s_struct == 94.0
        assert worked.dst == 9.58

        struct_kinds = (
            ViolationKind.CYCLE,
            ViolationKind.DISCONNECTED_COMPONENT,
            ViolationKind.ISOLATED_TASK,
            ViolationKind.INVALID_DEPENDENCY,
            ViolationKind.EMPTY_TASK_GROUP,
        )
        rng = random.Random(20_250_101)
        for _ in range(10_000):
            base = [
                StructuralViolation(
                    kind=rng.choice(struct_kinds), count=rng.randint(1, 4)
                )
                for _ in range(rng.randint(0, 6))
            ]
            operators = [("op", []), ("op2", [])]
            before = score_dst(base, operators)
            grown_violations = base + [
                StructuralViolation(kind=rng.choice(struct_kinds))
            ]
            after = score_dst(grown_violations, operators)
            assert after.dst <= before.dst + 1e-12
            assert after.s_struct <= before.s_struct + 1e-12


def test_acceptance_sat_formula_fidelity():
    with criterion("SAT formula fidelity", 1.0):
        single_credential = 'password = "hunter2"\nx = 1\n'
        result = score_sat(single_credential)
        assert result.sat == 9.9375

        flood = "\n".join(f"x{i} = {i} " for i in range(600)) + "\n"
        floored = score_sat(flood)
        assert floored.scores["style"] == 0.0
        assert floored.sat == pytest.approx(0.25 * (10 + 10 + 0 + 10), abs=1e-9)


# -- penalization ---------------------------------------------------------------------


def _report(loadable, sat, dst, pct):
    return EvaluationReport(
        loadable=loadable, sat=sat, dst=dst, pct=pct, s_struct=0.0,
        s_config=0.0, dryrun_ratio=0.0, bonus=0.0, violations=(), penalized=True,
    )


def test_acceptance_penalization_coupling_and_means():
    with criterion("Penalization: gate/zero coupling and exact means", 5.0):
        good = evaluate(generate_templated(two_task_spec()))
        broken = evaluate("not python at all {{{")
        for report in (good, broken):
            zeroed = (report.sat, report.dst, report.pct) == (0.0, 0.0, 0.0)
            assert (report.loadable == 0) == zeroed

        records = [
            EvalRecord("m", _report(1, 8.0, 9.0, 9.5), 100, 1024),
            EvalRecord("m", _report(0, 0.0, 0.0, 0.0), 300, 512),
            EvalRecord("m", _report(1, 6.0, 7.0, 8.5), 500, 2048),
            EvalRecord("m", _report(0, 0.0, 0.0, 0.0), 100, 256),
        ]
        stats, _ = aggregate_stats(records)
        (m,) = stats
        assert abs(m.sat_mean - 14.0 / 4.0) < 1e-9
        assert abs(m.dst_mean - 16.0 / 4.0) < 1e-9
        assert abs(m.pct_mean - 18.0 / 4.0) < 1e-9
        assert m.success_count == 2 and m.success_rate == 50.0
        for record in records:
            zeroed = (
                record.report.sat,
                record.report.dst,
                record.report.pct,
            ) == (0.0, 0.0, 0.0)
            assert (record.report.loadable == 0) == zeroed


# -- reported-number reproduction (arithmetic layer) -------------------------------------


def test_acceptance_success_rates_and_cost_effectiveness():
    with criterion("Success-rate and cost-effectiveness arithmetic", 1.0):
        for successes, reported in ((19, 29.2), (43, 66.2), (51, 78.5), (60, 92.3)):
            assert abs(success_rate(successes, 65) - reported) <= 0.05

        direct_cost = tokens_per_success(17_221, 29.2)
        assert direct_cost == 17_221 / 0.292  # formula applied exactly
        assert abs(direct_cost - 58_975) / 58_975 <= 1e-3

        hybrid_cost = tokens_per_success(20_091, 78.5)
        assert hybrid_cost == 20_091 / 0.785
        assert abs(hybrid_cost - 25_588) / 25_588 <= 1e-3


# -- deterministic end-to-end replay ------------------------------------------------------


EXPECTED_TASK_COUNTS = {
    "dm_sequential": 5,
    "dm_parallel": 13,  # 3 orchestration tasks + 2 branches x 5 steps
    "dm_task_parallel": 5,
    "multilingual_review": 5,
    "procurement_validation": 3,
}


def test_acceptance_deterministic_replay_end_to_end(tmp_path, monkeypatch):
    import requests

    def no_network(*args, **kwargs):
        raise AssertionError("network use is forbidden in replay mode")

    monkeypatch.setattr(requests, "post", no_network)
    monkeypatch.setattr(requests, "get", no_network)

    with criterion("Deterministic end-to-end replay (5 cases, templated)", 30.0):
        def make_config(run_dir):
            return MatrixConfig(
                run_dir=run_dir,
                cases={
                    cid: str(CASES_DIR / f"{cid}.txt")
                    for cid in EXPECTED_TASK_COUNTS
                },
                models=(MODEL,),
                methods=("templated",),
                provider=ProviderConfig(name="azureopenai"),
                mode="replay",
                fixtures_dir=FIXTURES_DIR,
                workers=4,
            )

        first = run_matrix(make_config(tmp_path / "run_a"))
        second = run_matrix(make_config(tmp_path / "run_b"))

        assert len(first.cells) == 5
        for cell in first.cells:
            assert cell.report.loadable == 1, cell.case
            assert cell.report.task_count == EXPECTED_TASK_COUNTS[cell.case]
            assert cell.report.dst >= 9.0, cell.case
            assert cell.report.pct >= 9.0, cell.case

        for cell_a, cell_b in zip(first.cells, second.cells):
            assert Path(cell_a.dag_path).read_bytes() == Path(
                cell_b.dag_path
            ).read_bytes()
        assert render_report(first, "json") == render_report(second, "json")
        assert render_report(first, "csv") == render_report(second, "csv")


# -- transform totality and round-trip ------------------------------------------------------


def test_acceptance_transform_totality_and_round_trip():
    with criterion("Transform totality + round-trip (1,000 artifacts)", 60.0):
        rng = random.Random(424_242)
        for _ in range(1_000):
            artifact = random_artifact(rng)
            spec = transform(artifact)  # totality: never raises on valid input
            assert validate_workflow(spec).ok

            graph = spec.workflow
            nodes = {**graph.tasks, **graph.flow_constructs}
            for node_id, node in nodes.items():
                for dep in node.depends_on:
                    assert node_id in nodes[dep].triggers
                for target in node.triggers:
                    assert node_id in nodes[target].depends_on

            assert {c.id for c in spec.component_types} == {
                c.id for c in artifact.components
            }
            assert set(spec.parameters.global_params) == set(
                artifact.parameters.global_params
            )
            assert [p.id for p in spec.integrations.integration_points] == [
                p.id for p in artifact.integrations.integration_points
            ]

            data = spec.to_dict()
            assert parse_workflow(serialize_workflow_dict(data)).to_dict() == data


# -- graph oracle equivalence -----------------------------------------------------------------


def test_acceptance_graph_oracle_equivalence():
    with criterion("Graph oracle equivalence (all digraphs <= 5 nodes)", 60.0):
        # n <= 4: exhaustive with a per-graph closure oracle.
        for n in range(0, 5):
            slots = [(i, j) for i in range(n) for j in range(n) if i != j]
            for mask in range(1 << len(slots)):
                edges = [slots[b] for b in range(len(slots)) if mask >> b & 1]
                reach = [[False] * n for _ in range(n)]
                for u, v in edges:
                    reach[u][v] = True
                for k in range(n):
                    for i in range(n):
                        if reach[i][k]:
                            row_k = reach[k]
                            row_i = reach[i]
                            for j in range(n):
                                if row_k[j]:
                                    row_i[j] = True
                oracle_acyclic = not any(reach[i][i] for i in range(n))
                assert is_acyclic(n, edges) == oracle_acyclic

                if n:
                    undirected = [set() for _ in range(n)]
                    for u, v in edges:
                        undirected[u].add(v)
                        undirected[v].add(u)
                    seen, sizes = set(), []
                    for start in range(n):
                        if start in seen:
                            continue
                        stack, size = [start], 0
                        seen.add(start)
                        while stack:
                            node = stack.pop()
                            size += 1
                            for nxt in undirected[node]:
                                if nxt not in seen:
                                    seen.add(nxt)
                                    stack.append(nxt)
                        sizes.append(size)
                    assert weak_component_sizes(n, edges) == sorted(
                        sizes, reverse=True
                    )

        # n == 5: all 2^20 graphs; vectorized closure as the oracle.
        n = 5
        slots = [(i, j) for i in range(n) for j in range(n) if i != j]
        total = 1 << len(slots)
        masks = np.arange(total, dtype=np.uint32)
        bits = ((masks[:, None] >> np.arange(20, dtype=np.uint32)) & 1).astype(bool)
        adjacency = np.zeros((total, n, n), dtype=bool)
        for b, (i, j) in enumerate(slots):
            adjacency[:, i, j] = bits[:, b]

        reach = adjacency.copy()
        for _ in range(3):  # path length doubles: 1 -> 2 -> 4 -> 8 >= 5
            reach |= np.matmul(
                reach.astype(np.uint8), reach.astype(np.uint8)
            ).astype(bool)
        oracle_acyclic_all = ~reach[:, np.arange(n), np.arange(n)].any(axis=1)

        undirected = adjacency | adjacency.transpose(0, 2, 1)
        undirected |= np.eye(n, dtype=bool)
        for _ in range(3):
            undirected |= np.matmul(
                undirected.astype(np.uint8), undirected.astype(np.uint8)
            ).astype(bool)
        oracle_connected_all = undirected.all(axis=(1, 2))

        for mask in range(total):
            edges = [slots[b] for b in range(20) if mask >> b & 1]
            assert is_acyclic(n, edges) == oracle_acyclic_all[mask]
            connected = len(weak_component_sizes(n, edges)) == 1
            assert connected == oracle_connected_all[mask]


# -- fidelity statistics -------------------------------------------------------------------


def test_acceptance_fidelity_statistics():
    with criterion("Fidelity statistics: point-biserial + recount", 5.0):
        values = [6, 3, 0, 1, 1, 1]
        outcomes = [0, 0, 0, 1, 1, 1]
        assert abs(point_biserial(values, outcomes) - (-0.5)) < 1e-9

        import json

        inconsistent = json.dumps(
            {
                "pipeline_name": "p",
                "validation_summary": {
                    "components": {
                        "MISSING": [],
                        "HALLUCINATION": [],
                        "INCONSISTENCY": [],
                        "CORRECT": ["a", "b", "c"],
                    },
                    "parameters": {"MISSING": [], "HALLUCINATION": [],
                                   "INCONSISTENCY": [], "CORRECT": []},
                    "integrations": {"MISSING": [], "HALLUCINATION": [],
                                     "INCONSISTENCY": [], "CORRECT": []},
                    "workflow": {"MISSING": [], "HALLUCINATION": [],
                                 "INCONSISTENCY": [], "CORRECT": []},
                },
                "issues": [
                    {
                        "code": "DS01",
                        "type": "MISSING",
                        "description": "d",
                        "severity": "HIGH",
                        "evidence": "e",
                    }
                ],
                "summary_metrics": {
                    "total_issues": 42,
                    "missing_count": 0,
                    "hallucination_count": 9,
                    "inconsistency_count": 0,
                    "correct_count": 0,
                },
            }
        )
        report = parse_judge_response(inconsistent)
        assert report.summary_metrics == {
            "total_issues": 1,
            "missing_count": 1,
            "hallucination_count": 0,
            "inconsistency_count": 0,
            "correct_count": 3,
        }
        assert report.warnings  # the disagreement was detected and recorded
