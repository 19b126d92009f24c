"""Static extraction of task/operator/dependency graphs from DAG scripts.

The parser never imports the orchestrator runtime: scripts are read through
``ast`` and only statically determinable facts are kept.  Dynamic expressions
(computed images, loop-built dependencies) are recorded as opaque with a
parse warning rather than guessed at.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import DagSyntaxError, MultipleDagsError, NoDagFoundError

OPAQUE = "<dynamic>"

CONTAINER_OPERATOR_KINDS = ("DockerOperator", "KubernetesPodOperator")

# Required constructor parameters checked per operator kind; every operator
# needs a task_id.
REQUIRED_PARAMS = {
    "DockerOperator": ("task_id", "image"),
    "KubernetesPodOperator": ("task_id", "image"),
}
DEFAULT_REQUIRED = ("task_id",)


class ViolationKind(str, Enum):
    CYCLE = "cycle"
    DISCONNECTED_COMPONENT = "disconnected_component"
    ISOLATED_TASK = "isolated_task"
    MISSING_REQUIRED_PARAMETER = "missing_required_parameter"
    INVALID_DEPENDENCY = "invalid_dependency"
    EMPTY_TASK_GROUP = "empty_task_group"


CRITICAL = "critical"
WARNING = "warning"

_SEVERITY = {
    ViolationKind.CYCLE: CRITICAL,
    ViolationKind.DISCONNECTED_COMPONENT: CRITICAL,
    ViolationKind.ISOLATED_TASK: WARNING,
    ViolationKind.MISSING_REQUIRED_PARAMETER: CRITICAL,
    ViolationKind.INVALID_DEPENDENCY: CRITICAL,
    ViolationKind.EMPTY_TASK_GROUP: WARNING,
}


@dataclass(frozen=True)
class StructuralViolation:
    kind: ViolationKind
    count: int = 1
    severity: str = ""
    detail: str = ""

    def __post_init__(self):
        if not self.severity:
            object.__setattr__(self, "severity", _SEVERITY[self.kind])


@dataclass(frozen=True)
class OperatorConfig:
    """Statically extracted constructor arguments.

    ``params`` holds literal values; names whose value could not be resolved
    statically appear in ``opaque_params`` instead.
    """

    params: dict = field(default_factory=dict)
    opaque_params: tuple = ()

    def has(self, name: str) -> bool:
        return name in self.params or name in self.opaque_params


@dataclass(frozen=True)
class TaskNode:
    task_id: str
    operator_kind: str
    config: OperatorConfig = field(default_factory=OperatorConfig)


@dataclass(frozen=True)
class DagGraph:
    dag_id: str
    tasks: tuple = ()
    edges: tuple = ()  # (upstream task id, downstream task id)
    parse_warnings: tuple = ()
    invalid_refs: tuple = ()  # unknown names used in dependency statements
    task_groups: tuple = ()  # (group name, member count)

    def task_ids(self) -> tuple:
        return tuple(t.task_id for t in self.tasks)

    def to_dict(self) -> dict:
        return {
            "dag_id": self.dag_id,
            "tasks": [
                {
                    "task_id": t.task_id,
                    "operator_kind": t.operator_kind,
                    "params": t.config.params,
                    "opaque_params": list(t.config.opaque_params),
                }
                for t in self.tasks
            ],
            "edges": [list(edge) for edge in self.edges],
            "parse_warnings": list(self.parse_warnings),
        }


@dataclass(frozen=True)
class GraphMetrics:
    depth: int
    breadth: int
    task_count: int
    is_acyclic: bool
    weakly_connected: bool

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "breadth": self.breadth,
            "task_count": self.task_count,
            "is_acyclic": self.is_acyclic,
            "weakly_connected": self.weakly_connected,
        }


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def parse_dag_source(source: str) -> DagGraph:
    """Extract the task graph from one DAG script.

    Fails on syntax errors and on zero or multiple DAG definitions; every
    other oddity is downgraded to a warning or violation carried as data.
    """
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise DagSyntaxError(f"script is not parseable: {exc}") from None

    collector = _Collector()
    collector.visit_body(tree.body)

    if collector.dag_count == 0:
        raise NoDagFoundError("no DAG definition found in script")
    if collector.dag_count > 1:
        raise MultipleDagsError(
            f"expected exactly one DAG definition, found {collector.dag_count}"
        )

    return collector.build_graph()


class _Collector:
    def __init__(self):
        self.dag_count = 0
        self.dag_id = ""
        self.tasks: list[TaskNode] = []
        self.var_to_task: dict[str, str] = {}
        self.raw_edges: list[tuple[str, str]] = []
        self.warnings: list[str] = []
        self.invalid_refs: list[str] = []
        self.task_groups: list[tuple[str, int]] = []
        self._seen_ids: set[str] = set()

    # -- traversal ----------------------------------------------------------

    def visit_body(self, statements, group: Optional[list] = None) -> None:
        for stmt in statements:
            if isinstance(stmt, ast.With):
                inner_group = group
                for item in stmt.items:
                    call = item.context_expr
                    if isinstance(call, ast.Call):
                        name = _call_name(call)
                        if name == "DAG":
                            self._register_dag(call)
                        elif name == "TaskGroup":
                            inner_group = []
                            self.task_groups.append(
                                (_group_name(call), 0)
                            )
                self.visit_body(stmt.body, inner_group)
                if inner_group is not None and inner_group is not group:
                    name, _ = self.task_groups[-1]
                    self.task_groups[-1] = (name, len(inner_group))
            elif isinstance(stmt, ast.Assign):
                self._handle_assign(stmt, group)
            elif isinstance(stmt, ast.Expr):
                self._handle_expr(stmt.value)
            elif isinstance(stmt, (ast.If, ast.Try, ast.For, ast.While)):
                # Conditional/looped task definitions are dynamic; still scan
                # them for best-effort extraction.
                for body in _sub_bodies(stmt):
                    self.visit_body(body, group)
            # Function and class bodies are skipped: they do not run at
            # import time, which is what the loadability semantics model.

    def _handle_assign(self, stmt: ast.Assign, group: Optional[list]) -> None:
        value = stmt.value
        if not isinstance(value, ast.Call):
            if isinstance(value, ast.BinOp):
                self._handle_expr(value)
            return
        name = _call_name(value)
        if name == "DAG":
            self._register_dag(value)
            return
        if name and name.endswith("Operator"):
            if len(stmt.targets) == 1 and isinstance(stmt.targets[0], ast.Name):
                var_name = stmt.targets[0].id
            else:
                var_name = ""
            task = self._register_task(value, name, var_name)
            if group is not None:
                group.append(task.task_id)

    def _handle_expr(self, value: ast.expr) -> None:
        if isinstance(value, ast.BinOp):
            self._collect_shift_edges(value)
        elif isinstance(value, ast.Call) and _call_name(value) == "chain":
            self._collect_chain_edges(value)

    # -- registration -----------------------------------------------------------

    def _register_dag(self, call: ast.Call) -> None:
        self.dag_count += 1
        dag_id = _keyword_literal(call, "dag_id")
        if dag_id is None and call.args:
            dag_id = _literal(call.args[0])
        if isinstance(dag_id, str) and not self.dag_id:
            self.dag_id = dag_id

    def _register_task(self, call: ast.Call, kind: str, var_name: str) -> TaskNode:
        params: dict = {}
        opaque: list[str] = []
        for kw in call.keywords:
            if kw.arg is None:
                continue
            value = _literal(kw.value)
            if value is _NOT_LITERAL:
                opaque.append(kw.arg)
                self.warnings.append(
                    f"task argument {kw.arg!r} is a dynamic expression; recorded as opaque"
                )
            else:
                params[kw.arg] = value

        task_id = params.get("task_id")
        if not isinstance(task_id, str) or not task_id:
            task_id = var_name or f"task_{len(self.tasks) + 1}"
            self.warnings.append(
                f"operator has no literal task_id; using {task_id!r}"
            )

        if task_id in self._seen_ids:
            base = task_id
            suffix = 2
            while f"{base}__dup{suffix}" in self._seen_ids:
                suffix += 1
            task_id = f"{base}__dup{suffix}"
            self.warnings.append(f"duplicate task id {base!r}; renamed to {task_id!r}")
        self._seen_ids.add(task_id)

        task = TaskNode(
            task_id=task_id,
            operator_kind=kind,
            config=OperatorConfig(params=params, opaque_params=tuple(opaque)),
        )
        self.tasks.append(task)
        if var_name:
            self.var_to_task[var_name] = task_id
        return task

    # -- dependency statements -----------------------------------------------------

    def _collect_shift_edges(self, node: ast.BinOp) -> None:
        groups: list = []
        ops: list = []

        def walk(expr):
            if isinstance(expr, ast.BinOp) and isinstance(expr.op, (ast.RShift, ast.LShift)):
                walk(expr.left)
                ops.append(expr.op)
                walk(expr.right)
            else:
                groups.append(self._resolve_group(expr))

        walk(node)
        for idx, op in enumerate(ops):
            left, right = groups[idx], groups[idx + 1]
            if left is None or right is None:
                continue
            if isinstance(op, ast.LShift):
                left, right = right, left
            for upstream in left:
                for downstream in right:
                    self.raw_edges.append((upstream, downstream))

    def _collect_chain_edges(self, call: ast.Call) -> None:
        groups = [self._resolve_group(arg) for arg in call.args]
        for left, right in zip(groups, groups[1:]):
            if left is None or right is None:
                continue
            if len(left) > 1 and len(right) > 1 and len(left) == len(right):
                pairs = zip(left, right)
            else:
                pairs = ((u, d) for u in left for d in right)
            self.raw_edges.extend(pairs)

    def _resolve_group(self, expr) -> Optional[list]:
        if isinstance(expr, ast.Name):
            resolved = self._resolve_name(expr.id)
            return [resolved] if resolved else []
        if isinstance(expr, (ast.List, ast.Tuple)):
            members: list[str] = []
            for elt in expr.elts:
                if isinstance(elt, ast.Name):
                    resolved = self._resolve_name(elt.id)
                    if resolved:
                        members.append(resolved)
                else:
                    self.warnings.append(
                        "dynamic member in dependency list; skipped"
                    )
            return members
        self.warnings.append("dynamic dependency expression; skipped")
        return None

    def _resolve_name(self, name: str) -> Optional[str]:
        if name in self.var_to_task:
            return self.var_to_task[name]
        if name in self._seen_ids:
            return name
        self.invalid_refs.append(name)
        self.warnings.append(f"dependency references unknown task {name!r}")
        return None

    # -- assembly --------------------------------------------------------------------

    def build_graph(self) -> DagGraph:
        known = {t.task_id for t in self.tasks}
        edges: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for upstream, downstream in self.raw_edges:
            if upstream in known and downstream in known:
                edge = (upstream, downstream)
                if edge not in seen:
                    seen.add(edge)
                    edges.append(edge)
        return DagGraph(
            dag_id=self.dag_id,
            tasks=tuple(self.tasks),
            edges=tuple(edges),
            parse_warnings=tuple(self.warnings),
            invalid_refs=tuple(self.invalid_refs),
            task_groups=tuple(self.task_groups),
        )


_NOT_LITERAL = object()


def _literal(node):
    try:
        return ast.literal_eval(node)
    except (ValueError, SyntaxError):
        return _NOT_LITERAL


def _keyword_literal(call: ast.Call, name: str):
    for kw in call.keywords:
        if kw.arg == name:
            value = _literal(kw.value)
            return None if value is _NOT_LITERAL else value
    return None


def _call_name(call: ast.Call) -> str:
    func = call.func
    if isinstance(func, ast.Name):
        return func.id
    if isinstance(func, ast.Attribute):
        return func.attr
    return ""


def _group_name(call: ast.Call) -> str:
    name = _keyword_literal(call, "group_id")
    if name is None and call.args:
        name = _literal(call.args[0])
    return name if isinstance(name, str) else "task_group"


def _sub_bodies(stmt):
    for attr in ("body", "orelse", "finalbody"):
        body = getattr(stmt, attr, None)
        if body:
            yield body
    for handler in getattr(stmt, "handlers", ()):
        yield handler.body


# --------------------------------------------------------------------------
# structural analysis
# --------------------------------------------------------------------------


def is_acyclic(num_nodes: int, edges) -> bool:
    """Kahn's algorithm over integer-indexed nodes."""
    indegree = [0] * num_nodes
    adjacency: list[list[int]] = [[] for _ in range(num_nodes)]
    for upstream, downstream in edges:
        adjacency[upstream].append(downstream)
        indegree[downstream] += 1
    queue = [n for n in range(num_nodes) if indegree[n] == 0]
    visited = 0
    while queue:
        node = queue.pop()
        visited += 1
        for nxt in adjacency[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    return visited == num_nodes


def weak_component_sizes(num_nodes: int, edges) -> list[int]:
    """Sizes of weakly connected components (undirected projection)."""
    parent = list(range(num_nodes))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for upstream, downstream in edges:
        ru, rd = find(upstream), find(downstream)
        if ru != rd:
            parent[ru] = rd

    sizes: dict[int, int] = {}
    for node in range(num_nodes):
        root = find(node)
        sizes[root] = sizes.get(root, 0) + 1
    return sorted(sizes.values(), reverse=True)


def _strongly_connected_components(num_nodes: int, edges) -> list[list[int]]:
    # Iterative Tarjan.
    adjacency: list[list[int]] = [[] for _ in range(num_nodes)]
    for upstream, downstream in edges:
        adjacency[upstream].append(downstream)

    index_of = [-1] * num_nodes
    low = [0] * num_nodes
    on_stack = [False] * num_nodes
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for start in range(num_nodes):
        if index_of[start] != -1:
            continue
        work = [(start, 0)]
        while work:
            node, child_idx = work[-1]
            if child_idx == 0:
                index_of[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            while child_idx < len(adjacency[node]):
                nxt = adjacency[node][child_idx]
                child_idx += 1
                if index_of[nxt] == -1:
                    work[-1] = (node, child_idx)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index_of[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack[member] = False
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
            if work:
                parent_node, _ = work[-1]
                low[parent_node] = min(low[parent_node], low[node])
    return components


def analyze_structure(graph: DagGraph) -> tuple[list[StructuralViolation], GraphMetrics]:
    """Cycle, connectivity and depth/breadth facts plus the Table-style violations."""
    ids = graph.task_ids()
    index = {task_id: i for i, task_id in enumerate(ids)}
    n = len(ids)
    edges = [(index[u], index[d]) for u, d in graph.edges]

    if n == 0:
        metrics = GraphMetrics(
            depth=0, breadth=0, task_count=0, is_acyclic=True, weakly_connected=False
        )
        return [], metrics

    acyclic = is_acyclic(n, edges)
    components = weak_component_sizes(n, edges)

    violations: list[StructuralViolation] = []

    self_loops = {u for u, d in edges if u == d}
    cyclic_sccs = [c for c in _strongly_connected_components(n, edges) if len(c) > 1]
    cycle_count = len(cyclic_sccs) + len(
        self_loops - {m for c in cyclic_sccs for m in c}
    )
    if cycle_count:
        violations.append(
            StructuralViolation(
                kind=ViolationKind.CYCLE,
                count=cycle_count,
                detail=f"{cycle_count} cyclic region(s)",
            )
        )

    multi = [size for size in components if size > 1]
    singles = [size for size in components if size == 1]
    if len(multi) > 1:
        violations.append(
            StructuralViolation(
                kind=ViolationKind.DISCONNECTED_COMPONENT,
                count=len(multi) - 1,
                detail=f"{len(multi)} separate multi-task components",
            )
        )
    if singles:
        violations.append(
            StructuralViolation(
                kind=ViolationKind.ISOLATED_TASK,
                count=len(singles),
                detail=f"{len(singles)} task(s) with no dependencies",
            )
        )

    depth, breadth = _depth_breadth(n, edges)
    metrics = GraphMetrics(
        depth=depth,
        breadth=breadth,
        task_count=n,
        is_acyclic=acyclic,
        weakly_connected=len(components) <= 1,
    )
    return violations, metrics


def _depth_breadth(n: int, edges) -> tuple[int, int]:
    # Longest path (in tasks) and widest topological level, computed on the
    # SCC condensation so cyclic graphs still get defined metrics.
    sccs = _strongly_connected_components(n, edges)
    scc_of = [0] * n
    for scc_idx, members in enumerate(sccs):
        for member in members:
            scc_of[member] = scc_idx
    size = [len(members) for members in sccs]
    m = len(sccs)

    dag_edges: set[tuple[int, int]] = set()
    for upstream, downstream in edges:
        su, sd = scc_of[upstream], scc_of[downstream]
        if su != sd:
            dag_edges.add((su, sd))

    adjacency: list[list[int]] = [[] for _ in range(m)]
    indegree = [0] * m
    for su, sd in dag_edges:
        adjacency[su].append(sd)
        indegree[sd] += 1

    level = [0] * m  # level index per condensation node
    longest = [0] * m  # longest task-count path ending at node
    queue = [i for i in range(m) if indegree[i] == 0]
    for i in queue:
        longest[i] = size[i]
    while queue:
        node = queue.pop()
        for nxt in adjacency[node]:
            level[nxt] = max(level[nxt], level[node] + 1)
            longest[nxt] = max(longest[nxt], longest[node] + size[nxt])
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)

    depth = max(longest) if longest else 0
    width: dict[int, int] = {}
    for node in range(m):
        width[level[node]] = width.get(level[node], 0) + size[node]
    breadth = max(width.values()) if width else 0
    return depth, breadth


def extract_operator_configs(graph: DagGraph) -> list[tuple[str, list[StructuralViolation]]]:
    """Per-operator required-parameter checks plus parse-detected issues."""
    results: list[tuple[str, list[StructuralViolation]]] = []
    for task in graph.tasks:
        issues: list[StructuralViolation] = []
        required = REQUIRED_PARAMS.get(task.operator_kind, DEFAULT_REQUIRED)
        for param in required:
            if not task.config.has(param):
                issues.append(
                    StructuralViolation(
                        kind=ViolationKind.MISSING_REQUIRED_PARAMETER,
                        detail=f"{task.operator_kind} {task.task_id!r} lacks {param!r}",
                    )
                )
        results.append((task.task_id, issues))

    for ref in graph.invalid_refs:
        results.append(
            (
                ref,
                [
                    StructuralViolation(
                        kind=ViolationKind.INVALID_DEPENDENCY,
                        detail=f"dependency names unknown task {ref!r}",
                    )
                ],
            )
        )
    for group_name, members in graph.task_groups:
        if members == 0:
            results.append(
                (
                    group_name,
                    [
                        StructuralViolation(
                            kind=ViolationKind.EMPTY_TASK_GROUP,
                            detail=f"task group {group_name!r} has no members",
                        )
                    ],
                )
            )
    return results


def dump_graph(graph: DagGraph, metrics: GraphMetrics) -> str:
    """Debug dump consumed by humans and scripts alike."""
    return json.dumps(
        {**graph.to_dict(), "metrics": metrics.to_dict()},
        indent=2,
        ensure_ascii=False,
    )
