"""Workflow DAGs: representation, (de)serialization, canonical order, validation.

A workflow is the materialized result of instantiating an abstract plan:
concrete service occurrences as nodes, port-to-port resource handovers as
edges, plus markers tying the graph to the initially available resources and
the requested goal resources.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .registry import Registry


class WorkflowError(Exception):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    service: str
    step: int


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    out_port: str
    in_port: str

    @property
    def label(self) -> tuple[str, str]:
        return (self.out_port, self.in_port)


@dataclass(frozen=True)
class InitialMarker:
    """One consumption (or mere presence, dst=None) of an initial resource."""
    resource: str
    format: str
    dst: str | None = None
    in_port: str | None = None


@dataclass(frozen=True)
class GoalMarker:
    resource: str
    format: str


@dataclass(frozen=True)
class Workflow:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    initial: tuple[InitialMarker, ...]
    goal: tuple[GoalMarker, ...]

    def node_by_id(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise WorkflowError(f"no node {node_id!r}")

    def services(self) -> list[str]:
        return [n.service for n in self.nodes]

    def canonical_key(self):
        """Total order used for deterministic tie-breaking everywhere."""
        return (
            len(self.nodes),
            tuple(sorted((n.step, n.service, n.id) for n in self.nodes)),
            tuple(sorted((e.src, e.dst, e.out_port, e.in_port) for e in self.edges)),
            tuple(sorted((m.resource, m.format, m.dst or "", m.in_port or "")
                         for m in self.initial)),
            tuple(sorted((g.resource, g.format) for g in self.goal)),
        )

    def canonical(self) -> "Workflow":
        nodes = tuple(sorted(self.nodes, key=lambda n: (n.step, n.service, n.id)))
        edges = tuple(sorted(self.edges, key=lambda e: (e.src, e.dst, e.out_port, e.in_port)))
        initial = tuple(sorted(self.initial,
                               key=lambda m: (m.resource, m.format, m.dst or "", m.in_port or "")))
        goal = tuple(sorted(self.goal, key=lambda g: (g.resource, g.format)))
        return Workflow(nodes, edges, initial, goal)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        w = self.canonical()
        return {
            "nodes": [{"id": n.id, "service": n.service, "step": n.step} for n in w.nodes],
            "edges": [{"src": e.src, "dst": e.dst, "out_port": e.out_port,
                       "in_port": e.in_port} for e in w.edges],
            "initial": [{"resource": m.resource, "format": m.format,
                         "dst": m.dst, "in_port": m.in_port} for m in w.initial],
            "goal": [{"resource": g.resource, "format": g.format} for g in w.goal],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Workflow":
        try:
            nodes = tuple(Node(id=n["id"], service=n["service"], step=int(n["step"]))
                          for n in doc["nodes"])
            edges = tuple(Edge(src=e["src"], dst=e["dst"], out_port=e["out_port"],
                               in_port=e["in_port"]) for e in doc["edges"])
            initial = tuple(InitialMarker(resource=m["resource"], format=m["format"],
                                          dst=m.get("dst"), in_port=m.get("in_port"))
                            for m in doc.get("initial", []))
            goal = tuple(GoalMarker(resource=g["resource"], format=g["format"])
                         for g in doc.get("goal", []))
        except (KeyError, TypeError, ValueError) as e:
            raise WorkflowError(f"malformed workflow document: {e}") from e
        return cls(nodes, edges, initial, goal).canonical()

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, raw: str | bytes) -> "Workflow":
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise WorkflowError(f"malformed workflow document: {e}") from e
        if not isinstance(doc, dict):
            raise WorkflowError("workflow document must be an object")
        return cls.from_dict(doc)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def _has_cycle(workflow: Workflow) -> bool:
    adj: dict[str, list[str]] = {n.id: [] for n in workflow.nodes}
    for e in workflow.edges:
        if e.src in adj and e.dst in adj:
            adj[e.src].append(e.dst)
    state: dict[str, int] = {}

    def visit(u: str) -> bool:
        state[u] = 1
        for v in adj[u]:
            s = state.get(v, 0)
            if s == 1:
                return True
            if s == 0 and visit(v):
                return True
        state[u] = 2
        return False

    return any(state.get(u, 0) == 0 and visit(u) for u in adj)


def validate_workflow(registry: Registry, workflow: Workflow) -> ValidationReport:
    """Replay-check a workflow against the registry.

    Independent of the planner: checks DAG-ness, per-edge subclass
    compatibility and format equality, full input coverage, and goal
    coverage.  Violations are data, not exceptions.
    """
    report = ValidationReport()
    v = report.violations

    ids = [n.id for n in workflow.nodes]
    if len(ids) != len(set(ids)):
        v.append("duplicate node id")
        return report
    by_id = {n.id: n for n in workflow.nodes}

    for n in workflow.nodes:
        if n.service not in registry.concrete_services:
            v.append(f"node {n.id}: unknown service {n.service!r}")
    if v:
        return report

    if _has_cycle(workflow):
        v.append("workflow graph contains a cycle")

    fed: dict[tuple[str, str], int] = {}
    for e in workflow.edges:
        if e.src not in by_id or e.dst not in by_id:
            v.append(f"edge {e.src}->{e.dst}: dangling endpoint")
            continue
        src_svc = registry.service(by_id[e.src].service)
        dst_svc = registry.service(by_id[e.dst].service)
        src_cls = registry.service_classes[src_svc.service_class]
        dst_cls = registry.service_classes[dst_svc.service_class]
        out_ports = src_cls.output_ports
        in_ports = dst_cls.input_ports
        if e.out_port not in out_ports:
            v.append(f"edge {e.src}->{e.dst}: no output port {e.out_port!r} on {src_svc.name}")
            continue
        if e.in_port not in in_ports:
            v.append(f"edge {e.src}->{e.dst}: no input port {e.in_port!r} on {dst_svc.name}")
            continue
        produced = out_ports[e.out_port]
        required = in_ports[e.in_port]
        if not registry.resources.is_subclass(produced, required):
            v.append(f"edge {e.src}->{e.dst}: class mismatch "
                     f"({produced!r} is not a subclass of {required!r})")
        f_out = src_svc.output_formats[e.out_port]
        f_in = dst_svc.input_formats[e.in_port]
        if f_out != f_in:
            v.append(f"edge {e.src}->{e.dst}: format mismatch "
                     f"({f_out!r} vs {f_in!r})")
        if by_id[e.src].step >= by_id[e.dst].step:
            v.append(f"edge {e.src}->{e.dst}: producer step not before consumer step")
        fed[(e.dst, e.in_port)] = fed.get((e.dst, e.in_port), 0) + 1

    for m in workflow.initial:
        if m.dst is None:
            continue
        if m.dst not in by_id:
            v.append(f"initial marker {m.resource}: dangling consumer {m.dst!r}")
            continue
        svc = registry.service(by_id[m.dst].service)
        cls = registry.service_classes[svc.service_class]
        if m.in_port not in cls.input_ports:
            v.append(f"initial marker {m.resource}: no input port {m.in_port!r} on {svc.name}")
            continue
        if m.resource not in registry.resources:
            v.append(f"initial marker: unknown resource class {m.resource!r}")
            continue
        if not registry.resources.is_subclass(m.resource, cls.input_ports[m.in_port]):
            v.append(f"initial marker {m.resource}: class mismatch at {m.dst}.{m.in_port}")
        if m.format != svc.input_formats[m.in_port]:
            v.append(f"initial marker {m.resource}: format mismatch at {m.dst}.{m.in_port} "
                     f"({m.format!r} vs {svc.input_formats[m.in_port]!r})")
        fed[(m.dst, m.in_port)] = fed.get((m.dst, m.in_port), 0) + 1

    for n in workflow.nodes:
        cls = registry.service_class_of(n.service)
        for port in cls.input_ports:
            count = fed.get((n.id, port), 0)
            if count == 0:
                v.append(f"node {n.id}: input port {port!r} is not fed")
            elif count > 1:
                v.append(f"node {n.id}: input port {port!r} is fed {count} times")

    for g in workflow.goal:
        if g.resource not in registry.resources:
            v.append(f"goal: unknown resource class {g.resource!r}")
            continue
        covered = any(
            m.resource in registry.resources
            and registry.resources.is_subclass(m.resource, g.resource)
            and m.format == g.format
            for m in workflow.initial)
        if not covered:
            for n in workflow.nodes:
                svc = registry.service(n.service)
                cls = registry.service_classes[svc.service_class]
                for port, rc in cls.outputs:
                    if (registry.resources.is_subclass(rc, g.resource)
                            and svc.output_formats[port] == g.format):
                        covered = True
        if not covered:
            v.append(f"goal {g.resource!r} ({g.format!r}) is not produced")

    return report
