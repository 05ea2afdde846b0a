"""Multi-level workflow similarity.

Three levels, combined by a weighted sum: node similarity (ontology position,
shared inputs/outputs, description TF-IDF cosine), edge similarity (endpoint
nodes plus label resource classes), and topological similarity derived from an
exact graph edit distance.  The node- and edge-level double sums are
implemented verbatim and are deliberately not clamped to [0, 1]; the report
exposes every component so callers can see when values exceed 1.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .registry import Registry
from .workflow import Workflow


class SimilarityError(Exception):
    pass


@dataclass(frozen=True)
class NodeSimWeights:
    w_onto: float = 0.6
    w_inp: float = 0.15
    w_oup: float = 0.15
    w_des: float = 0.1

    def __post_init__(self):
        total = self.w_onto + self.w_inp + self.w_oup + self.w_des
        if abs(total - 1.0) > 1e-9:
            raise SimilarityError(f"node similarity weights must sum to 1, got {total}")


@dataclass(frozen=True)
class EdgeSimWeights:
    w_node: float = 0.5
    w_label: float = 0.5

    def __post_init__(self):
        if abs(self.w_node + self.w_label - 1.0) > 1e-9:
            raise SimilarityError("edge similarity weights must sum to 1")


@dataclass(frozen=True)
class WorkflowSimWeights:
    w_no: float = 0.45
    w_ed: float = 0.35
    w_to: float = 0.2

    def __post_init__(self):
        if abs(self.w_no + self.w_ed + self.w_to - 1.0) > 1e-9:
            raise SimilarityError("workflow similarity weights must sum to 1")


# ---------------------------------------------------------------------------
# Description similarity: TF-IDF cosine, implemented natively

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


class TfIdfModel:
    """TF = raw count, IDF = ln((1 + N) / (1 + df)) + 1 over a corpus."""

    def __init__(self, corpus: list[str]):
        self.n_docs = len(corpus)
        self.df: Counter = Counter()
        for doc in corpus:
            self.df.update(set(tokenize(doc)))

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df.get(term, 0))) + 1.0

    def vector(self, text: str) -> dict[str, float]:
        tf = Counter(tokenize(text))
        return {term: count * self.idf(term) for term, count in tf.items()}

    def cosine(self, a: str, b: str) -> float:
        va, vb = self.vector(a), self.vector(b)
        if not va and not vb:
            return 1.0  # two empty descriptions
        if not va or not vb:
            return 0.0
        dot = sum(w * vb.get(t, 0.0) for t, w in va.items())
        na = math.sqrt(sum(w * w for w in va.values()))
        nb = math.sqrt(sum(w * w for w in vb.values()))
        return dot / (na * nb)


# ---------------------------------------------------------------------------
# Node-level similarity (operates on concrete service names)


def onto_distance_services(registry: Registry, s1: str, s2: str) -> int | None:
    """Ontology distance between two concrete services, treating each
    service as an implicit leaf child of its class.  None across disjoint
    taxonomy roots."""
    if s1 == s2:
        return 0
    c1 = registry.service(s1).service_class
    c2 = registry.service(s2).service_class
    d = registry.services_taxonomy.onto_distance(c1, c2)
    if d is None:
        return None
    return d + 2  # one leaf edge below each class


def sim_nodes_onto(registry: Registry, s1: str, s2: str) -> float:
    d = onto_distance_services(registry, s1, s2)
    if d is None:
        return 0.0
    return 1.0 / (1.0 + d)


def _dice(a: set, b: set) -> float:
    if not a and not b:
        return 1.0  # both port sets empty
    return 2.0 * len(a & b) / (len(a) + len(b))


def sim_nodes_inp(registry: Registry, s1: str, s2: str) -> float:
    i1 = {rc for _, rc in registry.service_class_of(s1).inputs}
    i2 = {rc for _, rc in registry.service_class_of(s2).inputs}
    return _dice(i1, i2)


def sim_nodes_oup(registry: Registry, s1: str, s2: str) -> float:
    o1 = {rc for _, rc in registry.service_class_of(s1).outputs}
    o2 = {rc for _, rc in registry.service_class_of(s2).outputs}
    return _dice(o1, o2)


def sim_nodes_des(registry: Registry, s1: str, s2: str,
                  model: TfIdfModel | None = None) -> float:
    if model is None:
        model = TfIdfModel(registry.descriptions_corpus())
    d1 = registry.service(s1).description
    d2 = registry.service(s2).description
    return model.cosine(d1, d2)


class NodeSimilarity:
    """Cached pairwise node similarity over one registry."""

    def __init__(self, registry: Registry,
                 weights: NodeSimWeights = NodeSimWeights(),
                 model: TfIdfModel | None = None):
        self.registry = registry
        self.weights = weights
        self.model = model or TfIdfModel(registry.descriptions_corpus())
        self._cache: dict[tuple[str, str], float] = {}

    def sim(self, s1: str, s2: str) -> float:
        key = (s1, s2) if s1 <= s2 else (s2, s1)
        if key not in self._cache:
            w = self.weights
            self._cache[key] = (
                w.w_onto * sim_nodes_onto(self.registry, *key)
                + w.w_inp * sim_nodes_inp(self.registry, *key)
                + w.w_oup * sim_nodes_oup(self.registry, *key)
                + w.w_des * sim_nodes_des(self.registry, *key, model=self.model))
        return self._cache[key]


def sim_nodes(registry: Registry, s1: str, s2: str,
              weights: NodeSimWeights = NodeSimWeights(),
              model: TfIdfModel | None = None) -> float:
    return NodeSimilarity(registry, weights, model).sim(s1, s2)


def sim_nodes_workflows(g1: Workflow, g2: Workflow, registry: Registry,
                        node_sim: NodeSimilarity | None = None) -> float:
    n1, n2 = len(g1.nodes), len(g2.nodes)
    if n1 + n2 == 0:
        raise SimilarityError("node similarity of two empty workflows is undefined")
    ns = node_sim or NodeSimilarity(registry)
    # fsum is exactly rounded, so the result is independent of argument
    # order and the double sum is bitwise symmetric
    total = math.fsum(ns.sim(v1.service, v2.service)
                      for v1 in g1.nodes for v2 in g2.nodes)
    return 2.0 * total / (n1 + n2)


# ---------------------------------------------------------------------------
# Edge-level similarity


def _edge_label_classes(registry: Registry, wf: Workflow, edge) -> tuple[str, str]:
    src_cls = registry.service_class_of(wf.node_by_id(edge.src).service)
    dst_cls = registry.service_class_of(wf.node_by_id(edge.dst).service)
    return (src_cls.output_ports[edge.out_port], dst_cls.input_ports[edge.in_port])


def sim_ed_nod(registry: Registry, g1: Workflow, e1, g2: Workflow, e2,
               node_sim: NodeSimilarity | None = None) -> float:
    ns = node_sim or NodeSimilarity(registry)
    return 0.5 * (ns.sim(g1.node_by_id(e1.src).service, g2.node_by_id(e2.src).service)
                  + ns.sim(g1.node_by_id(e1.dst).service, g2.node_by_id(e2.dst).service))


def sim_ed_re(registry: Registry, g1: Workflow, e1, g2: Workflow, e2) -> float:
    o1, i1 = _edge_label_classes(registry, g1, e1)
    o2, i2 = _edge_label_classes(registry, g2, e2)
    d_out = registry.resources.onto_distance(o1, o2)
    d_in = registry.resources.onto_distance(i1, i2)
    if d_out is None or d_in is None:
        return 0.0  # disjoint taxonomies behave as infinite distance
    return 1.0 / (1.0 + 0.5 * (d_out + d_in))


def sim_edges(registry: Registry, g1: Workflow, e1, g2: Workflow, e2,
              weights: EdgeSimWeights = EdgeSimWeights(),
              node_sim: NodeSimilarity | None = None) -> float:
    return (weights.w_node * sim_ed_nod(registry, g1, e1, g2, e2, node_sim)
            + weights.w_label * sim_ed_re(registry, g1, e1, g2, e2))


def sim_edges_workflows(g1: Workflow, g2: Workflow, registry: Registry,
                        weights: EdgeSimWeights = EdgeSimWeights(),
                        node_sim: NodeSimilarity | None = None) -> float:
    m1, m2 = len(g1.edges), len(g2.edges)
    if m1 == 0 and m2 == 0:
        return 1.0
    if m1 == 0 or m2 == 0:
        return 0.0
    ns = node_sim or NodeSimilarity(registry)
    total = math.fsum(sim_edges(registry, g1, e1, g2, e2, weights, ns)
                      for e1 in g1.edges for e2 in g2.edges)
    return 2.0 * total / (m1 + m2)


# ---------------------------------------------------------------------------
# Topological similarity: exact graph edit distance, unit costs


def _edge_labels(wf: Workflow) -> dict[tuple[str, str], Counter]:
    labels: dict[tuple[str, str], Counter] = {}
    for e in wf.edges:
        labels.setdefault((e.src, e.dst), Counter())[e.label] += 1
    return labels


def _pair_edge_cost(a: Counter | None, b: Counter | None) -> int:
    ca = sum(a.values()) if a else 0
    cb = sum(b.values()) if b else 0
    if ca == 0 and cb == 0:
        return 0
    matched = sum((a & b).values()) if a and b else 0
    return max(ca, cb) - matched


def _mapping_cost(g1: Workflow, g2: Workflow,
                  mapping: dict[str, str | None]) -> int:
    """Edit cost of one complete node mapping (None = deletion)."""
    labels1 = _edge_labels(g1)
    labels2 = _edge_labels(g2)
    cost = 0
    for v1 in g1.nodes:
        img = mapping[v1.id]
        if img is None:
            cost += 1
        elif g2.node_by_id(img).service != v1.service:
            cost += 1
    images = {img for img in mapping.values() if img is not None}
    cost += sum(1 for v2 in g2.nodes if v2.id not in images)
    ids1 = [n.id for n in g1.nodes]
    for u, v in itertools.permutations(ids1, 2):
        a = labels1.get((u, v))
        if mapping[u] is None or mapping[v] is None:
            cost += sum(a.values()) if a else 0
        else:
            cost += _pair_edge_cost(a, labels2.get((mapping[u], mapping[v])))
    # edges of g2 with an endpoint that is not any node's image
    for (u2, v2), lab in labels2.items():
        if u2 not in images or v2 not in images:
            cost += sum(lab.values())
    return cost


def dist_topo(g1: Workflow, g2: Workflow,
              exact_bound: int = 12) -> tuple[int, bool]:
    """(edit distance, exact?) under unit costs.

    Node substitution is free only between occurrences of the same concrete
    service; edge substitution is free only between edges with the same
    (out_port, in_port) label.  Beyond exact_bound nodes a greedy upper
    bound is returned, flagged as inexact.
    """
    nodes1 = sorted(g1.nodes, key=lambda n: (n.step, n.id))
    nodes2 = sorted(g2.nodes, key=lambda n: (n.step, n.id))
    n1, n2 = len(nodes1), len(nodes2)

    def greedy() -> dict[str, str | None]:
        mapping: dict[str, str | None] = {}
        unused = list(nodes2)
        for v1 in nodes1:
            pick = None
            for v2 in unused:
                if v2.service == v1.service:
                    pick = v2
                    break
            if pick is None and unused:
                pick = unused[0]
            if pick is not None:
                unused.remove(pick)
                mapping[v1.id] = pick.id
            else:
                mapping[v1.id] = None
        return mapping

    greedy_cost = _mapping_cost(g1, g2, greedy())
    if max(n1, n2) > exact_bound:
        return greedy_cost, False

    labels1 = _edge_labels(g1)
    labels2 = _edge_labels(g2)
    best = greedy_cost
    assignment: dict[str, str | None] = {}
    used: set[str] = set()

    def node_cost(v1, v2id: str | None) -> int:
        if v2id is None:
            return 1
        return 0 if next(n for n in nodes2 if n.id == v2id).service == v1.service else 1

    def incremental_edge_cost(i: int, v2id: str | None) -> int:
        v1id = nodes1[i].id
        cost = 0
        for k in range(i):
            uid = nodes1[k].id
            for a_key, b_key in (((v1id, uid), (v2id, assignment[uid])),
                                 ((uid, v1id), (assignment[uid], v2id))):
                a = labels1.get(a_key)
                if v2id is None or assignment[uid] is None:
                    cost += sum(a.values()) if a else 0
                else:
                    cost += _pair_edge_cost(a, labels2.get(b_key))
        return cost

    def finish_cost() -> int:
        images = set(used)
        cost = sum(1 for v2 in nodes2 if v2.id not in images)
        for (u2, v2), lab in labels2.items():
            if u2 not in images or v2 not in images:
                cost += sum(lab.values())
        return cost

    def dfs(i: int, cost: int):
        nonlocal best
        if cost >= best:
            return
        if i == n1:
            total = cost + finish_cost()
            if total < best:
                best = total
            return
        v1 = nodes1[i]
        options: list[str | None] = [v2.id for v2 in nodes2 if v2.id not in used]
        options.append(None)
        # try same-service images first for tighter early bounds
        options.sort(key=lambda o: 0 if (o is not None and
                                         next(n for n in nodes2 if n.id == o).service == v1.service)
                     else 1)
        for opt in options:
            delta = node_cost(v1, opt) + incremental_edge_cost(i, opt)
            remaining1 = n1 - i - 1
            unused2 = n2 - len(used) - (0 if opt is None else 1)
            lower = abs(remaining1 - unused2)
            if cost + delta + lower >= best:
                continue
            assignment[v1.id] = opt
            if opt is not None:
                used.add(opt)
            dfs(i + 1, cost + delta)
            if opt is not None:
                used.discard(opt)
            del assignment[v1.id]

    dfs(0, 0)
    return best, True


def sim_topo(g1: Workflow, g2: Workflow, exact_bound: int = 12) -> float:
    d, _ = dist_topo(g1, g2, exact_bound=exact_bound)
    return 1.0 / (1.0 + d)


# ---------------------------------------------------------------------------
# Combined workflow similarity


@dataclass
class SimilarityReport:
    node_level: float
    edge_level: float
    topo_level: float
    combined: float
    edit_distance: int
    edit_distance_exact: bool
    node_ids_a: list[str] = field(default_factory=list)
    node_ids_b: list[str] = field(default_factory=list)
    node_matrix: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "node_level": self.node_level,
            "edge_level": self.edge_level,
            "topo_level": self.topo_level,
            "combined": self.combined,
            "edit_distance": self.edit_distance,
            "edit_distance_exact": self.edit_distance_exact,
            "node_ids_a": list(self.node_ids_a),
            "node_ids_b": list(self.node_ids_b),
            "node_matrix": [list(row) for row in self.node_matrix],
        }


def sim_workflows(g1: Workflow, g2: Workflow, registry: Registry,
                  weights: WorkflowSimWeights = WorkflowSimWeights(),
                  node_weights: NodeSimWeights = NodeSimWeights(),
                  edge_weights: EdgeSimWeights = EdgeSimWeights(),
                  exact_bound: int = 12,
                  node_sim: NodeSimilarity | None = None) -> SimilarityReport:
    ns = node_sim or NodeSimilarity(registry, node_weights)
    node_level = sim_nodes_workflows(g1, g2, registry, node_sim=ns)
    edge_level = sim_edges_workflows(g1, g2, registry, weights=edge_weights,
                                     node_sim=ns)
    distance, exact = dist_topo(g1, g2, exact_bound=exact_bound)
    topo_level = 1.0 / (1.0 + distance)
    combined = (weights.w_no * node_level + weights.w_ed * edge_level
                + weights.w_to * topo_level)
    matrix = [[ns.sim(v1.service, v2.service) for v2 in g2.nodes]
              for v1 in g1.nodes]
    return SimilarityReport(
        node_level=node_level,
        edge_level=edge_level,
        topo_level=topo_level,
        combined=combined,
        edit_distance=distance,
        edit_distance_exact=exact,
        node_ids_a=[n.id for n in g1.nodes],
        node_ids_b=[n.id for n in g2.nodes],
        node_matrix=matrix,
    )
