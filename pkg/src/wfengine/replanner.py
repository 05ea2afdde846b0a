"""Interactive workflow refinement.

A refinement request set constrains replanning: avoid a service (or a whole
class), force a service in, order one service before another, or change the
workflow's inputs/outputs.  Candidates are enumerated globally via the
planner, filtered by the constraints, and ranked by similarity to the
original workflow — either the cheap node-only approximation or the full
three-level measure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .planner import (CompositionProblem, NoPlanError, compose_workflows)
from .registry import Registry
from .similarity import (NodeSimilarity, NodeSimWeights, SimilarityReport,
                         WorkflowSimWeights, sim_nodes_workflows, sim_workflows)
from .workflow import Workflow


class RefinementError(Exception):
    pass


class UnknownTargetError(RefinementError):
    pass


class NoCandidateError(RefinementError):
    """No workflow satisfies the request set within the horizon.

    filtered is True when the planner did find workflows but every one was
    rejected by the constraints (a contradictory request set).
    """

    def __init__(self, message: str, filtered: bool = False):
        super().__init__(message)
        self.filtered = filtered


@dataclass(frozen=True)
class ChangeIO:
    new_initial: tuple[tuple[str, str], ...] | None = None
    new_goal: tuple[tuple[str, str], ...] | None = None

    def to_dict(self) -> dict:
        d: dict = {"type": "change_io"}
        if self.new_initial is not None:
            d["initial"] = [{"resource": r, "format": f} for r, f in self.new_initial]
        if self.new_goal is not None:
            d["goal"] = [{"resource": r, "format": f} for r, f in self.new_goal]
        return d


@dataclass(frozen=True)
class Avoid:
    target: str  # service or service-class name

    def to_dict(self) -> dict:
        return {"type": "avoid", "target": self.target}


@dataclass(frozen=True)
class Include:
    target: str

    def to_dict(self) -> dict:
        return {"type": "include", "target": self.target}


@dataclass(frozen=True)
class OrderBefore:
    first: str  # service names
    second: str

    def to_dict(self) -> dict:
        return {"type": "order_before", "first": self.first, "second": self.second}


Request = ChangeIO | Avoid | Include | OrderBefore


def request_from_dict(doc: dict) -> Request:
    try:
        kind = doc["type"]
        if kind == "avoid":
            return Avoid(doc["target"])
        if kind == "include":
            return Include(doc["target"])
        if kind == "order_before":
            return OrderBefore(doc["first"], doc["second"])
        if kind == "change_io":
            initial = goal = None
            if "initial" in doc:
                initial = tuple((e["resource"], e["format"]) for e in doc["initial"])
            if "goal" in doc:
                goal = tuple((e["resource"], e["format"]) for e in doc["goal"])
            return ChangeIO(initial, goal)
    except (KeyError, TypeError) as e:
        raise RefinementError(f"malformed request document: {e}") from e
    raise RefinementError(f"unknown request type {doc.get('type')!r}")


def requests_from_list(docs: list[dict]) -> list[Request]:
    return [request_from_dict(d) for d in docs]


def _matches_target(registry: Registry, service: str, target: str) -> bool:
    """True when the node's service is the target itself or belongs to the
    target class, transitively through the class taxonomy."""
    if service == target:
        return True
    if target in registry.service_classes:
        return registry.services_taxonomy.is_subclass(
            registry.service(service).service_class, target)
    return False


def _check_target(registry: Registry, target: str):
    if not registry.has_name(target):
        raise UnknownTargetError(f"unknown service or class {target!r}")


def check_constraints(registry: Registry, workflow: Workflow,
                      requests: list[Request]) -> list[str]:
    """Violations of the request set against a workflow; empty list means
    the workflow satisfies every request."""
    violations: list[str] = []
    services_in_order = [n.service for n in
                         sorted(workflow.nodes, key=lambda n: n.step)]
    steps_of: dict[str, list[int]] = {}
    for n in workflow.nodes:
        steps_of.setdefault(n.service, []).append(n.step)

    for req in requests:
        if isinstance(req, Avoid):
            _check_target(registry, req.target)
            for n in sorted(workflow.nodes, key=lambda n: n.step):
                if _matches_target(registry, n.service, req.target):
                    violations.append(
                        f"avoid({req.target}): node {n.id} uses {n.service}")
        elif isinstance(req, Include):
            _check_target(registry, req.target)
            if not any(_matches_target(registry, s, req.target)
                       for s in services_in_order):
                violations.append(f"include({req.target}): not used")
        elif isinstance(req, OrderBefore):
            _check_target(registry, req.first)
            _check_target(registry, req.second)
            a_steps = steps_of.get(req.first)
            b_steps = steps_of.get(req.second)
            # vacuously satisfied when either endpoint never occurs; pair the
            # request with Include to demand presence
            if a_steps and b_steps:
                if not any(a < b for a in a_steps for b in b_steps):
                    violations.append(
                        f"order_before({req.first},{req.second}): "
                        f"no occurrence of {req.first} precedes {req.second}")
        elif isinstance(req, ChangeIO):
            if req.new_initial is not None:
                have = {(m.resource, m.format) for m in workflow.initial}
                want = set(req.new_initial)
                if have != want:
                    violations.append("change_io: initial resources differ")
            if req.new_goal is not None:
                have = {(g.resource, g.format) for g in workflow.goal}
                want = set(req.new_goal)
                if have != want:
                    violations.append("change_io: goal resources differ")
        else:
            raise RefinementError(f"unknown request {req!r}")
    return violations


@dataclass
class RefinementResult:
    original: Workflow
    mode: str  # "approx" | "exact"
    candidates: list[tuple[Workflow, SimilarityReport, float]] = field(default_factory=list)
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "truncated": self.truncated,
            "original": self.original.to_dict(),
            "candidates": [
                {"workflow": wf.to_dict(),
                 "similarity": report.to_dict() if report is not None else None,
                 "score": score}
                for wf, report, score in self.candidates
            ],
        }


def _problem_from(original: Workflow, requests: list[Request],
                  horizon: int | None) -> CompositionProblem:
    initial = tuple(sorted({(m.resource, m.format) for m in original.initial}))
    goal = tuple(sorted({(g.resource, g.format) for g in original.goal}))
    for req in requests:
        if isinstance(req, ChangeIO):
            if req.new_initial is not None:
                initial = tuple(sorted(set(req.new_initial)))
            if req.new_goal is not None:
                goal = tuple(sorted(set(req.new_goal)))
    if horizon is None:
        horizon = len(original.nodes) + 1
    return CompositionProblem(initial=initial, goal=goal, horizon=max(horizon, 1))


def refine(registry: Registry, original: Workflow, requests: list[Request],
           mode: str = "exact", horizon: int | None = None,
           candidate_cap: int = 500,
           sim_weights: WorkflowSimWeights = WorkflowSimWeights(),
           node_weights: NodeSimWeights = NodeSimWeights(),
           deadline: float | None = None) -> RefinementResult:
    """Enumerate, filter, score, and rank replacement workflows.

    mode "approx" ranks by the node-only double sum; "exact" ranks by the
    full combined similarity (the enumerate-score-keep loop).
    """
    if mode not in ("approx", "exact"):
        raise RefinementError(f"unknown mode {mode!r}")
    for req in requests:
        if isinstance(req, Avoid) or isinstance(req, Include):
            _check_target(registry, req.target)
        elif isinstance(req, OrderBefore):
            _check_target(registry, req.first)
            _check_target(registry, req.second)

    problem = _problem_from(original, requests, horizon)
    try:
        pool = compose_workflows(registry, problem, exhaustive=True,
                                 deadline=deadline)
    except NoPlanError:
        raise NoCandidateError("no workflow satisfies the requests "
                               f"within horizon {problem.horizon}") from None

    satisfying = [wf for wf in pool
                  if not check_constraints(registry, wf, requests)]
    if not satisfying:
        raise NoCandidateError("no enumerated workflow satisfies the requests",
                               filtered=True)

    truncated = len(satisfying) > candidate_cap
    satisfying = satisfying[:candidate_cap]

    node_sim = NodeSimilarity(registry, node_weights)
    scored: list[tuple[Workflow, SimilarityReport, float]] = []
    for wf in satisfying:
        if mode == "approx":
            score = sim_nodes_workflows(original, wf, registry, node_sim=node_sim)
            report = None
        else:
            report = sim_workflows(original, wf, registry, weights=sim_weights,
                                   node_weights=node_weights, node_sim=node_sim)
            score = report.combined
        scored.append((wf, report, score))
    scored.sort(key=lambda item: (-item[2],) + item[0].canonical_key())
    return RefinementResult(original=original, mode=mode, candidates=scored,
                            truncated=truncated)


def most_similar(candidates: list[Workflow], original: Workflow,
                 registry: Registry, mode: str = "exact",
                 sim_weights: WorkflowSimWeights = WorkflowSimWeights(),
                 node_weights: NodeSimWeights = NodeSimWeights()):
    """Argmax of the mode's similarity score over an explicit candidate
    list; matches the head of refine's ordering."""
    if not candidates:
        raise RefinementError("empty candidate list")
    node_sim = NodeSimilarity(registry, node_weights)
    best = None
    for wf in candidates:
        report = sim_workflows(original, wf, registry, weights=sim_weights,
                               node_weights=node_weights, node_sim=node_sim)
        if mode == "approx":
            score = sim_nodes_workflows(original, wf, registry, node_sim=node_sim)
        else:
            score = report.combined
        key = (-score,) + wf.canonical_key()
        if best is None or key < best[0]:
            best = (key, wf, report)
    return best[1], best[2]
