"""Two-stage workflow composition.

Stage one plans over service classes: one class occurrence per step, inputs
bound to resources produced at earlier steps (or available initially), outputs
becoming available at the following step, resources persisting forever.

Stage two instantiates each abstract step with a concrete service and repairs
data-format mismatches along the edges by inserting converter services
(services whose class maps a resource class onto itself while changing the
format).  Only instantiations with the minimal number of insertions are kept.
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass

from .registry import Registry, ServiceClass
from .workflow import Edge, GoalMarker, InitialMarker, Node, Workflow


class PlanningError(Exception):
    pass


class InvalidProblemError(PlanningError):
    """The composition problem references unknown classes or formats."""


class NoPlanError(PlanningError):
    """No plan exists within the horizon."""


class UninstantiableError(PlanningError):
    """An abstract plan has no concrete realization."""


class TimeBudgetExceeded(PlanningError):
    def __init__(self, partial):
        super().__init__("time budget exceeded")
        self.partial = partial


@dataclass(frozen=True)
class CompositionProblem:
    """Initially available resources and requested goal resources, with
    data formats, plus the maximum plan length to consider."""
    initial: tuple[tuple[str, str], ...]  # (resource class, format)
    goal: tuple[tuple[str, str], ...]
    horizon: int = 8

    def validate(self, registry: Registry):
        if self.horizon < 1:
            raise InvalidProblemError("horizon must be >= 1")
        if not self.goal:
            raise InvalidProblemError("problem has no goal resources")
        for kind, pairs in (("initial", self.initial), ("goal", self.goal)):
            for resource, fmt in pairs:
                if resource not in registry.resources:
                    raise InvalidProblemError(f"{kind}: unknown resource class {resource!r}")
                if fmt not in registry.data_formats:
                    raise InvalidProblemError(f"{kind}: unknown format {fmt!r}")

    def to_dict(self) -> dict:
        return {
            "initial": [{"resource": r, "format": f} for r, f in self.initial],
            "goal": [{"resource": r, "format": f} for r, f in self.goal],
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CompositionProblem":
        try:
            return cls(
                initial=tuple((e["resource"], e["format"]) for e in doc.get("initial", [])),
                goal=tuple((e["resource"], e["format"]) for e in doc["goal"]),
                horizon=int(doc.get("horizon", 8)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidProblemError(f"malformed problem document: {e}") from e


@dataclass(frozen=True)
class Binding:
    """One input-port binding of an abstract step.

    produced_at is the step at which the consumed resource became available:
    0 for initially given resources, otherwise producer step + 1.
    """
    consumer: str
    port: str
    step: int
    resource: str
    produced_at: int


@dataclass(frozen=True)
class AbstractPlan:
    steps: tuple[str, ...]  # class name at step i+1
    bindings: tuple[Binding, ...]
    problem: CompositionProblem

    def sort_key(self):
        return (len(self.steps), self.steps,
                tuple((b.step, b.port, b.resource, b.produced_at) for b in self.bindings))

    def identity(self):
        return (self.steps, self.bindings)


def executable_bindings(registry: Registry,
                        state: set[tuple[str, int]],
                        service_class: ServiceClass,
                        t: int) -> list[tuple[Binding, ...]]:
    """All complete binding choices for executing service_class at step t.

    state holds (resource class, available-at-step) pairs.  Empty result
    means the class is not executable at t.
    """
    per_port: list[list[tuple[str, int]]] = []
    for port, required in service_class.inputs:
        options = sorted((res, at) for res, at in state
                         if at <= t and registry.resources.is_subclass(res, required))
        if not options:
            return []
        per_port.append(options)
    choices = []
    for combo in itertools.product(*per_port):
        choices.append(tuple(
            Binding(consumer=service_class.name, port=port, step=t,
                    resource=res, produced_at=at)
            for (port, _), (res, at) in zip(service_class.inputs, combo)))
    return choices


def _goal_satisfied(registry: Registry, state: set[tuple[str, int]],
                    problem: CompositionProblem) -> bool:
    for goal_res, _ in problem.goal:
        if not any(registry.resources.is_subclass(res, goal_res) for res, _ in state):
            return False
    return True


class _ReachabilityCache:
    """Relaxed reachability: can all goals be covered within k more steps,
    ignoring the one-class-per-step restriction on bindings already made?
    Over-approximates, so it never prunes a feasible branch."""

    def __init__(self, registry: Registry, problem: CompositionProblem):
        self.registry = registry
        self.goals = [g for g, _ in problem.goal]
        self.cache: dict[tuple[frozenset, int], bool] = {}

    def feasible(self, avail: frozenset[str], k: int) -> bool:
        key = (avail, k)
        if key in self.cache:
            return self.cache[key]
        reg = self.registry
        current = set(avail)
        for _ in range(k):
            if self._covered(current):
                break
            added = False
            for cls in reg.service_classes.values():
                if all(any(reg.resources.is_subclass(r, req) for r in current)
                       for _, req in cls.inputs):
                    for _, out in cls.outputs:
                        if out not in current:
                            current.add(out)
                            added = True
            if not added:
                break
        result = self._covered(current)
        self.cache[key] = result
        return result

    def _covered(self, avail: set[str]) -> bool:
        return all(any(self.registry.resources.is_subclass(r, g) for r in avail)
                   for g in self.goals)


def compose_abstract(registry: Registry,
                     problem: CompositionProblem,
                     exhaustive: bool = False,
                     deadline: float | None = None) -> list[AbstractPlan]:
    """Enumerate abstract plans.

    Default mode returns every plan of the minimal length with at least one
    plan; exhaustive mode returns all plans of every length up to the
    horizon.  Output order is canonical: by length, then step names, then
    bindings.  Raises NoPlanError when nothing fits within the horizon.
    """
    problem.validate(registry)
    reach = _ReachabilityCache(registry, problem)
    classes = [registry.service_classes[n] for n in sorted(registry.service_classes)]
    found: dict[tuple, AbstractPlan] = {}

    def search(n: int, t: int, state: set[tuple[str, int]],
               steps: list[str], bindings: list[Binding]):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded(sorted(found.values(), key=AbstractPlan.sort_key))
        if t > n:
            if _goal_satisfied(registry, state, problem):
                plan = AbstractPlan(tuple(steps), tuple(bindings), problem)
                found[plan.identity()] = plan
            return
        avail = frozenset(res for res, _ in state)
        if not reach.feasible(avail, n - t + 1):
            return
        for cls in classes:
            for choice in executable_bindings(registry, state, cls, t):
                new_resources = [(out, t + 1) for _, out in cls.outputs
                                 if (out, t + 1) not in state]
                state.update(new_resources)
                steps.append(cls.name)
                bindings.extend(choice)
                search(n, t + 1, state, steps, bindings)
                del bindings[len(bindings) - len(choice):]
                steps.pop()
                state.difference_update(new_resources)

    initial_state = {(res, 0) for res, _ in problem.initial}
    for n in range(0, problem.horizon + 1):
        search(n, 1, set(initial_state), [], [])
        if found and not exhaustive:
            break
    if not found:
        raise NoPlanError(f"no plan within horizon {problem.horizon}")
    return sorted(found.values(), key=AbstractPlan.sort_key)


# ---------------------------------------------------------------------------
# Stage two: instantiation with format repair


def converter_services(registry: Registry) -> list[str]:
    """Services whose class maps one resource class onto itself (structural
    converter detection; the registry carries no converter flag)."""
    names = []
    for name in sorted(registry.concrete_services):
        cls = registry.service_class_of(name)
        if (len(cls.inputs) == 1 and len(cls.outputs) == 1
                and cls.inputs[0][1] == cls.outputs[0][1]):
            names.append(name)
    return names


def _converter_chains(registry: Registry, resource: str, fmt_from: str,
                      fmt_to: str, required: str) -> list[list[str]]:
    """All shortest converter-service chains turning (resource, fmt_from)
    into something of format fmt_to whose class still satisfies required.
    Empty inner list means no conversion needed; empty outer list means no
    chain exists."""
    res_tax = registry.resources
    if fmt_from == fmt_to and res_tax.is_subclass(resource, required):
        return [[]]
    convs = converter_services(registry)
    start = (fmt_from, resource)
    # BFS over (format, carried class); collect predecessors per level
    level = {start: 0}
    preds: dict[tuple[str, str], list[tuple[tuple[str, str], str]]] = {start: []}
    frontier = deque([start])
    accept: list[tuple[str, str]] = []
    accept_level = None
    while frontier:
        cur = frontier.popleft()
        d = level[cur]
        if accept_level is not None and d >= accept_level:
            break
        cur_fmt, cur_cls = cur
        for svc_name in convs:
            svc = registry.service(svc_name)
            cls = registry.service_class_of(svc_name)
            in_port, in_cls = cls.inputs[0]
            out_port, out_cls = cls.outputs[0]
            if not res_tax.is_subclass(cur_cls, in_cls):
                continue
            if svc.input_formats[in_port] != cur_fmt:
                continue
            nxt = (svc.output_formats[out_port], out_cls)
            if nxt == cur:
                continue
            if nxt not in level:
                level[nxt] = d + 1
                preds[nxt] = []
                frontier.append(nxt)
                if nxt[0] == fmt_to and res_tax.is_subclass(nxt[1], required):
                    accept.append(nxt)
                    accept_level = d + 1
            if level[nxt] == d + 1:
                preds[nxt].append((cur, svc_name))
    if not accept:
        return []
    chains: list[list[str]] = []

    def backtrack(node, suffix):
        if node == start:
            chains.append(list(suffix))
            return
        for prev, svc_name in preds[node]:
            backtrack(prev, [svc_name] + suffix)

    for node in accept:
        backtrack(node, [])
    chains.sort()
    return chains


def instantiate(registry: Registry, plan: AbstractPlan) -> list[Workflow]:
    """All minimal-insertion concrete realizations of an abstract plan.

    Raises UninstantiableError when some step's class has no concrete
    service, or some format mismatch has no converter chain.
    """
    problem = plan.problem
    n = len(plan.steps)
    per_step: list[list[str]] = []
    for cls_name in plan.steps:
        candidates = registry.concrete_by_class.get(cls_name, [])
        if not candidates:
            raise UninstantiableError(f"class {cls_name!r} has no concrete service")
        per_step.append(candidates)

    bindings_by_step: dict[int, list[Binding]] = {}
    for b in plan.bindings:
        bindings_by_step.setdefault(b.step, []).append(b)
    for bs in bindings_by_step.values():
        bs.sort(key=lambda b: b.port)

    results: dict[tuple, tuple[int, Workflow]] = {}
    best_insertions: int | None = None

    for assignment in itertools.product(*per_step):
        ok = True
        # each connection: (producer ref, out choices, consumer step, in port,
        # resource, required class).  producer ref: ("node", step) | ("init", idx)
        connections = []
        for t in range(1, n + 1):
            consumer = registry.service(assignment[t - 1])
            consumer_cls = registry.service_classes[consumer.service_class]
            required_by_port = consumer_cls.input_ports
            for b in bindings_by_step.get(t, []):
                required = required_by_port[b.port]
                if b.produced_at == 0:
                    init_idxs = [i for i, (res, _) in enumerate(problem.initial)
                                 if res == b.resource]
                    options = [(("init", i), None) for i in init_idxs]
                else:
                    p_step = b.produced_at - 1
                    p_cls = registry.service_classes[
                        registry.service(assignment[p_step - 1]).service_class]
                    ports = [p for p, rc in p_cls.outputs if rc == b.resource]
                    options = [(("node", p_step), p) for p in ports]
                if not options:
                    ok = False
                    break
                connections.append((options, t, b.port, b.resource, required))
            if not ok:
                break
        if not ok:
            continue

        option_sets = []
        for options, t, in_port, resource, required in connections:
            variants = []
            for producer, out_port in options:
                if producer[0] == "init":
                    fmt_from = problem.initial[producer[1]][1]
                else:
                    svc = registry.service(assignment[producer[1] - 1])
                    fmt_from = svc.output_formats[out_port]
                fmt_to = registry.service(assignment[t - 1]).input_formats[in_port]
                for chain in _converter_chains(registry, resource, fmt_from,
                                               fmt_to, required):
                    variants.append((producer, out_port, t, in_port, chain))
            if not variants:
                ok = False
                break
            min_len = min(len(v[4]) for v in variants)
            option_sets.append([v for v in variants if len(v[4]) == min_len])
        if not ok:
            continue

        goal_sets = []
        for goal_res, goal_fmt in problem.goal:
            variants = []
            for i, (res, fmt) in enumerate(problem.initial):
                if registry.resources.is_subclass(res, goal_res):
                    for chain in _converter_chains(registry, res, fmt,
                                                   goal_fmt, goal_res):
                        variants.append((("init", i), None, res, chain))
            for t in range(1, n + 1):
                svc = registry.service(assignment[t - 1])
                cls = registry.service_classes[svc.service_class]
                for port, rc in cls.outputs:
                    if registry.resources.is_subclass(rc, goal_res):
                        for chain in _converter_chains(registry, rc,
                                                       svc.output_formats[port],
                                                       goal_fmt, goal_res):
                            variants.append((("node", t), port, rc, chain))
            if not variants:
                ok = False
                break
            min_len = min(len(v[3]) for v in variants)
            goal_sets.append([v for v in variants if len(v[3]) == min_len])
        if not ok:
            continue

        for combo in itertools.product(*option_sets):
            for goal_combo in itertools.product(*goal_sets):
                insertions = (sum(len(c[4]) for c in combo)
                              + sum(len(g[3]) for g in goal_combo))
                if best_insertions is not None and insertions > best_insertions:
                    continue
                wf = _build_workflow(registry, problem, assignment,
                                     combo, goal_combo)
                if best_insertions is None or insertions < best_insertions:
                    best_insertions = insertions
                    results = {k: v for k, v in results.items()
                               if v[0] <= insertions}
                results[wf.canonical_key()] = (insertions, wf)

    if not results:
        raise UninstantiableError("no concrete realization for plan")
    final = [wf for ins, wf in results.values() if ins == best_insertions]
    final.sort(key=Workflow.canonical_key)
    return final


def _build_workflow(registry, problem, assignment, connections, goal_choices) -> Workflow:
    """Materialize one instantiation choice into a workflow DAG."""
    n = len(assignment)
    # sequence of node descriptors in execution order: converters for a
    # connection are placed right before their consumer; goal converters last
    sequence: list[tuple[str, ...]] = []  # ("svc", step) | ("conv", service, key, pos)
    conv_order: dict[tuple, list[str]] = {}
    for producer, out_port, t, in_port, chain in sorted(
            connections, key=lambda c: (c[2], c[3])):
        if chain:
            conv_order[(t, in_port)] = chain
    goal_convs = []
    for gi, (producer, out_port, res, chain) in enumerate(goal_choices):
        if chain:
            goal_convs.append((gi, chain))

    for t in range(1, n + 1):
        for (ct, in_port), chain in sorted(conv_order.items()):
            if ct == t:
                for pos, svc in enumerate(chain):
                    sequence.append(("conv", svc, (ct, in_port), pos))
        sequence.append(("svc", assignment[t - 1], t))
    for gi, chain in goal_convs:
        for pos, svc in enumerate(chain):
            sequence.append(("conv", svc, ("goal", gi), pos))

    node_id_of_step: dict[int, str] = {}
    conv_node_ids: dict[tuple, list[str]] = {}
    nodes: list[Node] = []
    for i, entry in enumerate(sequence):
        step = i + 1
        node_id = f"n{step}"
        if entry[0] == "svc":
            _, svc, t = entry
            node_id_of_step[t] = node_id
        else:
            _, svc, key, pos = entry
            conv_node_ids.setdefault(key, []).append(node_id)
        nodes.append(Node(id=node_id, service=svc, step=step))

    edges: list[Edge] = []
    initial_markers: list[InitialMarker] = []
    consumed_init: set[int] = set()

    def wire(producer, out_port, chain_ids, chain_services, dst_id, dst_in_port):
        """Connect producer through converter nodes (if any) to dst; dst_id
        None means the chain's last node is itself the terminal producer."""
        if producer[0] == "init":
            idx = producer[1]
            res, fmt = problem.initial[idx]
            consumed_init.add(idx)
            if chain_ids:
                first_cls = registry.service_class_of(chain_services[0])
                initial_markers.append(InitialMarker(
                    resource=res, format=fmt,
                    dst=chain_ids[0], in_port=first_cls.inputs[0][0]))
            elif dst_id is not None:
                initial_markers.append(InitialMarker(
                    resource=res, format=fmt, dst=dst_id, in_port=dst_in_port))
            prev_id, prev_port = None, None
        else:
            prev_id, prev_port = node_id_of_step[producer[1]], out_port
        for cid, csvc in zip(chain_ids, chain_services):
            ccls = registry.service_class_of(csvc)
            cin, cout = ccls.inputs[0][0], ccls.outputs[0][0]
            if prev_id is not None:
                edges.append(Edge(src=prev_id, dst=cid, out_port=prev_port, in_port=cin))
            prev_id, prev_port = cid, cout
        if dst_id is not None and prev_id is not None:
            edges.append(Edge(src=prev_id, dst=dst_id, out_port=prev_port,
                              in_port=dst_in_port))

    for producer, out_port, t, in_port, chain in connections:
        key = (t, in_port)
        wire(producer, out_port, conv_node_ids.get(key, []), chain,
             node_id_of_step[t], in_port)

    for gi, (producer, out_port, res, chain) in enumerate(goal_choices):
        key = ("goal", gi)
        if chain:
            wire(producer, out_port, conv_node_ids.get(key, []), chain, None, None)

    for idx, (res, fmt) in enumerate(problem.initial):
        if idx not in consumed_init:
            initial_markers.append(InitialMarker(resource=res, format=fmt))

    goal_markers = [GoalMarker(resource=r, format=f) for r, f in problem.goal]
    return Workflow(tuple(nodes), tuple(edges), tuple(initial_markers),
                    tuple(goal_markers)).canonical()


def compose_workflows(registry: Registry,
                      problem: CompositionProblem,
                      exhaustive: bool = False,
                      deadline: float | None = None) -> list[Workflow]:
    """Full pipeline: abstract plans, then all minimal-insertion concrete
    workflows, deduplicated and canonically ordered."""
    plans = compose_abstract(registry, problem, exhaustive=exhaustive,
                             deadline=deadline)
    seen: dict[tuple, Workflow] = {}
    for plan in plans:
        try:
            for wf in instantiate(registry, plan):
                seen.setdefault(wf.canonical_key(), wf)
        except UninstantiableError:
            continue
    if not seen:
        raise NoPlanError("no abstract plan could be instantiated")
    return [seen[k] for k in sorted(seen)]
