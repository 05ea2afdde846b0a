"""Workflow QoS aggregation and candidate ranking.

Two ranking styles: a weighted sum over (optionally min-max normalized)
attributes, and a lexicographic comparison following a user-given preference
order over the four attributes.  Response time is a cost (smaller is better);
throughput, availability, and reliability are benefits.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

from .registry import QoSVector, Registry
from .workflow import Workflow

ATTRIBUTES = ("rt", "tp", "av", "re")
# +1: larger is better, -1: smaller is better
POLARITY = {"rt": -1, "tp": 1, "av": 1, "re": 1}


class QosError(Exception):
    pass


@dataclass(frozen=True)
class QoSWeights:
    w_rt: float = 0.25
    w_tp: float = 0.25
    w_av: float = 0.25
    w_re: float = 0.25

    def get(self, attr: str) -> float:
        return getattr(self, f"w_{attr}")


@dataclass(frozen=True)
class PreferenceOrder:
    order: tuple[str, str, str, str]

    def __post_init__(self):
        if sorted(self.order) != sorted(ATTRIBUTES):
            raise QosError(f"preference order must permute {ATTRIBUTES}, got {self.order}")


@dataclass(frozen=True)
class WorkflowQoS:
    qos: QoSVector
    nsteps: int

    def to_dict(self) -> dict:
        d = self.qos.to_dict()
        d["nsteps"] = self.nsteps
        return d


def aggregate_qos(registry: Registry, workflow: Workflow,
                  av_mode: str = "min") -> WorkflowQoS:
    """Workflow-level QoS: rt summed, tp and re averaged, av the minimum of
    the members (or their product with av_mode="product")."""
    if av_mode not in ("min", "product"):
        raise QosError(f"unknown availability mode {av_mode!r}")
    if not workflow.nodes:
        raise QosError("cannot aggregate QoS of an empty workflow")
    vectors = []
    for node in workflow.nodes:
        if node.service not in registry.concrete_services:
            raise QosError(f"no QoS record for service {node.service!r}")
        vectors.append(registry.service(node.service).qos)
    n = len(vectors)
    rt = sum(v.rt for v in vectors)
    tp = sum(v.tp for v in vectors) / n
    re = sum(v.re for v in vectors) / n
    if av_mode == "min":
        av = min(v.av for v in vectors)
    else:
        av = 1.0
        for v in vectors:
            av *= v.av
    return WorkflowQoS(qos=QoSVector(rt=rt, tp=tp, av=av, re=re), nsteps=n)


def availability_from_uptime(uptime_seconds: float, period_seconds: float) -> float:
    """Fraction of the measurement period the service was up."""
    if period_seconds <= 0:
        raise QosError("measurement period must be positive")
    if uptime_seconds < 0 or uptime_seconds > period_seconds:
        raise QosError("uptime must lie within [0, period]")
    return uptime_seconds / period_seconds


def reliability_from_log(total_operation_time: float, failures: int) -> float:
    """Mean time between failures; zero failures counts as one (so a
    flawless log yields its full operation time)."""
    if total_operation_time < 0 or failures < 0:
        raise QosError("operation time and failure count must be >= 0")
    return total_operation_time / max(failures, 1)


def _normalizer(vectors: list[QoSVector]) -> dict[str, tuple[float, float]]:
    return {attr: (min(getattr(v, attr) for v in vectors),
                   max(getattr(v, attr) for v in vectors))
            for attr in ATTRIBUTES}


def weighted_score(qos: QoSVector, weights: QoSWeights,
                   normalizer: dict[str, tuple[float, float]] | None,
                   raw: bool = False) -> float:
    """Weighted sum of attributes.

    Normalized mode (default) min-max scales each attribute over the
    candidate set with polarity applied, so higher always means better;
    a degenerate attribute (min == max) contributes its full weight.
    Raw mode multiplies the unnormalized values straight into the sum.
    """
    if raw:
        return sum(weights.get(a) * getattr(qos, a) for a in ATTRIBUTES)
    if normalizer is None:
        raise QosError("normalized scoring requires a candidate-set normalizer")
    score = 0.0
    for attr in ATTRIBUTES:
        lo, hi = normalizer[attr]
        value = getattr(qos, attr)
        if hi == lo:
            n = 1.0
        elif POLARITY[attr] > 0:
            n = (value - lo) / (hi - lo)
        else:
            n = (hi - value) / (hi - lo)
        score += weights.get(attr) * n
    return score


def rank_weighted(candidates: list[Workflow], registry: Registry,
                  weights: QoSWeights = QoSWeights(),
                  av_mode: str = "min",
                  raw: bool = False) -> list[tuple[Workflow, WorkflowQoS, float]]:
    """Candidates sorted by descending weighted score, canonical tie-break."""
    if not candidates:
        raise QosError("empty candidate list")
    aggregated = [aggregate_qos(registry, wf, av_mode=av_mode) for wf in candidates]
    norm = None if raw else _normalizer([a.qos for a in aggregated])
    scored = [(wf, agg, weighted_score(agg.qos, weights, norm, raw=raw))
              for wf, agg in zip(candidates, aggregated)]
    scored.sort(key=lambda item: (-item[2],) + item[0].canonical_key())
    return scored


def lexicographic_cmp(a: QoSVector, b: QoSVector, order: PreferenceOrder) -> int:
    """-1 when a is preferred over b, +1 when b over a, 0 on full tie."""
    for attr in order.order:
        va, vb = getattr(a, attr), getattr(b, attr)
        if va != vb:
            better_a = (va < vb) if POLARITY[attr] < 0 else (va > vb)
            return -1 if better_a else 1
    return 0


def rank_lexicographic(candidates: list[Workflow], registry: Registry,
                       order: PreferenceOrder,
                       av_mode: str = "min") -> list[tuple[Workflow, WorkflowQoS]]:
    if not candidates:
        raise QosError("empty candidate list")
    aggregated = [(wf, aggregate_qos(registry, wf, av_mode=av_mode))
                  for wf in candidates]

    def cmp(x, y):
        c = lexicographic_cmp(x[1].qos, y[1].qos, order)
        if c != 0:
            return c
        kx, ky = x[0].canonical_key(), y[0].canonical_key()
        return -1 if kx < ky else (1 if kx > ky else 0)

    aggregated.sort(key=cmp_to_key(cmp))
    return aggregated
