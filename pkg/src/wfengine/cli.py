"""Command-line frontend.

Verbs: compose, refine, sim, rank, validate, serve.  Human output renders
small tables; --out json emits the same canonical documents the API serves.

Exit codes: 0 success, 2 bad input, 3 empty result, 4 constraint
contradiction (a request set that filtered every candidate out).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import qos as qos_mod
from . import replanner
from .planner import (CompositionProblem, NoPlanError, PlanningError,
                      compose_workflows)
from .registry import Registry, RegistryError, load_registry
from .similarity import (NodeSimWeights, SimilarityError, WorkflowSimWeights,
                         sim_workflows)
from .workflow import Workflow, WorkflowError, validate_workflow

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_EMPTY = 3
EXIT_CONTRADICTION = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}")


def _load_reg(path: str) -> Registry:
    try:
        return load_registry(_read_file(path))
    except RegistryError as e:
        raise CliError(f"bad registry {path}: {e}")


def _load_wf(path: str) -> Workflow:
    try:
        return Workflow.loads(_read_file(path))
    except WorkflowError as e:
        raise CliError(f"bad workflow {path}: {e}")


def _parse_weights(spec: str) -> qos_mod.QoSWeights:
    values = {"rt": 0.25, "tp": 0.25, "av": 0.25, "re": 0.25}
    try:
        for part in spec.split(","):
            key, _, val = part.partition("=")
            if key not in values:
                raise ValueError(f"unknown attribute {key!r}")
            values[key] = float(val)
    except ValueError as e:
        raise CliError(f"bad --weights {spec!r}: {e}")
    return qos_mod.QoSWeights(w_rt=values["rt"], w_tp=values["tp"],
                              w_av=values["av"], w_re=values["re"])


def _parse_order(spec: str) -> qos_mod.PreferenceOrder:
    try:
        return qos_mod.PreferenceOrder(tuple(spec.split(",")))
    except qos_mod.QosError as e:
        raise CliError(f"bad --order {spec!r}: {e}")


def _emit(doc: dict, out_format: str, human_lines):
    if out_format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        for line in human_lines():
            print(line)


def _workflow_summary(wf: Workflow) -> str:
    chain = " -> ".join(n.service for n in sorted(wf.nodes, key=lambda n: n.step))
    return f"[{len(wf.nodes)} steps] {chain}"


def _ranked_candidates(args, registry, candidates):
    if args.order:
        order = _parse_order(args.order)
        ranked = qos_mod.rank_lexicographic(candidates, registry, order,
                                            av_mode=args.av_mode)
        return [{"workflow": wf.to_dict(), "qos": agg.to_dict()}
                for wf, agg in ranked]
    weights = _parse_weights(args.weights) if args.weights else qos_mod.QoSWeights()
    ranked = qos_mod.rank_weighted(candidates, registry, weights,
                                   av_mode=args.av_mode, raw=args.raw)
    return [{"workflow": wf.to_dict(), "qos": agg.to_dict(), "score": score}
            for wf, agg, score in ranked]


def cmd_compose(args) -> int:
    registry = _load_reg(args.registry)
    try:
        problem = CompositionProblem.from_dict(json.loads(_read_file(args.problem)))
        problem.validate(registry)
    except (json.JSONDecodeError, PlanningError) as e:
        raise CliError(f"bad problem {args.problem}: {e}")
    try:
        candidates = compose_workflows(registry, problem,
                                       exhaustive=args.exhaustive)
    except NoPlanError:
        print("no plan within horizon", file=sys.stderr)
        return EXIT_EMPTY
    out = _ranked_candidates(args, registry, candidates)

    def human():
        yield f"{len(out)} candidate workflow(s)"
        for i, item in enumerate(out, 1):
            wf = Workflow.from_dict(item["workflow"])
            score = f"  score={item['score']:.4f}" if "score" in item else ""
            q = item["qos"]
            yield (f"{i:3d}. {_workflow_summary(wf)}{score}  "
                   f"rt={q['rt']:.2f} tp={q['tp']:.2f} av={q['av']:.3f} re={q['re']:.1f}")

    _emit({"candidates": out}, args.out, human)
    return EXIT_OK


def cmd_refine(args) -> int:
    registry = _load_reg(args.registry)
    original = _load_wf(args.workflow)
    try:
        requests = replanner.requests_from_list(json.loads(_read_file(args.requests)))
    except (json.JSONDecodeError, replanner.RefinementError) as e:
        raise CliError(f"bad requests {args.requests}: {e}")
    try:
        result = replanner.refine(registry, original, requests,
                                  mode=args.mode, horizon=args.horizon)
    except replanner.UnknownTargetError as e:
        raise CliError(str(e))
    except replanner.NoCandidateError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONTRADICTION if e.filtered else EXIT_EMPTY

    def human():
        yield (f"{len(result.candidates)} candidate(s), mode={result.mode}"
               + (" (truncated)" if result.truncated else ""))
        for i, (wf, _, score) in enumerate(result.candidates, 1):
            yield f"{i:3d}. sim={score:.4f}  {_workflow_summary(wf)}"

    _emit(result.to_dict(), args.out, human)
    return EXIT_OK


def cmd_sim(args) -> int:
    registry = _load_reg(args.registry)
    wf_a = _load_wf(args.workflow_a)
    wf_b = _load_wf(args.workflow_b)
    weights = WorkflowSimWeights()
    if args.sim_weights:
        try:
            w_no, w_ed, w_to = (float(x) for x in args.sim_weights.split(","))
            weights = WorkflowSimWeights(w_no=w_no, w_ed=w_ed, w_to=w_to)
        except (ValueError, SimilarityError) as e:
            raise CliError(f"bad --sim-weights: {e}")
    report = sim_workflows(wf_a, wf_b, registry, weights=weights)

    def human():
        yield f"node level:  {report.node_level:.4f}"
        yield f"edge level:  {report.edge_level:.4f}"
        yield (f"topo level:  {report.topo_level:.4f} "
               f"(edit distance {report.edit_distance}"
               + ("" if report.edit_distance_exact else ", approximate") + ")")
        yield f"combined:    {report.combined:.4f}"

    _emit(report.to_dict(), args.out, human)
    return EXIT_OK


def cmd_rank(args) -> int:
    registry = _load_reg(args.registry)
    candidates = [_load_wf(p) for p in args.workflows]
    if not candidates:
        return EXIT_EMPTY
    out = _ranked_candidates(args, registry, candidates)

    def human():
        for i, item in enumerate(out, 1):
            wf = Workflow.from_dict(item["workflow"])
            score = f"  score={item['score']:.4f}" if "score" in item else ""
            yield f"{i:3d}. {_workflow_summary(wf)}{score}"

    _emit({"candidates": out}, args.out, human)
    return EXIT_OK


def cmd_validate(args) -> int:
    registry = _load_reg(args.registry)
    wf = _load_wf(args.workflow)
    report = validate_workflow(registry, wf)

    def human():
        if report.ok:
            yield "valid"
        else:
            yield f"{len(report.violations)} violation(s)"
            for v in report.violations:
                yield f"  - {v}"

    _emit(report.to_dict(), args.out, human)
    return EXIT_OK if report.ok else EXIT_EMPTY


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    app = create_app(store_path=args.store, time_budget=args.time_budget)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfengine",
                                     description="workflow composition engine")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, registry=True):
        if registry:
            p.add_argument("--registry", required=True, help="registry JSON file")
        p.add_argument("--out", choices=("human", "json"), default="human")

    p = sub.add_parser("compose", help="plan and rank workflows")
    common(p)
    p.add_argument("--problem", required=True, help="composition problem JSON file")
    p.add_argument("--exhaustive", action="store_true",
                   help="all plan lengths up to the horizon, not just minimal")
    p.add_argument("--weights", help="QoS weights, e.g. rt=0.4,tp=0.2,av=0.2,re=0.2")
    p.add_argument("--order", help="lexicographic order, e.g. rt,re,tp,av")
    p.add_argument("--av-mode", choices=("min", "product"), default="min")
    p.add_argument("--raw", action="store_true", help="unnormalized weighted scoring")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("refine", help="replan under refinement requests")
    common(p)
    p.add_argument("--workflow", required=True, help="original workflow JSON file")
    p.add_argument("--requests", required=True, help="refinement requests JSON file")
    p.add_argument("--mode", choices=("approx", "exact"), default="exact")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("sim", help="similarity of two workflows")
    common(p)
    p.add_argument("workflow_a")
    p.add_argument("workflow_b")
    p.add_argument("--sim-weights", help="node,edge,topo e.g. 0.45,0.35,0.2")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("rank", help="rank existing workflow files by QoS")
    common(p)
    p.add_argument("workflows", nargs="+")
    p.add_argument("--weights")
    p.add_argument("--order")
    p.add_argument("--av-mode", choices=("min", "product"), default="min")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("validate", help="replay-check a workflow")
    common(p)
    p.add_argument("--workflow", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", default=None, help="session store directory")
    p.add_argument("--time-budget", type=float, default=None,
                   help="seconds allowed per enumeration")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(str(e), file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
