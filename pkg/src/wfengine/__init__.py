"""Workflow composition engine: registry, planner, QoS ranking, similarity,
and interactive refinement."""

from .planner import (AbstractPlan, Binding, CompositionProblem,
                      InvalidProblemError, NoPlanError, PlanningError,
                      UninstantiableError, compose_abstract, compose_workflows,
                      executable_bindings, instantiate)
from .qos import (PreferenceOrder, QoSWeights, WorkflowQoS, aggregate_qos,
                  availability_from_uptime, rank_lexicographic, rank_weighted,
                  reliability_from_log, weighted_score)
from .registry import (ConcreteService, QoSVector, Registry, RegistryError,
                       RegistryIntegrityError, RegistryParseError,
                       ServiceClass, Taxonomy, dump_registry, load_registry)
from .replanner import (Avoid, ChangeIO, Include, NoCandidateError,
                        OrderBefore, RefinementResult, check_constraints,
                        most_similar, refine)
from .similarity import (EdgeSimWeights, NodeSimWeights, SimilarityError,
                         SimilarityReport,
                         TfIdfModel, WorkflowSimWeights, dist_topo, sim_edges,
                         sim_edges_workflows, sim_nodes, sim_nodes_des,
                         sim_nodes_inp, sim_nodes_onto, sim_nodes_oup,
                         sim_nodes_workflows, sim_topo, sim_workflows)
from .workflow import (Edge, GoalMarker, InitialMarker, Node,
                       ValidationReport, Workflow, validate_workflow)

__all__ = [name for name in dir() if not name.startswith("_")]


def builtin_registry_path(name: str) -> str:
    """Absolute path of a fixture registry shipped with the package
    ("phylo" or "converters")."""
    from importlib import resources
    return str(resources.files("wfengine").joinpath(f"data/{name}.json"))
