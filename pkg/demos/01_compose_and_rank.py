"""Compose candidate workflows for the phylogeny registry and rank them.

The built-in registry models a small bioinformatics catalog: services that
extract a gene tree from gene names, resolve taxon names, build a species
tree, scale a gene tree, and reconcile the two trees.  We ask for a pipeline
from a set of gene names to a reconciliation tree and rank the candidates by
QoS, first with a weighted score and then lexicographically.
"""
import wfengine as w

registry = w.load_registry(open(w.builtin_registry_path("phylo")).read())
problem = w.CompositionProblem(
    initial=(("gene_names", "set_of_strings"),),
    goal=(("reconciliation_tree", "newickTree"),),
    horizon=6,
)

print("== stage 1: abstract plans over service classes ==")
plans = w.compose_abstract(registry, problem)
print(f"{len(plans)} abstract plan(s) of length {len(plans[0].steps)}")
for plan in plans[:3]:
    print("  " + " -> ".join(plan.steps))
print("  ...")

print()
print("== stage 2: concrete workflows ==")
workflows = w.compose_workflows(registry, problem)
print(f"{len(workflows)} concrete candidate workflow(s)")

print()
print("== weighted QoS ranking (response time emphasized) ==")
weights = w.QoSWeights(w_rt=0.4, w_tp=0.2, w_av=0.2, w_re=0.2)
for i, (wf, agg, score) in enumerate(w.rank_weighted(workflows, registry,
                                                     weights)[:5], 1):
    chain = " -> ".join(n.service for n in sorted(wf.nodes,
                                                  key=lambda n: n.step))
    print(f"{i}. score={score:.4f} rt={agg.qos.rt:.1f} av={agg.qos.av:.3f}")
    print(f"   {chain}")

print()
print("== lexicographic ranking: rt > re > tp > av ==")
order = w.PreferenceOrder(("rt", "re", "tp", "av"))
for i, (wf, agg) in enumerate(w.rank_lexicographic(workflows, registry,
                                                   order)[:3], 1):
    print(f"{i}. rt={agg.qos.rt:.1f} re={agg.qos.re:.1f} "
          f"tp={agg.qos.tp:.1f} av={agg.qos.av:.3f}")
