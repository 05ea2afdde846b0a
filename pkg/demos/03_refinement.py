"""Interactively refine an existing workflow with constraints.

Starting from a composed pipeline, we avoid one concrete service, force an
alternative in, and constrain ordering.  Candidates are re-planned under the
constraints and ranked by similarity to the original, so the least disruptive
repair comes first.
"""
import wfengine as w

registry = w.load_registry(open(w.builtin_registry_path("phylo")).read())
problem = w.CompositionProblem(
    initial=(("gene_names", "set_of_strings"),),
    goal=(("reconciliation_tree", "newickTree"),),
    horizon=6,
)
original = w.compose_workflows(registry, problem)[0]


def chain(wf):
    return " -> ".join(n.service for n in sorted(wf.nodes,
                                                 key=lambda n: n.step))


print("original:", chain(original))
print()

print("== avoid one concrete service ==")
result = w.refine(registry, original,
                  [w.Avoid("Get_PhyloTree_OT_V1")], horizon=6)
print(f"{len(result.candidates)} candidate(s); top 3 by similarity:")
for wf, report, score in result.candidates[:3]:
    print(f"  sim={score:.4f}  {chain(wf)}")

print()
print("== insertion: force a scaling step between extraction and "
      "reconciliation ==")
requests = [
    w.Include("GeneTree_Scaling_V2"),
    w.OrderBefore("Get_GeneTree_from_Genes", "GeneTree_Scaling_V2"),
    w.OrderBefore("GeneTree_Scaling_V2", "Get_ReconciliationTree"),
]
result = w.refine(registry, original, requests, horizon=6)
print(f"{len(result.candidates)} candidate(s); closest repair:")
print(" ", chain(result.candidates[0][0]))

print()
print("== constraint checking is a plain query too ==")
violations = w.check_constraints(registry, original,
                                 [w.Avoid("tree_ext")])
print("avoid(tree_ext) against the original reports:")
for v in violations:
    print("  -", v)

print()
print("== contradictory requests fail loudly ==")
try:
    w.refine(registry, original,
             [w.Include("Get_PhyloTree_OT_V1"),
              w.Avoid("Get_PhyloTree_OT_V1")], horizon=6)
except w.NoCandidateError as e:
    print(f"NoCandidateError (filtered={e.filtered}): {e}")
