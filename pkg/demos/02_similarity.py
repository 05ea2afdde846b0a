"""Measure how similar two candidate workflows are, level by level.

The similarity measure combines three views of a workflow pair: how similar
the services at the nodes are (ontology position, shared port types, TF-IDF
over descriptions), how similar the data-flow edges are, and how far apart
the graphs are topologically (exact graph edit distance).
"""
import wfengine as w

registry = w.load_registry(open(w.builtin_registry_path("phylo")).read())
problem = w.CompositionProblem(
    initial=(("gene_names", "set_of_strings"),),
    goal=(("reconciliation_tree", "newickTree"),),
    horizon=6,
)
workflows = w.compose_workflows(registry, problem)

wf_a, wf_b = workflows[0], workflows[1]


def chain(wf):
    return " -> ".join(n.service for n in sorted(wf.nodes,
                                                 key=lambda n: n.step))


print("workflow A:", chain(wf_a))
print("workflow B:", chain(wf_b))
print()

report = w.sim_workflows(wf_a, wf_b, registry)
print(f"node level : {report.node_level:.4f}   "
      "(double sum over all service pairs; can exceed 1)")
print(f"edge level : {report.edge_level:.4f}")
print(f"topo level : {report.topo_level:.4f}   "
      f"(edit distance {report.edit_distance}, "
      f"exact={report.edit_distance_exact})")
print(f"combined   : {report.combined:.4f}   (weights 0.45/0.35/0.2)")

print()
print("pairwise node similarities (rows = A, cols = B):")
header = " ".join(f"{bid:>4}" for bid in report.node_ids_b)
print(f"     {header}")
for aid, row in zip(report.node_ids_a, report.node_matrix):
    cells = " ".join(f"{v:.2f}" for v in row)
    print(f"{aid:>4} {cells}")

print()
print("building blocks on single services:")
print(f"  same service           : "
      f"{w.sim_nodes(registry, 'GeneTree_Scaling_V1', 'GeneTree_Scaling_V1'):.4f}")
print(f"  same class, other impl : "
      f"{w.sim_nodes(registry, 'GeneTree_Scaling_V1', 'GeneTree_Scaling_V2'):.4f}")
print(f"  unrelated services     : "
      f"{w.sim_nodes(registry, 'GeneTree_Scaling_V1', 'Resolved_Names_OT'):.4f}")
