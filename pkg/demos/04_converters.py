"""Automatic data-format repair with converter services.

The converters registry has a table-extraction service that emits CSV and a
summarization service that only accepts Parquet.  Instantiation notices the
format mismatch and inserts the shortest chain of converter services
(class-preserving, format-changing) to bridge it.
"""
import wfengine as w
from wfengine.planner import converter_services

registry = w.load_registry(open(w.builtin_registry_path("converters")).read())

print("converter services in the registry:",
      ", ".join(converter_services(registry)))
print()

problem = w.CompositionProblem(
    initial=(("raw_text", "plain_text"),),
    goal=(("summary", "plain_text"),),
    horizon=2,
)

plans = w.compose_abstract(registry, problem)
print("abstract plan:", " -> ".join(plans[0].steps))

workflows = w.compose_workflows(registry, problem)
wf = workflows[0]
print("instantiated with minimal converter insertions:")
for n in sorted(wf.nodes, key=lambda n: n.step):
    print(f"  step {n.step}: {n.service}")

report = w.validate_workflow(registry, wf)
print("replay validation:", "ok" if report.ok else report.violations)
