import json

import pytest

import wfengine as w


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(name): acceptance criterion; the hook below prints one "
        "[PASS]/[FAIL] line per marked test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    tr = item.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        verdict = "PASS" if report.passed else "FAIL"
        tr.write_line(f"[{verdict}] {marker.args[0]}")


@pytest.fixture(scope="session")
def phylo_registry():
    with open(w.builtin_registry_path("phylo"), "rb") as f:
        return w.load_registry(f.read())


@pytest.fixture(scope="session")
def conv_registry():
    with open(w.builtin_registry_path("converters"), "rb") as f:
        return w.load_registry(f.read())


@pytest.fixture(scope="session")
def phylo_problem():
    return w.CompositionProblem(
        initial=(("gene_names", "set_of_strings"),),
        goal=(("reconciliation_tree", "newickTree"),),
        horizon=6,
    )


@pytest.fixture(scope="session")
def phylo_workflows(phylo_registry, phylo_problem):
    """All minimal-length candidate workflows of the main fixture problem."""
    return w.compose_workflows(phylo_registry, phylo_problem)


@pytest.fixture(scope="session")
def fig3_workflow(phylo_workflows):
    """The running-example workflow: the six classes in their canonical
    order, instantiated with the V1 services."""
    want = ["Get_GeneTree_from_Genes", "Ext_Species_from_GeneTree",
            "Resolved_Names_OT", "Get_PhyloTree_OT_V1",
            "GeneTree_Scaling_V1", "Get_ReconciliationTree"]
    for wf in phylo_workflows:
        ordered = [n.service for n in sorted(wf.nodes, key=lambda n: n.step)]
        if ordered == want:
            return wf
    raise AssertionError("running-example workflow not among candidates")


def registry_from(doc: dict) -> "w.Registry":
    return w.load_registry(json.dumps(doc))


def tiny_registry_doc():
    """Minimal registry matching the planner description: one service class
    chain tree_ext > taxon_based_ext and one concrete service."""
    return {
        "formats": [{"name": "list_of_strings"}, {"name": "newickTree"},
                    {"name": "integer"}],
        "resource_classes": [
            {"name": "bio_taxa", "parent": None},
            {"name": "species_tree", "parent": None},
            {"name": "http_code", "parent": None},
        ],
        "service_classes": [
            {"name": "tree_ext", "parent": None,
             "inputs": [{"port": "taxa_in", "class": "bio_taxa"}],
             "outputs": [{"port": "tree_out", "class": "species_tree"}],
             "description": ""},
            {"name": "taxon_based_ext", "parent": "tree_ext",
             "inputs": [{"port": "set_of_names_1", "class": "bio_taxa"}],
             "outputs": [{"port": "phylo_tree_1", "class": "species_tree"},
                         {"port": "http_code_1", "class": "http_code"}],
             "description": ""},
        ],
        "services": [
            {"name": "get_PhyloTree_OT_V1", "class": "taxon_based_ext",
             "input_formats": {"set_of_names_1": "list_of_strings"},
             "output_formats": {"phylo_tree_1": "newickTree",
                                "http_code_1": "integer"},
             "qos": {"rt": 1.0, "tp": 10, "av": 0.9, "re": 100},
             "description": "species tree lookup"},
        ],
    }
