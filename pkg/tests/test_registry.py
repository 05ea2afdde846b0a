import json

import pytest
from hypothesis import given, strategies as st

import wfengine as w
from wfengine.registry import RegistryIntegrityError, RegistryParseError, UnknownClassError

from conftest import registry_from, tiny_registry_doc


def test_load_tiny_fixture():
    reg = registry_from(tiny_registry_doc())
    assert len(reg.service_classes) == 2
    assert len(reg.concrete_services) == 1
    assert reg.services_taxonomy.is_subclass("taxon_based_ext", "tree_ext")


def test_load_rejects_garbage():
    with pytest.raises(RegistryParseError):
        w.load_registry(b"{not json")
    with pytest.raises(RegistryParseError):
        w.load_registry(json.dumps({"formats": []}))


def test_empty_collections_is_integrity_error():
    doc = {"formats": [], "resource_classes": [], "service_classes": [],
           "services": []}
    with pytest.raises(RegistryIntegrityError, match="root"):
        w.load_registry(json.dumps(doc))


def test_dangling_class_reference_names_offender():
    doc = tiny_registry_doc()
    doc["services"][0]["class"] = "missing"
    with pytest.raises(RegistryIntegrityError, match="missing"):
        registry_from(doc)


def test_taxonomy_cycle_rejected():
    doc = tiny_registry_doc()
    doc["resource_classes"][0]["parent"] = "species_tree"
    doc["resource_classes"][1]["parent"] = "bio_taxa"
    with pytest.raises(RegistryIntegrityError, match="cycle"):
        registry_from(doc)


def test_duplicate_service_name_rejected():
    doc = tiny_registry_doc()
    doc["services"].append(dict(doc["services"][0]))
    with pytest.raises(RegistryIntegrityError, match="duplicate"):
        registry_from(doc)


def test_qos_range_enforced():
    doc = tiny_registry_doc()
    doc["services"][0]["qos"]["av"] = 1.5
    with pytest.raises(RegistryIntegrityError):
        registry_from(doc)


@pytest.fixture(scope="module")
def tax():
    # chain: root > mid > leaf, plus a second tree: other
    return w.Taxonomy({"root": None, "mid": "root", "leaf": "mid",
                       "other": None})


class TestTaxonomyQueries:

    def test_is_subclass(self, tax):
        assert tax.is_subclass("leaf", "root")
        assert tax.is_subclass("leaf", "leaf")
        assert not tax.is_subclass("root", "leaf")
        assert not tax.is_subclass("other", "root")

    def test_is_subclass_unknown_name(self, tax):
        with pytest.raises(UnknownClassError):
            tax.is_subclass("nope", "root")

    def test_lca(self, tax):
        assert tax.lca("leaf", "mid") == "mid"
        assert tax.lca("leaf", "leaf") == "leaf"
        assert tax.lca("leaf", "other") is None

    def test_path_len(self, tax):
        assert tax.path_len("leaf", "leaf") == 0
        assert tax.path_len("leaf", "mid") == 1
        assert tax.path_len("leaf", "root") == 2  # three-level chain

    def test_path_len_requires_ancestor(self, tax):
        with pytest.raises(w.RegistryError):
            tax.path_len("root", "leaf")

    def test_lca_is_common_ancestor_of_both(self, tax):
        names = ["root", "mid", "leaf"]
        for a in names:
            for b in names:
                anc = tax.lca(a, b)
                assert tax.is_subclass(a, anc) and tax.is_subclass(b, anc)

    def test_path_len_additive_along_chain(self, tax):
        assert (tax.path_len("leaf", "mid") + tax.path_len("mid", "root")
                == tax.path_len("leaf", "root"))


def test_phylo_taxonomy_facts(phylo_registry):
    st_tax = phylo_registry.services_taxonomy
    assert st_tax.is_subclass("taxon_based_ext", "tree_ext")
    assert st_tax.lca("taxon_based_ext", "tree_ext") == "tree_ext"
    assert st_tax.path_len("taxon_based_ext", "tree_ext") == 1


@given(st.data())
def test_lca_symmetric_on_phylo_resources(phylo_registry, data):
    names = sorted(phylo_registry.resources)
    a = data.draw(st.sampled_from(names))
    b = data.draw(st.sampled_from(names))
    tax = phylo_registry.resources
    assert tax.lca(a, b) == tax.lca(b, a)
    assert tax.onto_distance(a, b) == tax.onto_distance(b, a)


def test_roundtrip(phylo_registry):
    dumped = w.dump_registry(phylo_registry)
    again = w.load_registry(dumped)
    assert w.dump_registry(again) == dumped
    assert set(again.concrete_services) == set(phylo_registry.concrete_services)
    assert set(again.service_classes) == set(phylo_registry.service_classes)
