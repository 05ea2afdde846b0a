import json

import pytest
from fastapi.testclient import TestClient

import wfengine as w
from wfengine.server import STORE_VERSION, FileStore, StoreError, create_app


@pytest.fixture(scope="module")
def phylo_doc():
    with open(w.builtin_registry_path("phylo")) as f:
        return json.load(f)


PROBLEM = {
    "initial": [{"resource": "gene_names", "format": "set_of_strings"}],
    "goal": [{"resource": "reconciliation_tree", "format": "newickTree"}],
    "horizon": 6,
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(store_path=tmp_path / "store")
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def rid(client, phylo_doc):
    return client.post("/registries", json=phylo_doc).json()["id"]


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_registry_upload_content_addressed(client, phylo_doc):
    a = client.post("/registries", json=phylo_doc)
    b = client.post("/registries", json=phylo_doc)
    assert a.status_code == b.status_code == 200
    assert a.json()["id"] == b.json()["id"]


def test_registry_upload_rejects_bad_doc(client):
    r = client.post("/registries", json={"formats": []})
    assert r.status_code == 400
    body = r.json()
    assert body["code"] == "bad_registry"
    assert body["message"]


def test_compose_ranked_candidates(client, rid):
    r = client.post("/compose", json={"registry": rid, "problem": PROBLEM})
    assert r.status_code == 200
    body = r.json()
    assert body["registry_id"] == rid
    assert body["candidates"]
    scores = [c["score"] for c in body["candidates"]]
    assert scores == sorted(scores, reverse=True)
    for c in body["candidates"]:
        wf = w.Workflow.from_dict(c["workflow"])
        assert len(wf.nodes) == 6
        assert set(c["qos"]) >= {"rt", "tp", "av", "re"}


def test_compose_inline_registry(client, phylo_doc):
    r = client.post("/compose", json={"registry": phylo_doc, "problem": PROBLEM})
    assert r.status_code == 200
    assert r.json()["candidates"]


def test_compose_lexicographic_ranking(client, rid):
    r = client.post("/compose", json={
        "registry": rid, "problem": PROBLEM,
        "ranking": {"order": ["rt", "re", "tp", "av"]}})
    assert r.status_code == 200
    top = r.json()["candidates"][0]
    assert "score" not in top  # lexicographic mode carries no scalar score


def test_compose_unknown_registry(client):
    r = client.post("/compose", json={"registry": "nope", "problem": PROBLEM})
    assert r.status_code == 404
    assert r.json()["code"] == "unknown_registry"


def test_compose_bad_problem(client, rid):
    r = client.post("/compose", json={"registry": rid, "problem": {}})
    assert r.status_code == 400
    assert r.json()["code"] == "bad_request"


def test_compose_no_plan(client, rid):
    short = dict(PROBLEM, horizon=2)
    r = client.post("/compose", json={"registry": rid, "problem": short})
    assert r.status_code == 422
    assert r.json()["code"] == "no_plan"


def test_compose_time_budget(tmp_path, phylo_doc):
    app = create_app(store_path=tmp_path / "store", time_budget=0.0)
    with TestClient(app) as client:
        rid = client.post("/registries", json=phylo_doc).json()["id"]
        r = client.post("/compose", json={"registry": rid, "problem": PROBLEM})
        assert r.status_code == 422
        body = r.json()
        assert body["code"] == "time_budget"
        assert body["partial"] is True


def test_compose_idempotent(client, rid):
    payload = {"registry": rid, "problem": PROBLEM}
    a = client.post("/compose", json=payload)
    b = client.post("/compose", json=payload)
    assert a.json() == b.json()


# ---------------------------------------------------------------------------
# sessions

def make_session(client, rid):
    r = client.post("/compose", json={"registry": rid, "problem": PROBLEM,
                                      "session": True})
    assert r.status_code == 200
    body = r.json()
    return body["session_id"], body


def test_session_created_with_top_candidate(client, rid):
    sid, body = make_session(client, rid)
    r = client.get(f"/sessions/{sid}")
    assert r.status_code == 200
    doc = r.json()
    assert doc["registry_id"] == rid
    assert doc["current"] == body["candidates"][0]["workflow"]
    assert doc["history"] == []


def test_session_unknown(client):
    assert client.get("/sessions/missing").status_code == 404


def test_refine_avoid(client, rid, phylo_registry):
    sid, _ = make_session(client, rid)
    r = client.post(f"/sessions/{sid}/refine", json={
        "requests": [{"type": "avoid", "target": "Get_PhyloTree_OT_V1"}],
        "horizon": 6})
    assert r.status_code == 200
    body = r.json()
    assert body["candidates"]
    for cand in body["candidates"]:
        wf = w.Workflow.from_dict(cand["workflow"])
        assert w.check_constraints(phylo_registry, wf,
                                   [w.Avoid("Get_PhyloTree_OT_V1")]) == []
        assert cand["similarity"]["combined"] == cand["score"]


def test_refine_approx_mode_has_no_reports(client, rid):
    sid, _ = make_session(client, rid)
    r = client.post(f"/sessions/{sid}/refine",
                    json={"requests": [], "mode": "approx", "horizon": 6})
    assert r.status_code == 200
    assert all(c["similarity"] is None for c in r.json()["candidates"])


def test_refine_contradiction(client, rid):
    sid, _ = make_session(client, rid)
    r = client.post(f"/sessions/{sid}/refine", json={
        "requests": [{"type": "avoid", "target": "Get_PhyloTree_OT_V1"},
                     {"type": "include", "target": "Get_PhyloTree_OT_V1"}],
        "horizon": 6})
    assert r.status_code == 422
    assert r.json()["code"] == "no_candidate"


def test_refine_unknown_target(client, rid):
    sid, _ = make_session(client, rid)
    r = client.post(f"/sessions/{sid}/refine", json={
        "requests": [{"type": "avoid", "target": "no_such"}], "horizon": 6})
    assert r.status_code == 400
    assert r.json()["code"] == "unknown_target"


def test_refine_bad_request_doc(client, rid):
    sid, _ = make_session(client, rid)
    r = client.post(f"/sessions/{sid}/refine",
                    json={"requests": [{"type": "frobnicate"}]})
    assert r.status_code == 400


def test_select_commits_candidate(client, rid):
    sid, _ = make_session(client, rid)
    refined = client.post(f"/sessions/{sid}/refine", json={
        "requests": [{"type": "avoid", "target": "Get_PhyloTree_OT_V1"}],
        "horizon": 6}).json()
    chosen = refined["candidates"][0]["workflow"]
    requests = [{"type": "avoid", "target": "Get_PhyloTree_OT_V1"}]
    r = client.post(f"/sessions/{sid}/select",
                    json={"workflow": chosen, "requests": requests})
    assert r.status_code == 200
    doc = r.json()
    assert doc["current"] == chosen
    assert len(doc["history"]) == 1
    assert doc["history"][0]["requests"] == requests
    again = client.get(f"/sessions/{sid}").json()
    assert again["current"] == chosen


def test_select_rejects_invalid_workflow(client, rid):
    sid, _ = make_session(client, rid)
    current = client.get(f"/sessions/{sid}").json()["current"]
    broken = json.loads(json.dumps(current))
    broken["edges"].append({"src": broken["nodes"][-1]["id"],
                            "dst": broken["nodes"][0]["id"],
                            "out_port": "recon_out",
                            "in_port": "gene_names_in"})
    r = client.post(f"/sessions/{sid}/select", json={"workflow": broken})
    assert r.status_code == 422
    body = r.json()
    assert body["code"] == "invalid_workflow"
    assert body["violations"]


def test_session_isolation(client, rid):
    sid_a, _ = make_session(client, rid)
    sid_b, _ = make_session(client, rid)
    assert sid_a != sid_b
    before = client.get(f"/sessions/{sid_a}").json()["current"]
    refined = client.post(f"/sessions/{sid_a}/refine",
                          json={"requests": [], "horizon": 6}).json()
    other = next(c["workflow"] for c in refined["candidates"]
                 if c["workflow"] != before)
    client.post(f"/sessions/{sid_a}/select", json={"workflow": other})
    a = client.get(f"/sessions/{sid_a}").json()
    b = client.get(f"/sessions/{sid_b}").json()
    assert len(a["history"]) == 1
    assert b["history"] == []
    assert a["current"] != b["current"]


# ---------------------------------------------------------------------------
# persistence

def test_sessions_survive_restart(tmp_path, phylo_doc):
    store_path = tmp_path / "store"
    app1 = create_app(store_path=store_path)
    with TestClient(app1) as c1:
        rid = c1.post("/registries", json=phylo_doc).json()["id"]
        sid, _ = make_session(c1, rid)
        before = c1.get(f"/sessions/{sid}").json()
    app2 = create_app(store_path=store_path)
    with TestClient(app2) as c2:
        after = c2.get(f"/sessions/{sid}").json()
        assert after == before
        # the registry came back too: refinement still works
        r = c2.post(f"/sessions/{sid}/refine",
                    json={"requests": [], "horizon": 6})
        assert r.status_code == 200


def test_store_version_mismatch_rejected(tmp_path, phylo_doc):
    store_path = tmp_path / "store"
    app = create_app(store_path=store_path)
    with TestClient(app) as c:
        rid = c.post("/registries", json=phylo_doc).json()["id"]
        sid, _ = make_session(c, rid)
    path = store_path / "sessions" / f"{sid}.json"
    doc = json.loads(path.read_text())
    doc["version"] = STORE_VERSION + 1
    path.write_text(json.dumps(doc))
    with pytest.raises(StoreError, match="version"):
        FileStore(store_path)


# ---------------------------------------------------------------------------
# similarity endpoint

def two_candidate_docs(client, rid):
    body = client.post("/compose",
                       json={"registry": rid, "problem": PROBLEM}).json()
    return body["candidates"][0]["workflow"], body["candidates"][1]["workflow"]


def test_similarity_endpoint(client, rid):
    wf_a, wf_b = two_candidate_docs(client, rid)
    r = client.post("/similarity", json={"registry": rid,
                                         "workflow_a": wf_a,
                                         "workflow_b": wf_b})
    assert r.status_code == 200
    body = r.json()
    assert set(body) >= {"node_level", "edge_level", "topo_level", "combined",
                         "edit_distance", "edit_distance_exact", "node_matrix"}
    flipped = client.post("/similarity", json={"registry": rid,
                                               "workflow_a": wf_b,
                                               "workflow_b": wf_a}).json()
    assert flipped["combined"] == body["combined"]
    assert body["combined"] == pytest.approx(
        0.45 * body["node_level"] + 0.35 * body["edge_level"]
        + 0.2 * body["topo_level"])


def test_similarity_weight_override(client, rid):
    wf_a, wf_b = two_candidate_docs(client, rid)
    r = client.post("/similarity", json={
        "registry": rid, "workflow_a": wf_a, "workflow_b": wf_b,
        "weights": {"node": 0.0, "edge": 0.0, "topo": 1.0}})
    body = r.json()
    assert body["combined"] == pytest.approx(body["topo_level"])


def test_similarity_bad_weights(client, rid):
    wf_a, wf_b = two_candidate_docs(client, rid)
    r = client.post("/similarity", json={
        "registry": rid, "workflow_a": wf_a, "workflow_b": wf_b,
        "weights": {"node": 0.9, "edge": 0.9, "topo": 0.9}})
    assert r.status_code == 400


def test_similarity_unknown_registry(client):
    r = client.post("/similarity", json={"registry": "nope",
                                         "workflow_a": {}, "workflow_b": {}})
    assert r.status_code == 404


def test_non_object_body_is_bad_request(client):
    r = client.post("/registries", content=b"[1,2,3]",
                    headers={"content-type": "application/json"})
    assert r.status_code == 400
