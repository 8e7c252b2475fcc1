"""HTTP session service tests, driven through the in-process test client."""

import json
import threading
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from capacity_studio import capacity_from_dict, equidistributed, is_valid
from capacity_studio.fixture_data import fixture_path
from capacity_studio.learning import monotonicity_constraints, samples_from_json
from capacity_studio.semantic import constraints_from_json, semantic_constraints
from capacity_studio.server import create_app

GOLDEN = Path(__file__).parent / "golden"


def load_fixture(name):
    with open(fixture_path(name)) as fh:
        return json.load(fh)


@pytest.fixture()
def client(tmp_path, monkeypatch):
    # pin cwd so no UI bundle is discovered and mounted
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CAPACITY_STUDIO_UI", raising=False)
    app = create_app()
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def make_session(client, names=("MIQ", "RS", "CX", "FX", "CT")):
    resp = client.post("/sessions", json={"criteria": list(names)})
    assert resp.status_code == 201
    return resp.json()["id"]


# --- session lifecycle -------------------------------------------------------


def test_create_session_doc(client):
    resp = client.post("/sessions", json={"criteria": ["a", "b", "c"]})
    assert resp.status_code == 201
    doc = resp.json()
    assert doc["revision"] == 0
    assert doc["n"] == 3
    assert doc["criteria"] == ["a", "b", "c"]
    assert doc["results"] == {}
    assert resp.headers["etag"] == '"0"'


@pytest.mark.parametrize(
    "body",
    [
        None,
        {},
        {"criteria": ["only"]},
        {"criteria": ["a", "a", "b"]},
        {"criteria": ["a", ""]},
        {"criteria": "a,b"},
        {"criteria": ["a", "b"], "nickname": "x"},
        {"criteria": [f"c{i}" for i in range(9)]},
    ],
)
def test_create_session_rejects(client, body):
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 400


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.delete("/sessions/nope").status_code == 404
    assert (
        client.post("/sessions/nope/identify?method=semantic").status_code == 404
    )


def test_delete_session(client):
    sid = make_session(client)
    resp = client.delete(f"/sessions/{sid}")
    assert resp.status_code == 200
    assert resp.json()["deleted"] is True
    assert client.get(f"/sessions/{sid}").status_code == 404


def test_root_lists_endpoints(client):
    doc = client.get("/").json()
    assert doc["service"] == "capacity-studio"
    assert any("identify" in e for e in doc["endpoints"])


# --- mutations and revisions -------------------------------------------------


def test_revision_increments_per_mutation(client):
    sid = make_session(client)
    r1 = client.put(f"/sessions/{sid}/constraints", json={
        "linguistic": load_fixture("table12-constraints.json"),
        "intervals": load_fixture("interval-scores.json"),
    })
    assert r1.status_code == 200 and r1.json()["revision"] == 1
    r2 = client.post(
        f"/sessions/{sid}/samples", json=load_fixture("learning-samples.json")
    )
    assert r2.status_code == 200 and r2.json()["revision"] == 2
    r3 = client.post(
        f"/sessions/{sid}/concepts", json=load_fixture("table4-concepts.json")
    )
    assert r3.status_code == 200 and r3.json()["revision"] == 3
    assert r3.headers["etag"] == '"3"'


def test_constraint_set_is_replaced_not_merged(client):
    sid = make_session(client)
    client.put(f"/sessions/{sid}/constraints", json={
        "linguistic": load_fixture("table12-constraints.json"),
    })
    resp = client.put(f"/sessions/{sid}/constraints", json={})
    doc = resp.json()
    assert doc["constraints"] == {
        "linguistic": [], "preferences": [], "intervals": [],
    }


@pytest.mark.parametrize(
    "body",
    [
        {"linguistic": [{"kind": "importance", "a": [1]}]},
        {"linguistic": "x"},
        {"extra": []},
        {"intervals": [{"sample": 0}]},
        {"preferences": [{"type": "unheard-of"}]},
        {"linguistic": [{"kind": "importance", "a": [1], "b": [9],
                         "term": "same level"}]},
    ],
)
def test_constraint_validation_errors(client, body):
    sid = make_session(client)
    resp = client.put(f"/sessions/{sid}/constraints", json=body)
    assert resp.status_code == 400


def test_sample_width_checked(client):
    sid = make_session(client, names=("a", "b", "c"))
    resp = client.post(f"/sessions/{sid}/samples", json=[
        {"f": [0.1, 0.2, 0.3, 0.4], "y": 0.5},
    ])
    assert resp.status_code == 400
    assert "criteria" in resp.json()["detail"]


def test_concepts_dimension_checked(client):
    sid = make_session(client, names=("a", "b", "c"))
    resp = client.post(
        f"/sessions/{sid}/concepts", json=load_fixture("table4-concepts.json")
    )
    assert resp.status_code == 400


def test_malformed_json_body_is_400(client):
    sid = make_session(client)
    resp = client.put(
        f"/sessions/{sid}/constraints",
        content="{not json",
        headers={"content-type": "application/json"},
    )
    assert resp.status_code == 400


# --- optimistic concurrency --------------------------------------------------


def test_stale_if_match_conflicts(client):
    sid = make_session(client)
    client.put(f"/sessions/{sid}/constraints", json={})  # rev 1
    resp = client.post(
        f"/sessions/{sid}/identify?method=semantic",
        headers={"If-Match": '"0"'},
    )
    assert resp.status_code == 409
    assert resp.json()["revision"] == 1
    ok = client.post(
        f"/sessions/{sid}/identify?method=semantic",
        headers={"If-Match": '"1"'},
    )
    assert ok.status_code == 200


def test_if_match_formats_accepted(client):
    sid = make_session(client)
    for header in ("0", '"0"', 'W/"0"'):
        resp = client.post(
            f"/sessions/{sid}/identify?method=semantic",
            headers={"If-Match": header},
        )
        assert resp.status_code == 200, header
    resp = client.post(
        f"/sessions/{sid}/identify?method=semantic",
        headers={"If-Match": "latest"},
    )
    assert resp.status_code == 400


def test_concurrent_edits_yield_one_conflict(client):
    sid = make_session(client)
    client.put(f"/sessions/{sid}/constraints", json={})  # rev 1
    outcomes = []

    def edit():
        resp = client.put(
            f"/sessions/{sid}/constraints",
            json={"intervals": []},
            headers={"If-Match": "1"},
        )
        outcomes.append(resp.status_code)

    threads = [threading.Thread(target=edit) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(outcomes) == [200, 409]


# --- identification flows ----------------------------------------------------


def test_semantic_flow_with_published_constraints(client):
    sid = make_session(client)
    client.put(f"/sessions/{sid}/constraints", json={
        "linguistic": load_fixture("table12-constraints.json"),
        "intervals": load_fixture("interval-scores.json"),
    })
    client.post(
        f"/sessions/{sid}/samples", json=load_fixture("learning-samples.json")
    )
    resp = client.post(f"/sessions/{sid}/identify?method=semantic")
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["method"] == "semantic"
    assert doc["status"] == "optimal"
    assert doc["revision"] == 2
    cap = capacity_from_dict(doc["capacity"])
    assert is_valid(cap)
    # every stated constraint satisfied at the returned capacity
    cons = constraints_from_json(load_fixture("table12-constraints.json"))
    A, b, *_ = semantic_constraints(cons, 5)
    u = cap.to_vector()
    assert float((A @ u + b).max()) <= 1e-6
    A_mono, b_mono, _ = monotonicity_constraints(5)
    assert float((A_mono @ u + b_mono).max()) <= 1e-8


def test_semantic_empty_constraints_is_equidistributed(client):
    sid = make_session(client, names=("a", "b", "c", "d"))
    resp = client.post(f"/sessions/{sid}/identify?method=semantic")
    assert resp.status_code == 200
    cap = capacity_from_dict(resp.json()["capacity"])
    assert np.array_equal(cap.values, equidistributed(4).values)


def test_learn_flow(client):
    sid = make_session(client)
    client.post(
        f"/sessions/{sid}/samples", json=load_fixture("learning-samples.json")
    )
    client.put(f"/sessions/{sid}/constraints", json={
        "preferences": load_fixture("table7-preferences.json"),
    })
    resp = client.post(f"/sessions/{sid}/identify?method=learn")
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["fit_error"] >= 0.0
    assert is_valid(capacity_from_dict(doc["capacity"]))
    assert doc["diagnostics"]["sample_count"] == 10


def test_sugeno_flow_and_densities_revision(client):
    sid = make_session(client)
    densities = load_fixture("table6-singletons.json")
    resp = client.post(f"/sessions/{sid}/identify?method=sugeno", json=densities)
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["diagnostics"]["lambda"] == pytest.approx(0.0255, abs=5e-4)
    assert doc["revision"] == 1  # densities upload is a mutation
    # re-identify with the same densities reuses them without a bump
    again = client.post(f"/sessions/{sid}/identify?method=sugeno")
    assert again.status_code == 200
    assert again.json()["revision"] == 1


def test_sugeno_without_densities_400(client):
    sid = make_session(client)
    resp = client.post(f"/sessions/{sid}/identify?method=sugeno")
    assert resp.status_code == 400


def test_unknown_method_400(client):
    sid = make_session(client)
    resp = client.post(f"/sessions/{sid}/identify?method=magic")
    assert resp.status_code == 400
    resp = client.post(f"/sessions/{sid}/identify")
    assert resp.status_code == 400


def test_infeasible_system_422_with_report(client):
    sid = make_session(client, names=("a", "b"))
    client.post(f"/sessions/{sid}/samples", json=[
        {"f": [0.3, 0.8], "y": 0.2},
        {"f": [0.3, 0.8], "y": 0.9},
    ])
    client.put(f"/sessions/{sid}/constraints", json={
        "intervals": [{"sample": 1, "delta": 0.1}, {"sample": 2, "delta": 0.1}],
    })
    resp = client.post(f"/sessions/{sid}/identify?method=semantic")
    assert resp.status_code == 422
    report = resp.json()["report"]
    assert report["max_violation"] > 0.1
    assert report["suggested_relaxation"]


def test_reidentify_keeps_previous_result_retrievable(client):
    sid = make_session(client, names=("a", "b", "c"))
    first = client.post(f"/sessions/{sid}/identify?method=semantic").json()
    client.put(f"/sessions/{sid}/constraints", json={
        "linguistic": [{"kind": "importance", "a": [1], "b": [2],
                        "lo": 1.3, "hi": 1.7}],
    })
    second = client.post(f"/sessions/{sid}/identify?method=semantic").json()
    assert second["revision"] == first["revision"] + 1
    assert second["capacity"] != first["capacity"]
    doc = client.get(f"/sessions/{sid}").json()
    assert len(doc["history"]) == 2
    assert doc["history"][0] == first
    assert doc["results"]["semantic"] == second


# --- derived views -----------------------------------------------------------


def test_indices_view(client):
    sid = make_session(client)
    assert client.get(f"/sessions/{sid}/indices").status_code == 404
    densities = load_fixture("table6-singletons.json")
    client.post(f"/sessions/{sid}/identify?method=sugeno", json=densities)
    resp = client.get(f"/sessions/{sid}/indices")
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["method"] == "sugeno"
    assert len(doc["indices"]["shapley"]) == 5
    assert sum(doc["indices"]["shapley"]) == pytest.approx(1.0, abs=1e-9)
    assert (
        client.get(f"/sessions/{sid}/indices?method=learn").status_code == 404
    )
    assert (
        client.get(f"/sessions/{sid}/indices?method=magic").status_code == 400
    )


def test_capacity_bytes_match_cli_golden(client):
    sid = make_session(client)
    densities = load_fixture("table6-singletons.json")
    client.post(f"/sessions/{sid}/identify?method=sugeno", json=densities)
    resp = client.get(f"/sessions/{sid}/capacity")
    assert resp.status_code == 200
    golden = (GOLDEN / "sugeno-lattice-stdout.json").read_text(encoding="utf-8")
    assert resp.text == golden


def test_capacity_view_missing_404(client):
    sid = make_session(client)
    assert client.get(f"/sessions/{sid}/capacity").status_code == 404


def test_rank_with_explicit_capacity(client):
    sid = make_session(client)
    client.post(
        f"/sessions/{sid}/concepts", json=load_fixture("table4-concepts.json")
    )
    resp = client.post(f"/sessions/{sid}/rank", json={
        "capacity": load_fixture("table5-capacity.json"),
    })
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["capacity_source"] == "request"
    assert [r["name"] for r in doc["ranking"]] == [
        "Concept III", "Concept IV", "Concept I", "Concept II",
    ]


def test_rank_with_identified_capacity(client):
    sid = make_session(client)
    client.post(
        f"/sessions/{sid}/concepts", json=load_fixture("table4-concepts.json")
    )
    assert client.post(f"/sessions/{sid}/rank").status_code == 404
    densities = load_fixture("table6-singletons.json")
    client.post(f"/sessions/{sid}/identify?method=sugeno", json=densities)
    resp = client.post(f"/sessions/{sid}/rank")
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["capacity_source"] == "sugeno"
    assert len(doc["ranking"]) == 4
    assert [r["rank"] for r in doc["ranking"]] == [1, 2, 3, 4]


def test_rank_needs_concepts(client):
    sid = make_session(client)
    assert client.post(f"/sessions/{sid}/rank").status_code == 400


# --- persistence and static UI -----------------------------------------------


def test_snapshot_round_trip(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CAPACITY_STUDIO_UI", raising=False)
    snap = tmp_path / "sessions.json"
    with TestClient(create_app(snapshot_path=str(snap))) as client:
        sid = make_session(client)
        client.put(f"/sessions/{sid}/constraints", json={
            "linguistic": load_fixture("table12-constraints.json"),
        })
    assert snap.exists()
    with TestClient(create_app(snapshot_path=str(snap))) as client:
        doc = client.get(f"/sessions/{sid}")
        assert doc.status_code == 200
        assert doc.json()["revision"] == 1
        assert len(doc.json()["constraints"]["linguistic"]) == 15


def test_static_ui_mounted_when_present(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    dist = tmp_path / "bundle"
    dist.mkdir()
    (dist / "index.html").write_text("<!doctype html><title>studio</title>")
    with TestClient(create_app(static_dir=str(dist))) as client:
        resp = client.get("/")
        assert resp.status_code == 200
        assert "studio" in resp.text
        # API still routed ahead of the static mount
        assert client.post(
            "/sessions", json={"criteria": ["a", "b"]}
        ).status_code == 201


def test_missing_static_dir_rejected(tmp_path):
    with pytest.raises(ValueError):
        create_app(static_dir=str(tmp_path / "absent"))
