import threading
import time

import pytest
from fastapi.testclient import TestClient

from tileprobe.exact_engine import AggregateRequest, evaluate_exact
from tileprobe.service import build_session, create_app
from tileprobe.tile_index import IndexConfig
from tileprobe.workload import gen_dataset

CFG = IndexConfig(initial_grid=6, min_split_count=16)


@pytest.fixture(scope="module")
def data_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("svc") / "svc.csv"
    gen_dataset(seed=33, rows=3_000, numeric_cols=4, distribution="uniform", out_path=path)
    return path


@pytest.fixture
def session(data_path):
    return build_session(data_path, 0, 1, [2, 3], config=CFG)


@pytest.fixture
def client(session):
    return TestClient(create_app(session))


def query_body(rect, requests, phi=None):
    return {
        "rect": {"xMin": rect[0], "xMax": rect[1], "yMin": rect[2], "yMax": rect[3]},
        "requests": requests,
        "phi": phi,
    }


class TestEndpoints:
    def test_dataset(self, client, session):
        r = client.get("/api/dataset").json()
        assert r["columns"] == ["x", "y", "a0", "a1"]
        assert r["tracked"] == ["a0", "a1"]
        assert r["rowCount"] == 3_000
        assert set(r["domain"]) == {"xMin", "xMax", "yMin", "yMax"}

    def test_exact_query_bit_identical_to_direct_call(self, client, session, data_path):
        rect = (100.0, 600.0, 100.0, 600.0)
        resp = client.post("/api/query", json=query_body(rect, [{"function": "mean", "attribute": 2}]))
        assert resp.status_code == 200
        got = resp.json()["results"][0]["value"]

        twin = build_session(data_path, 0, 1, [2, 3], config=CFG)
        from tileprobe.tile_index import Rect
        ans = evaluate_exact(twin.index, Rect(*[rect[0], rect[1], rect[2], rect[3]]),
                             [AggregateRequest("mean", 2)], twin.reader)
        assert got == ans.values[0]

        from tileprobe.oracle import oracle
        (truth,) = oracle(data_path, rect, [("mean", 2)], 0, 1)
        assert got == truth  # phi=null answers are the ground truth

    def test_attribute_by_name(self, client):
        rect = (0.0, 1000.0, 0.0, 1000.0)
        r = client.post("/api/query", json=query_body(rect, [{"function": "sum", "attribute": "a1"}]))
        assert r.status_code == 200

    def test_rect_outside_domain(self, client):
        resp = client.post("/api/query", json=query_body(
            (2000.0, 3000.0, 2000.0, 3000.0),
            [{"function": "count"}, {"function": "mean", "attribute": 2}],
        ))
        assert resp.status_code == 200
        results = resp.json()["results"]
        assert results[0]["value"] == 0.0
        assert results[1]["value"] is None and results[1]["ci"] is None

    def test_approx_query_respects_phi(self, client):
        resp = client.post("/api/query", json=query_body(
            (100.0, 800.0, 100.0, 800.0), [{"function": "mean", "attribute": 2}], phi=0.05))
        body = resp.json()
        res = body["results"][0]
        assert res["reportedBound"] <= 0.05
        assert res["ci"]["lo"] <= res["value"] <= res["ci"]["hi"]

    def test_phi_above_one_is_estimate_only(self, client, session):
        before = session.reader.rows_read
        resp = client.post("/api/query", json=query_body(
            (100.0, 800.0, 100.0, 800.0), [{"function": "mean", "attribute": 2}], phi=5.0))
        assert resp.status_code == 200
        assert session.reader.rows_read == before

    def test_malformed_inputs(self, client):
        bad_rect = query_body((500.0, 100.0, 0.0, 1.0), [{"function": "count"}])
        assert client.post("/api/query", json=bad_rect).status_code == 400
        unknown = query_body((0.0, 1.0, 0.0, 1.0), [{"function": "mean", "attribute": "nope"}])
        assert client.post("/api/query", json=unknown).status_code == 400
        untracked = query_body((0.0, 1.0, 0.0, 1.0), [{"function": "mean", "attribute": 1}])
        assert client.post("/api/query", json=untracked).status_code == 400
        neg_phi = query_body((0.0, 1.0, 0.0, 1.0), [{"function": "count"}], phi=-0.5)
        assert client.post("/api/query", json=neg_phi).status_code == 400

    def test_tiles_and_points_do_not_read_rows(self, client, session):
        before = session.reader.rows_read
        snap = client.get("/api/tiles", params={"max_depth": 1}).json()
        assert len(snap["tiles"]) == 36
        pts = client.get("/api/points", params={"rect": "0,1000,0,1000", "limit": 50}).json()
        assert len(pts["points"]) == 50
        assert session.reader.rows_read == before
        assert client.get("/api/points", params={"rect": "0,1000"}).status_code == 400

    def test_stats_accumulate(self, client, session):
        client.post("/api/query", json=query_body(
            (100.0, 900.0, 100.0, 900.0), [{"function": "sum", "attribute": 2}]))
        stats = client.get("/api/stats").json()
        assert stats["queriesServed"] >= 1
        assert stats["rowsRead"] == session.reader.rows_read


class TestConcurrency:
    def test_conflict_without_queueing(self, data_path):
        session = build_session(data_path, 0, 1, [2], config=CFG, queue_mutations=False)
        client = TestClient(create_app(session))
        session.write_lock.acquire()
        try:
            resp = client.post("/api/query", json=query_body(
                (0.0, 500.0, 0.0, 500.0), [{"function": "mean", "attribute": 2}]))
            assert resp.status_code == 409
        finally:
            session.write_lock.release()
        assert client.post("/api/query", json=query_body(
            (0.0, 500.0, 0.0, 500.0), [{"function": "mean", "attribute": 2}])).status_code == 200

    def test_queued_by_default(self, data_path):
        session = build_session(data_path, 0, 1, [2], config=CFG)
        client = TestClient(create_app(session))
        session.write_lock.acquire()
        threading.Timer(0.2, session.write_lock.release).start()
        t0 = time.perf_counter()
        resp = client.post("/api/query", json=query_body(
            (0.0, 500.0, 0.0, 500.0), [{"function": "mean", "attribute": 2}]))
        assert resp.status_code == 200
        assert time.perf_counter() - t0 >= 0.15


def test_static_mount(tmp_path, data_path):
    (tmp_path / "index.html").write_text("<html><body>ui</body></html>")
    session = build_session(data_path, 0, 1, [2], config=CFG)
    client = TestClient(create_app(session, static_dir=tmp_path))
    assert "ui" in client.get("/").text
    assert client.get("/api/dataset").status_code == 200
