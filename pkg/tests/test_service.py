import io
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gaussianperiods.cli import main as cli_main
from gaussianperiods.service import ServiceConfig, create_app


@pytest.fixture()
def client():
    app = create_app(ServiceConfig(sync_timeout_s=30.0))
    with TestClient(app) as c:
        yield c


def test_periods_4_5(client):
    r = client.get("/api/periods", params={"n": 4, "omega": 5, "c": 1})
    assert r.status_code == 200
    doc = r.json()
    assert doc["params"] == {"n": 4, "omega": 1, "c": 1, "mode": "standard"}
    assert doc["d"] == 1 and doc["class_count"] == 1 and not doc["binned"]
    values = sorted((p["re"], p["im"]) for p in doc["points"])
    expected = sorted([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])
    for got, want in zip(values, expected):
        assert abs(got[0] - want[0]) < 1e-12 and abs(got[1] - want[1]) < 1e-12


def test_periods_rejects_non_coprime(client):
    r = client.get("/api/periods", params={"n": 12, "omega": 4})
    assert r.status_code == 400
    assert r.json()["error"] == "not_coprime"


def test_periods_rejects_bad_divisor_and_ints(client):
    assert client.get("/api/periods", params={"n": 12, "omega": 5, "c": 7}).json()["error"] == "not_divisor"
    assert client.get("/api/periods", params={"n": "abc", "omega": 5}).json()["error"] == "invalid_n"
    assert client.get("/api/periods", params={"omega": 5}).json()["error"] == "invalid_n"
    assert client.get("/api/periods", params={"n": 12, "omega": 5, "mode": "neon"}).json()["error"] == "invalid_mode"


def test_periods_27_2_9(client):
    doc = client.get("/api/periods", params={"n": 27, "omega": 2, "c": 9}).json()
    assert doc["class_count"] == 3
    assert doc["dihedral_order"] == 1
    assert doc["orbit_count"] == 4


def test_too_large_maps_to_400(client, monkeypatch):
    monkeypatch.setenv("GP_MAX_N", "100")
    r = client.get("/api/periods", params={"n": 101, "omega": 2})
    assert r.status_code == 400
    assert r.json()["error"] == "too_large"


def test_recolor_hits_cache(client):
    r1 = client.get("/api/periods", params={"n": 100000, "omega": 3, "c": 1})
    assert r1.status_code == 200
    stats = client.get("/api/stats").json()
    assert stats["computed"] == 1
    t0 = time.perf_counter()
    r2 = client.get("/api/periods", params={"n": 100000, "omega": 3, "c": 10})
    elapsed = time.perf_counter() - t0
    assert r2.status_code == 200
    stats = client.get("/api/stats").json()
    assert stats["computed"] == 1  # no recompute for a re-color
    assert stats["hits"] >= 1
    assert elapsed < 0.5  # interactive budget for n <= 1e5
    # mode changes reuse the cache too
    client.get("/api/periods", params={"n": 100000, "omega": 3, "c": 10, "mode": "period-squared"})
    assert client.get("/api/stats").json()["computed"] == 1


def test_concurrent_identical_requests_coalesce():
    app = create_app(ServiceConfig(sync_timeout_s=30.0))
    with TestClient(app) as client:
        results = []

        def hit():
            results.append(client.get("/api/periods", params={"n": 250000, "omega": 7}).status_code)

        threads = [threading.Thread(target=hit) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results == [200, 200, 200, 200]
        assert client.get("/api/stats").json()["computed"] == 1


def test_render_parity_with_cli(client, tmp_path):
    out = tmp_path / "cli.png"
    assert cli_main(
        ["render", "--n", "12", "--omega", "5", "--c", "3",
         "--out", str(out), "--width", "240", "--height", "240"]
    ) == 0
    r = client.get(
        "/api/render",
        params={"n": 12, "omega": 5, "c": 3, "width": 240, "height": 240},
    )
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    assert r.content == out.read_bytes()


def test_render_large_parameters(client):
    r = client.get("/api/render", params={"n": 255255, "omega": 254, "c": 7, "width": 200, "height": 200})
    assert r.status_code == 200
    assert r.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_render_rejects_zero_width(client):
    r = client.get("/api/render", params={"n": 12, "omega": 5, "width": 0})
    assert r.status_code == 400
    assert r.json()["error"] == "invalid_dimension"


def test_render_layer_subset_differs(client):
    full = client.get("/api/render", params={"n": 12, "omega": 5, "c": 3, "width": 100, "height": 100})
    sub = client.get(
        "/api/render",
        params={"n": 12, "omega": 5, "c": 3, "width": 100, "height": 100, "layers": "0"},
    )
    assert sub.status_code == 200 and sub.content != full.content
    bad = client.get("/api/render", params={"n": 12, "omega": 5, "layers": "x"})
    assert bad.status_code == 400 and bad.json()["error"] == "invalid_layers"


def test_binned_payload():
    app = create_app(ServiceConfig(bin_threshold=10, bin_grid=64))
    with TestClient(app) as client:
        doc = client.get("/api/periods", params={"n": 3019, "omega": 239}).json()
        assert doc["binned"] is True
        assert doc["grid"] == {"nx": 64, "ny": 64, "extent": doc["extent"]}
        total = sum(p["count"] for p in doc["points"])
        assert total == doc["orbit_count"]
        assert all(0 <= p["color_class"] < doc["class_count"] for p in doc["points"])
        assert all(abs(p["re"]) <= doc["extent"] and abs(p["im"]) <= doc["extent"] for p in doc["points"])


def test_fillout_endpoint(client):
    doc = client.get("/api/fillout", params={"d": 1, "samples": 64}).json()
    mags = [abs(complex(p["re"], p["im"])) for p in doc["points"]]
    assert all(abs(m - 1) < 1e-9 for m in mags)

    doc = client.get("/api/fillout", params={"d": 3, "samples": 100}).json()
    assert max(abs(complex(p["re"], p["im"])) for p in doc["points"]) <= 3 + 1e-9

    r = client.get("/api/fillout", params={"d": 0})
    assert r.status_code == 400 and r.json()["error"] == "invalid_d"


def test_pending_job_flow():
    app = create_app(ServiceConfig(sync_timeout_s=0.0))
    with TestClient(app) as client:
        r = client.get("/api/periods", params={"n": 500000, "omega": 3, "c": 2})
        assert r.status_code == 202
        token = r.json()["token"]
        deadline = time.time() + 30
        while time.time() < deadline:
            r = client.get(f"/api/jobs/{token}", params={"c": 2})
            if r.status_code == 200:
                break
            assert r.status_code == 202
            time.sleep(0.05)
        assert r.status_code == 200
        assert r.json()["params"]["n"] == 500000 and r.json()["params"]["c"] == 2
        assert client.get("/api/jobs/deadbeef").status_code == 404


def test_over_capacity_returns_503():
    app = create_app(ServiceConfig(max_pending=0))
    with TestClient(app) as client:
        r = client.get("/api/periods", params={"n": 1009, "omega": 3})
        assert r.status_code == 503
        assert r.json()["error"] == "over_capacity"


def test_cache_eviction_under_budget():
    app = create_app(ServiceConfig(cache_bytes=1))  # everything evicts
    with TestClient(app) as client:
        client.get("/api/periods", params={"n": 1000, "omega": 3})
        client.get("/api/periods", params={"n": 1001, "omega": 3})
        stats = client.get("/api/stats").json()
        assert stats["entries"] == 1  # most recent stays, budget notwithstanding
        assert stats["computed"] == 2


def test_stats_fields(client):
    doc = client.get("/api/stats").json()
    assert {"hits", "misses", "computed", "entries", "bytes", "budget_bytes", "size_cap"} <= set(doc)
