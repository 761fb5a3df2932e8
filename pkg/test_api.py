import pytest
from fastapi.testclient import TestClient

from vdims import __version__
from vdims.config import get_settings
from vdims.main import app
from vdims.services import runner
from vdims.services.linalg import InconclusiveRankError


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["version"] == __version__


def test_cases(client):
    body = client.get("/cases").json()
    assert body["success"] is True
    assert len(body["data"]) == 18
    long_standard = next(c for c in body["data"] if c["case"] == "long/standard/mod")
    assert long_standard["relation_families"] == ["6T", "XII", "FI"]
    assert long_standard["moves"] == ["R1+", "R1-", "R2b", "R2c", "R3b", "R3c"]
    assert long_standard["expected"] == [1, 0, 2, 7, 42, 246]


def test_dimensions_long(client):
    response = client.get("/dimensions", params={"skeleton": "long", "max_degree": 2})
    body = response.json()
    assert body["success"] is True
    records = body["data"]["records"]
    assert [r["dim_w"] for r in records] == [1, 0, 2]
    assert [r["dim_v"] for r in records] == [1, 0, 2]
    assert records[2]["w"]["consensus"] is True


def test_dimensions_weight_space_only(client):
    body = client.get(
        "/dimensions",
        params={"skeleton": "descending", "r23": "braid", "r1": "no", "max_degree": 3, "space": "w"},
    ).json()
    records = body["data"]["records"]
    assert [r["dim_w"] for r in records] == [1, 1, 2, 6]
    assert all(r["dim_v"] is None for r in records)


def test_dimensions_heavy_degree_needs_opt_in(client):
    body = client.get("/dimensions", params={"skeleton": "round", "max_degree": 5}).json()
    assert body["success"] is False
    assert body["code"] == "DEGREE_LIMIT"


def test_dimensions_rejects_unknown_skeleton(client):
    assert client.get("/dimensions", params={"skeleton": "flat"}).status_code == 422
    assert client.get("/dimensions", params={"skeleton": "long", "space": "x"}).status_code == 422


def test_verify_degree_one(client):
    body = client.get("/verify", params={"max_degree": 1}).json()
    assert body["success"] is True
    statuses = {cell["status"] for cell in body["data"]["cells"]}
    assert statuses == {"PASS"}
    assert len(body["data"]["cells"]) == 18 * 2


def test_dimensions_default_degree_follows_settings(client, monkeypatch):
    monkeypatch.setenv("DEFAULT_MAX_DEGREE", "1")
    get_settings.cache_clear()
    body = client.get("/dimensions", params={"skeleton": "long"}).json()
    assert body["success"] is True
    assert body["data"]["max_degree"] == 1
    assert len(body["data"]["records"]) == 2


def test_verify_reports_failed_cases(client, monkeypatch):
    def disagree(case, n, primes, mode=None):
        raise InconclusiveRankError(f"P {case.label} n={n}: ranks disagree", {7: 0, 11: 1})

    monkeypatch.setattr(runner, "compute_polyak", disagree)
    body = client.get("/verify", params={"max_degree": 1}).json()
    assert body["success"] is False
    assert len(body["data"]["failures"]) == 18
    assert {cell["status"] for cell in body["data"]["cells"]} == {"ERROR"}
