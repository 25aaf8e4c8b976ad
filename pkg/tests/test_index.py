from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from tentctl.index import app


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_settings_status(client):
    body = client.get("/api/settings").json()
    assert body["workers"] == 1
    assert body["max_iters"] == 1000


def test_count(client):
    assert client.get("/api/count", params={"period": 5}).json() == {"T": 5, "count": 6}
    response = client.get("/api/count", params={"period": 0})
    assert response.status_code == 400
    assert response.json()["detail"]["field"] == "T"


def test_enumerate(client):
    response = client.get("/api/enumerate", params={"H": "3", "period": 2})
    assert response.status_code == 200
    assert response.json() == [{"T": 2, "symbols": "LR", "sign": -1, "points": ["3/10", "9/10"]}]


def test_enumerate_rejects_small_slope(client):
    response = client.get("/api/enumerate", params={"H": "1.5", "period": 2})
    assert response.status_code == 400
    assert response.json()["detail"]["field"] == "H"


def test_find_with_seed(client):
    response = client.post(
        "/api/find",
        json={"H": "3", "period": 2, "regime": "neg", "theta": "9/10", "seeds": ["0.3"]},
    )
    assert response.status_code == 200
    [record] = response.json()
    assert record["tau"] == 2
    assert [Fraction(p) for p in record["points"]] == [Fraction(3, 10), Fraction(9, 10)]


def test_find_grid(client):
    response = client.post("/api/find", json={"H": "3", "period": 2, "regime": "neg", "theta": "9/10", "grid": 10})
    assert response.status_code == 200
    assert [r["tau"] for r in response.json()] == [2]


def test_find_validation(client):
    response = client.post("/api/find", json={"H": "3", "period": 0, "regime": "neg", "offset": "0"})
    assert response.status_code == 422
    response = client.post("/api/find", json={"H": "3", "period": 2, "regime": "neg", "offset": "1.5"})
    assert response.status_code == 400
    assert response.json()["detail"]["field"] == "offset"


def test_graph(client):
    response = client.post("/api/graph", json={"H": "3", "period": 1, "theta": "3/2", "samples": 5})
    assert response.status_code == 200
    rows = response.json()
    assert len(rows) == 5
    assert rows[0][0] == "0"
    response = client.post("/api/graph", json={"H": "3", "period": 2, "theta": "1"})
    assert response.status_code == 400
    assert response.json()["detail"]["field"] == "theta"


def test_cantor(client):
    response = client.post("/api/cantor", json={"mode": "cycles", "H": "3", "period": 2, "bins": 10})
    assert response.status_code == 200
    bins = response.json()
    assert [b["count"] for b in bins] == [1, 0, 0, 1, 0, 0, 0, 1, 0, 1]
    response = client.post("/api/cantor", json={"mode": "first-type", "depth": 8, "count": 100, "bins": 5})
    assert sum(b["count"] for b in response.json()) == 100
    response = client.post("/api/cantor", json={"mode": "cycles", "bins": 10})
    assert response.status_code == 400


def test_find_rejects_theta_outside_both_regimes(client):
    response = client.post(
        "/api/find",
        json={"H": "3", "period": 2, "regime": "neg", "theta": "1", "seeds": ["0.3"]},
    )
    assert response.status_code == 400
    assert response.json()["detail"]["field"] == "theta"
