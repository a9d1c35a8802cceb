import pytest

from testbench.api import app

TINY_BODY = {
    "system": {
        "users": 1, "antennas": 2, "subcarriers": 8, "symbols": 8, "pilots": 2,
        "tap_profile": [{"delay_ns": 0, "power_db": 0.0}],
    },
    "stage1": {"epochs": 5, "generated_samples": 4},
    "dip": {"layers": 2, "widths": [4, 4], "symbols": 4, "iterations": 3},
    "experiment": {"snr_db": [0, 10], "realizations": 2},
}


@pytest.fixture
def client():
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    body = client.get("/api/health").get_json()
    assert body["success"] is True
    assert body["status"] == "healthy"


def test_defaults(client):
    body = client.get("/api/defaults").get_json()
    assert set(body["defaults"]) == {"system", "stage1", "dip", "experiment"}
    assert body["methods"] == ["pipeline", "stage1-only", "ls-unquantized", "bussgang-ls"]


def test_complexity(client):
    body = client.get("/api/complexity?subcarriers=16&antennas=4").get_json()
    assert body["complexity"]["weights_per_antenna"] == 32 * 16 ** 2
    assert body["complexity"]["weights_total"] == 4 * 32 * 16 ** 2


def test_complexity_rejects_bad_geometry(client):
    response = client.get("/api/complexity?subcarriers=12&antennas=4")
    assert response.status_code == 400
    assert response.get_json()["success"] is False
    assert client.get("/api/complexity?subcarriers=0").status_code == 400


def test_demo(client):
    response = client.post("/api/demo", json=dict(TINY_BODY, snr_db=5))
    assert response.status_code == 200
    body = response.get_json()
    assert set(body["nmse_db"]) == {"stage1", "pipeline", "bussgang-ls"}
    assert body["snr_db"] == 5.0
    assert len(body["stage1_final_loss"]) == 2


def test_sweep(client):
    body = client.post("/api/sweep", json=TINY_BODY).get_json()
    assert body["stats"]["rowCount"] == 8
    assert len(body["rows"]) == 8
    assert body["rows"][0]["snr_db"] == 0.0


def test_sweep_rejects_bad_sections(client):
    response = client.post("/api/sweep", json={"system": {"antenna": 4}})
    assert response.status_code == 400
    response = client.post("/api/sweep", json={"experiment": {"realizations": 0}})
    assert response.status_code == 400


def test_sweep_needs_an_explicit_experiment(client):
    response = client.post("/api/sweep", json={})
    assert response.status_code == 400
    assert "experiment" in response.get_json()["error"]
    body = {k: v for k, v in TINY_BODY.items() if k != "experiment"}
    assert client.post("/api/sweep", json=body).status_code == 400


def test_sweep_size_is_capped(client):
    body = dict(TINY_BODY, experiment={"snr_db": [0, 5, 10, 15], "realizations": 11})
    response = client.post("/api/sweep", json=body)
    assert response.status_code == 400
    assert "at most 40" in response.get_json()["error"]
