import pytest
from httpx import AsyncClient


async def test_predict(client: AsyncClient):
    res = await client.post(
        "/api/v1/resources/predict",
        json={"formulation": "smf", "d": 3, "r": 2, "epsilon": 0.01, "T": 1},
    )
    assert res.status_code == 200
    data = res.json()
    assert data["source"] == "predicted"
    assert data["n_gate"] == pytest.approx(1496.578428, rel=1e-6)
    assert data["label"].startswith("proxy")


async def test_predict_rejects_bad_scenario(client: AsyncClient):
    res = await client.post(
        "/api/v1/resources/predict",
        json={"formulation": "smf", "d": 4, "epsilon": 0.01, "T": 1},
    )
    assert res.status_code == 422


async def test_pstar_scaling(client: AsyncClient):
    res = await client.post(
        "/api/v1/resources/pstar-scaling",
        json={"scheme": "central", "M": [16, 32, 64], "rho": 1.41, "lam": 0.61, "mu": 0.40},
    )
    assert res.status_code == 200
    data = res.json()
    assert [r["M"] for r in data["rows"]] == [16, 32, 64]
    assert data["rows"][-1]["lambda_max"] == pytest.approx(4.303, abs=0.01)
    assert data["r_squared"] > 0.999


async def test_pstar_scaling_needs_three_sizes(client: AsyncClient):
    res = await client.post(
        "/api/v1/resources/pstar-scaling",
        json={"scheme": "spectral", "M": [16, 32], "rho": 1.41, "lam": 0.61, "mu": 0.40},
    )
    assert res.status_code == 422


async def test_pstar_scaling_bad_medium(client: AsyncClient):
    res = await client.post(
        "/api/v1/resources/pstar-scaling",
        json={"scheme": "spectral", "M": [16, 32, 64], "rho": 1.0, "lam": -5.0, "mu": 1.0},
    )
    assert res.status_code == 400
    assert res.json()["error"] == "MediumError"
