from httpx import AsyncClient


async def test_run_inline_config(client: AsyncClient, small_flat):
    res = await client.post(
        "/api/v1/experiments/run",
        json={"config": small_flat, "overrides": {"time.T": "0"}},
    )
    assert res.status_code == 200
    data = res.json()
    assert data["passed"] is True
    assert data["worst_error"] < 1e-10
    assert data["artifacts"] == []
    assert data["resources"]["source"] == "measured"
    assert len(data["config_hash"]) == 64


async def test_run_accepts_numeric_values(client: AsyncClient, small_flat):
    res = await client.post(
        "/api/v1/experiments/run",
        json={"config": {**small_flat, "grid.M": 8, "time.T": 0}},
    )
    assert res.status_code == 200


async def test_run_empty_config(client: AsyncClient):
    res = await client.post("/api/v1/experiments/run", json={"config": {}})
    assert res.status_code == 422
    data = res.json()
    assert data["error"] == "ConfigError"
    assert any(p.startswith("formulation") for p in data["problems"])


async def test_run_needs_exactly_one_source(client: AsyncClient, small_flat):
    res = await client.post("/api/v1/experiments/run", json={})
    assert res.status_code == 422
    res = await client.post("/api/v1/experiments/run", json={"preset": "smf-1d-forced", "config": small_flat})
    assert res.status_code == 422


async def test_run_unknown_preset(client: AsyncClient):
    res = await client.post("/api/v1/experiments/run", json={"preset": "nope"})
    assert res.status_code == 404


async def test_run_numerical_error_is_400(client: AsyncClient, small_flat):
    res = await client.post(
        "/api/v1/experiments/run",
        json={"config": small_flat, "overrides": {"recovery.p1": "-1"}, "strict": True},
    )
    assert res.status_code == 400
    assert res.json()["error"] == "PWindowError"
