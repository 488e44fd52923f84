from httpx import AsyncClient


async def test_health(client: AsyncClient):
    res = await client.get("/api/health")
    assert res.status_code == 200
    assert res.json() == {"status": "ok"}


async def test_list_presets(client: AsyncClient):
    res = await client.get("/api/v1/presets")
    assert res.status_code == 200
    assert "smf-1d-forced" in res.json()["presets"]
    assert "hyperbolic-1d-central-b" in res.json()["presets"]


async def test_get_preset(client: AsyncClient):
    res = await client.get("/api/v1/presets/hyperbolic-1d-spectral-a")
    assert res.status_code == 200
    data = res.json()
    assert data["name"] == "hyperbolic-1d-spectral-a"
    assert len(data["config_hash"]) == 64
    assert data["config"]["grid"]["M"] == 32
    assert data["config"]["recovery"]["p1"] == 0.037


async def test_get_unknown_preset(client: AsyncClient):
    res = await client.get("/api/v1/presets/nope")
    assert res.status_code == 404
    assert res.json()["error"] == "PresetNotFoundError"
