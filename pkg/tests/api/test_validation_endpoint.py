from httpx import AsyncClient


async def test_validation_subset(client: AsyncClient):
    res = await client.get(
        "/api/v1/validation",
        params=[("only", "central-difference-antisymmetry"), ("only", "hermitian-split")],
    )
    assert res.status_code == 200
    data = res.json()
    assert data["passed"] is True
    assert [c["name"] for c in data["checks"]] == ["central-difference-antisymmetry", "hermitian-split"]
    assert data["checks"][0]["tolerance"] == 1e-12
