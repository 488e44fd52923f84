import pytest
import pytest_asyncio
from httpx import AsyncClient, ASGITransport

from app.main import app
from app.services.grids import make_uniform_grid
from app.services.media import IsotropicMedium

# Table rows used by the 1-D hyperbolic benchmark; both satisfy ρ = λ + 2μ.
ROW_1 = IsotropicMedium(rho=1.41, lam=0.71, mu=0.35)
ROW_2 = IsotropicMedium(rho=1.41, lam=0.61, mu=0.40)


@pytest_asyncio.fixture
async def client():
    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as c:
        yield c


@pytest.fixture
def row1() -> IsotropicMedium:
    return ROW_1


@pytest.fixture
def row2() -> IsotropicMedium:
    return ROW_2


@pytest.fixture
def unit_medium() -> IsotropicMedium:
    return IsotropicMedium(rho=1.0, lam=1.0, mu=1.0)


@pytest.fixture
def grid8():
    return make_uniform_grid(0, 1, 8)


@pytest.fixture
def small_flat() -> dict[str, str]:
    """A desk-scale spectral displacement run against the exact solution (seconds to run)."""
    return {
        "formulation": "displacement-spectral",
        "dimension": "1",
        "grid.a": "0",
        "grid.b": "1",
        "grid.M": "8",
        "medium.rho": "1.41",
        "medium.lam": "0.71",
        "medium.mu": "0.35",
        "initial.kind": "exact",
        "pgrid.lo": "-4pi",
        "pgrid.hi": "4pi",
        "pgrid.N": "64",
        "time.scheme": "crank-nicolson",
        "time.dt": "0.01",
        "time.T": "0.1",
        "output.name": "small",
        "validation.reference": "exact",
        "validation.tolerance": "0.5",
    }
