from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from app.schemas.resource import (
    ComplexityScenario,
    PstarScaling,
    PstarScalingRequest,
    ResourceEstimate,
)
from app.services.media import IsotropicMedium
from app.services.resources import predict, pstar_scaling

router = APIRouter(prefix="/resources", tags=["resources"])


@router.post("/predict", response_model=ResourceEstimate)
async def predict_resources(scenario: ComplexityScenario):
    return predict(scenario)


@router.post("/pstar-scaling", response_model=PstarScaling)
async def pstar_scaling_table(body: PstarScalingRequest):
    """λ_max(H1) against M for the 1-D displacement system, with a linear fit."""
    medium = IsotropicMedium(rho=body.rho, lam=body.lam, mu=body.mu)
    return await run_in_threadpool(pstar_scaling, body.scheme, body.M, medium, body.a, body.b)
