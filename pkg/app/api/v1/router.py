from fastapi import APIRouter

from app.api.v1.endpoints import experiments, presets, resources, validation

api_router = APIRouter()

api_router.include_router(presets.router)
api_router.include_router(experiments.router)
api_router.include_router(resources.router)
api_router.include_router(validation.router)
