import logging
import time

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.v1.router import api_router
from app.core.config import settings
from app.core.exceptions import ConfigError, PresetNotFoundError, SchroWaveError
from app.core.logging import configure_logging

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="SchroWave API",
    version="1.0.0",
    docs_url="/api/docs",
    redoc_url="/api/redoc",
    openapi_url="/api/openapi.json",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next) -> Response:
    start = time.monotonic()
    response = await call_next(request)
    latency_ms = int((time.monotonic() - start) * 1000)
    logger.info("%s %s -> %d (%d ms)", request.method, request.url.path, response.status_code, latency_ms)
    return response


@app.exception_handler(SchroWaveError)
async def schrowave_error(request: Request, exc: SchroWaveError) -> JSONResponse:
    if isinstance(exc, PresetNotFoundError):
        status = 404
    elif isinstance(exc, ConfigError):
        status = 422
    else:
        status = 400
    body = {"detail": str(exc), "error": type(exc).__name__}
    if isinstance(exc, ConfigError) and exc.problems:
        body["problems"] = exc.problems
    return JSONResponse(status_code=status, content=body)


@app.get("/api/health", tags=["health"])
async def health():
    return {"status": "ok"}


app.include_router(api_router, prefix="/api/v1")
