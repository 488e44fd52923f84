from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from app.schemas.experiment import RunRequest
from app.schemas.run import RunSummary
from app.services.config_loader import load_config, parse_config
from app.services.pipeline import run_experiment

router = APIRouter(prefix="/experiments", tags=["experiments"])


@router.post("/run", response_model=RunSummary)
async def run(body: RunRequest):
    """Run one experiment in a worker thread; artifacts are written only on request."""
    if body.preset:
        cfg = load_config(preset=body.preset, overrides=body.overrides)
    else:
        cfg = parse_config({**body.config, **body.overrides})
    outcome = await run_in_threadpool(
        run_experiment, cfg, strict=body.strict, write=body.write_artifacts
    )
    return outcome.summary
