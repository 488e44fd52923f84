from typing import Optional

from fastapi import APIRouter, Query
from starlette.concurrency import run_in_threadpool

from app.schemas.validation import ValidationReport
from app.services.validation import run_validation

router = APIRouter(prefix="/validation", tags=["validation"])


@router.get("", response_model=ValidationReport)
async def validate(
    quick: bool = True,
    only: Optional[list[str]] = Query(default=None),
):
    return await run_in_threadpool(run_validation, quick=quick, only=only)
