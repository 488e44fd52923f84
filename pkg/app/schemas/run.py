from typing import Optional

from pydantic import BaseModel

from app.schemas.report import ErrorReport
from app.schemas.resource import ResourceEstimate


class RecoveryInfo(BaseModel):
    mode: str
    p_star: float
    p1: float
    index: int


class RunSummary(BaseModel):
    name: str
    config_hash: str
    formulation: str
    dimension: int
    lambda_max: float
    p_window: tuple[float, float, int]
    recovery: RecoveryInfo
    errors: dict[str, ErrorReport]
    resources: ResourceEstimate
    predicted_m_H: int
    metric: str
    tolerance: float
    worst_error: float
    passed: bool
    artifacts: list[str] = []
    seconds: Optional[float] = None
