from typing import Literal, Optional

from pydantic import BaseModel, Field

from app.schemas.experiment import Formulation

PROXY_LABEL = "proxy, constants-1 convention"


class ComplexityScenario(BaseModel):
    formulation: Formulation
    d: int = Field(ge=1, le=3)
    r: float = Field(default=2.0, ge=2)
    epsilon: float = Field(gt=0, lt=1)
    T: float = Field(gt=0)
    k: Optional[int] = Field(default=None, ge=1)


class ResourceEstimate(BaseModel):
    source: Literal["measured", "predicted"]
    formulation: Optional[str] = None
    d: Optional[int] = None
    r: Optional[float] = None
    epsilon: Optional[float] = None
    T: float
    s: int
    hmax: float
    tau: float
    m_H: int
    m_e: int
    delta: float
    n_query: int
    n_gate: float
    classical_ops: Optional[float] = None
    smooth_warp_gate: Optional[float] = None
    label: str = PROXY_LABEL


class PstarScalingRequest(BaseModel):
    scheme: Literal["spectral", "central"]
    M: list[int]
    rho: float = Field(gt=0)
    lam: float
    mu: float = Field(gt=0)
    a: float = 0.0
    b: float = 1.0


class PstarScalingRow(BaseModel):
    M: int
    lambda_max: float
    predicted: float


class PstarScaling(BaseModel):
    scheme: str
    rows: list[PstarScalingRow]
    slope: float
    intercept: float
    r_squared: float
    predicted_slope: float
