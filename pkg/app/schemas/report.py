from typing import Optional

from pydantic import BaseModel


class ComponentError(BaseModel):
    component: str
    l2_abs: float
    l2_rel: Optional[float]
    linf_abs: float
    linf_rel: Optional[float]
    rel_defined: bool


class ErrorReport(BaseModel):
    reference: str
    a: float
    b: float
    M: int
    d: int
    components: list[ComponentError]

    def worst(self, metric: str = "l2_rel") -> float:
        values = [getattr(c, metric) for c in self.components]
        values = [v for v in values if v is not None]
        return max(values) if values else 0.0


class ResultRow(BaseModel):
    component: str
    coords: list[float]
    quantum: float
    classical: float
    exact: Optional[float] = None
    abs_err: float
    rel_err: float


class ResultTable(BaseModel):
    metadata: dict[str, str]
    axes: list[str]
    rows: list[ResultRow]
