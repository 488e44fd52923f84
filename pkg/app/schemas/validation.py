from typing import Optional

from pydantic import BaseModel


class CheckResult(BaseModel):
    name: str
    module: str
    passed: bool
    measured: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""
    seconds: float = 0.0


class ValidationReport(BaseModel):
    passed: bool
    checks: list[CheckResult]
