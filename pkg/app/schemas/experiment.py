import math
import re
from typing import Annotated, Literal, Optional

from pydantic import BaseModel, BeforeValidator, Field, model_validator

Formulation = Literal["smf", "staggered-vs", "displacement-spectral", "displacement-central"]

_PI_EXPR = re.compile(r"^([+-]?\d*\.?\d*)\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$", re.IGNORECASE)


def parse_real(value):
    """Accept plain numbers and multiples of pi ("-3pi", "2*pi", "pi/2")."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    match = _PI_EXPR.match(text)
    if match:
        coef = match.group(1)
        factor = float(coef) if coef not in ("", "+", "-") else float(f"{coef}1")
        divisor = float(match.group(2)) if match.group(2) else 1.0
        return factor * math.pi / divisor
    return text


Real = Annotated[float, BeforeValidator(parse_real)]


class EvolutionConfig(BaseModel):
    scheme: Literal["crank-nicolson", "implicit-euler", "exact-exponential"] = "crank-nicolson"
    dt: Real = Field(gt=0)
    T: Real = Field(ge=0)
    store_trajectory: bool = False

    @model_validator(mode="after")
    def _horizon(self):
        if self.T > 0 and self.T < self.dt * (1 - 1e-12):
            raise ValueError(f"T={self.T} is shorter than one step dt={self.dt}")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def step(self) -> float:
        return self.T / self.n_steps if self.n_steps else self.dt


class GridSection(BaseModel):
    a: Real
    b: Real
    M: int


class MediumSection(BaseModel):
    rho: Optional[Real] = None
    lam: Optional[Real] = None
    mu: Optional[Real] = None
    preset: Optional[str] = None
    table_rho: Optional[str] = None
    table_lam: Optional[str] = None
    table_mu: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        constants = [self.rho, self.lam, self.mu]
        tables = [self.table_rho, self.table_lam, self.table_mu]
        if self.preset is None and any(t is None for t in tables) and any(c is None for c in constants):
            raise ValueError("medium needs rho, lam and mu, a preset, or all three tables")
        return self


class ForceSection(BaseModel):
    kind: Literal["none", "constant"] = "none"
    value: Real = 0.0
    component: int = Field(default=1, ge=1, le=3)


class InitialSection(BaseModel):
    kind: Literal["zero", "gaussian-stress", "exact"]
    center: Real = 0.0
    width: Real = Field(default=1.0, gt=0)


class PGridSection(BaseModel):
    lo: Real
    hi: Real
    N: int


class WarpSection(BaseModel):
    kind: Literal["exact-kink", "smooth"] = "exact-kink"
    k: int = 0

    @model_validator(mode="after")
    def _order(self):
        if self.kind == "smooth" and self.k < 1:
            raise ValueError("smooth warp needs k >= 1")
        return self


class HomogenizationSection(BaseModel):
    c: Optional[Real] = Field(default=None, gt=0)
    pad: bool = False


class RecoverySection(BaseModel):
    mode: Literal["point", "integral"] = "point"
    p1: Optional[Real] = None


class OutputSection(BaseModel):
    dir: Optional[str] = None
    name: Optional[str] = None


class ValidationSection(BaseModel):
    tolerance: Real = Field(default=2e-2, gt=0)
    metric: Literal["l2_rel", "linf_rel"] = "l2_rel"
    reference: Literal["auto", "classical", "exact"] = "auto"


class ExperimentConfig(BaseModel):
    formulation: Formulation
    dimension: int
    grid: GridSection
    medium: MediumSection
    force: ForceSection = ForceSection()
    initial: InitialSection
    pgrid: PGridSection
    warp: WarpSection = WarpSection()
    time: EvolutionConfig
    homogenization: HomogenizationSection = HomogenizationSection()
    recovery: RecoverySection = RecoverySection()
    output: OutputSection = OutputSection()
    validation: ValidationSection = ValidationSection()

    @model_validator(mode="after")
    def _consistency(self):
        allowed = {"smf": (1, 2, 3), "staggered-vs": (2, 3)}.get(self.formulation, (1, 2, 3))
        if self.dimension not in allowed:
            raise ValueError(f"{self.formulation} supports dimension in {allowed}")
        variable = self.medium.preset is not None or self.medium.table_rho is not None
        if variable and self.formulation != "staggered-vs":
            raise ValueError("variable media are only supported by staggered-vs")
        if self.initial.kind == "exact" and not (
            self.formulation.startswith("displacement") and self.dimension == 1
        ):
            raise ValueError("exact initial data exists for the 1-D displacement system only")
        if self.validation.reference == "exact" and self.initial.kind != "exact":
            raise ValueError("validation.reference = exact needs initial.kind = exact")
        return self


class RunRequest(BaseModel):
    preset: Optional[str] = None
    config: Optional[dict[str, str | int | float]] = None
    overrides: dict[str, str | int | float] = {}
    strict: bool = False
    write_artifacts: bool = False

    @model_validator(mode="after")
    def _source(self):
        if (self.preset is None) == (self.config is None):
            raise ValueError("give exactly one of preset or config")
        return self
