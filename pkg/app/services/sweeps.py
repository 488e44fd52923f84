"""
Convergence sweeps over the spatial grid (M), the p grid (N) or the time step (dt).

  M:  classical solve of the shared spatial discretization against the exact solution.
  N:  Schrödingerized run against the classical run, both with exact exponentials in time,
      so only the p discretization differs.
  dt: classical solve against the exponential of the augmented generator.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Sequence

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.schemas.experiment import ExperimentConfig
from app.services import export
from app.services.config_loader import config_hash
from app.services.grids import make_uniform_grid
from app.services.pipeline import assemble, exact_solution, prepare, quantum_solve
from app.services.reference import (
    augmented_exponential_oracle,
    classical_solve,
    error_norms,
    observed_order,
)

logger = logging.getLogger(__name__)

SweepAxis = Literal["M", "N", "dt"]


@dataclass(frozen=True)
class SweepPoint:
    value: float
    h: float
    error: float


@dataclass(frozen=True)
class SweepResult:
    axis: str
    reference: str
    points: list[SweepPoint]
    order: float


def _override(cfg: ExperimentConfig, section: str, key: str, value) -> ExperimentConfig:
    data = cfg.model_dump()
    data[section][key] = value
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"sweep value {section}.{key}={value} is invalid", [str(exc)]) from exc


def check_values(axis: str, values: Sequence) -> list:
    if axis not in ("M", "N", "dt"):
        raise ConfigError(f"unknown sweep axis {axis!r}", ["axis: expected M, N or dt"])
    if len(values) < 3:
        raise ConfigError("a sweep needs at least three values", [f"values: got {list(values)}"])
    cast = int if axis in ("M", "N") else float
    try:
        values = [cast(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep values must be numbers: {exc}") from exc
    steps = [b - a for a, b in zip(values, values[1:])]
    if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
        raise ConfigError("sweep values must be strictly monotone", [f"values: {values}"])
    return values


def _spatial_point(cfg: ExperimentConfig, M: int) -> SweepPoint:
    point_cfg = _override(cfg, "grid", "M", M)
    grid = make_uniform_grid(point_cfg.grid.a, point_cfg.grid.b, M)
    system = assemble(point_cfg, grid)
    fields = system.to_fields(classical_solve(system.ode, point_cfg.time))
    exact = exact_solution(point_cfg).sample(grid.nodes, point_cfg.time.T)
    report = error_norms(fields, exact, grid, point_cfg.dimension, "exact")
    return SweepPoint(value=M, h=grid.h, error=report.worst(cfg.validation.metric))


def _p_point(cfg: ExperimentConfig, N: int) -> SweepPoint:
    point_cfg = _override(_override(cfg, "pgrid", "N", N), "time", "scheme", "exact-exponential")
    prepared = prepare(point_cfg)
    u_quantum, _ = quantum_solve(prepared, threads=1)
    u_ref = augmented_exponential_oracle(prepared.ode, point_cfg.time.T)
    system = prepared.system
    report = error_norms(
        system.to_fields(u_quantum), system.to_fields(u_ref), prepared.grid, cfg.dimension, "oracle"
    )
    return SweepPoint(value=N, h=prepared.pgrid.dp, error=report.worst(cfg.validation.metric))


def _time_point(cfg: ExperimentConfig, dt: float) -> SweepPoint:
    point_cfg = _override(cfg, "time", "dt", dt)
    system = assemble(point_cfg)
    u = classical_solve(system.ode, point_cfg.time)
    u_ref = augmented_exponential_oracle(system.ode, point_cfg.time.T)
    grid = system.grid
    report = error_norms(system.to_fields(u), system.to_fields(u_ref), grid, cfg.dimension, "oracle")
    return SweepPoint(value=dt, h=point_cfg.time.step, error=report.worst(cfg.validation.metric))


def sweep(
    cfg: ExperimentConfig,
    axis: SweepAxis,
    values: Sequence,
    threads: Optional[int] = None,
) -> SweepResult:
    values = check_values(axis, values)
    if axis == "M":
        if cfg.initial.kind != "exact":
            raise ConfigError("an M sweep needs a config with an exact solution (initial.kind = exact)")
        point, reference = _spatial_point, "exact"
    elif axis == "N":
        point, reference = _p_point, "classical-exponential"
    else:
        point, reference = _time_point, "oracle"

    logger.info("sweep: starting %s over %s", axis, values)
    with ThreadPoolExecutor(max_workers=threads or settings.THREADS) as pool:
        points = list(pool.map(lambda v: point(cfg, v), values))
    order = observed_order([p.h for p in points], [p.error for p in points])
    logger.info("sweep: complete, observed order %.3f", order)
    return SweepResult(axis=axis, reference=reference, points=points, order=order)


def write_sweep(result: SweepResult, cfg: ExperimentConfig, path: str | Path) -> Path:
    metadata = {
        "axis": result.axis,
        "reference": result.reference,
        "observed_order": export.fmt(result.order),
        "config_hash": config_hash(cfg),
    }
    rows = ([p.value, p.h, p.error] for p in result.points)
    return export.write_csv(path, [result.axis, "h", "error"], rows, metadata)
