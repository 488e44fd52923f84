"""
End-to-end experiment: assemble → homogenize → split → Schrödingerize → evolve →
recover → compare with the classical (and, where known, exact) solution.
"""
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.schemas.experiment import ExperimentConfig
from app.schemas.report import ErrorReport, ResultRow, ResultTable
from app.schemas.run import RecoveryInfo, RunSummary
from app.services import export
from app.services.config_loader import config_hash
from app.services.evolution import (
    evolve_schrodingerized,
    plan_recovery,
    qft_p,
    recover_integral,
    recover_point,
)
from app.services.formulations import (
    DisplacementSystem,
    SmfSystem,
    StaggeredVSSystem,
    assemble_displacement,
    assemble_smf,
    assemble_staggered_vs,
)
from app.services.grids import Grid1D, PGrid, make_pgrid, make_uniform_grid
from app.services.media import (
    IsotropicMedium,
    MediumFields,
    load_tabulated_field,
    medium_preset,
    staggered_coordinates,
)
from app.services.reference import ExactHyperbolicSolution, classical_solve, error_norms
from app.services.resources import measure_system, predict_qubits
from app.services.schrodingerizer import (
    HermitianPair,
    SchrodingerizedSystem,
    WarpFunction,
    check_p_window,
    hermitian_split,
    homogenize,
    lambda_max,
    schrodingerize,
)
from app.services.systems import LinearODESystem

logger = logging.getLogger(__name__)

AnySystem = Union[SmfSystem, StaggeredVSSystem, DisplacementSystem]
AXES = ("x", "y", "z")


# ── Config → numerical objects ────────────────────────────────────────────────

def build_medium(cfg: ExperimentConfig) -> IsotropicMedium | MediumFields:
    section = cfg.medium
    if section.preset:
        return medium_preset(section.preset)
    if section.table_rho and section.table_lam and section.table_mu:
        return MediumFields(
            rho=load_tabulated_field(section.table_rho),
            lam=load_tabulated_field(section.table_lam),
            mu=load_tabulated_field(section.table_mu),
            name="tabulated",
        )
    return IsotropicMedium(rho=section.rho, lam=section.lam, mu=section.mu)


def build_force(cfg: ExperimentConfig) -> Optional[dict[str, float]]:
    if cfg.force.kind == "none" or cfg.force.value == 0:
        return None
    if cfg.force.component > cfg.dimension:
        raise ConfigError(
            f"force.component={cfg.force.component} exceeds dimension {cfg.dimension}",
            ["force.component: out of range"],
        )
    prefix = "xi" if cfg.formulation.startswith("displacement") else "v"
    return {f"{prefix}{cfg.force.component}": cfg.force.value}


def build_initial(cfg: ExperimentConfig, grid: Grid1D) -> Optional[dict[str, np.ndarray]]:
    init = cfg.initial
    if init.kind == "zero":
        return None
    if init.kind == "exact":
        return exact_solution(cfg).sample(grid.nodes, 0.0)
    coords = staggered_coordinates(grid, cfg.dimension, ())
    r2 = sum((c - init.center) ** 2 for c in coords)
    return {"sigma11": np.exp(-r2 / init.width ** 2)}


def exact_solution(cfg: ExperimentConfig) -> ExactHyperbolicSolution:
    return ExactHyperbolicSolution.from_medium(build_medium(cfg))


def assemble(cfg: ExperimentConfig, grid: Optional[Grid1D] = None) -> AnySystem:
    grid = grid or make_uniform_grid(cfg.grid.a, cfg.grid.b, cfg.grid.M)
    medium = build_medium(cfg)
    force, initial = build_force(cfg), build_initial(cfg, grid)
    if cfg.formulation == "smf":
        return assemble_smf(grid, medium, cfg.dimension, force=force, initial=initial)
    if cfg.formulation == "staggered-vs":
        return assemble_staggered_vs(grid, medium, cfg.dimension, initial=initial, force=force)
    scheme = cfg.formulation.split("-", 1)[1]
    return assemble_displacement(grid, medium, scheme, cfg.dimension, force=force, initial=initial)


def build_warp(cfg: ExperimentConfig) -> WarpFunction:
    if cfg.warp.kind == "smooth":
        return WarpFunction.smooth(cfg.warp.k)
    return WarpFunction.exact_kink()


@dataclass(frozen=True, eq=False)
class PreparedRun:
    cfg: ExperimentConfig
    grid: Grid1D
    system: AnySystem
    ode: LinearODESystem
    aug: LinearODESystem
    pair: HermitianPair
    lambda_max: float
    p_star: float
    pgrid: PGrid
    schrodingerized: SchrodingerizedSystem

    @property
    def forced(self) -> bool:
        return self.ode.has_source


def prepare(cfg: ExperimentConfig, strict: bool = False) -> PreparedRun:
    """Everything up to (and including) the Schrödingerized initial state."""
    grid = make_uniform_grid(cfg.grid.a, cfg.grid.b, cfg.grid.M)
    system = assemble(cfg, grid)
    ode = system.ode
    aug = homogenize(ode, c_scale=cfg.homogenization.c, pad=cfg.homogenization.pad)
    pair = hermitian_split(aug.A)
    lam = lambda_max(pair.H1)
    p_star = max(lam * cfg.time.T, 0.0)
    pgrid = check_p_window(make_pgrid(cfg.pgrid.lo, cfg.pgrid.hi, cfg.pgrid.N), p_star, strict)
    sch = schrodingerize(pair, aug.u0, pgrid, build_warp(cfg), pad=aug.n - ode.n)
    logger.info(
        "prepare: %s d=%d M=%d n=%d n_aug=%d λ_max(H1)=%.6g p*=%.6g",
        cfg.formulation, cfg.dimension, grid.M, ode.n, aug.n, lam, p_star,
    )
    return PreparedRun(
        cfg=cfg, grid=grid, system=system, ode=ode, aug=aug, pair=pair,
        lambda_max=lam, p_star=p_star, pgrid=pgrid, schrodingerized=sch,
    )


# ── Run ───────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class RunOutcome:
    summary: RunSummary
    table: ResultTable
    quantum: dict[str, np.ndarray]
    classical: dict[str, np.ndarray]
    exact: Optional[dict[str, np.ndarray]] = None


def quantum_solve(prepared: PreparedRun, strict: bool = False, threads: Optional[int] = None):
    """Recovered u(T) (original unknowns only) and the recovery plan."""
    cfg, sch = prepared.cfg, prepared.schrodingerized
    result = evolve_schrodingerized(sch, cfg.time, threads=threads)
    v_h = qft_p(result.state, sch.n_aug, sch.pgrid)
    plan = plan_recovery(sch.pgrid, prepared.p_star, cfg.recovery.mode, cfg.recovery.p1, strict)
    recover = recover_point if plan.mode == "point" else recover_integral
    u_aug = recover(v_h, sch.pgrid, plan)
    return u_aug[: prepared.ode.n], plan


def _reference_name(cfg: ExperimentConfig, has_exact: bool) -> str:
    if cfg.validation.reference == "auto":
        return "exact" if has_exact else "classical"
    return cfg.validation.reference


def _table(
    prepared: PreparedRun,
    quantum: dict,
    classical: dict,
    exact: Optional[dict],
    reference: str,
    metadata: dict[str, str],
) -> ResultTable:
    d = prepared.cfg.dimension
    ref_fields = exact if reference == "exact" else classical
    rows = []
    for name in prepared.system.components:
        coords = prepared.system.coordinates(name)
        q, c = quantum[name].ravel(), classical[name].ravel()
        e = exact[name].ravel() if exact is not None else None
        ref = ref_fields[name].ravel()
        # relative to the component's max-norm, so zero crossings stay finite
        scale = float(np.abs(ref).max(initial=0.0)) or 1.0
        for j in range(q.size):
            err = abs(q[j] - ref[j])
            rows.append(
                ResultRow(
                    component=name,
                    coords=[float(coords[axis][j]) for axis in range(d)],
                    quantum=float(q[j]),
                    classical=float(c[j]),
                    exact=float(e[j]) if e is not None else None,
                    abs_err=float(err),
                    rel_err=float(err / scale),
                )
            )
    return ResultTable(metadata=metadata, axes=list(AXES[:d]), rows=rows)


def run_experiment(
    cfg: ExperimentConfig,
    strict: bool = False,
    out_dir: Optional[str | Path] = None,
    write: bool = True,
    threads: Optional[int] = None,
    name: Optional[str] = None,
) -> RunOutcome:
    started = time.monotonic()
    digest = config_hash(cfg)
    run_name = name or cfg.output.name or cfg.formulation
    logger.info("run_experiment: starting %s (%s)", run_name, digest[:12])

    prepared = prepare(cfg, strict=strict)
    system = prepared.system
    u_quantum, plan = quantum_solve(prepared, strict=strict, threads=threads)
    u_classical = classical_solve(prepared.ode, cfg.time)

    quantum = system.to_fields(u_quantum)
    classical = system.to_fields(u_classical)
    exact = None
    if cfg.initial.kind == "exact":
        exact = exact_solution(cfg).sample(prepared.grid.nodes, cfg.time.T)

    d, grid = cfg.dimension, prepared.grid
    errors: dict[str, ErrorReport] = {"classical": error_norms(quantum, classical, grid, d, "classical")}
    if exact is not None:
        errors["exact"] = error_norms(quantum, exact, grid, d, "exact")
        errors["classical-vs-exact"] = error_norms(classical, exact, grid, d, "classical-vs-exact")
    reference = _reference_name(cfg, exact is not None)
    worst = errors[reference].worst(cfg.validation.metric)
    passed = worst <= cfg.validation.tolerance

    sch = prepared.schrodingerized
    resources = measure_system(sch, cfg.time.T, formulation=cfg.formulation)
    predicted_m_H = predict_qubits(
        cfg.formulation, d, grid.M, sch.pgrid.N, forced=prepared.forced
    )
    summary = RunSummary(
        name=run_name,
        config_hash=digest,
        formulation=cfg.formulation,
        dimension=d,
        lambda_max=prepared.lambda_max,
        p_window=(sch.pgrid.lo, sch.pgrid.hi, sch.pgrid.N),
        recovery=RecoveryInfo(mode=plan.mode, p_star=plan.p_star, p1=plan.p1, index=plan.p1_index),
        errors=errors,
        resources=resources,
        predicted_m_H=predicted_m_H,
        metric=cfg.validation.metric,
        tolerance=cfg.validation.tolerance,
        worst_error=worst,
        passed=passed,
    )
    metadata = {
        "name": run_name,
        "config_hash": digest,
        "formulation": cfg.formulation,
        "reference": reference,
        "p_star": export.fmt(plan.p_star),
        "p1": export.fmt(plan.p1),
    }
    table = _table(prepared, quantum, classical, exact, reference, metadata)

    if write:
        target = Path(out_dir or cfg.output.dir or settings.OUTPUT_DIR) / run_name
        artifacts = [
            export.write_result_table(table, target / "results.csv"),
            export.write_json(target / "errors.json", {k: v.model_dump(mode="json") for k, v in errors.items()}),
            export.write_error_csv(errors, target / "errors.csv", {"config_hash": digest}),
            export.write_json(target / "resources.json", resources),
        ]
        summary = summary.model_copy(update={"artifacts": [str(p) for p in artifacts] + [str(target / "run.json")]})
        export.write_json(target / "run.json", summary.model_copy(update={"seconds": None}))

    elapsed = time.monotonic() - started
    logger.info(
        "run_experiment: complete, %s %s=%.3e (tol %.1e) %s in %.1fs",
        reference, cfg.validation.metric, worst, cfg.validation.tolerance,
        "PASS" if passed else "FAIL", elapsed,
    )
    return RunOutcome(
        summary=summary.model_copy(update={"seconds": elapsed}),
        table=table,
        quantum=quantum,
        classical=classical,
        exact=exact,
    )
