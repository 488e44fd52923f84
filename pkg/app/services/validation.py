"""
Named invariant checks run at desk scale.

Each check returns (measured, passed, detail). Builders are injectable so a deliberately
broken operator can be shown to fail the check that guards it.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from app.core.exceptions import SchroWaveError
from app.schemas.experiment import EvolutionConfig
from app.schemas.resource import ComplexityScenario
from app.schemas.validation import CheckResult, ValidationReport
from app.services import config_loader
from app.services.evolution import (
    evolve,
    evolve_schrodingerized,
    ift_p,
    norm_drift,
    plan_recovery,
    qft_p,
    recover_integral,
    recover_point,
)
from app.services.formulations import (
    assemble_displacement,
    assemble_smf,
    assemble_staggered_vs,
    compliance_from_abc,
    smf_coefficient_matrices,
    smf_symmetrizer,
    smf_transform,
    stiffness_matrix,
)
from app.services.grids import make_pgrid, make_uniform_grid
from app.services.media import IsotropicMedium
from app.services.operators import (
    Operator,
    central_difference_matrix,
    row_sparsity,
    spectral_operators,
    staggered_divergence,
)
from app.services.pipeline import assemble, prepare, quantum_solve, run_experiment
from app.services.reference import (
    ExactHyperbolicSolution,
    augmented_exponential_oracle,
    hyperbolic_residual,
)
from app.services.resources import measure, predict, predict_qubits, pstar_scaling
from app.services.schrodingerizer import (
    WarpFunction,
    hermitian_split,
    homogenize,
    lambda_max,
    schrodingerize,
    smf_closed_form_pair,
)
from app.services.sweeps import sweep
from app.services.systems import LinearODESystem

logger = logging.getLogger(__name__)

ROW_1 = IsotropicMedium(rho=1.41, lam=0.71, mu=0.35)
ROW_2 = IsotropicMedium(rho=1.41, lam=0.61, mu=0.40)
UNIT_MEDIUM = IsotropicMedium(rho=1.0, lam=1.0, mu=1.0)


@dataclass
class Builders:
    central_difference: Callable = central_difference_matrix
    spectral_operators: Callable = spectral_operators
    staggered_divergence: Callable = staggered_divergence
    assemble_smf: Callable = assemble_smf
    assemble_staggered_vs: Callable = assemble_staggered_vs
    assemble_displacement: Callable = assemble_displacement


Outcome = tuple[float, bool, str]


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    tolerance: Optional[float]
    run: Callable[[Builders], Outcome] = field(repr=False)
    slow: bool = False


def _within(measured: float, expected: float, tol: float) -> Outcome:
    return measured, abs(measured - expected) <= tol, f"expected {expected:.6g} ± {tol:g}"


def _at_most(measured: float, tol: float) -> Outcome:
    return measured, measured <= tol, f"<= {tol:g}"


# ── grids-and-operators ───────────────────────────────────────────────────────

def check_central_antisymmetry(b: Builders) -> Outcome:
    worst = 0.0
    for M in (4, 8, 16):
        D = b.central_difference(make_uniform_grid(0, 1, M)).to_dense()
        worst = max(worst, float(np.abs(D + D.T).max()))
    return _at_most(worst, 1e-12)


def check_fourier_inverse(b: Builders) -> Outcome:
    worst = 0.0
    for M in (8, 16, 32):
        ops = b.spectral_operators(make_uniform_grid(0, 2 * math.pi, M))
        worst = max(worst, float(np.abs(ops.Phi @ ops.PhiInv - np.eye(M)).max()))
    return _at_most(worst, 1e-10)


def check_spectral_derivative(b: Builders) -> Outcome:
    grid = make_uniform_grid(0, 1, 16)
    ops = b.spectral_operators(grid)
    x = grid.nodes
    approx = 1j * (ops.Pmu.to_dense() @ np.sin(2 * math.pi * x))
    return _at_most(float(np.abs(approx - 2 * math.pi * np.cos(2 * math.pi * x)).max()), 1e-9)


def check_operator_metadata(b: Builders) -> Outcome:
    grid = make_uniform_grid(0, 1, 4)
    ops = [
        b.central_difference(grid),
        b.staggered_divergence(2, grid),
        b.assemble_displacement(grid, ROW_1, "central", 2).generator,
    ]
    mismatches = sum(
        (op.s != row_sparsity(op.matrix)) + (abs(op.maxnorm - np.abs(op.to_dense()).max()) > 1e-14)
        for op in ops
    )
    return float(mismatches), mismatches == 0, "s and max-norm equal brute force"


# ── elastic-formulations ──────────────────────────────────────────────────────

def check_smf_symmetric(b: Builders) -> Outcome:
    worst = max(float(np.abs(A - A.T).max()) for A in smf_coefficient_matrices(ROW_1, 3))
    return _at_most(worst, 1e-12)


def check_smf_transform(b: Builders) -> Outcome:
    transform = smf_transform(ROW_1)
    _, Mhalf = smf_symmetrizer(ROW_1, 3)
    compliance = ROW_1.rho * np.linalg.inv(stiffness_matrix(ROW_1))
    worst = max(
        float(np.abs(transform.Mhalf - Mhalf[:6, :6]).max()),
        float(np.abs(compliance_from_abc(transform.a, transform.b, transform.c) - compliance).max()),
    )
    return _at_most(worst, 1e-10)


def check_staggered_energy(b: Builders) -> Outcome:
    grid = make_uniform_grid(0, 2 * math.pi, 8)
    x, y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    system = b.assemble_staggered_vs(
        grid, ROW_1, 2, initial={"sigma11": np.exp(-((x - math.pi) ** 2 + (y - math.pi) ** 2))}
    )
    cfg = EvolutionConfig(scheme="crank-nicolson", dt=0.01, T=1.0)
    final = evolve(system.AH, system.u0, cfg).state
    e0 = system.energy(system.u0)
    return _at_most(abs(system.energy(final) - e0) / e0, 1e-10)


def check_smf_norm(b: Builders) -> Outcome:
    grid = make_uniform_grid(0, 10, 32)
    system = b.assemble_smf(grid, UNIT_MEDIUM, 1, initial={"sigma11": np.exp(-(grid.nodes - 5) ** 2)})
    cfg = EvolutionConfig(scheme="crank-nicolson", dt=0.01, T=1.0)
    final = evolve(system.A, system.U0hat, cfg).state
    return _at_most(abs(np.linalg.norm(final) / np.linalg.norm(system.U0hat) - 1), 1e-10)


# ── schrodingerizer ───────────────────────────────────────────────────────────

def check_split(b: Builders) -> Outcome:
    rng = np.random.default_rng(7)
    A = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    pair = hermitian_split(Operator(A))
    return _at_most(float(np.abs(pair.reconstruct() - A).max()), 1e-13)


def _forced_smf(b: Builders, M: int):
    grid = make_uniform_grid(0, 10, M)
    return b.assemble_smf(
        grid, UNIT_MEDIUM, 1, force={"v1": 0.1}, initial={"sigma11": np.exp(-(grid.nodes - 5) ** 2)}
    )


def check_smf_lambda_max(b: Builders) -> Outcome:
    aug = homogenize(_forced_smf(b, 64).ode, c_scale=1.0)
    return _within(lambda_max(hermitian_split(aug.A).H1), 3.2, 0.005)


def check_closed_form_pair(b: Builders) -> Outcome:
    system = _forced_smf(b, 16)
    generic = hermitian_split(homogenize(system.ode, c_scale=1.0).A)
    closed = smf_closed_form_pair(system, 1.0)
    worst = max(
        float(abs(generic.H1.to_sparse() - closed.H1.to_sparse()).max()),
        float(abs(generic.H2.to_sparse() - closed.H2.to_sparse()).max()),
    )
    return _at_most(worst, 1e-12)


def check_pstar_spectral(b: Builders) -> Outcome:
    system = b.assemble_displacement(make_uniform_grid(0, 1, 32), ROW_2, "spectral")
    return _within(lambda_max(hermitian_split(system.generator).H1), 6.759, 0.01)


def check_lambda_central(b: Builders) -> Outcome:
    system = b.assemble_displacement(make_uniform_grid(0, 1, 64), ROW_2, "central")
    return _within(lambda_max(hermitian_split(system.generator).H1), 4.303, 0.01)


def check_sparsity(b: Builders) -> Outcome:
    measured = {
        "smf": b.assemble_smf(make_uniform_grid(0, 1, 2), IsotropicMedium(1.0, 0.0, 1.0), 3).A.s,
        "staggered": b.staggered_divergence(3, make_uniform_grid(0, 1, 2)).s,
        # the periodic central stencil cancels on two nodes (x_{i+1} = x_{i-1}), so M = 4
        "central": homogenize(
            b.assemble_displacement(make_uniform_grid(0, 1, 4), ROW_1, "central", 3, force={"xi1": 1.0}).ode
        ).A.s,
        "spectral": b.assemble_displacement(make_uniform_grid(0, 1, 2), ROW_1, "spectral", 3).generator.s,
    }
    expected = {"smf": 3, "staggered": 6, "central": 9, "spectral": 4}
    wrong = {k: v for k, v in measured.items() if v != expected[k]}
    return float(len(wrong)), not wrong, f"measured {measured}, expected {expected}"


def _small_schrodingerized(b: Builders, N: int = 16):
    grid = make_uniform_grid(0, 1, 8)
    solution = ExactHyperbolicSolution.from_medium(ROW_1)
    system = b.assemble_displacement(grid, ROW_1, "spectral", initial=solution.sample(grid.nodes, 0.0))
    pair = hermitian_split(system.generator)
    return schrodingerize(pair, system.w0, make_pgrid(-4 * math.pi, 4 * math.pi, N))


def check_lazy_metadata(b: Builders) -> Outcome:
    sch = _small_schrodingerized(b)
    mismatches = int(sch.s != sch.Hs.s) + int(abs(sch.maxnorm - sch.Hs.maxnorm) > 1e-12 * sch.Hs.maxnorm)
    return float(mismatches), mismatches == 0, "lazy s and max-norm equal assembled H_s"


# ── evolution-and-recovery ────────────────────────────────────────────────────

def check_unitarity(b: Builders) -> Outcome:
    sch = _small_schrodingerized(b)
    return _at_most(norm_drift(sch, EvolutionConfig(dt=1e-3, T=1.0), threads=1), 1e-12)


def check_qft_round_trip(b: Builders) -> Outcome:
    sch = _small_schrodingerized(b)
    back = ift_p(qft_p(sch.c0, sch.n_aug, sch.pgrid), sch.n_aug, sch.pgrid)
    return _at_most(float(np.abs(back - sch.c0).max()), 1e-12)


def _scalar_decay(N: int = 256):
    system = LinearODESystem.from_matrix(np.array([[-1.0]]), u0=np.array([1.0]))
    pair = hermitian_split(system.A)
    pgrid = make_pgrid(-8, 8, N)
    return system, schrodingerize(pair, system.u0, pgrid, WarpFunction.exact_kink())


def check_initial_recovery(b: Builders) -> Outcome:
    _, sch = _scalar_decay()
    v = qft_p(sch.c0, sch.n_aug, sch.pgrid)
    u = recover_point(v, sch.pgrid, plan_recovery(sch.pgrid, 0.0))
    return _at_most(float(abs(u[0] - 1.0)), 1e-12)


def check_scalar_decay(b: Builders) -> Outcome:
    _, sch = _scalar_decay()
    final = evolve_schrodingerized(sch, EvolutionConfig(dt=1e-3, T=1.0), threads=1).state
    v = qft_p(final, sch.n_aug, sch.pgrid)
    plan = plan_recovery(sch.pgrid, 0.0)
    point = recover_point(v, sch.pgrid, plan)[0]
    integral = recover_integral(v, sch.pgrid, plan)[0]
    worst = max(abs(point - math.exp(-1)), abs(integral - math.exp(-1)))
    return _at_most(float(worst), 2e-2)


# ── reference-and-exact ───────────────────────────────────────────────────────

def check_exact_residual(b: Builders) -> Outcome:
    solution = ExactHyperbolicSolution.from_medium(ROW_1)
    grid = make_uniform_grid(0, 1, 64)
    worst = max(hyperbolic_residual(solution, grid, t) for t in (0.0, 0.3, 1.0))
    return _at_most(worst, 1e-10)


def check_exact_media(b: Builders) -> Outcome:
    worst = max(abs(m.rho - (m.lam + 2 * m.mu)) for m in (ROW_1, ROW_2))
    return _at_most(worst, 1e-12)


# ── resource-estimator ────────────────────────────────────────────────────────

def check_predict_smf(b: Builders) -> Outcome:
    est = predict(ComplexityScenario(formulation="smf", d=3, r=2, epsilon=1e-2, T=1))
    return _within(est.n_gate, (5 + 1.5 * math.log2(100)) * 100, 1e-9)


def check_arranged_queries(b: Builders) -> Outcome:
    H = Operator(np.ones((2, 2)), hermitian=True)
    est = measure(H, T=1.0, delta=math.exp(-1), m_e=1)
    # s=2, hmax=1, T=1: τ = 2 and the log term is 1
    return float(est.n_query), est.n_query == 3, "expected 3"


def check_predict_monotone(b: Builders) -> Outcome:
    base = dict(formulation="staggered-vs", d=2, r=2, epsilon=1e-2, T=1.0)
    ref = predict(ComplexityScenario(**base)).n_gate
    variants = [dict(T=2.0), dict(epsilon=1e-3), dict(d=3)]
    drops = sum(predict(ComplexityScenario(**{**base, **v})).n_gate < ref for v in variants)
    return float(drops), drops == 0, "proxy never decreases"


def check_pstar_linearity(b: Builders) -> Outcome:
    worst = min(pstar_scaling(s, (16, 32, 64), ROW_2).r_squared for s in ("spectral", "central"))
    return worst, worst >= 0.999, ">= 0.999"


def check_preset_qubits(b: Builders) -> Outcome:
    wrong = []
    for name in config_loader.list_presets():
        cfg = config_loader.load_config(preset=name)
        ode = assemble(cfg).ode
        aug = homogenize(ode, c_scale=cfg.homogenization.c, pad=cfg.homogenization.pad)
        measured = math.ceil(math.log2(aug.n * cfg.pgrid.N))
        predicted = predict_qubits(cfg.formulation, cfg.dimension, cfg.grid.M, cfg.pgrid.N, ode.has_source)
        if measured != predicted:
            wrong.append(f"{name}: {measured} != {predicted}")
    return float(len(wrong)), not wrong, "; ".join(wrong) or "all presets agree"


# ── cli-harness ───────────────────────────────────────────────────────────────

def check_config_hash(b: Builders) -> Outcome:
    names = config_loader.list_presets()
    if not names:
        return 0.0, False, "no bundled presets"
    flat = config_loader.load_flat(preset=names[0])
    first = config_loader.config_hash(config_loader.parse_config(flat))
    again = config_loader.config_hash(config_loader.parse_config(flat))
    changed = config_loader.config_hash(
        config_loader.parse_config({**flat, "validation.tolerance": "0.123"})
    )
    ok = first == again and first != changed
    return float(ok), ok, "stable for equal configs, sensitive to tolerance"


# ── slow reproductions ────────────────────────────────────────────────────────

def _preset_check(name: str) -> Callable[[Builders], Outcome]:
    def run(b: Builders) -> Outcome:
        outcome = run_experiment(config_loader.load_config(preset=name), write=False)
        s = outcome.summary
        return s.worst_error, s.passed, f"{s.metric} vs {s.tolerance:g}"

    return run


def check_oracle_equivalence(b: Builders) -> Outcome:
    worst_ratio = 0.0
    for name in config_loader.list_presets():
        cfg = config_loader.load_config(
            preset=name,
            overrides={"grid.M": "8", "pgrid.N": "64", "time.scheme": "crank-nicolson"},
        )
        prepared = prepare(cfg)
        u, _ = quantum_solve(prepared, threads=1)
        oracle = augmented_exponential_oracle(prepared.ode, cfg.time.T)
        bound = 5 * (prepared.pgrid.dp + cfg.time.step ** 2) * np.linalg.norm(oracle)
        worst_ratio = max(worst_ratio, float(np.linalg.norm(u - oracle) / bound))
    return _at_most(worst_ratio, 1.0)


def check_central_order(b: Builders) -> Outcome:
    cfg = config_loader.load_config(preset="hyperbolic-1d-central-b")
    return _within(sweep(cfg, "M", [64, 128, 256]).order, 2.0, 0.2)


def check_temporal_order(b: Builders) -> Outcome:
    cfg = config_loader.load_config(
        preset="hyperbolic-1d-spectral-b", overrides={"grid.M": "16", "time.T": "0.25"}
    )
    return _within(sweep(cfg, "dt", [1 / 50, 1 / 100, 1 / 200]).order, 2.0, 0.2)


CHECKS: list[Check] = [
    Check("central-difference-antisymmetry", "grids-and-operators", 1e-12, check_central_antisymmetry),
    Check("fourier-inverse", "grids-and-operators", 1e-10, check_fourier_inverse),
    Check("spectral-derivative", "grids-and-operators", 1e-9, check_spectral_derivative),
    Check("operator-metadata", "grids-and-operators", 0, check_operator_metadata),
    Check("smf-coefficients-symmetric", "elastic-formulations", 1e-12, check_smf_symmetric),
    Check("smf-transform", "elastic-formulations", 1e-10, check_smf_transform),
    Check("staggered-energy", "elastic-formulations", 1e-10, check_staggered_energy),
    Check("smf-norm", "elastic-formulations", 1e-10, check_smf_norm),
    Check("hermitian-split", "schrodingerizer", 1e-13, check_split),
    Check("smf-lambda-max-forced", "schrodingerizer", 0.005, check_smf_lambda_max),
    Check("smf-closed-form-pair", "schrodingerizer", 1e-12, check_closed_form_pair),
    Check("pstar-spectral-row2", "schrodingerizer", 0.01, check_pstar_spectral),
    Check("lambda-max-central-row2", "schrodingerizer", 0.01, check_lambda_central),
    Check("sparsity-3d", "schrodingerizer", 0, check_sparsity),
    Check("lazy-metadata", "schrodingerizer", 0, check_lazy_metadata),
    Check("cn-unitarity", "evolution-and-recovery", 1e-12, check_unitarity),
    Check("qft-round-trip", "evolution-and-recovery", 1e-12, check_qft_round_trip),
    Check("initial-recovery", "evolution-and-recovery", 1e-12, check_initial_recovery),
    Check("scalar-decay", "evolution-and-recovery", 2e-2, check_scalar_decay),
    Check("exact-residual", "reference-and-exact", 1e-10, check_exact_residual),
    Check("exact-media", "reference-and-exact", 1e-12, check_exact_media),
    Check("predict-smf-3d", "resource-estimator", 1e-9, check_predict_smf),
    Check("arranged-queries", "resource-estimator", 0, check_arranged_queries),
    Check("predict-monotone", "resource-estimator", 0, check_predict_monotone),
    Check("pstar-linearity", "resource-estimator", 0.999, check_pstar_linearity),
    Check("preset-qubits", "resource-estimator", 0, check_preset_qubits),
    Check("config-hash", "cli-harness", None, check_config_hash),
    Check("oracle-equivalence", "evolution-and-recovery", 1.0, check_oracle_equivalence, slow=True),
    Check("central-spatial-order", "reference-and-exact", 0.2, check_central_order, slow=True),
    Check("cn-temporal-order", "reference-and-exact", 0.2, check_temporal_order, slow=True),
    Check("run-smf-1d-forced", "cli-harness", 2e-2, _preset_check("smf-1d-forced"), slow=True),
    Check("run-hyperbolic-1d-spectral-a", "cli-harness", 2e-2, _preset_check("hyperbolic-1d-spectral-a"), slow=True),
    Check("run-hyperbolic-1d-spectral-b", "cli-harness", 2e-2, _preset_check("hyperbolic-1d-spectral-b"), slow=True),
    Check("run-hyperbolic-1d-central-a", "cli-harness", 1.1, _preset_check("hyperbolic-1d-central-a"), slow=True),
    Check("run-hyperbolic-1d-central-b", "cli-harness", 1.1, _preset_check("hyperbolic-1d-central-b"), slow=True),
    Check("run-staggered-2d-variable", "cli-harness", 3e-2, _preset_check("staggered-2d-variable"), slow=True),
]


def run_check(check: Check, builders: Builders) -> CheckResult:
    started = time.monotonic()
    try:
        measured, passed, detail = check.run(builders)
    except SchroWaveError as exc:
        measured, passed, detail = None, False, f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        logger.exception("validate: %s raised", check.name)
        measured, passed, detail = None, False, f"{type(exc).__name__}: {exc}"
    return CheckResult(
        name=check.name,
        module=check.module,
        passed=bool(passed),
        measured=None if measured is None else float(measured),
        tolerance=check.tolerance,
        detail=detail,
        seconds=round(time.monotonic() - started, 3),
    )


def run_validation(
    quick: bool = True,
    builders: Optional[Builders] = None,
    only: Optional[list[str]] = None,
) -> ValidationReport:
    builders = builders or Builders()
    selected = [
        c for c in CHECKS
        if (not quick or not c.slow) and (only is None or c.name in only)
    ]
    logger.info("validate: starting (%d checks, quick=%s)", len(selected), quick)
    results = []
    for check in selected:
        result = run_check(check, builders)
        log = logger.info if result.passed else logger.warning
        log("validate: %-32s %s (%s)", check.name, "PASS" if result.passed else "FAIL", result.detail)
        results.append(result)
    report = ValidationReport(passed=all(r.passed for r in results), checks=results)
    logger.info("validate: complete, %d/%d passed", sum(r.passed for r in results), len(results))
    return report
