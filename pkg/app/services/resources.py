"""
Resource proxies for Hamiltonian simulation of the Schrödingerized systems.

Every asymptotic bound is evaluated with its hidden constants set to 1 and logarithms in
base 2 (except the ln-based query term of sparse Hamiltonian simulation). The numbers are
comparative proxies, not physical gate counts.
"""
import logging
import math
from typing import Iterable, Optional

import numpy as np
from scipy.stats import linregress

from app.core.exceptions import ConfigError, OperatorError
from app.schemas.resource import (
    ComplexityScenario,
    PstarScaling,
    PstarScalingRow,
    ResourceEstimate,
)
from app.services.formulations import assemble_displacement, displacement_blocks
from app.services.grids import make_uniform_grid
from app.services.media import IsotropicMedium
from app.services.operators import Operator
from app.services.schrodingerizer import SchrodingerizedSystem, hermitian_split, lambda_max

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.01
DEFAULT_M_E = 16

# sparsity of the 3-D Hamiltonian each formulation produces
PREDICTED_SPARSITY = {
    "smf": 3,
    "staggered-vs": 6,
    "displacement-central": 9,
    "displacement-spectral": 4,
}


# ── Measured ──────────────────────────────────────────────────────────────────

def n_query(tau: float, delta: float) -> int:
    """τ + ln(1/δ)/ln ln(1/δ), the log-log term floored at 1, rounded up."""
    if not 0 < delta < 1:
        raise OperatorError(f"failure probability must lie in (0, 1), got {delta}")
    log_inv = math.log(1 / delta)
    loglog = math.log(log_inv) if log_inv > 1 else 0.0
    return math.ceil(tau + log_inv / max(1.0, loglog) - 1e-12)


def n_gate(m_H: int, m_e: int, queries: int) -> float:
    polylog = math.log2(m_e) ** 2 if m_e > 1 else 0.0
    return float(math.ceil((m_H + m_e * polylog) * queries))


def precision_bits(epsilon: float) -> int:
    return max(1, math.ceil(math.log2(1 / epsilon)))


def _estimate(
    s: int,
    hmax: float,
    dim: int,
    T: float,
    delta: float,
    m_e: Optional[int],
    epsilon: Optional[float],
    formulation: Optional[str] = None,
) -> ResourceEstimate:
    if m_e is None:
        m_e = precision_bits(epsilon) if epsilon is not None else DEFAULT_M_E
    tau = s * hmax * T
    m_H = max(1, math.ceil(math.log2(dim)))
    queries = n_query(tau, delta)
    return ResourceEstimate(
        source="measured",
        formulation=formulation,
        epsilon=epsilon,
        T=T,
        s=s,
        hmax=hmax,
        tau=tau,
        m_H=m_H,
        m_e=m_e,
        delta=delta,
        n_query=queries,
        n_gate=n_gate(m_H, m_e, queries),
    )


def measure(
    H: Operator,
    T: float,
    delta: float = DEFAULT_DELTA,
    m_e: Optional[int] = None,
    epsilon: Optional[float] = None,
) -> ResourceEstimate:
    if not H.is_hermitian():
        raise OperatorError(f"{H.name or 'operator'} is not Hermitian")
    return _estimate(H.s, H.maxnorm, H.dim[0], T, delta, m_e, epsilon)


def measure_system(
    system: SchrodingerizedSystem,
    T: float,
    delta: float = DEFAULT_DELTA,
    m_e: Optional[int] = None,
    epsilon: Optional[float] = None,
    formulation: Optional[str] = None,
) -> ResourceEstimate:
    """Same as `measure` on H_s, using the metadata computed without assembling H_s."""
    return _estimate(system.s, system.maxnorm, system.dim, T, delta, m_e, epsilon, formulation)


# ── Predicted ─────────────────────────────────────────────────────────────────

def state_components(formulation: str, d: int) -> int:
    base = (d * d + 3 * d) // 2
    return base + 1 if formulation.startswith("displacement") else base


def predict_qubits(formulation: str, d: int, M: int, N: int, forced: bool = False) -> int:
    dim = state_components(formulation, d) * M ** d * N * (2 if forced else 1)
    return math.ceil(math.log2(dim))


def _proxies(sc: ComplexityScenario) -> tuple[float, float, float, float, Optional[float]]:
    """(block-index qubits, spatial qubits, ε-factor of the query bound, classical ops, smooth warp)."""
    d, r, eps, T = sc.d, sc.r, sc.epsilon, sc.T
    log_eps = math.log2(1 / eps)
    blocks_vs = d * d + 3 * d
    blocks_disp = (d * d + 3 * d) // 2 + 1
    f = sc.formulation
    if f == "smf":
        blocks, spatial, time = blocks_vs, d / r, eps ** -1
        classical = blocks_vs * d / (2 * r) * eps ** -(d / r + 1) * log_eps * T ** 2
        smooth = d * log_eps * max(eps ** (-1 / sc.k), eps ** (-1 / r)) * T if sc.k else None
    elif f == "staggered-vs":
        blocks, spatial, time = blocks_vs, d / 2, eps ** -1.5
        classical = blocks_vs / 2 * eps ** -(d / 2 + 1) * T ** 2
        smooth = d * log_eps * eps ** -(0.5 + 1 / sc.k) * T if sc.k else None
    elif f == "displacement-spectral":
        blocks, spatial, time = blocks_disp, d / r, eps ** -(1 / r + 1)
        classical = blocks_disp * eps ** -(d / r + 1) * T ** 2
        smooth = d * log_eps * eps ** -(1 / r + 1 / sc.k) * T if sc.k else None
    elif f == "displacement-central":
        blocks, spatial, time = blocks_disp, d / 2, eps ** -1.5
        classical = blocks_disp * eps ** -(d / 2 + 1) * T ** 2
        smooth = d * log_eps * eps ** -(0.5 + 1 / sc.k) * T if sc.k else None
    else:
        raise ConfigError(f"unknown formulation {f!r}")
    return math.ceil(math.log2(blocks)), spatial * log_eps, time, classical, smooth


def predict(scenario: ComplexityScenario, delta: float = DEFAULT_DELTA) -> ResourceEstimate:
    block_bits, spatial_bits, time_factor, classical, smooth = _proxies(scenario)
    s = PREDICTED_SPARSITY[scenario.formulation]
    tau = s * time_factor * scenario.T
    m_e = precision_bits(scenario.epsilon)
    return ResourceEstimate(
        source="predicted",
        formulation=scenario.formulation,
        d=scenario.d,
        r=scenario.r,
        epsilon=scenario.epsilon,
        T=scenario.T,
        s=s,
        hmax=time_factor,
        tau=tau,
        m_H=math.ceil(block_bits + spatial_bits),
        m_e=m_e,
        delta=delta,
        n_query=n_query(tau, delta),
        n_gate=(block_bits + spatial_bits) * time_factor * scenario.T,
        classical_ops=classical,
        smooth_warp_gate=smooth,
    )


# ── p* scaling ────────────────────────────────────────────────────────────────

def pstar_scaling(
    scheme: str,
    Ms: Iterable[int],
    medium: IsotropicMedium,
    a: float = 0.0,
    b: float = 1.0,
) -> PstarScaling:
    """λ_max(H1) of the force-free 1-D displacement system against M, with a linear fit."""
    Ms = sorted(int(m) for m in Ms)
    if len(Ms) < 3:
        raise ConfigError("p* scaling fit needs at least three grid sizes", [f"M: got {Ms}"])
    if scheme not in ("spectral", "central"):
        raise ConfigError(f"unknown scheme {scheme!r}")

    (B,) = displacement_blocks(medium, 1)
    kmax = float(np.abs(np.linalg.eigvals(B - B.T)).max())
    length = b - a
    slope = kmax / 2 * (math.pi / length if scheme == "spectral" else 1 / length)

    rows = []
    for M in Ms:
        system = assemble_displacement(make_uniform_grid(a, b, M), medium, scheme)
        lam = lambda_max(hermitian_split(system.generator).H1)
        rows.append(PstarScalingRow(M=M, lambda_max=lam, predicted=slope * M))
        logger.info("pstar_scaling: %s M=%d λ_max=%.6g", scheme, M, lam)

    fit = linregress([r.M for r in rows], [r.lambda_max for r in rows])
    return PstarScaling(
        scheme=scheme,
        rows=rows,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        predicted_slope=slope,
    )


CSV_COLUMNS = (
    "formulation", "d", "r", "epsilon", "T", "s", "hmax", "tau", "m_H", "n_query",
    "n_gate_proxy", "classical_ops_proxy",
)


def comparison_table(estimates: Iterable[ResourceEstimate]) -> list[dict]:
    """Rows for the resource comparison CSV, in CSV_COLUMNS order."""
    rows = []
    for est in estimates:
        rows.append({
            "formulation": est.formulation or "",
            "d": est.d if est.d is not None else "",
            "r": est.r if est.r is not None else "",
            "epsilon": est.epsilon if est.epsilon is not None else "",
            "T": est.T,
            "s": est.s,
            "hmax": est.hmax,
            "tau": est.tau,
            "m_H": est.m_H,
            "n_query": est.n_query,
            "n_gate_proxy": est.n_gate,
            "classical_ops_proxy": est.classical_ops if est.classical_ops is not None else "",
        })
    return rows
