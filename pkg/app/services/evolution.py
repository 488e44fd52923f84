"""
Time integration of linear systems and recovery of the physical solution from the
Schrödingerized (warped) state.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.core.config import settings
from app.core.exceptions import DimensionError, NumericalError, PWindowError
from app.schemas.experiment import EvolutionConfig
from app.services.grids import PGrid
from app.services.operators import Operator
from app.services.schrodingerizer import SchrodingerizedSystem, p_fourier

logger = logging.getLogger(__name__)

# distance above p* of the default point-recovery node
RECOVERY_MARGIN = 1.0


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    state: np.ndarray
    n_steps: int
    dt: float
    trajectory: Optional[np.ndarray] = None


# ── Generic stepping ──────────────────────────────────────────────────────────

def _factorize(lhs: sp.spmatrix):
    try:
        return splu(sp.csc_matrix(lhs))
    except RuntimeError as exc:
        raise NumericalError(f"step matrix is singular: {exc}") from exc


def _step_pair(G: sp.spmatrix, dt: float, scheme: str) -> tuple[sp.spmatrix, sp.spmatrix]:
    identity = sp.identity(G.shape[0], dtype=complex, format="csr")
    if scheme == "crank-nicolson":
        return identity - 0.5 * dt * G, identity + 0.5 * dt * G
    return identity - dt * G, identity


def _exponential(G: sp.spmatrix, source: np.ndarray, state0: np.ndarray, cfg: EvolutionConfig):
    n = G.shape[0]
    if n + 1 > settings.EXPM_CUTOFF:
        raise NumericalError(
            f"exact-exponential scheme limited to dimension {settings.EXPM_CUTOFF}, got {n + 1}"
        )
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = G.toarray()
    aug[:n, n] = source
    z0 = np.append(state0, 1.0)
    if not cfg.store_trajectory:
        return (la.expm(aug * cfg.T) @ z0)[:n], None
    step = la.expm(aug * cfg.step)
    traj = [z0]
    for _ in range(cfg.n_steps):
        traj.append(step @ traj[-1])
    traj = np.array(traj)[:, :n]
    return traj[-1], traj


def evolve(
    op: Operator,
    state0: np.ndarray,
    cfg: EvolutionConfig,
    hamiltonian: bool = False,
    source: Optional[np.ndarray] = None,
) -> EvolutionResult:
    """
    Integrate dc/dt = −iH c (hamiltonian=True) or du/dt = A u + b to time cfg.T.

    Crank–Nicolson uses the trapezoidal source average, implicit Euler the end-of-step
    source. The factorization of the step matrix is reused for every step.
    """
    n = op.dim[0]
    state0 = np.asarray(state0, dtype=complex).ravel()
    if op.dim[0] != op.dim[1] or state0.size != n:
        raise DimensionError(f"state of size {state0.size} does not match operator {op.dim}")
    b = np.zeros(n, dtype=complex) if source is None else np.asarray(source, dtype=complex).ravel()
    if b.size != n:
        raise DimensionError(f"source of size {b.size} does not match operator {op.dim}")
    if hamiltonian and not op.is_hermitian():
        logger.warning("evolve: %s flagged Hamiltonian but is not Hermitian", op.name or "operator")

    steps = cfg.n_steps
    if steps == 0:
        traj = state0[None, :].copy() if cfg.store_trajectory else None
        return EvolutionResult(state=state0.copy(), n_steps=0, dt=cfg.dt, trajectory=traj)

    G = op.to_sparse().astype(complex)
    if hamiltonian:
        G = -1j * G
    dt = cfg.step

    if cfg.scheme == "exact-exponential":
        state, traj = _exponential(G, b, state0, cfg)
        return EvolutionResult(state=state, n_steps=steps, dt=dt, trajectory=traj)

    lhs, rhs = _step_pair(G, dt, cfg.scheme)
    lu = _factorize(lhs)
    src = dt * b
    has_source = bool(np.any(src))
    u = state0.copy()
    traj = [u.copy()] if cfg.store_trajectory else None
    for _ in range(steps):
        rhs_u = rhs @ u
        if has_source:
            rhs_u = rhs_u + src
        u = lu.solve(rhs_u)
        if traj is not None:
            traj.append(u.copy())
    if not np.all(np.isfinite(u)):
        raise NumericalError("evolution produced non-finite values")
    return EvolutionResult(
        state=u, n_steps=steps, dt=dt, trajectory=np.array(traj) if traj is not None else None
    )


# ── Schrödingerized evolution ─────────────────────────────────────────────────

def _evolve_mode(G: sp.csr_matrix, c: np.ndarray, cfg: EvolutionConfig) -> np.ndarray:
    n, steps = G.shape[0], cfg.n_steps
    if cfg.scheme == "exact-exponential":
        if n > settings.EXPM_CUTOFF:
            raise NumericalError(f"exact-exponential scheme limited to dimension {settings.EXPM_CUTOFF}")
        return la.expm(G.toarray() * cfg.T) @ c
    if n > settings.DENSE_STEP_CUTOFF:
        return evolve(Operator(G), c, cfg).state

    lhs, rhs = _step_pair(G, cfg.step, cfg.scheme)
    try:
        step = la.solve(lhs.toarray(), rhs.toarray())
    except la.LinAlgError as exc:
        raise NumericalError(f"step matrix is singular: {exc}") from exc
    if 2 * math.ceil(math.log2(steps + 1)) * n < steps:
        return np.linalg.matrix_power(step, steps) @ c
    for _ in range(steps):
        c = step @ c
    return c


def evolve_schrodingerized(
    system: SchrodingerizedSystem,
    cfg: EvolutionConfig,
    threads: Optional[int] = None,
) -> EvolutionResult:
    """
    Evolve every p-frequency mode independently: dc_k/dt = −i(μ_k H1 − H2) c_k.

    The returned state keeps the (base, p-frequency) layout of system.c0.
    """
    N, n_aug = system.pgrid.N, system.n_aug
    C0 = system.c0.reshape(n_aug, N)
    if cfg.n_steps == 0:
        return EvolutionResult(state=system.c0.copy(), n_steps=0, dt=cfg.dt)
    if cfg.store_trajectory:
        logger.warning("evolve_schrodingerized: trajectories are not stored per mode; final state only")

    workers = threads or settings.THREADS
    logger.info(
        "evolve_schrodingerized: starting (%d modes, n_aug=%d, %s, %d steps, %d threads)",
        N, n_aug, cfg.scheme, cfg.n_steps, workers,
    )

    def run(k: int) -> np.ndarray:
        if not np.any(C0[:, k]):
            return C0[:, k].copy()
        return _evolve_mode(system.mode_generator(k), C0[:, k].copy(), cfg)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        columns = list(pool.map(run, range(N)))
    C = np.stack(columns, axis=1)
    if not np.all(np.isfinite(C)):
        raise NumericalError("Schrödingerized evolution produced non-finite values")
    logger.info("evolve_schrodingerized: complete")
    return EvolutionResult(state=C.ravel(), n_steps=cfg.n_steps, dt=cfg.step)


def norm_drift(system: SchrodingerizedSystem, cfg: EvolutionConfig, threads: Optional[int] = None) -> float:
    """Relative change of ‖c‖ over the evolution; zero for a unitary step."""
    final = evolve_schrodingerized(system, cfg, threads=threads).state
    return abs(np.linalg.norm(final) / np.linalg.norm(system.c0) - 1.0)


# ── p-space transforms ────────────────────────────────────────────────────────

def _as_blocks(vec: np.ndarray, n_aug: int, pgrid: PGrid) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).ravel()
    if vec.size != n_aug * pgrid.N:
        raise DimensionError(f"vector of size {vec.size} is not n_aug·N = {n_aug}·{pgrid.N}")
    return vec.reshape(n_aug, pgrid.N)


def qft_p(c: np.ndarray, n_aug: int, pgrid: PGrid) -> np.ndarray:
    """(I ⊗ Φ) c: p-frequency coefficients to values at the p nodes."""
    return (_as_blocks(c, n_aug, pgrid) @ p_fourier(pgrid).Phi.T).ravel()


def ift_p(v: np.ndarray, n_aug: int, pgrid: PGrid) -> np.ndarray:
    return (_as_blocks(v, n_aug, pgrid) @ p_fourier(pgrid).PhiInv.T).ravel()


# ── Recovery ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RecoveryPlan:
    mode: Literal["point", "integral"]
    p_star: float
    p1_index: int
    p1: float


def plan_recovery(
    pgrid: PGrid,
    p_star: float,
    mode: Literal["point", "integral"] = "point",
    p1: Optional[float] = None,
    strict: bool = False,
    margin: float = RECOVERY_MARGIN,
) -> RecoveryPlan:
    """
    Without a p1 override, point recovery uses the first node at or above p* + margin, the
    margin capped at half the room left in the window. Integral recovery starts at p*.
    """
    if p_star < 0:
        raise PWindowError(f"p* must be non-negative, got {p_star}")
    first = pgrid.first_index_at_or_above(p_star)
    if first is None:
        raise PWindowError(f"no p node at or above p* = {p_star:.6g} in [{pgrid.lo:.6g}, {pgrid.hi:.6g})")
    index = first
    if mode == "point" and p1 is None:
        target = p_star + min(margin, max(0.0, (pgrid.hi - p_star) / 2))
        shifted = pgrid.first_index_at_or_above(target)
        index = first if shifted is None else shifted
    elif mode == "point":
        if p1 < p_star - 1e-12 * max(1.0, p_star):
            msg = f"recovery point p1 = {p1:.6g} lies below p* = {p_star:.6g}"
            if strict:
                raise PWindowError(msg)
            logger.warning("plan_recovery: %s; using p1 = %.6g", msg, pgrid.nodes[first])
        else:
            index = pgrid.first_index_at_or_above(p1)
            if index is None:
                raise PWindowError(f"recovery point p1 = {p1:.6g} lies beyond the p window")
    return RecoveryPlan(mode=mode, p_star=float(p_star), p1_index=int(index), p1=float(pgrid.nodes[index]))


def _node_values(v_h: np.ndarray, pgrid: PGrid) -> np.ndarray:
    v = np.asarray(v_h, dtype=complex).ravel()
    if v.size % pgrid.N:
        raise DimensionError(f"vector of size {v.size} is not a multiple of N = {pgrid.N}")
    return v.reshape(-1, pgrid.N)


def recover_point(v_h: np.ndarray, pgrid: PGrid, plan: RecoveryPlan) -> np.ndarray:
    """u = e^{p_j}·v(p_j) at the planned node."""
    j = plan.p1_index
    if not 0 <= j < pgrid.N:
        raise PWindowError(f"recovery index {j} outside the p window of {pgrid.N} nodes")
    return math.exp(pgrid.nodes[j]) * _node_values(v_h, pgrid)[:, j]


def recover_integral(v_h: np.ndarray, pgrid: PGrid, plan: RecoveryPlan) -> np.ndarray:
    """
    Average v over the nodes p_j ≥ p*, normalized by the quadrature of e^{−p} on the same
    nodes so that the t = 0 state is reproduced exactly.
    """
    j = plan.p1_index if plan.mode == "integral" else pgrid.first_index_at_or_above(plan.p_star)
    if j is None or j >= pgrid.N:
        raise NumericalError("empty integration range above p*")
    tail = pgrid.nodes[j:]
    # shift by p_j to keep the weights O(1)
    weights = np.exp(-(tail - tail[0]))
    V = _node_values(v_h, pgrid)[:, j:]
    return math.exp(tail[0]) * (V @ np.ones(tail.size)) / weights.sum()
