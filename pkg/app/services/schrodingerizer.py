"""
Schrödingerisation of linear ODE systems.

du/dt = Au + b is homogenized, split into Hermitian parts A = H1 + iH2, lifted with the
warped phase variable p (v = g(p)u) and Fourier-transformed in p, giving

    dc/dt = −i (H1 ⊗ D_p − H2 ⊗ I) c.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Literal, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from app.core.config import settings
from app.core.exceptions import DimensionError, NumericalError, OperatorError, PWindowError
from app.services.formulations import SmfSystem
from app.services.grids import PGrid, make_pgrid
from app.services.operators import Operator, lift_axis, spectral_operators
from app.services.systems import LinearODESystem

logger = logging.getLogger(__name__)


# ── Homogenization ────────────────────────────────────────────────────────────

def homogenize(
    system: LinearODESystem,
    c_scale: Optional[float] = None,
    pad: bool = False,
) -> LinearODESystem:
    """
    Absorb the source b into an auxiliary block: A_aug = [[A, diag(b)/c], [0, 0]],
    u0_aug = (u0, c·1). c defaults to ‖b‖∞. A source-free system is returned unchanged.
    """
    if c_scale is not None and c_scale <= 0:
        raise OperatorError(f"homogenization scale must be positive, got {c_scale}")
    if not system.has_source:
        return pad_to_power_of_two(system) if pad else system

    c = float(np.abs(system.b).max()) if c_scale is None else float(c_scale)
    n = system.n
    A_aug = sp.bmat(
        [
            [system.A.to_sparse(), sp.diags(system.b / c)],
            [sp.csr_matrix((n, n)), sp.csr_matrix((n, n))],
        ],
        format="csr",
    )
    u0_aug = np.concatenate([system.u0, np.full(n, c, dtype=complex)])
    out = LinearODESystem(A=Operator(A_aug, name="A_aug"), b=np.zeros(2 * n), u0=u0_aug)
    logger.debug("homogenize: n=%d -> %d (c=%g)", n, 2 * n, c)
    return pad_to_power_of_two(out) if pad else out


def pad_to_power_of_two(system: LinearODESystem) -> LinearODESystem:
    """Append zero rows/columns (and ones in u0) up to the next power of two."""
    n = system.n
    target = 1 << max(0, math.ceil(math.log2(n)))
    if target == n:
        return system
    extra = target - n
    A = sp.block_diag([system.A.to_sparse(), sp.csr_matrix((extra, extra))], format="csr")
    return LinearODESystem(
        A=Operator(A, name=system.A.name),
        b=np.concatenate([system.b, np.zeros(extra)]),
        u0=np.concatenate([system.u0, np.ones(extra)]),
    )


# ── Hermitian split ───────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class HermitianPair:
    H1: Operator
    H2: Operator

    def reconstruct(self):
        return self.H1.matrix + 1j * self.H2.matrix


def hermitian_split(A: Operator) -> HermitianPair:
    rows, cols = A.dim
    if rows != cols:
        raise DimensionError(f"hermitian_split requires a square operator, got {A.dim}")
    mat = A.matrix
    adj = A.adjoint()
    H1 = (mat + adj) * 0.5
    H2 = (mat - adj) * (-0.5j)
    pair = HermitianPair(
        H1=Operator(H1, name="H1", hermitian=True),
        H2=Operator(H2, name="H2", hermitian=True),
    )
    diff = pair.reconstruct() - mat
    worst = abs(diff).max() if sp.issparse(diff) else np.abs(diff).max(initial=0.0)
    if worst > 1e-13 * max(A.maxnorm, 1e-300):
        raise OperatorError(f"H1 + iH2 does not reconstruct A (residual {worst:.3e})")
    return pair


# ── Warp functions ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WarpFunction:
    """g(p) = e^{−p} for p > 0 and a left branch h(p) for p ≤ 0."""

    tag: Literal["exact-kink", "smooth", "custom"]
    k: int = 0
    left: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    @classmethod
    def exact_kink(cls) -> "WarpFunction":
        return cls(tag="exact-kink")

    @classmethod
    def smooth(cls, k: int) -> "WarpFunction":
        if k < 1:
            raise OperatorError(f"smooth warp order must be >= 1, got {k}")
        return cls(tag="smooth", k=k)

    @classmethod
    def custom(cls, h: Callable[[np.ndarray], np.ndarray], k: int = 0) -> "WarpFunction":
        if abs(float(np.real(h(np.array([0.0]))[0])) - 1.0) > 1e-8:
            raise OperatorError("custom warp branch must satisfy h(0) = 1")
        return cls(tag="custom", k=k, left=h)

    def _left(self, p: np.ndarray) -> np.ndarray:
        if self.tag == "exact-kink":
            return np.exp(p)
        if self.tag == "smooth":
            # e^{p} times the order-k Taylor polynomial of e^{-2p}: C^k at 0, decays as p -> -inf
            poly = sum((-2 * p) ** n / math.factorial(n) for n in range(self.k + 1))
            return np.exp(p) * poly
        return np.asarray(self.left(p))

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.exp(-np.abs(p))
        mask = p <= 0
        out[mask] = self._left(p[mask])
        return out


# ── p-space Fourier transform ─────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class PFourier:
    Phi: np.ndarray
    PhiInv: np.ndarray


@lru_cache(maxsize=16)
def p_fourier(pgrid: PGrid) -> PFourier:
    Phi = np.exp(1j * np.outer(pgrid.nodes, pgrid.frequencies))
    return PFourier(Phi=Phi, PhiInv=Phi.conj().T / pgrid.N)


# ── Schrödingerized system ────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SchrodingerizedSystem:
    H1: Operator
    H2: Operator
    pgrid: PGrid
    c0: np.ndarray
    warp: WarpFunction
    pad: int = 0

    @property
    def n_aug(self) -> int:
        return self.H1.dim[0]

    @property
    def dim(self) -> int:
        return self.n_aug * self.pgrid.N

    @cached_property
    def Hs(self) -> Operator:
        """Explicit H1 ⊗ D_p − H2 ⊗ I; only assemble at desk-scale sizes."""
        Dp = sp.diags(self.pgrid.frequencies)
        Ip = sp.identity(self.pgrid.N, format="csr")
        mat = sp.kron(self.H1.to_sparse(), Dp, format="csr") - sp.kron(
            self.H2.to_sparse(), Ip, format="csr"
        )
        return Operator(mat, name="H_s", hermitian=True)

    @cached_property
    def s(self) -> int:
        union = abs(self.H1.to_sparse()) + abs(self.H2.to_sparse())
        return Operator(union).s

    @cached_property
    def maxnorm(self) -> float:
        # |μ H1_ij − H2_ij| is convex in μ, so the extremes of D_p bound every entry
        mu = self.pgrid.frequencies
        H1, H2 = self.H1.to_sparse(), self.H2.to_sparse()
        return max(
            float(abs(m * H1 - H2).max()) for m in (mu.min(), mu.max())
        )

    def mode_generator(self, k: int) -> sp.csr_matrix:
        """Generator of the k-th p-frequency block: −i(μ_k H1 − H2)."""
        mu = self.pgrid.frequencies[k]
        return (-1j) * (mu * self.H1.to_sparse() - self.H2.to_sparse())


def schrodingerize(
    pair: HermitianPair,
    u0_aug: np.ndarray,
    pgrid: PGrid,
    g: Optional[WarpFunction] = None,
    pad: int = 0,
) -> SchrodingerizedSystem:
    g = g or WarpFunction.exact_kink()
    u0_aug = np.asarray(u0_aug, dtype=complex).ravel()
    if u0_aug.size != pair.H1.dim[0]:
        raise DimensionError(
            f"initial state has {u0_aug.size} entries, Hamiltonian pair is {pair.H1.dim}"
        )
    warped = np.outer(u0_aug, g(pgrid.nodes))
    c0 = (warped @ p_fourier(pgrid).PhiInv.T).ravel()
    if not np.linalg.norm(c0) > 0:
        raise NumericalError("warped initial state vanishes")
    return SchrodingerizedSystem(H1=pair.H1, H2=pair.H2, pgrid=pgrid, c0=c0, warp=g, pad=pad)


# ── Recovery threshold ────────────────────────────────────────────────────────

def lambda_max(H: Operator) -> float:
    if not H.is_hermitian():
        raise OperatorError(f"{H.name or 'operator'} is not Hermitian")
    n = H.dim[0]
    if n < settings.DENSE_CUTOFF:
        return float(np.linalg.eigvalsh(H.to_dense()).max())
    if H.nnz == 0:
        return 0.0
    try:
        vals = eigsh(
            H.to_sparse(), k=1, which="LA", tol=settings.EIGEN_TOL, maxiter=50 * n,
            return_eigenvectors=False,
        )
        return float(np.real(vals).max())
    except ArpackNoConvergence:
        logger.warning("lambda_max: ARPACK did not converge at n=%d, using dense solve", n)
        return float(np.linalg.eigvalsh(H.to_dense()).max())


def pstar(H1: Operator, T: float) -> float:
    """p* = max(λ_max(H1)·T, 0)."""
    return max(lambda_max(H1) * T, 0.0)


def check_p_window(pgrid: PGrid, p_star: float, strict: bool = False) -> PGrid:
    """Return pgrid if some node reaches p*, else [lo, p* + 1] with the same N (or raise)."""
    if pgrid.first_index_at_or_above(p_star) is not None:
        return pgrid
    msg = f"p* = {p_star:.6g} lies beyond the p window [{pgrid.lo:.6g}, {pgrid.hi:.6g})"
    if strict:
        raise PWindowError(msg)
    extended = make_pgrid(pgrid.lo, p_star + 1.0, pgrid.N)
    logger.warning("check_p_window: %s; extending to [%.6g, %.6g)", msg, extended.lo, extended.hi)
    return extended


def smf_closed_form_pair(system: SmfSystem, c: float) -> HermitianPair:
    """Blockwise H1, H2 of the homogenized spectral SMF generator, built from A_i directly."""
    n = system.A.dim[0]
    Dmu = spectral_operators(system.grid).Dmu
    H2_top = sp.csr_matrix((n, n), dtype=complex)
    for axis, Ai in enumerate(system.coefficients, start=1):
        H2_top = H2_top + sp.kron(sp.csr_matrix(Ai), lift_axis(Dmu, axis, system.d).matrix)
    F = sp.diags(system.fhat / c)
    zero = sp.csr_matrix((n, n))
    H1 = sp.bmat([[zero, 0.5 * F], [0.5 * F.conj().T, zero]], format="csr")
    H2 = sp.bmat([[H2_top, -0.5j * F], [0.5j * F.conj().T, zero]], format="csr")
    return HermitianPair(
        H1=Operator(H1, name="H1", hermitian=True),
        H2=Operator(H2, name="H2", hermitian=True),
    )
