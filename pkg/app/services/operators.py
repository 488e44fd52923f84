"""
Discrete operators on uniform periodic grids.

Every matrix in the package travels wrapped in an Operator, which keeps the sparsity s
(max nonzeros per row) and the max-norm next to the entries so resource estimates can be
read off assembled systems directly.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.sparse as sp

from app.core.config import settings
from app.core.exceptions import DimensionError, OperatorError
from app.services.grids import Grid1D

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]


# ── Operator ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Operator:
    matrix: Matrix
    name: str = ""
    hermitian: bool = False
    s: int = field(init=False)
    maxnorm: float = field(init=False)
    nnz: int = field(init=False)

    def __post_init__(self):
        mat = self.matrix
        if sp.issparse(mat):
            mat = sp.csr_matrix(mat, copy=True)
            mat.eliminate_zeros()
            row_counts = np.diff(mat.indptr)
            maxnorm = float(np.abs(mat.data).max()) if mat.nnz else 0.0
            nnz = int(mat.nnz)
        else:
            mat = np.asarray(mat)
            if mat.ndim != 2:
                raise DimensionError(f"operator {self.name!r} must be two-dimensional")
            row_counts = np.count_nonzero(mat, axis=1)
            maxnorm = float(np.abs(mat).max()) if mat.size else 0.0
            nnz = int(row_counts.sum())
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "s", int(row_counts.max()) if row_counts.size else 0)
        object.__setattr__(self, "maxnorm", maxnorm)
        object.__setattr__(self, "nnz", nnz)
        if self.hermitian and not self.is_hermitian():
            raise OperatorError(f"operator {self.name!r} flagged Hermitian but is not")

    @property
    def dim(self) -> tuple[int, int]:
        return tuple(self.matrix.shape)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def adjoint(self) -> Matrix:
        return self.matrix.conj().T

    def is_hermitian(self, tol: float | None = None) -> bool:
        tol = settings.HERMITIAN_TOL if tol is None else tol
        if self.dim[0] != self.dim[1]:
            return False
        diff = self.matrix - self.adjoint()
        worst = abs(diff).max() if sp.issparse(diff) else np.abs(diff).max(initial=0.0)
        return float(worst) <= tol * max(1.0, self.maxnorm)

    def __matmul__(self, other):
        return self.matrix @ other


def row_sparsity(mat: Matrix) -> int:
    """Brute-force max nonzeros per row, independent of the Operator bookkeeping."""
    dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return int(max((np.count_nonzero(row) for row in dense), default=0))


# ── Spectral operators ────────────────────────────────────────────────────────

def fourier_frequencies(grid: Grid1D) -> np.ndarray:
    """μ_l = 2π(l − M/2)/(b − a) for l = 0..M−1; the zero frequency sits at index M/2."""
    return 2 * np.pi * (np.arange(grid.M) - grid.M / 2) / grid.length


@dataclass(frozen=True, eq=False)
class SpectralOperators:
    grid: Grid1D
    mu: np.ndarray
    Phi: np.ndarray
    PhiInv: np.ndarray
    Dmu: Operator
    Pmu: Operator

    def analysis(self, values: np.ndarray) -> np.ndarray:
        """Φ† u along the first axis: unnormalized Fourier coefficients."""
        return self.Phi.conj().T @ values

    def synthesis(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse of `analysis`: Φ û / M."""
        return self.Phi @ coeffs / self.grid.M


@lru_cache(maxsize=32)
def spectral_operators(grid: Grid1D) -> SpectralOperators:
    mu = fourier_frequencies(grid)
    Phi = np.exp(1j * np.outer(grid.nodes, mu))
    PhiInv = Phi.conj().T / grid.M
    residual = np.abs(Phi @ PhiInv - np.eye(grid.M)).max()
    if residual > 1e-10:
        raise OperatorError(f"Fourier synthesis matrix not inverted (residual {residual:.3e})")
    Dmu = Operator(sp.diags(mu).tocsr(), name="D_mu", hermitian=True)
    Pmu = Operator(Phi @ np.diag(mu) @ PhiInv, name="P_mu")
    return SpectralOperators(grid=grid, mu=mu, Phi=Phi, PhiInv=PhiInv, Dmu=Dmu, Pmu=Pmu)


def spectral_derivative(values: np.ndarray, grid: Grid1D, axis: int = 0) -> np.ndarray:
    """Fourier derivative of periodic real samples along `axis` (Nyquist mode dropped)."""
    k = 2 * np.pi * np.fft.fftfreq(grid.M, d=grid.h)
    k[grid.M // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = grid.M
    spectrum = np.fft.fft(values, axis=axis) * (1j * k).reshape(shape)
    return np.real(np.fft.ifft(spectrum, axis=axis))


# ── Lifting to d dimensions ───────────────────────────────────────────────────

def lift_axis(base: Operator | Matrix, axis: int, d: int) -> Operator:
    """I^{⊗(axis−1)} ⊗ base ⊗ I^{⊗(d−axis)}; axis 1 is the most significant index."""
    mat = base.matrix if isinstance(base, Operator) else base
    if not 1 <= axis <= d:
        raise DimensionError(f"axis {axis} out of range for d={d}")
    M = mat.shape[0]
    if mat.shape[1] != M:
        raise DimensionError("lift_axis requires a square base operator")
    left = sp.identity(M ** (axis - 1), format="csr")
    right = sp.identity(M ** (d - axis), format="csr")
    lifted = sp.kron(sp.kron(left, sp.csr_matrix(mat)), right, format="csr")
    name = base.name if isinstance(base, Operator) else "B"
    return Operator(lifted, name=f"{name}[{axis}/{d}]")


# ── Finite differences ────────────────────────────────────────────────────────

def _periodic(M: int, entries: list[tuple[int, int, float]]) -> sp.csr_matrix:
    rows, cols, vals = zip(*entries)
    # coo → csr sums duplicates, so coinciding neighbours at M=2 cancel
    return sp.coo_matrix((vals, (rows, cols)), shape=(M, M)).tocsr()


def central_difference_matrix(grid: Grid1D) -> Operator:
    M, h = grid.M, grid.h
    entries = []
    for i in range(M):
        entries.append((i, (i + 1) % M, 1.0 / (2 * h)))
        entries.append((i, (i - 1) % M, -1.0 / (2 * h)))
    return Operator(_periodic(M, entries), name="D_central")


def staggered_forward_difference(grid: Grid1D) -> Operator:
    """S = (1/h)(Σ|i⟩⟨i+1| + |M−1⟩⟨0| − I): forward difference onto the half grid."""
    M, h = grid.M, grid.h
    entries = [(i, i, -1.0 / h) for i in range(M)]
    entries += [(i, (i + 1) % M, 1.0 / h) for i in range(M)]
    return Operator(_periodic(M, entries), name="S")


def staggered_divergence(d: int, grid: Grid1D) -> Operator:
    """
    Staggered difference matrix L_v mapping stresses to velocity updates.

    d=3 rows (v1, v2, v3), columns (σ11, σ22, σ33, σ12, σ13, σ23);
    d=2 rows (v1, v2), columns (σ11, σ22, σ12).
    """
    if d not in (2, 3):
        raise DimensionError(f"staggered divergence supports d in (2, 3), got {d}")
    S = staggered_forward_difference(grid)
    Si = {axis: lift_axis(S, axis, d).matrix for axis in range(1, d + 1)}
    ST = {axis: -Si[axis].T.tocsr() for axis in Si}
    if d == 3:
        blocks = [
            [Si[1], None, None, ST[2], ST[3], None],
            [None, Si[2], None, ST[1], None, ST[3]],
            [None, None, Si[3], None, ST[1], ST[2]],
        ]
    else:
        blocks = [
            [Si[1], None, ST[2]],
            [None, Si[2], ST[1]],
        ]
    return Operator(sp.bmat(blocks, format="csr"), name="L_v")
