"""
Uniform periodic grids in space (Grid1D) and in the auxiliary warp variable (PGrid).
"""
import math
from dataclasses import dataclass

import numpy as np

from app.core.exceptions import GridError


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    M: int

    def __post_init__(self):
        if not self.b > self.a:
            raise GridError(f"grid upper bound {self.b} must exceed lower bound {self.a}")
        if self.M < 2 or not is_power_of_two(self.M):
            raise GridError(f"M={self.M} is not a power of two >= 2")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return self.length / self.M

    @property
    def m(self) -> int:
        return int(math.log2(self.M))

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.M)

    @property
    def midpoints(self) -> np.ndarray:
        """Half-cell nodes x_j + h/2 used by staggered layouts."""
        return self.nodes + 0.5 * self.h


def make_uniform_grid(a: float, b: float, M: int) -> Grid1D:
    return Grid1D(a=float(a), b=float(b), M=int(M))


@dataclass(frozen=True)
class PGrid:
    """
    Uniform grid over the window [lo, hi) of the warp variable p.

    The symmetric form [-πL, πL) is the usual choice; asymmetric windows such as
    [-4.2, 5] are equally valid and the Fourier frequencies adapt to the window length.
    """

    lo: float
    hi: float
    N: int

    def __post_init__(self):
        if not self.hi > self.lo:
            raise GridError(f"p window [{self.lo}, {self.hi}] is empty")
        if self.N < 2 or not is_power_of_two(self.N):
            raise GridError(f"N={self.N} is not a power of two >= 2")

    @classmethod
    def symmetric(cls, L: float, N: int) -> "PGrid":
        if L <= 0:
            raise GridError(f"half-width scale L={L} must be positive")
        return cls(lo=-math.pi * L, hi=math.pi * L, N=N)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def L(self) -> float:
        return self.length / (2 * math.pi)

    @property
    def dp(self) -> float:
        return self.length / self.N

    @property
    def n(self) -> int:
        return int(math.log2(self.N))

    @property
    def nodes(self) -> np.ndarray:
        return self.lo + self.dp * np.arange(self.N)

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.pi * (np.arange(self.N) - self.N / 2) / self.length

    def first_index_at_or_above(self, p: float) -> int | None:
        """Index of the first node with p_j >= p, or None when the window ends first."""
        idx = int(np.searchsorted(self.nodes, p - 1e-12 * max(1.0, abs(p)), side="left"))
        return idx if idx < self.N else None


def make_pgrid(lo: float, hi: float, N: int) -> PGrid:
    return PGrid(lo=float(lo), hi=float(hi), N=int(N))
