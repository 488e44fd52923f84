from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import DimensionError
from app.services.operators import Operator


@dataclass(frozen=True, eq=False)
class LinearODESystem:
    """du/dt = A u + b, u(0) = u0."""

    A: Operator
    b: np.ndarray
    u0: np.ndarray

    def __post_init__(self):
        rows, cols = self.A.dim
        if rows != cols:
            raise DimensionError(f"generator must be square, got {self.A.dim}")
        b = np.asarray(self.b, dtype=complex).ravel()
        u0 = np.asarray(self.u0, dtype=complex).ravel()
        if b.size != rows or u0.size != rows:
            raise DimensionError(
                f"inconsistent dims: A {self.A.dim}, b {b.size}, u0 {u0.size}"
            )
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "u0", u0)

    @property
    def n(self) -> int:
        return self.A.dim[0]

    @property
    def has_source(self) -> bool:
        return bool(np.any(self.b != 0))

    @classmethod
    def from_matrix(cls, A, b=None, u0=None) -> "LinearODESystem":
        mat = A if sp.issparse(A) else np.atleast_2d(np.asarray(A, dtype=complex))
        n = mat.shape[0]
        return cls(
            A=Operator(mat, name="A"),
            b=np.zeros(n) if b is None else b,
            u0=np.ones(n) if u0 is None else u0,
        )
