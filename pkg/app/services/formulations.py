"""
Semi-discrete generators for the three first-order elastic wave formulations.

  * SMF: symmetric velocity–stress form, Fourier spectral in space (constant media).
  * Staggered velocity–stress: variable media, staggered finite differences.
  * Hyperbolic displacement system w = (ξ, ζ1, ζ2, p), spectral or central differences.

State vectors are component-major: index = component·M^d + grid index, with grid axis 1
the most significant, matching kron(coefficients, lift_axis(D, axis, d)).
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal, Mapping, Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.core.exceptions import DimensionError, MediumError, OperatorError
from app.services.grids import Grid1D
from app.services.media import (
    SHEAR_SHIFTS,
    VELOCITY_SHIFTS,
    IsotropicMedium,
    MediumFields,
    sample_medium,
    staggered_coordinates,
)
from app.services.operators import (
    Operator,
    central_difference_matrix,
    lift_axis,
    spectral_operators,
    staggered_divergence,
)
from app.services.systems import LinearODESystem

logger = logging.getLogger(__name__)

FieldMap = Mapping[str, "np.ndarray | float"]
Scheme = Literal["spectral", "central"]

STRESSES_3D = ("sigma11", "sigma22", "sigma33", "sigma12", "sigma13", "sigma23")
VELOCITIES_3D = ("v1", "v2", "v3")
SMF_STRESS_KEPT = {1: (0,), 2: (0, 1, 3), 3: (0, 1, 2, 3, 4, 5)}

DISPLACEMENT_3D = (
    "xi1", "xi2", "xi3", "zeta11", "zeta22", "zeta33", "zeta23", "zeta13", "zeta12", "p",
)
DISPLACEMENT_KEPT = {1: (0, 3, 9), 2: (0, 1, 3, 4, 8, 9), 3: tuple(range(10))}


def _check_d(d: int, allowed=(1, 2, 3)) -> None:
    if d not in allowed:
        raise DimensionError(f"dimension d={d} not supported (allowed: {allowed})")


def _field_array(value, grid: Grid1D, d: int) -> np.ndarray:
    shape = (grid.M,) * d
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        return np.full(shape, arr, dtype=complex)
    if arr.size != grid.M ** d:
        raise DimensionError(f"field has {arr.size} samples, expected {grid.M ** d}")
    return arr.reshape(shape)


def _stack(fields: Optional[FieldMap], names: tuple[str, ...], grid: Grid1D, d: int) -> np.ndarray:
    fields = fields or {}
    unknown = set(fields) - set(names)
    if unknown:
        raise DimensionError(f"unknown components {sorted(unknown)}; expected a subset of {names}")
    return np.stack([_field_array(fields.get(name, 0.0), grid, d) for name in names])


def _transform_nd(matrix: np.ndarray, arr: np.ndarray, axes: range) -> np.ndarray:
    for axis in axes:
        arr = np.moveaxis(np.tensordot(matrix, arr, axes=([1], [axis])), 0, axis)
    return arr


def _analysis(grid: Grid1D, d: int, stacked: np.ndarray) -> np.ndarray:
    """Per-component Φ† transform of a (components, M, ..., M) stack, flattened."""
    ops = spectral_operators(grid)
    return _transform_nd(ops.Phi.conj().T, stacked, range(1, d + 1)).ravel()


def _synthesis(grid: Grid1D, d: int, coeffs: np.ndarray, n_components: int) -> np.ndarray:
    ops = spectral_operators(grid)
    stacked = np.asarray(coeffs).reshape((n_components,) + (grid.M,) * d)
    return _transform_nd(ops.Phi / grid.M, stacked, range(1, d + 1))


def block_pattern(op: Operator, n_components: int) -> np.ndarray:
    """Boolean (components × components) map of which component blocks hold nonzeros."""
    mat = sp.coo_matrix(op.to_sparse())
    size = op.dim[0] // n_components
    pattern = np.zeros((n_components, n_components), dtype=bool)
    pattern[mat.row // size, mat.col // size] = True
    return pattern


# ── SMF (symmetric matrix form) ───────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SmfTransform:
    a: float
    b: float
    c: float
    Lambda: np.ndarray
    P: np.ndarray
    Mhalf: np.ndarray


def smf_transform(medium: IsotropicMedium) -> SmfTransform:
    cp2, cs2 = medium.cp ** 2, medium.cs ** 2
    denom = 3 * cp2 - 4 * cs2
    if denom <= 0:
        raise MediumError(f"3c_p² − 4c_s² must be positive, got {denom}")
    a = (cp2 - cs2) / (cs2 * denom)
    b = -(cp2 - 2 * cs2) / (cs2 * (6 * cp2 - 8 * cs2))
    c = 1.0 / cs2
    lam_diag = np.array([1 / denom, 1 / (2 * cs2), 1 / (2 * cs2), c, c, c])
    r3, r2, r6 = 1 / math.sqrt(3), 1 / math.sqrt(2), 1 / math.sqrt(6)
    P = np.zeros((6, 6))
    P[0, :3] = (r3, r3, r3)
    P[1, :3] = (r2, -r2, 0.0)
    P[2, :3] = (r6, r6, -2 * r6)
    P[3:, 3:] = np.eye(3)
    Mhalf = P.T @ np.diag(lam_diag ** -0.5) @ P
    return SmfTransform(a=a, b=b, c=c, Lambda=np.diag(lam_diag), P=P, Mhalf=Mhalf)


def compliance_from_abc(a: float, b: float, c: float) -> np.ndarray:
    """ρC⁻¹ assembled directly from the a, b, c coefficients."""
    out = np.zeros((6, 6))
    out[:3, :3] = b
    np.fill_diagonal(out[:3, :3], a)
    out[3:, 3:] = c * np.eye(3)
    return out


def stiffness_matrix(medium: IsotropicMedium) -> np.ndarray:
    C = np.zeros((6, 6))
    C[:3, :3] = medium.lam
    np.fill_diagonal(C[:3, :3], medium.lam + 2 * medium.mu)
    C[3:, 3:] = medium.mu * np.eye(3)
    return C


def _L_matrices() -> list[np.ndarray]:
    L = [np.zeros((3, 6)) for _ in range(3)]
    for row, col in ((0, 0), (1, 3), (2, 4)):
        L[0][row, col] = 1.0
    for row, col in ((0, 3), (1, 1), (2, 5)):
        L[1][row, col] = 1.0
    for row, col in ((0, 4), (1, 5), (2, 2)):
        L[2][row, col] = 1.0
    return L


def smf_components(d: int) -> tuple[str, ...]:
    _check_d(d)
    return tuple(STRESSES_3D[i] for i in SMF_STRESS_KEPT[d]) + VELOCITIES_3D[:d]


def smf_tilde_matrices(d: int) -> list[np.ndarray]:
    """Pre-symmetrization block matrices [[0, L_iᵀ], [L_i, 0]] for the kept components."""
    _check_d(d)
    kept = list(SMF_STRESS_KEPT[d])
    ns = len(kept)
    out = []
    for L in _L_matrices()[:d]:
        Lk = L[:d][:, kept]
        tilde = np.zeros((ns + d, ns + d))
        tilde[:ns, ns:] = Lk.T
        tilde[ns:, :ns] = Lk
        out.append(tilde)
    return out


def smf_symmetrizer(medium: IsotropicMedium, d: int) -> tuple[np.ndarray, np.ndarray]:
    """(Ã0, M) with Ã0 = blockdiag(ρC_d⁻¹, I) and M = Ã0^{-1/2}."""
    _check_d(d)
    kept = list(SMF_STRESS_KEPT[d])
    Cd = stiffness_matrix(medium)[np.ix_(kept, kept)]
    A0 = la.block_diag(medium.rho * np.linalg.inv(Cd), np.eye(d))
    w, V = la.eigh(A0)
    Mhalf = (V * w ** -0.5) @ V.T
    return A0, (Mhalf + Mhalf.T) / 2


def smf_coefficient_matrices(medium: IsotropicMedium, d: int = 3) -> list[np.ndarray]:
    """Symmetric A_i = M Ã_i M for i = 1..d."""
    _, Mhalf = smf_symmetrizer(medium, d)
    out = []
    for tilde in smf_tilde_matrices(d):
        A = Mhalf @ tilde @ Mhalf
        out.append((A + A.T) / 2)
    return out


@dataclass(frozen=True, eq=False)
class SmfSystem:
    grid: Grid1D
    d: int
    medium: IsotropicMedium
    coefficients: list[np.ndarray]
    Mhalf: np.ndarray
    A: Operator
    fhat: np.ndarray
    U0hat: np.ndarray
    components: tuple[str, ...]
    kind: str = "smf"

    @property
    def Ax(self) -> np.ndarray:
        return self.coefficients[0]

    @property
    def Ay(self) -> Optional[np.ndarray]:
        return self.coefficients[1] if self.d > 1 else None

    @property
    def Az(self) -> Optional[np.ndarray]:
        return self.coefficients[2] if self.d > 2 else None

    @property
    def ode(self) -> LinearODESystem:
        return LinearODESystem(A=self.A, b=self.fhat, u0=self.U0hat)

    def coordinates(self, component: str) -> list[np.ndarray]:
        return staggered_coordinates(self.grid, self.d, ())

    def to_fields(self, state: np.ndarray) -> dict[str, np.ndarray]:
        U = _synthesis(self.grid, self.d, state, len(self.components))
        Ut = np.einsum("ij,j...->i...", self.Mhalf, U)
        ns = len(self.components) - self.d
        Ut[:ns] *= self.medium.rho
        return {name: np.real(Ut[i]) for i, name in enumerate(self.components)}


def assemble_smf(
    grid: Grid1D,
    medium: IsotropicMedium,
    d: int,
    force: Optional[FieldMap] = None,
    initial: Optional[FieldMap] = None,
) -> SmfSystem:
    """
    Spectral SMF generator A = i Σ A_axis ⊗ D_axis acting on Φ†-transformed fields.

    `force` holds body-force samples per velocity component, `initial` the physical
    stresses and velocities at t = 0.
    """
    _check_d(d)
    components = smf_components(d)
    ns = len(components) - d
    A0, Mhalf = smf_symmetrizer(medium, d)
    coefficients = smf_coefficient_matrices(medium, d)
    ops = spectral_operators(grid)

    A = sp.csr_matrix((len(components) * grid.M ** d,) * 2, dtype=complex)
    for axis, Ai in enumerate(coefficients, start=1):
        A = A + 1j * sp.kron(sp.csr_matrix(Ai), lift_axis(ops.Dmu, axis, d).matrix, format="csr")

    tilde0 = _stack(initial, components, grid, d)
    tilde0[:ns] /= medium.rho
    U0 = np.einsum("ij,j...->i...", np.linalg.inv(Mhalf), tilde0)

    velocity_force = _stack(force, VELOCITIES_3D[:d], grid, d) if force else None
    ftilde = np.zeros_like(tilde0)
    if velocity_force is not None:
        ftilde[ns:] = velocity_force / medium.rho
    fU = np.einsum("ij,j...->i...", Mhalf, ftilde)

    return SmfSystem(
        grid=grid,
        d=d,
        medium=medium,
        coefficients=coefficients,
        Mhalf=Mhalf,
        A=Operator(A, name="A_smf"),
        fhat=_analysis(grid, d, fU),
        U0hat=_analysis(grid, d, U0),
        components=components,
    )


# ── Staggered velocity–stress ─────────────────────────────────────────────────

def staggered_components(d: int) -> tuple[str, ...]:
    _check_d(d, (2, 3))
    stresses = ("sigma11", "sigma22", "sigma12") if d == 2 else STRESSES_3D
    return VELOCITIES_3D[:d] + stresses


@dataclass(frozen=True, eq=False)
class StaggeredVSSystem:
    grid: Grid1D
    d: int
    R: Operator
    C: Operator
    Lv: Operator
    AH: Operator
    u0: np.ndarray
    b: np.ndarray
    components: tuple[str, ...]
    kind: str = "staggered-vs"

    @property
    def ode(self) -> LinearODESystem:
        return LinearODESystem(A=self.AH, b=self.b, u0=self.u0)

    def coordinates(self, component: str) -> list[np.ndarray]:
        if component.startswith("v"):
            return staggered_coordinates(self.grid, self.d, (int(component[1]) - 1,))
        shifts = SHEAR_SHIFTS[self.d].get(component, ())
        return staggered_coordinates(self.grid, self.d, shifts)

    def to_fields(self, state: np.ndarray) -> dict[str, np.ndarray]:
        shape = (len(self.components),) + (self.grid.M,) * self.d
        stacked = np.asarray(state).reshape(shape)
        return {name: np.real(stacked[i]) for i, name in enumerate(self.components)}

    def energy(self, state: np.ndarray) -> float:
        """vᵀRv + σᵀC⁻¹σ: conserved by the force-free semi-discretization."""
        nv = self.d * self.grid.M ** self.d
        v, sigma = state[:nv], state[nv:]
        kinetic = np.vdot(v, self.R.matrix @ v)
        sigma = np.asarray(sigma, dtype=complex)
        lu = splu(self.C.to_sparse().astype(complex).tocsc())
        strain = np.vdot(sigma, lu.solve(sigma))
        return float(np.real(kinetic + strain))


def assemble_staggered_vs(
    grid: Grid1D,
    medium: MediumFields | IsotropicMedium,
    d: int,
    initial: Optional[FieldMap] = None,
    force: Optional[FieldMap] = None,
) -> StaggeredVSSystem:
    """A_H = [[0, R⁻¹L_v], [−C L_vᵀ, 0]] with ρ at velocity points and λ, μ at stress points."""
    _check_d(d, (2, 3))
    fields = MediumFields.constant(medium) if isinstance(medium, IsotropicMedium) else medium
    samples = sample_medium(fields, grid, d)
    components = staggered_components(d)

    rho = np.concatenate(samples.rho_v)
    R = sp.diags(rho).tocsr()
    Rinv = sp.diags(1.0 / rho).tocsr()
    lam, mu = samples.lam_c, samples.mu_c
    normal = sp.bmat(
        [[sp.diags(lam + 2 * mu if i == j else lam) for j in range(d)] for i in range(d)]
    )
    C = sp.block_diag([normal] + [sp.diags(m) for m in samples.mu_shear.values()], format="csr")
    Lv = staggered_divergence(d, grid)
    AH = sp.bmat(
        [[None, Rinv @ Lv.matrix], [-(C @ Lv.matrix.T), None]], format="csr"
    )

    u0 = _stack(initial, components, grid, d).ravel()
    b = np.zeros_like(u0)
    if force:
        nv = d * grid.M ** d
        b[:nv] = _stack(force, VELOCITIES_3D[:d], grid, d).ravel() / rho

    return StaggeredVSSystem(
        grid=grid,
        d=d,
        R=Operator(R, name="R"),
        C=Operator(C, name="C"),
        Lv=Lv,
        AH=Operator(AH, name="A_H"),
        u0=u0,
        b=b,
        components=components,
    )


# ── Hyperbolic displacement system ────────────────────────────────────────────

def displacement_components(d: int) -> tuple[str, ...]:
    _check_d(d)
    return tuple(DISPLACEMENT_3D[i] for i in DISPLACEMENT_KEPT[d])


def displacement_blocks(medium: IsotropicMedium, d: int) -> list[np.ndarray]:
    """
    Per-axis coefficient matrices B_axis with ∂w/∂t = Σ B_axis ∂_axis w − F.

    Rows/columns follow (ξ1, ξ2, ξ3, ζ11, ζ22, ζ33, ζ23, ζ13, ζ12, p) restricted to the
    components that survive in d dimensions.
    """
    _check_d(d)
    rho, lam, mu = medium.rho, medium.lam, medium.mu
    B = [np.zeros((10, 10)) for _ in range(3)]
    for i in range(3):
        B[i][i, 3 + i] += 1 / rho
        B[i][i, 9] += 1 / rho
        B[i][3 + i, i] += 2 * mu
        B[i][9, i] += lam
    # M(k) pattern: entry (r, c), r != c, carries k_m with m the remaining axis
    for r in range(3):
        for c in range(3):
            if r != c:
                m = 3 - r - c
                B[m][r, 6 + c] += 1 / rho
                B[m][6 + r, c] += mu
    kept = list(DISPLACEMENT_KEPT[d])
    return [B[axis][np.ix_(kept, kept)] for axis in range(d)]


@dataclass(frozen=True, eq=False)
class DisplacementSystem:
    grid: Grid1D
    d: int
    medium: IsotropicMedium
    scheme: str
    blocks: list[np.ndarray]
    L: Operator
    generator: Operator
    fvec: np.ndarray
    w0: np.ndarray
    components: tuple[str, ...]

    @property
    def kind(self) -> str:
        return f"displacement-{self.scheme}"

    @property
    def ode(self) -> LinearODESystem:
        return LinearODESystem(A=self.generator, b=-self.fvec, u0=self.w0)

    def coordinates(self, component: str) -> list[np.ndarray]:
        return staggered_coordinates(self.grid, self.d, ())

    def to_fields(self, state: np.ndarray) -> dict[str, np.ndarray]:
        n = len(self.components)
        if self.scheme == "spectral":
            stacked = _synthesis(self.grid, self.d, state, n)
        else:
            stacked = np.asarray(state).reshape((n,) + (self.grid.M,) * self.d)
        return {name: np.real(stacked[i]) for i, name in enumerate(self.components)}


def assemble_displacement(
    grid: Grid1D,
    medium: IsotropicMedium,
    scheme: Scheme,
    d: int = 1,
    force: Optional[FieldMap] = None,
    initial: Optional[FieldMap] = None,
) -> DisplacementSystem:
    """
    dw/dt = −L w − F with −L = Σ B_axis ⊗ ∂_axis.

    Spectral: ∂ ≈ i D_μ on Φ†-coefficients. Central: ∂ ≈ D on physical samples.
    """
    _check_d(d)
    if scheme not in ("spectral", "central"):
        raise OperatorError(f"unknown displacement scheme {scheme!r}")
    components = displacement_components(d)
    blocks = displacement_blocks(medium, d)

    if scheme == "spectral":
        base, factor = spectral_operators(grid).Dmu, 1j
    else:
        base, factor = central_difference_matrix(grid), 1.0
    n = len(components) * grid.M ** d
    G = sp.csr_matrix((n, n), dtype=complex)
    for axis, Ba in enumerate(blocks, start=1):
        G = G + factor * sp.kron(sp.csr_matrix(Ba), lift_axis(base, axis, d).matrix, format="csr")

    w0 = _stack(initial, components, grid, d)
    f = np.zeros_like(w0)
    if force:
        f[:d] = _stack(force, components[:d], grid, d)
    if scheme == "spectral":
        w0, f = _analysis(grid, d, w0), _analysis(grid, d, f)
    else:
        w0, f = w0.ravel(), f.ravel()

    return DisplacementSystem(
        grid=grid,
        d=d,
        medium=medium,
        scheme=scheme,
        blocks=blocks,
        L=Operator(-G, name=f"L_{scheme[0]}"),
        generator=Operator(G, name=f"G_{scheme}"),
        fvec=f,
        w0=w0,
        components=components,
    )
