"""
Classical reference solutions, the exact solution of the 1-D hyperbolic displacement
benchmark, and error metrics.
"""
import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg as la
from scipy.stats import linregress

from app.core.config import settings
from app.core.exceptions import DimensionError, MediumError, NumericalError
from app.schemas.experiment import EvolutionConfig
from app.schemas.report import ComponentError, ErrorReport
from app.services.evolution import evolve
from app.services.grids import Grid1D
from app.services.media import IsotropicMedium
from app.services.operators import spectral_derivative
from app.services.schrodingerizer import homogenize
from app.services.systems import LinearODESystem

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
REL_FLOOR = 1e-12


def classical_solve(system: LinearODESystem, cfg: EvolutionConfig) -> np.ndarray:
    """u(T) of du/dt = A u + b with the same spatial operator, no warping."""
    return evolve(system.A, system.u0, cfg, source=system.b).state


# ── Exact hyperbolic solution ─────────────────────────────────────────────────

@dataclass(frozen=True)
class ExactHyperbolicSolution:
    """
    ξ  = −4π sin4πt sin4πx + cos8πt sin8πx
    ε  = 2μ(4π cos4πt cos4πx + sin8πt cos8πx)
    p  = λε/(2μ)

    Valid for ρ = λ + 2μ.
    """

    mu: float
    lam: float

    @property
    def rho(self) -> float:
        return self.lam + 2 * self.mu

    @classmethod
    def from_medium(cls, medium: IsotropicMedium) -> "ExactHyperbolicSolution":
        mismatch = medium.rho - (medium.lam + 2 * medium.mu)
        if abs(mismatch) > 1e-9 * max(1.0, medium.rho):
            raise MediumError(
                f"exact solution needs ρ = λ + 2μ; got ρ={medium.rho}, λ + 2μ={medium.lam + 2 * medium.mu}"
            )
        return cls(mu=medium.mu, lam=medium.lam)

    def xi(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (
            -2 * TWO_PI * math.sin(2 * TWO_PI * t) * np.sin(2 * TWO_PI * x)
            + math.cos(4 * TWO_PI * t) * np.sin(4 * TWO_PI * x)
        )

    def eps(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 2 * self.mu * (
            2 * TWO_PI * math.cos(2 * TWO_PI * t) * np.cos(2 * TWO_PI * x)
            + math.sin(4 * TWO_PI * t) * np.cos(4 * TWO_PI * x)
        )

    def p(self, x, t: float) -> np.ndarray:
        return self.lam * self.eps(x, t) / (2 * self.mu)

    def sample(self, x, t: float) -> dict[str, np.ndarray]:
        """Fields keyed by the 1-D displacement component names."""
        return {"xi1": self.xi(x, t), "zeta11": self.eps(x, t), "p": self.p(x, t)}


def exact_hyperbolic(x, t: float, medium: IsotropicMedium) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sol = ExactHyperbolicSolution.from_medium(medium)
    return sol.xi(x, t), sol.eps(x, t), sol.p(x, t)


def exact_rates(solution: ExactHyperbolicSolution, x, t: float) -> dict[str, np.ndarray]:
    """Analytic time derivatives of the exact triple."""
    x = np.asarray(x, dtype=float)
    w1, w2 = 2 * TWO_PI, 4 * TWO_PI
    dxi = -2 * TWO_PI * w1 * math.cos(w1 * t) * np.sin(w1 * x) - w2 * math.sin(w2 * t) * np.sin(w2 * x)
    deps = 2 * solution.mu * (
        -2 * TWO_PI * w1 * math.sin(w1 * t) * np.cos(w1 * x) + w2 * math.cos(w2 * t) * np.cos(w2 * x)
    )
    return {"xi1": dxi, "zeta11": deps, "p": solution.lam * deps / (2 * solution.mu)}


def hyperbolic_residual(solution: ExactHyperbolicSolution, grid: Grid1D, t: float) -> float:
    """
    max |w_t − B ∂_x w| on the grid with ∂_x taken spectrally; w_t = (1/ρ)(ε + p)_x,
    ε_t = 2μ ξ_x, p_t = λ ξ_x.
    """
    x = grid.nodes
    fields = solution.sample(x, t)
    rates = exact_rates(solution, x, t)
    dxi = spectral_derivative(fields["xi1"], grid)
    dsum = spectral_derivative(fields["zeta11"] + fields["p"], grid)
    residuals = (
        rates["xi1"] - dsum / solution.rho,
        rates["zeta11"] - 2 * solution.mu * dxi,
        rates["p"] - solution.lam * dxi,
    )
    return float(max(np.abs(r).max() for r in residuals))


# ── Oracles and metrics ───────────────────────────────────────────────────────

def augmented_exponential_oracle(system: LinearODESystem, T: float) -> np.ndarray:
    """exp(A_aug T) u0_aug restricted to the original unknowns."""
    aug = homogenize(system)
    if aug.n > settings.EXPM_CUTOFF:
        raise NumericalError(f"oracle limited to dimension {settings.EXPM_CUTOFF}, got {aug.n}")
    out = la.expm(aug.A.to_dense() * T) @ aug.u0
    return out[: system.n]


def error_norms(
    u: Mapping[str, np.ndarray],
    ref: Mapping[str, np.ndarray],
    grid: Grid1D,
    d: int = 1,
    reference: str = "classical",
) -> ErrorReport:
    """
    Δx^d-weighted discrete L2 and max-norm errors, per named component.

    Relative errors are left undefined for a component whose reference is zero up to
    roundoff, i.e. below REL_FLOOR times the largest reference norm of the report.
    """
    if list(u) != list(ref):
        raise DimensionError(f"component mismatch: {list(u)} vs {list(ref)}")
    weight = grid.h ** d
    norms = []
    for name in u:
        a, b = np.asarray(u[name]), np.asarray(ref[name])
        if a.shape != b.shape:
            raise DimensionError(f"{name}: shape {a.shape} does not match reference {b.shape}")
        err = a - b
        norms.append((
            name,
            math.sqrt(weight * float(np.sum(np.abs(err) ** 2))),
            float(np.abs(err).max(initial=0.0)),
            math.sqrt(weight * float(np.sum(np.abs(b) ** 2))),
            float(np.abs(b).max(initial=0.0)),
        ))

    l2_scale = max((n[3] for n in norms), default=0.0)
    linf_scale = max((n[4] for n in norms), default=0.0)
    components = []
    for name, l2_abs, linf_abs, l2_ref, linf_ref in norms:
        defined = l2_ref > REL_FLOOR * l2_scale and linf_ref > REL_FLOOR * linf_scale
        components.append(
            ComponentError(
                component=name,
                l2_abs=l2_abs,
                l2_rel=l2_abs / l2_ref if defined else None,
                linf_abs=linf_abs,
                linf_rel=linf_abs / linf_ref if defined else None,
                rel_defined=defined,
            )
        )
    return ErrorReport(reference=reference, a=grid.a, b=grid.b, M=grid.M, d=d, components=components)


def observed_order(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    hs, errors = np.asarray(hs, dtype=float), np.asarray(errors, dtype=float)
    if hs.size != errors.size or hs.size < 2:
        raise NumericalError("observed order needs at least two (h, error) pairs")
    if np.any(hs <= 0) or np.any(errors <= 0):
        raise NumericalError("observed order needs positive step sizes and errors")
    fit = linregress(np.log(hs), np.log(errors))
    return float(fit.slope)
