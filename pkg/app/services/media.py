"""
Isotropic elastic media: constant media, spatially varying fields, and the sampling of
those fields at staggered-grid locations.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from app.core.exceptions import DimensionError, MediumError
from app.services.grids import Grid1D

logger = logging.getLogger(__name__)

Field = Callable[..., np.ndarray]


@dataclass(frozen=True)
class IsotropicMedium:
    rho: float
    lam: float
    mu: float

    def __post_init__(self):
        if self.rho <= 0:
            raise MediumError(f"density must be positive, got {self.rho}")
        if self.mu <= 0:
            raise MediumError(f"shear modulus must be positive, got {self.mu}")
        if 3 * self.lam + 2 * self.mu <= 0:
            raise MediumError(f"3λ + 2μ must be positive, got {3 * self.lam + 2 * self.mu}")

    @property
    def cp(self) -> float:
        return math.sqrt((self.lam + 2 * self.mu) / self.rho)

    @property
    def cs(self) -> float:
        return math.sqrt(self.mu / self.rho)


@dataclass(frozen=True)
class MediumFields:
    """ρ, λ, μ as functions of the coordinates (x, y[, z]), each taking broadcastable arrays."""

    rho: Field
    lam: Field
    mu: Field
    name: str = "custom"

    @classmethod
    def constant(cls, medium: IsotropicMedium) -> "MediumFields":
        return cls(
            rho=lambda *xs: np.full(np.shape(xs[0]), medium.rho, dtype=float),
            lam=lambda *xs: np.full(np.shape(xs[0]), medium.lam, dtype=float),
            mu=lambda *xs: np.full(np.shape(xs[0]), medium.mu, dtype=float),
            name="constant",
        )


# ── Presets ───────────────────────────────────────────────────────────────────

def _sincos(base: float, amplitude: float) -> Field:
    def field(x, y, *rest):
        return base + amplitude * np.sin(x) * np.cos(y)

    return field


MEDIUM_PRESETS: dict[str, Callable[[], MediumFields]] = {
    "sincos-2d": lambda: MediumFields(
        rho=_sincos(1.0, 0.5),
        lam=_sincos(0.5, 0.2),
        mu=_sincos(0.5, 0.15),
        name="sincos-2d",
    ),
}


def medium_preset(name: str) -> MediumFields:
    try:
        return MEDIUM_PRESETS[name]()
    except KeyError:
        raise MediumError(f"unknown medium preset {name!r}; known: {sorted(MEDIUM_PRESETS)}")


def load_tabulated_field(path: str | Path) -> Field:
    """
    Read an "x y value" table covering one period of a uniform 2-D grid and return a
    periodic linear interpolant. The period is inferred as node count times spacing.
    """
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 3:
        raise MediumError(f"{path}: expected 3 columns (x y value), got {data.shape[1]}")
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0] or xs.size < 2 or ys.size < 2:
        raise MediumError(f"{path}: samples do not form a complete tensor grid")
    values = np.empty((xs.size, ys.size))
    values[np.searchsorted(xs, data[:, 0]), np.searchsorted(ys, data[:, 1])] = data[:, 2]

    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    period = (xs.size * dx, ys.size * dy)
    # close the period so the interpolant wraps
    xs_closed = np.append(xs, xs[0] + period[0])
    ys_closed = np.append(ys, ys[0] + period[1])
    closed = np.pad(values, ((0, 1), (0, 1)), mode="wrap")
    interp = RegularGridInterpolator((xs_closed, ys_closed), closed)
    logger.info("load_tabulated_field: %s (%d x %d nodes)", path, xs.size, ys.size)

    def field(x, y, *rest):
        xw = xs[0] + np.mod(np.asarray(x) - xs[0], period[0])
        yw = ys[0] + np.mod(np.asarray(y) - ys[0], period[1])
        pts = np.stack([np.ravel(xw), np.ravel(yw)], axis=-1)
        return interp(pts).reshape(np.shape(xw))

    return field


# ── Staggered sampling ────────────────────────────────────────────────────────

VELOCITY_SHIFTS = {2: [(0,), (1,)], 3: [(0,), (1,), (2,)]}
SHEAR_SHIFTS = {2: {"sigma12": (0, 1)}, 3: {"sigma12": (0, 1), "sigma13": (0, 2), "sigma23": (1, 2)}}


def staggered_coordinates(grid: Grid1D, d: int, shifted: tuple[int, ...]) -> list[np.ndarray]:
    """Flattened coordinates of every node, half-cell shifted along the `shifted` axes."""
    axes = [grid.midpoints if axis in shifted else grid.nodes for axis in range(d)]
    return [c.ravel() for c in np.meshgrid(*axes, indexing="ij")]


@dataclass(frozen=True, eq=False)
class StaggeredSamples:
    rho_v: list[np.ndarray]
    lam_c: np.ndarray
    mu_c: np.ndarray
    mu_shear: dict[str, np.ndarray]


def sample_medium(fields: MediumFields, grid: Grid1D, d: int) -> StaggeredSamples:
    if d not in VELOCITY_SHIFTS:
        raise DimensionError(f"staggered sampling supports d in (2, 3), got {d}")
    rho_v = [fields.rho(*staggered_coordinates(grid, d, s)) for s in VELOCITY_SHIFTS[d]]
    centers = staggered_coordinates(grid, d, ())
    lam_c, mu_c = fields.lam(*centers), fields.mu(*centers)
    mu_shear = {
        name: fields.mu(*staggered_coordinates(grid, d, s)) for name, s in SHEAR_SHIFTS[d].items()
    }

    if any(np.any(r <= 0) for r in rho_v):
        raise MediumError("density sample is not positive")
    if np.any(mu_c <= 0) or any(np.any(m <= 0) for m in mu_shear.values()):
        raise MediumError("shear modulus sample is not positive")
    if np.any(3 * lam_c + 2 * mu_c <= 0):
        raise MediumError("3λ + 2μ sample is not positive")
    return StaggeredSamples(rho_v=rho_v, lam_c=lam_c, mu_c=mu_c, mu_shear=mu_shear)
