import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import DimensionError, MediumError
from app.services.media import (
    IsotropicMedium,
    MediumFields,
    load_tabulated_field,
    medium_preset,
    sample_medium,
    staggered_coordinates,
)


def test_wave_speeds(unit_medium):
    assert unit_medium.cp == pytest.approx(math.sqrt(3))
    assert unit_medium.cs == pytest.approx(1.0)


@pytest.mark.parametrize(
    "rho, lam, mu, match",
    [(0.0, 1.0, 1.0, "density"), (1.0, 1.0, 0.0, "shear"), (1.0, -1.0, 1.0, "3λ")],
)
def test_invalid_media_are_rejected(rho, lam, mu, match):
    with pytest.raises(MediumError, match=match):
        IsotropicMedium(rho=rho, lam=lam, mu=mu)


def test_sincos_preset():
    medium = medium_preset("sincos-2d")
    assert medium.rho(np.array(0.0), np.array(0.0)) == pytest.approx(1.0)
    assert medium.rho(np.array(math.pi / 2), np.array(0.0)) == pytest.approx(1.5)
    with pytest.raises(MediumError, match="unknown medium preset"):
        medium_preset("marble")


def test_tabulated_field_is_periodic(tmp_path):
    path = tmp_path / "rho.txt"
    rows = [f"{x} {y} {x + 10 * y}" for x in range(4) for y in range(4)]
    path.write_text("\n".join(rows) + "\n")
    field = load_tabulated_field(path)
    assert float(field(np.array(1.0), np.array(2.0))) == pytest.approx(21.0)
    assert float(field(np.array(5.0), np.array(1.0))) == pytest.approx(11.0)
    assert float(field(np.array(1.5), np.array(0.0))) == pytest.approx(1.5)


def test_tabulated_field_needs_three_columns(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0\n1 1\n")
    with pytest.raises(MediumError, match="3 columns"):
        load_tabulated_field(path)


def test_staggered_coordinates_shift(grid8):
    x, y = staggered_coordinates(grid8, 2, (0,))
    assert x.size == 64
    assert_allclose(np.unique(x), grid8.midpoints)
    assert_allclose(np.unique(y), grid8.nodes)


def test_sample_constant_medium(grid8, row1):
    samples = sample_medium(MediumFields.constant(row1), grid8, 2)
    assert len(samples.rho_v) == 2
    assert_allclose(samples.rho_v[0], 1.41)
    assert_allclose(samples.lam_c, 0.71)
    assert set(samples.mu_shear) == {"sigma12"}


def test_sample_medium_rejects_negative_density(grid8):
    fields = MediumFields(
        rho=lambda x, y: np.cos(x) - 2.0,
        lam=lambda x, y: np.ones_like(x),
        mu=lambda x, y: np.ones_like(x),
    )
    with pytest.raises(MediumError, match="density"):
        sample_medium(fields, grid8, 2)
    with pytest.raises(DimensionError):
        sample_medium(fields, grid8, 1)
