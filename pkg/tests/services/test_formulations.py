import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import DimensionError, OperatorError
from app.schemas.experiment import EvolutionConfig
from app.services.evolution import evolve
from app.services.formulations import (
    assemble_displacement,
    assemble_smf,
    assemble_staggered_vs,
    compliance_from_abc,
    displacement_blocks,
    displacement_components,
    smf_coefficient_matrices,
    smf_components,
    smf_symmetrizer,
    smf_transform,
    staggered_components,
    stiffness_matrix,
)
from app.services.grids import make_uniform_grid
from app.services.media import IsotropicMedium, medium_preset
from app.services.reference import ExactHyperbolicSolution
from app.services.schrodingerizer import homogenize


def test_component_names():
    assert smf_components(1) == ("sigma11", "v1")
    assert smf_components(2) == ("sigma11", "sigma22", "sigma12", "v1", "v2")
    assert len(smf_components(3)) == 9
    assert staggered_components(2) == ("v1", "v2", "sigma11", "sigma22", "sigma12")
    assert displacement_components(1) == ("xi1", "zeta11", "p")
    assert len(displacement_components(3)) == 10


@pytest.mark.parametrize("d", [1, 2, 3])
def test_smf_coefficients_are_symmetric(row1, d):
    for A in smf_coefficient_matrices(row1, d):
        assert_allclose(A, A.T, atol=1e-12)


def test_smf_transform_matches_symmetrizer(row1):
    transform = smf_transform(row1)
    _, Mhalf = smf_symmetrizer(row1, 3)
    assert_allclose(transform.Mhalf, Mhalf[:6, :6], atol=1e-10)
    compliance = row1.rho * np.linalg.inv(stiffness_matrix(row1))
    assert_allclose(compliance_from_abc(transform.a, transform.b, transform.c), compliance, atol=1e-10)


def test_smf_sparsity_3d():
    system = assemble_smf(make_uniform_grid(0, 1, 2), IsotropicMedium(1.0, 0.0, 1.0), 3)
    assert system.A.s == 3


def test_smf_generator_is_skew_hermitian(unit_medium):
    system = assemble_smf(make_uniform_grid(0, 10, 16), unit_medium, 2)
    A = system.A.to_dense()
    assert_allclose(A + A.conj().T, 0, atol=1e-12)


def test_smf_fields_round_trip(unit_medium):
    grid = make_uniform_grid(0, 10, 32)
    sigma = np.exp(-(grid.nodes - 5) ** 2)
    system = assemble_smf(grid, unit_medium, 1, initial={"sigma11": sigma})
    fields = system.to_fields(system.U0hat)
    assert_allclose(fields["sigma11"], sigma, atol=1e-12)
    assert_allclose(fields["v1"], 0, atol=1e-12)


def test_smf_norm_preserved_by_crank_nicolson(unit_medium):
    grid = make_uniform_grid(0, 10, 32)
    system = assemble_smf(grid, unit_medium, 1, initial={"sigma11": np.exp(-(grid.nodes - 5) ** 2)})
    final = evolve(system.A, system.U0hat, EvolutionConfig(dt=0.01, T=1.0)).state
    assert np.linalg.norm(final) == pytest.approx(np.linalg.norm(system.U0hat), rel=1e-10)


def test_smf_rejects_unknown_components(unit_medium, grid8):
    with pytest.raises(DimensionError, match="unknown components"):
        assemble_smf(grid8, unit_medium, 1, initial={"sigma22": 1.0})


def test_staggered_energy_is_conserved(row1):
    grid = make_uniform_grid(0, 2 * math.pi, 8)
    x, y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    system = assemble_staggered_vs(
        grid, row1, 2, initial={"sigma11": np.exp(-((x - math.pi) ** 2 + (y - math.pi) ** 2))}
    )
    final = evolve(system.AH, system.u0, EvolutionConfig(dt=0.01, T=1.0)).state
    assert system.energy(final) == pytest.approx(system.energy(system.u0), rel=1e-10)


def test_staggered_energy_of_complex_state(row1):
    grid = make_uniform_grid(0, 2 * math.pi, 8)
    system = assemble_staggered_vs(grid, row1, 2, initial={"sigma11": 1.0, "v1": 1.0})
    real = system.energy(system.u0.real)
    assert real > 0
    assert system.energy(1j * system.u0) == pytest.approx(real, rel=1e-12)


def test_staggered_variable_medium_assembles():
    grid = make_uniform_grid(0, 2 * math.pi, 8)
    system = assemble_staggered_vs(grid, medium_preset("sincos-2d"), 2, force={"v1": 0.1})
    assert system.AH.dim == (5 * 64, 5 * 64)
    assert system.ode.has_source
    assert system.Lv.s == 4


def test_staggered_rejects_one_dimension(row1, grid8):
    with pytest.raises(DimensionError):
        assemble_staggered_vs(grid8, row1, 1)


def test_displacement_blocks_one_dimension(row1):
    (B,) = displacement_blocks(row1, 1)
    expected = np.array([
        [0, 1 / row1.rho, 1 / row1.rho],
        [2 * row1.mu, 0, 0],
        [row1.lam, 0, 0],
    ])
    assert_allclose(B, expected)


@pytest.mark.parametrize("scheme", ["spectral", "central"])
def test_displacement_initial_fields_round_trip(row1, grid8, scheme):
    solution = ExactHyperbolicSolution.from_medium(row1)
    initial = solution.sample(grid8.nodes, 0.0)
    system = assemble_displacement(grid8, row1, scheme, initial=initial)
    fields = system.to_fields(system.w0)
    for name in ("xi1", "zeta11", "p"):
        assert_allclose(fields[name], initial[name], atol=1e-10)
    assert system.kind == f"displacement-{scheme}"


def test_displacement_force_enters_with_negative_sign(row1, grid8):
    system = assemble_displacement(grid8, row1, "central", force={"xi1": 2.0})
    assert_allclose(system.ode.b[:8], -2.0)
    assert_allclose(system.ode.b[8:], 0.0)
    assert_allclose(system.L.to_dense(), -system.generator.to_dense())


def test_displacement_sparsity_3d(row1):
    spectral = assemble_displacement(make_uniform_grid(0, 1, 2), row1, "spectral", 3)
    assert spectral.generator.s == 4
    central = assemble_displacement(make_uniform_grid(0, 1, 4), row1, "central", 3, force={"xi1": 1.0})
    assert homogenize(central.ode).A.s == 9


def test_displacement_unknown_scheme(row1, grid8):
    with pytest.raises(OperatorError, match="scheme"):
        assemble_displacement(grid8, row1, "upwind")
