import math

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from app.core.config import settings
from app.core.exceptions import DimensionError, OperatorError, PWindowError
from app.services.formulations import assemble_displacement, assemble_smf
from app.services.grids import make_pgrid, make_uniform_grid
from app.services.operators import Operator
from app.services.reference import ExactHyperbolicSolution
from app.services.schrodingerizer import (
    WarpFunction,
    check_p_window,
    hermitian_split,
    homogenize,
    lambda_max,
    pad_to_power_of_two,
    pstar,
    schrodingerize,
    smf_closed_form_pair,
)
from app.services.systems import LinearODESystem


def _forced_smf(unit_medium, M):
    grid = make_uniform_grid(0, 10, M)
    return assemble_smf(
        grid, unit_medium, 1, force={"v1": 0.1}, initial={"sigma11": np.exp(-(grid.nodes - 5) ** 2)}
    )


def test_homogenize_absorbs_source():
    system = LinearODESystem.from_matrix(np.zeros((2, 2)), b=np.array([1.0, 2.0]), u0=np.array([3.0, 4.0]))
    aug = homogenize(system)
    assert aug.n == 4
    assert not aug.has_source
    assert_allclose(aug.u0, [3, 4, 2, 2])
    assert_allclose(aug.A.to_dense()[:2, 2:], np.diag([0.5, 1.0]))
    assert_allclose(aug.A.to_dense()[2:], 0)


def test_homogenize_source_free_is_identity():
    system = LinearODESystem.from_matrix(np.eye(2))
    assert homogenize(system) is system
    with pytest.raises(OperatorError):
        homogenize(system, c_scale=0.0)


def test_pad_to_power_of_two():
    padded = pad_to_power_of_two(LinearODESystem.from_matrix(np.eye(3), u0=np.array([1.0, 2.0, 3.0])))
    assert padded.n == 4
    assert_allclose(padded.u0, [1, 2, 3, 1])
    assert_allclose(padded.A.to_dense()[3], 0)


def test_hermitian_split_reconstructs():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    pair = hermitian_split(Operator(A))
    assert pair.H1.is_hermitian()
    assert pair.H2.is_hermitian()
    assert_allclose(pair.reconstruct(), A, atol=1e-13)


def test_hermitian_split_requires_square():
    with pytest.raises(DimensionError):
        hermitian_split(Operator(np.ones((2, 3))))


def test_warp_functions():
    g = WarpFunction.exact_kink()
    assert_allclose(g(np.array([-1.0, 0.0, 1.0])), [math.exp(-1), 1.0, math.exp(-1)])
    smooth = WarpFunction.smooth(2)
    values = smooth(np.array([-1e-9, 0.0, 1e-9]))
    assert_allclose(values, 1.0, atol=1e-8)
    assert smooth(np.array([-20.0]))[0] < 1e-3
    with pytest.raises(OperatorError):
        WarpFunction.smooth(0)
    with pytest.raises(OperatorError, match="h\\(0\\) = 1"):
        WarpFunction.custom(lambda p: 2 * np.exp(p))


def test_schrodingerize_layout(row1, grid8):
    solution = ExactHyperbolicSolution.from_medium(row1)
    system = assemble_displacement(grid8, row1, "spectral", initial=solution.sample(grid8.nodes, 0.0))
    pair = hermitian_split(system.generator)
    pgrid = make_pgrid(-4 * math.pi, 4 * math.pi, 16)
    sch = schrodingerize(pair, system.w0, pgrid)
    assert sch.n_aug == 24
    assert sch.dim == 24 * 16
    assert sch.c0.size == sch.dim
    assert sch.Hs.is_hermitian()
    assert sch.s == sch.Hs.s
    assert sch.maxnorm == pytest.approx(sch.Hs.maxnorm, rel=1e-12)
    with pytest.raises(DimensionError):
        schrodingerize(pair, system.w0[:-1], pgrid)


def test_mode_generator_matches_block_of_hs():
    A = np.array([[-1.0, 2.0], [0.0, -0.5]])
    pair = hermitian_split(Operator(A))
    pgrid = make_pgrid(-4, 4, 8)
    sch = schrodingerize(pair, np.ones(2), pgrid)
    Hs = sch.Hs.to_dense().reshape(2, 8, 2, 8)
    for k in range(8):
        assert_allclose(sch.mode_generator(k).toarray(), -1j * Hs[:, k, :, k], atol=1e-14)


def test_lambda_max_and_pstar():
    H = Operator(np.diag([1.0, -4.0, 3.0]), hermitian=True)
    assert lambda_max(H) == pytest.approx(3.0)
    assert pstar(H, 2.0) == pytest.approx(6.0)
    assert pstar(Operator(-np.eye(2), hermitian=True), 1.0) == 0.0
    with pytest.raises(OperatorError):
        lambda_max(Operator(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_lambda_max_forced_smf(unit_medium):
    aug = homogenize(_forced_smf(unit_medium, 64).ode, c_scale=1.0)
    assert lambda_max(hermitian_split(aug.A).H1) == pytest.approx(3.2, abs=0.005)


def test_lambda_max_displacement_rows(row2):
    spectral = assemble_displacement(make_uniform_grid(0, 1, 32), row2, "spectral")
    central = assemble_displacement(make_uniform_grid(0, 1, 64), row2, "central")
    assert lambda_max(hermitian_split(spectral.generator).H1) == pytest.approx(6.759, abs=0.01)
    assert lambda_max(hermitian_split(central.generator).H1) == pytest.approx(4.303, abs=0.01)


def test_closed_form_pair_equals_generic_split(unit_medium):
    system = _forced_smf(unit_medium, 16)
    generic = hermitian_split(homogenize(system.ode, c_scale=1.0).A)
    closed = smf_closed_form_pair(system, 1.0)
    assert abs(generic.H1.to_sparse() - closed.H1.to_sparse()).max() < 1e-12
    assert abs(generic.H2.to_sparse() - closed.H2.to_sparse()).max() < 1e-12


def test_check_p_window():
    pgrid = make_pgrid(-1, 1, 8)
    assert check_p_window(pgrid, 0.5) is pgrid
    extended = check_p_window(pgrid, 2.0)
    assert extended.lo == -1
    assert extended.hi == pytest.approx(3.0)
    assert extended.N == 8
    with pytest.raises(PWindowError, match="beyond the p window"):
        check_p_window(pgrid, 2.0, strict=True)


def test_sparse_and_dense_lambda_max_agree(monkeypatch):
    B = sp.random(40, 40, density=0.1, random_state=2)
    H = Operator((B + B.T).tocsr(), hermitian=True)
    dense = lambda_max(H)
    monkeypatch.setattr(settings, "DENSE_CUTOFF", 10)
    assert lambda_max(H) == pytest.approx(dense, rel=1e-6)
