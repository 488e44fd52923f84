import pytest
import scipy.sparse as sp

from app.services.operators import Operator, central_difference_matrix
from app.services.validation import CHECKS, Builders, run_validation


def _flipped_wrap(grid):
    """Central difference with the sign of the periodic wrap in row 0 reversed."""
    D = central_difference_matrix(grid).to_sparse().tolil()
    D[0, grid.M - 1] = -D[0, grid.M - 1]
    return Operator(sp.csr_matrix(D), name="D_flipped")


def test_quick_suite_passes():
    report = run_validation(quick=True)
    failed = [(c.name, c.detail) for c in report.checks if not c.passed]
    assert report.passed, failed
    assert {c.name for c in report.checks} == {c.name for c in CHECKS if not c.slow}


def test_report_lists_tolerances():
    report = run_validation(only=["central-difference-antisymmetry", "pstar-spectral-row2"])
    assert [c.tolerance for c in report.checks] == [1e-12, 0.01]
    assert all(c.measured is not None for c in report.checks)


def test_flipped_wrap_is_caught():
    report = run_validation(
        builders=Builders(central_difference=_flipped_wrap),
        only=["central-difference-antisymmetry"],
    )
    assert not report.passed
    assert report.checks[0].name == "central-difference-antisymmetry"
    assert report.checks[0].measured > 1e-12


def test_crashing_builder_is_reported():
    def broken(*args, **kwargs):
        raise RuntimeError("boom")

    report = run_validation(builders=Builders(spectral_operators=broken), only=["fourier-inverse"])
    assert not report.passed
    assert "RuntimeError" in report.checks[0].detail


@pytest.mark.slow
def test_full_suite_passes():
    report = run_validation(quick=False)
    assert report.passed, [(c.name, c.detail) for c in report.checks if not c.passed]
