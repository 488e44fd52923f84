import math

import numpy as np
import pytest

from app.core.exceptions import ConfigError, OperatorError
from app.schemas.resource import ComplexityScenario
from app.services.operators import Operator
from app.services.resources import (
    CSV_COLUMNS,
    comparison_table,
    measure,
    n_query,
    predict,
    predict_qubits,
    pstar_scaling,
    state_components,
)


def test_query_count_for_arranged_case():
    H = Operator(np.ones((2, 2)), hermitian=True)
    est = measure(H, T=1.0, delta=math.exp(-1), m_e=1)
    assert est.s == 2
    assert est.hmax == 1.0
    assert est.tau == pytest.approx(2.0)
    assert est.n_query == 3
    assert n_query(2.0, math.exp(-1)) == 3


def test_measure_requires_hermitian():
    with pytest.raises(OperatorError):
        measure(Operator(np.array([[0.0, 1.0], [0.0, 0.0]])), T=1.0)


def test_predict_smf_3d():
    est = predict(ComplexityScenario(formulation="smf", d=3, r=2, epsilon=1e-2, T=1))
    assert est.source == "predicted"
    assert est.n_gate == pytest.approx((5 + 1.5 * math.log2(100)) * 100, rel=1e-12)
    assert est.s == 3
    assert "proxy" in est.label


@pytest.mark.parametrize("change", [{"T": 2.0}, {"epsilon": 1e-3}, {"d": 3}])
@pytest.mark.parametrize("formulation", ["smf", "staggered-vs", "displacement-spectral", "displacement-central"])
def test_predict_is_monotone(formulation, change):
    base = dict(formulation=formulation, d=2, r=2, epsilon=1e-2, T=1.0)
    before = predict(ComplexityScenario(**base)).n_gate
    after = predict(ComplexityScenario(**{**base, **change})).n_gate
    assert after >= before


def test_smooth_warp_proxy_only_with_order():
    plain = predict(ComplexityScenario(formulation="smf", d=2, epsilon=1e-2, T=1.0))
    smooth = predict(ComplexityScenario(formulation="smf", d=2, epsilon=1e-2, T=1.0, k=3))
    assert plain.smooth_warp_gate is None
    assert smooth.smooth_warp_gate > 0


def test_state_components_and_qubits():
    assert state_components("smf", 3) == 9
    assert state_components("staggered-vs", 2) == 5
    assert state_components("displacement-central", 1) == 3
    assert state_components("displacement-spectral", 3) == 10
    assert predict_qubits("smf", 1, 64, 1024, forced=True) == 18
    assert predict_qubits("displacement-spectral", 1, 32, 512) == 16


@pytest.mark.parametrize("scheme", ["spectral", "central"])
def test_pstar_scaling_is_linear(row2, scheme):
    table = pstar_scaling(scheme, [16, 32, 64], row2)
    assert [r.M for r in table.rows] == [16, 32, 64]
    assert table.r_squared > 0.999
    assert table.slope == pytest.approx(table.predicted_slope, rel=1e-6)


def test_pstar_scaling_needs_three_sizes(row2):
    with pytest.raises(ConfigError, match="three"):
        pstar_scaling("spectral", [16, 32], row2)


def test_comparison_table_columns():
    rows = comparison_table([predict(ComplexityScenario(formulation="smf", d=1, epsilon=0.1, T=1.0))])
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert rows[0]["formulation"] == "smf"
