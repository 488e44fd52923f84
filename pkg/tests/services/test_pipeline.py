from pathlib import Path

import numpy as np
import pytest

from app.core.exceptions import ConfigError, PWindowError
from app.services.config_loader import config_hash, load_config, parse_config
from app.services.pipeline import prepare, run_experiment


def _smf_flat(small_flat, **extra):
    return {
        **small_flat,
        "formulation": "smf",
        "grid.b": "10",
        "medium.rho": "1",
        "medium.lam": "1",
        "medium.mu": "1",
        "initial.kind": "gaussian-stress",
        "initial.center": "5",
        "validation.reference": "classical",
        **extra,
    }


def test_zero_horizon_reproduces_initial_data(small_flat):
    cfg = parse_config({**small_flat, "time.T": "0"})
    outcome = run_experiment(cfg, write=False)
    summary = outcome.summary
    assert set(summary.errors) == {"classical", "exact", "classical-vs-exact"}
    assert summary.worst_error < 1e-10
    assert summary.errors["classical"].worst("linf_rel") < 1e-10
    assert summary.passed
    assert summary.artifacts == []


def test_small_run_agrees_with_classical(small_flat):
    cfg = parse_config(small_flat)
    outcome = run_experiment(cfg, write=False, threads=2)
    summary = outcome.summary
    assert summary.config_hash == config_hash(cfg)
    assert summary.recovery.p_star == pytest.approx(summary.lambda_max * 0.1)
    assert summary.recovery.p1 >= summary.recovery.p_star
    assert summary.errors["classical"].worst("l2_rel") < 0.1
    assert summary.resources.source == "measured"
    assert summary.predicted_m_H == summary.resources.m_H
    assert set(outcome.quantum) == {"xi1", "zeta11", "p"}
    assert len(outcome.table.rows) == 3 * 8


def test_run_writes_deterministic_artifacts(small_flat, tmp_path):
    cfg = parse_config(small_flat)
    first = run_experiment(cfg, out_dir=tmp_path / "a")
    run_experiment(cfg, out_dir=tmp_path / "b")
    names = sorted(Path(p).name for p in first.summary.artifacts)
    assert names == ["errors.csv", "errors.json", "resources.json", "results.csv", "run.json"]
    # run.json records the artifact paths, which differ between the two directories
    for name in ("errors.csv", "errors.json", "resources.json", "results.csv"):
        assert (tmp_path / "a" / "small" / name).read_bytes() == (tmp_path / "b" / "small" / name).read_bytes()

    lines = (tmp_path / "a" / "small" / "results.csv").read_text().splitlines()
    assert f"# config_hash: {config_hash(cfg)}" in lines
    header = next(line for line in lines if not line.startswith("#"))
    assert header == "component,x,quantum,classical,exact,abs_err,rel_err"


def test_forced_smf_is_homogenized(small_flat):
    cfg = parse_config(_smf_flat(small_flat, **{"force.kind": "constant", "force.value": "0.1", "homogenization.c": "1"}))
    prepared = prepare(cfg)
    assert prepared.forced
    assert prepared.aug.n == 2 * prepared.ode.n
    assert prepared.lambda_max > 0
    outcome = run_experiment(cfg, write=False)
    assert outcome.summary.predicted_m_H == outcome.summary.resources.m_H
    assert np.isfinite(outcome.summary.worst_error)


def test_force_component_beyond_dimension(small_flat):
    cfg = parse_config(_smf_flat(small_flat, **{"force.kind": "constant", "force.value": "0.1", "force.component": "2"}))
    with pytest.raises(ConfigError, match="exceeds dimension"):
        prepare(cfg)


def test_strict_rejects_recovery_point_below_threshold(small_flat):
    cfg = parse_config({**small_flat, "recovery.p1": "-1"})
    with pytest.raises(PWindowError, match="below p\\*"):
        run_experiment(cfg, strict=True, write=False)
    relaxed = run_experiment(cfg, write=False)
    assert relaxed.summary.recovery.p1 >= relaxed.summary.recovery.p_star


def test_staggered_preset_assembles_at_desk_scale():
    cfg = load_config(preset="staggered-2d-variable", overrides={"grid.M": "8", "pgrid.N": "16", "time.T": "0.01"})
    prepared = prepare(cfg)
    assert prepared.system.kind == "staggered-vs"
    assert prepared.schrodingerized.n_aug == 5 * 64


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["smf-1d-forced", "hyperbolic-1d-spectral-b", "hyperbolic-1d-central-b"])
def test_bundled_preset_meets_tolerance(preset):
    outcome = run_experiment(load_config(preset=preset), write=False)
    assert outcome.summary.passed, outcome.summary.worst_error
