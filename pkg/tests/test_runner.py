"""Tests for seeded experiment runs and density sweeps."""

import numpy as np
import pytest

from r1tc.experiments import runner
from r1tc.experiments.runner import (
    STATUS_ERROR,
    ExperimentConfig,
    build_trial_tensor,
    density_sweep,
    parse_densities,
    run_experiment,
)
from r1tc.pipeline import check_tensor


class TestExperimentConfig:
    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            ExperimentConfig(mode="gradient", n=3, density=0.5)

    def test_density_required_for_random_instances(self):
        with pytest.raises(ValueError):
            ExperimentConfig(mode="nuclear", n=3)
        with pytest.raises(ValueError):
            ExperimentConfig(mode="nuclear", n=3, density=1.5)

    def test_strong_instances_need_no_density(self):
        cfg = ExperimentConfig(mode="iterative_strong", n=3)
        assert cfg.uses_strong_instances
        assert ExperimentConfig(mode="nuclear", n=3, strong=True).uses_strong_instances

    def test_tolerance_defaults(self):
        assert ExperimentConfig(mode="nuclear", n=3, density=0.5).tol == 1e-6
        assert ExperimentConfig(mode="nuclear", n=3, density=0.5, solver={"tol": 1e-3}).tol == 1e-3


def test_trial_instances_are_reproducible():
    cfg = ExperimentConfig(mode="iterative_strong", n=4, seed=11)
    first, second = build_trial_tensor(cfg, 2), build_trial_tensor(cfg, 2)
    assert first.entries == second.entries
    assert check_tensor(first).strong


def test_iterative_on_strong_instances():
    report = run_experiment(ExperimentConfig(mode="iterative_strong", n=3, trials=3, seed=5))
    assert report.success_rate == 1.0
    assert [t.seed for t in report.trials] == [5, 6, 7]
    assert all(t.method == "iterative" for t in report.trials)
    assert report.rho == pytest.approx(report.mean_observed / 8)

    data = report.to_dict(include_timing=False)
    assert "mean_time" not in data
    assert all("time" not in trial for trial in data["trials"])


def test_full_density_nuclear_sweep():
    cfg = ExperimentConfig(mode="nuclear", n=2, density=1.0, trials=2)
    reports, minimum = density_sweep(cfg, [1.0])
    assert minimum == 1.0
    assert reports[0].den == 1.0
    assert reports[0].success_rate == 1.0


def test_sweep_rejects_strong_instances():
    with pytest.raises(ValueError):
        density_sweep(ExperimentConfig(mode="iterative_strong", n=3), [0.3])


class TestParseDensities:
    def test_fractions_and_percentages(self):
        assert parse_densities("20%, 0.3") == pytest.approx([0.2, 0.3])

    @pytest.mark.parametrize("text", ["", "0", "1.2", "abc"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_densities(text)


@pytest.mark.parametrize("error", [np.linalg.LinAlgError("singular matrix"), ValueError("bad block")])
def test_numerical_errors_fail_one_trial(monkeypatch, error):
    calls = []

    def flaky(tensor, method, config):
        calls.append(tensor.size)
        if len(calls) == 2:
            raise error
        return real(tensor, method=method, config=config)

    real = runner.complete_tensor
    monkeypatch.setattr(runner, "complete_tensor", flaky)
    report = run_experiment(ExperimentConfig(mode="iterative_strong", n=3, trials=3))

    assert len(calls) == 3
    assert [t.success for t in report.trials] == [True, False, True]
    failed = report.trials[1]
    assert failed.status == STATUS_ERROR
    assert failed.residual is None
    assert str(error) in failed.message
    assert report.success_rate == pytest.approx(2 / 3)


@pytest.mark.slow
@pytest.mark.parametrize("mode, density", [("nuclear", 0.37), ("nuclear_symmetric", 0.42)])
def test_nuclear_success_rate(mode, density):
    report = run_experiment(ExperimentConfig(mode=mode, n=5, density=density, trials=20))
    assert report.success_rate >= 0.7
    assert all(t.residual <= 1e-6 for t in report.trials if t.success)


@pytest.mark.slow
def test_moment_decides_sparse_instances():
    report = run_experiment(ExperimentConfig(mode="moment", n=3, density=0.2, trials=5))
    assert report.success_rate == 1.0
    assert report.mean_time < 5.0
