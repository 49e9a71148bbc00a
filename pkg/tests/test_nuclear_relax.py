"""Tests for the nuclear-norm and trace relaxations."""

import numpy as np
import pytest

from r1tc.errors import RankFailure
from r1tc.methods.nuclear_relax import (
    build_nuclear_sdp,
    numerical_rank,
    solve_nuclear,
    solve_nuclear_symmetric,
)
from r1tc.tensors.models import PartialTensor

# Trace-minimal V of the symmetric 5x5x5 fixture with V_15 = 1
TRACE_OPTIMUM = np.array([
    [0.1961, 0.2547, 0.7845, 0.9806, 1.0000],
    [0.2547, 4.5000, 2.3534, 1.2739, 1.2991],
    [0.7845, 2.3534, 8.0000, 3.9222, 4.0000],
    [0.9806, 1.2739, 3.9222, 4.9028, 5.0000],
    [1.0000, 1.2991, 4.0000, 5.0000, 5.0991],
])


class TestBuildSdp:
    def test_sizes(self, nuclear_tensor):
        problem = build_nuclear_sdp(nuclear_tensor)
        assert problem.blocks[0].size == 8
        assert problem.num_vars == 8 * 9 // 2
        # 15 slice minors plus the anchor normalization
        assert problem.num_equalities == 16
        assert problem.eq_rhs[-1] == 1.0

    def test_small_instance(self, weak_tensor):
        problem = build_nuclear_sdp(weak_tensor)
        assert problem.blocks[0].size == 6
        assert problem.num_equalities == 3 + 1

    def test_objective_is_trace(self, weak_tensor):
        problem = build_nuclear_sdp(weak_tensor)
        y = np.arange(problem.num_vars, dtype=float)
        assert problem.objective @ y == pytest.approx(np.trace(problem.blocks[0].evaluate(y)))

    def test_symmetric_block(self, symmetric_tensor):
        assert build_nuclear_sdp(symmetric_tensor).blocks[0].size == 5


def test_numerical_rank():
    assert numerical_rank(np.array([2.0, 1e-7, 0.0]), 1e-6) == 1
    assert numerical_rank(np.array([2.0, 1.0, 0.5]), 1e-6) == 3
    assert numerical_rank(np.zeros(3), 1e-6) == 0


class TestSolveNuclear:
    def test_rank_one_optimum(self, nuclear_tensor):
        result = solve_nuclear(nuclear_tensor)
        assert result.completed
        assert result.method == "nuclear"
        np.testing.assert_allclose(result.a, [1, 0.5, 0.5, 0.5], atol=1e-5)
        np.testing.assert_allclose(result.b, [1, 1, 2, 1], atol=1e-5)
        np.testing.assert_allclose(result.c, [2, 4, 2, 2], atol=1e-5)
        assert result.residual <= 1e-6
        assert result.diagnostics["nuclear"]["numerical_rank"] == 1

    def test_rank_failure(self, weak_tensor):
        with pytest.raises(RankFailure) as info:
            solve_nuclear(weak_tensor)
        outcome = info.value.outcome
        assert outcome.numerical_rank == 3
        spectrum = outcome.singular_values
        assert spectrum[2] / spectrum[0] > 1e-3
        assert info.value.reason == "rank_failure"
        # normalization X_13 = 1 at the anchor
        assert outcome.X[0, 2] == pytest.approx(1.0, abs=1e-6)

    def test_fully_observed_symmetric(self):
        v = np.array([1.0, 2.0])
        entries = {(i, j, k): v[i] * v[j] * v[k] for i in range(2) for j in range(2) for k in range(2)}
        result = solve_nuclear(PartialTensor((2, 2, 2), entries, symmetric=True))
        assert result.completed and result.symmetric
        np.testing.assert_allclose(result.a, v, atol=1e-6)
        assert result.tau == pytest.approx(8.0, rel=1e-6)

    def test_symmetric_rank_failure(self, symmetric_tensor):
        with pytest.raises(RankFailure) as info:
            solve_nuclear_symmetric(symmetric_tensor, anchor=(0, 4, 0))
        outcome = info.value.outcome
        assert outcome.symmetric
        assert outcome.numerical_rank == 3
        assert outcome.X[0, 4] == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(outcome.X, TRACE_OPTIMUM, atol=1e-3)
        assert np.trace(outcome.X) == pytest.approx(np.trace(TRACE_OPTIMUM), rel=1e-3)

    def test_symmetric_optimum_ignores_closure_minors(self, symmetric_tensor):
        # the closed index set would force V = v v^T; the listed one does not
        problem = build_nuclear_sdp(symmetric_tensor, anchor=(0, 4, 0))
        assert problem.num_equalities == 10 + 1

    def test_symmetric_requires_flag(self, strong_tensor):
        with pytest.raises(ValueError):
            solve_nuclear_symmetric(strong_tensor)

    def test_dump(self, weak_tensor, tmp_path):
        with pytest.raises(RankFailure):
            solve_nuclear(weak_tensor, dump_dir=tmp_path)
        assert len(list(tmp_path.glob("nuclear-*.sdp"))) == 1
