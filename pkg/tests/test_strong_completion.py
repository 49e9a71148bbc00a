"""Tests for the graph walk and back-solve of strongly completable tensors."""

import numpy as np
import pytest

from r1tc.errors import CompletionDeferred
from r1tc.experiments.generators import gen_strong_instance
from r1tc.methods.strong_completion import (
    BipartiteGraph,
    back_solve_c,
    back_solve_tau,
    complete_strong,
    is_connected,
    iterative_complete,
)
from r1tc.tensors.models import STATUS_NO_COMPLETION, PartialTensor

W_STRONG = {(0, 0): 1.0, (0, 2): -1.0, (1, 1): 1.0, (1, 2): 1.0, (2, 0): 1.0, (2, 1): -1.0}


def rank1_tensor(a, b, c, omega, symmetric=False) -> PartialTensor:
    n = (len(a), len(b), len(c))
    return PartialTensor(n, {(i, j, k): a[i] * b[j] * c[k] for i, j, k in omega}, symmetric=symmetric)


class TestConnectivity:
    def test_connected(self):
        assert is_connected(BipartiteGraph.from_pairs(W_STRONG))

    def test_disconnected(self):
        assert not is_connected(BipartiteGraph.from_pairs([(0, 0), (1, 1)]))

    def test_empty(self):
        assert not is_connected(BipartiteGraph.from_pairs([]))


class TestIterativeComplete:
    def test_ratios_along_walk(self):
        graph = BipartiteGraph.from_pairs(W_STRONG)
        a, b = iterative_complete(W_STRONG, graph, (0, 0), (3, 3))
        np.testing.assert_allclose(a, [1, -1, 1])
        np.testing.assert_allclose(b, [1, -1, -1])

    def test_zero_edge(self):
        w = {(0, 0): 1.0, (1, 0): 0.0, (1, 1): 1.0}
        with pytest.raises(CompletionDeferred) as info:
            iterative_complete(w, BipartiteGraph.from_pairs(w), (0, 0), (2, 2))
        assert info.value.reason == "zero_edge"


class TestBackSolve:
    def test_third_factor(self, strong_tensor):
        third = back_solve_c(strong_tensor, np.array([1.0, -1.0, 1.0]), np.array([1.0, -1.0, -1.0]))
        np.testing.assert_allclose(third.c, [-1, -1, 1])
        assert third.determined.all()

    def test_unobserved_slices_stay_zero(self):
        a = np.array([1.0, 2.0, 3.0, 1.0, 1.0])
        b = np.array([1.0, 1 / 3, 1 / 3, 2 / 3, 1 / 3])
        c = np.array([3.0, 3.0, 0.0, 6.0, 0.0])
        omega = [(0, 0, 0), (0, 4, 0), (1, 3, 0), (3, 1, 0), (3, 4, 0),
                 (4, 1, 0), (4, 1, 1), (4, 3, 1), (1, 2, 3), (3, 0, 3)]
        tensor = rank1_tensor(a, b, c, omega)
        third = back_solve_c(tensor, a, b)
        np.testing.assert_allclose(third.c, c, atol=1e-12)
        assert third.determined.tolist() == [True, True, False, True, False]

    def test_inconsistent_slice(self):
        tensor = PartialTensor((2, 2, 1), {(0, 0, 0): 1.0, (1, 1, 0): 5.0})
        assert back_solve_c(tensor, np.ones(2), np.ones(2)) is None

    def test_tau(self):
        v = np.array([1.0, 2.0])
        tensor = rank1_tensor(2 * v, v, v, [(0, 0, 0), (0, 1, 1), (1, 1, 1)])
        assert back_solve_tau(tensor, v) == pytest.approx(2.0)


class TestCompleteStrong:
    def test_recovers_factors(self, strong_tensor):
        result = complete_strong(strong_tensor)
        assert result.completed
        assert result.method == "iterative"
        np.testing.assert_allclose(result.a, [1, -1, 1], atol=1e-10)
        np.testing.assert_allclose(result.b, [1, -1, -1], atol=1e-10)
        np.testing.assert_allclose(result.c, [-1, -1, 1], atol=1e-10)
        assert result.residual <= 1e-10

    def test_not_strong_defers(self, weak_tensor):
        with pytest.raises(CompletionDeferred, match="not_strong"):
            complete_strong(weak_tensor)

    def test_rank2_slice_has_no_completion(self, infeasible_tensor):
        result = complete_strong(infeasible_tensor)
        assert result.status == STATUS_NO_COMPLETION

    def test_disconnected_defers(self):
        tensor = PartialTensor((2, 2, 1), {(0, 0, 0): 1.0, (1, 1, 0): 2.0})
        with pytest.raises(CompletionDeferred) as info:
            complete_strong(tensor)
        assert info.value.reason == "disconnected"

    def test_symmetric(self):
        v = np.array([1.0, 2.0])
        omega = [(i, j, k) for i in range(2) for j in range(2) for k in range(2)]
        tensor = rank1_tensor(v, v, v, omega, symmetric=True)
        result = complete_strong(tensor)
        assert result.completed and result.symmetric
        np.testing.assert_allclose(result.a, v, atol=1e-10)
        assert result.tau == pytest.approx(8.0)


@pytest.mark.slow
@pytest.mark.parametrize("n", [5, 10, 20, 50])
def test_generated_strong_instances(n):
    for seed in range(100):
        tensor = gen_strong_instance(n, seed)
        result = complete_strong(tensor)
        assert result.completed, f"seed {seed}: {result.message}"
        assert result.residual <= 1e-10
