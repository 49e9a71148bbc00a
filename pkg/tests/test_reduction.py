"""Tests for the slice-minor constraint system and its nullspace."""

import numpy as np
import pytest

from r1tc.errors import CompletionDeferred
from r1tc.experiments.generators import gen_instance
from r1tc.methods.reduction import (
    build_minors,
    build_minors_symmetric,
    canonical_pair,
    constraint_system,
    normalized_rows,
    nullspace,
    strong_data,
)
from r1tc.tensors.models import PartialTensor
from r1tc.tensors.tensor_model import symmetric_closure

# Rows of the minor system of the 3x3x3 example over (X11, X13, X22, X23, X31, X32)
EXPECTED_MINORS = np.array([
    [1, 0, -1, 0, 0, 0],
    [1, 0, 0, 0, -1, 0],
    [0, 0, 1, 0, -1, 0],
    [0, 1, 0, 0, 1, 0],
    [0, 0, 0, -1, 1, 0],
    [0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 1, 1],
], dtype=float)


class TestBuildMinors:
    def test_matrix_matches_hand_derivation(self, strong_tensor):
        system = build_minors(strong_tensor)
        assert system.variables == ((0, 0), (0, 2), (1, 1), (1, 2), (2, 0), (2, 1))
        assert system.shape == (7, 6)
        np.testing.assert_array_equal(system.matrix, EXPECTED_MINORS)

    def test_row_count_is_sum_of_pair_counts(self, nuclear_tensor):
        # slices hold 3, 4, 4 and 1 observed pairs
        assert build_minors(nuclear_tensor).shape[0] == 3 + 6 + 6 + 0

    def test_minor_record(self, strong_tensor):
        row = build_minors(strong_tensor).rows[0]
        assert (row.k, row.first, row.second) == (0, (0, 0), (1, 1))
        assert row.coeff_first == -1.0
        assert row.coeff_second == 1.0

    def test_single_entries_give_no_rows(self):
        tensor = PartialTensor((2, 2, 2), {(0, 0, 0): 1.0, (1, 1, 1): 2.0})
        assert build_minors(tensor).shape == (0, 2)


class TestSymmetric:
    def test_unordered_variables(self, symmetric_tensor):
        system = build_minors_symmetric(symmetric_tensor)
        assert all(i <= j for i, j in system.variables)
        assert system.variable((4, 0)) == system.variable((0, 4))

    def test_minors_use_listed_entries(self, symmetric_tensor):
        system = build_minors_symmetric(symmetric_tensor)
        # slices 1, 3 and 5 list 3, 4 and 2 entries
        assert system.shape == (3 + 6 + 1, 7)
        assert {row.k for row in system.rows} == {0, 2, 4}
        _, dim = nullspace(system)
        assert dim == 2

    def test_closure_adds_no_minors(self):
        v = np.array([1.0, 2.0, -1.0])
        listed = {(0, 1, 2): v[0] * v[1] * v[2], (0, 0, 0): v[0] ** 3}
        tensor = PartialTensor((3, 3, 3), symmetric_closure(listed), symmetric=True, listed=frozenset(listed))
        assert tensor.size == 7
        assert tensor.listed_tensor().size == 2
        assert build_minors_symmetric(tensor).shape[0] == 0

    def test_requires_symmetric_flag(self, strong_tensor):
        with pytest.raises(ValueError):
            build_minors_symmetric(strong_tensor)

    def test_dispatch(self, symmetric_tensor, strong_tensor):
        assert constraint_system(symmetric_tensor).symmetric
        assert not constraint_system(strong_tensor).symmetric

    def test_canonical_pair(self):
        assert canonical_pair((3, 1)) == (1, 3)
        assert canonical_pair((1, 3)) == (1, 3)


class TestNullspace:
    def test_one_dimensional(self, strong_tensor):
        basis, dim = nullspace(build_minors(strong_tensor))
        assert dim == 1
        vector = basis[:, 0] / basis[0, 0]
        np.testing.assert_allclose(vector, [1, -1, 1, 1, 1, -1], atol=1e-12)

    def test_two_dimensional(self, weak_tensor):
        _, dim = nullspace(build_minors(weak_tensor))
        assert dim == 2

    def test_empty_system(self):
        tensor = PartialTensor((2, 2, 2), {(0, 0, 0): 1.0, (1, 1, 1): 2.0})
        basis, dim = nullspace(build_minors(tensor))
        assert dim == 2
        np.testing.assert_array_equal(basis, np.eye(2))

    def test_normalized_rows_keep_zero_rows(self):
        rows = normalized_rows(np.array([[3.0, 4.0], [0.0, 0.0]]))
        np.testing.assert_allclose(rows, [[0.6, 0.8], [0.0, 0.0]])


class TestStrongData:
    def test_scaled_at_anchor(self, strong_tensor):
        data = strong_data(strong_tensor)
        assert data.anchor.pair == (0, 0)
        expected = {(0, 0): 1, (0, 2): -1, (1, 1): 1, (1, 2): 1, (2, 0): 1, (2, 1): -1}
        assert data.w == pytest.approx(expected)

    def test_not_strong(self, weak_tensor):
        with pytest.raises(CompletionDeferred) as info:
            strong_data(weak_tensor)
        assert info.value.reason == "not_strong"
        assert info.value.detail == 2


@pytest.mark.parametrize("symmetric", [False, True])
def test_minors_vanish_on_rank_one_tensors(symmetric):
    for seed in range(100):
        tensor, factors = gen_instance(4, 0.4, seed, symmetric=symmetric)
        system = constraint_system(tensor)
        x = np.array([factors.a[i] * factors.b[j] for i, j in system.variables])
        scale = max(1.0, float(np.max(np.abs(system.matrix)))) if system.matrix.size else 1.0
        assert np.max(np.abs(system.matrix @ x), initial=0.0) <= 1e-12 * scale
