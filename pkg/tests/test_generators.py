"""Tests for the random instance generators."""

from itertools import permutations

import numpy as np
import pytest

from r1tc.experiments.generators import (
    MAGNITUDE_FLOOR,
    gen_instance,
    gen_omega,
    gen_rank1,
    gen_strong_instance,
    omega_size,
    strong_pairs,
)
from r1tc.pipeline import check_tensor
from r1tc.tensors.tensor_model import residual


class TestGenRank1:
    def test_magnitudes(self):
        factors = gen_rank1(6, 5, 4, seed=7)
        assert factors.dims == (6, 5, 4)
        for vector in (factors.a, factors.b, factors.c):
            assert np.all(np.abs(vector) >= MAGNITUDE_FLOOR)
            assert np.all(np.abs(vector) <= 1.0)

    def test_reproducible(self):
        first, second = gen_rank1(4, 4, 4, seed=3), gen_rank1(4, 4, 4, seed=3)
        np.testing.assert_array_equal(first.a, second.a)
        assert not np.array_equal(first.a, gen_rank1(4, 4, 4, seed=4).a)

    def test_symmetric_shares_vector(self):
        factors = gen_rank1(3, 3, 3, seed=0, symmetric=True)
        np.testing.assert_array_equal(factors.a, factors.c)

    def test_symmetric_needs_equal_dims(self):
        with pytest.raises(ValueError):
            gen_rank1(3, 3, 4, seed=0, symmetric=True)


class TestGenOmega:
    def test_size(self):
        assert omega_size((3, 3, 3), 0.2) == 6
        assert omega_size((10, 10, 10), 0.3) == 300
        assert omega_size((2, 2, 2), 1.0) == 8

    def test_distinct_sorted_indices(self):
        omega = gen_omega((4, 4, 4), 0.25, seed=1)
        assert len(omega) == 16
        assert omega == sorted(set(omega))

    def test_symmetric_closure(self):
        omega = set(gen_omega((4, 4, 4), 0.2, seed=2, symmetric=True))
        assert len(omega) >= omega_size((4, 4, 4), 0.2)
        for index in omega:
            assert set(permutations(index)) <= omega

    def test_invalid_density(self):
        with pytest.raises(ValueError):
            gen_omega((2, 2, 2), 0.0, seed=0)


def test_gen_instance_is_consistent():
    tensor, factors = gen_instance(4, 0.3, seed=5)
    assert tensor.size == omega_size((4, 4, 4), 0.3)
    assert residual(tensor, factors.a, factors.b, factors.c) <= 1e-15


def test_symmetric_instance():
    tensor, _ = gen_instance(3, 0.3, seed=5, symmetric=True)
    assert tensor.symmetric


class TestStrongInstance:
    def test_pairs_span_all_rows_and_columns(self):
        pairs = strong_pairs(5, np.random.default_rng(0))
        assert len(pairs) == 2 * 5 - 1
        assert {i for i, _ in pairs} == set(range(5))
        assert {j for _, j in pairs} == set(range(5))

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_strongly_completable(self, seed):
        report = check_tensor(gen_strong_instance(5, seed))
        assert report.nullspace_dim == 1
        assert report.connected
        assert report.strong

    def test_uses_given_factors(self):
        factors = gen_rank1(4, 4, 4, seed=9)
        tensor = gen_strong_instance(4, seed=9, factors=factors)
        assert residual(tensor, factors.a, factors.b, factors.c) <= 1e-15

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            gen_strong_instance(1, seed=0)
