"""Shared fixtures: small tensors with known completions."""

from pathlib import Path

import pytest

from r1tc.tensors.models import HigherTensor, PartialTensor
from r1tc.tensors.tensor_io import load_tensor_file

DATA_DIR = Path(__file__).parent / "data"


def one_based(entries: dict) -> dict:
    """Shift 1-based index keys to 0-based."""
    return {tuple(x - 1 for x in index): value for index, value in entries.items()}


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def strong_tensor() -> PartialTensor:
    """Strongly completable 3x3x3 tensor with unit-magnitude entries."""
    return load_tensor_file(DATA_DIR / "strong_3x3x3.txt")


@pytest.fixture
def nuclear_tensor() -> PartialTensor:
    """4x4x4 tensor whose nuclear relaxation is rank-1."""
    entries = {
        (1, 2, 1): 2, (1, 3, 1): 4, (4, 4, 1): 1, (1, 1, 2): 4,
        (2, 3, 2): 4, (3, 2, 2): 2, (4, 1, 2): 2, (3, 4, 3): 1,
        (4, 1, 3): 1, (4, 2, 3): 1, (4, 4, 3): 1, (1, 1, 4): 2,
    }
    return PartialTensor((4, 4, 4), one_based(entries))


@pytest.fixture
def weak_tensor() -> PartialTensor:
    """Completable tensor with a two-dimensional minor nullspace."""
    return load_tensor_file(DATA_DIR / "weak_3x3x3.txt")


@pytest.fixture
def infeasible_tensor() -> PartialTensor:
    """2x2x1 tensor whose only slice is a rank-2 matrix."""
    return load_tensor_file(DATA_DIR / "infeasible_2x2x1.txt")


@pytest.fixture
def symmetric_tensor() -> PartialTensor:
    """Symmetric 5x5x5 tensor of v = (1, 3, 4, 5, 2) where the trace relaxation fails."""
    return load_tensor_file(DATA_DIR / "symmetric_5x5x5.txt")


@pytest.fixture
def moment_tensor() -> PartialTensor:
    """5x5x5 tensor whose nuclear relaxation has rank 2; a_3, c_3 and c_5 meet no data."""
    entries = {
        (1, 1, 1): 3, (1, 5, 1): 1, (2, 4, 1): 4, (4, 2, 1): 1, (4, 5, 1): 1,
        (5, 2, 1): 1, (5, 2, 2): 1, (5, 4, 2): 2, (2, 3, 4): 4, (4, 1, 4): 6,
    }
    return PartialTensor((5, 5, 5), one_based(entries))


@pytest.fixture
def order4_tensor() -> HigherTensor:
    return load_tensor_file(DATA_DIR / "order4_2x2x2x2.txt")


@pytest.fixture
def order4_weak_tensor() -> HigherTensor:
    """3x3x3x3 tensor whose reshaped third factor has two undetermined entries."""
    entries = {
        (1, 3, 1, 1): 6, (3, 1, 1, 1): 24, (3, 2, 1, 1): 12, (3, 3, 1, 1): 12, (2, 3, 2, 1): 4,
        (2, 2, 3, 1): 8, (3, 2, 3, 1): 8, (3, 3, 3, 1): 8, (2, 1, 2, 2): 4, (2, 3, 2, 2): 2,
        (3, 1, 2, 2): 4, (2, 3, 1, 3): 18, (1, 2, 2, 3): 3, (2, 2, 3, 3): 12, (2, 3, 3, 3): 12,
    }
    return HigherTensor((3, 3, 3, 3), one_based(entries))
