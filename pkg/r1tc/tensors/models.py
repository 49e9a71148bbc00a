"""Data models for partially observed tensors and completion results."""

import math
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Any, Optional

import numpy as np

Index3 = tuple[int, int, int]
Index4 = tuple[int, int, int, int]

# Relative tolerance for value agreement between permuted entries of a symmetric tensor
SYMMETRY_RTOL = 1e-12

STATUS_COMPLETED = "completed"
STATUS_NO_COMPLETION = "no_completion"
STATUS_INCONCLUSIVE = "inconclusive"


def values_agree(x: float, y: float) -> bool:
    """Check two entry values for equality up to SYMMETRY_RTOL."""
    return abs(x - y) <= SYMMETRY_RTOL * max(1.0, abs(x), abs(y))


@dataclass(frozen=True)
class PartialTensor:
    """Cubic tensor with a sparse set of observed entries.

    Indices are 0-based; conversion to the 1-based file convention happens in tensor_io.
    A symmetric tensor keeps its permutation-closed entry map in `entries` and the
    indices actually supplied in `listed`; minor equations are built from the
    listed indices, residuals are measured over every entry.
    """
    dims: tuple[int, int, int]
    entries: dict[Index3, float] = field(default_factory=dict)
    symmetric: bool = False
    listed: frozenset[Index3] = frozenset()

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.dims)
        if len(dims) != 3 or any(n < 1 for n in dims):
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)

        entries: dict[Index3, float] = {}
        for index, value in self.entries.items():
            key = tuple(int(x) for x in index)
            if len(key) != 3 or any(not 0 <= x < n for x, n in zip(key, dims)):
                raise ValueError(f"index {index} out of range for dims {dims}")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at {index}")
            entries[key] = value
        object.__setattr__(self, "entries", entries)

        listed = frozenset(tuple(int(x) for x in index) for index in self.listed) or frozenset(entries)
        if not listed <= entries.keys():
            extra = sorted(listed - entries.keys())[0]
            raise ValueError(f"listed index {extra} is not an entry")
        object.__setattr__(self, "listed", listed)

        if self.symmetric:
            if len(set(dims)) != 1:
                raise ValueError(f"symmetric tensor needs equal dims, got {dims}")
            for index, value in entries.items():
                for perm in set(permutations(index)):
                    if perm not in entries:
                        raise ValueError(f"symmetric tensor missing permuted entry {perm} of {index}")
                    if not values_agree(entries[perm], value):
                        raise ValueError(f"symmetric entries {index} and {perm} disagree")

    @property
    def omega(self) -> list[Index3]:
        """Observed indices in lexicographic order."""
        return sorted(self.entries)

    @property
    def listed_omega(self) -> list[Index3]:
        """Supplied indices in lexicographic order (equal to omega unless closed by symmetry)."""
        return sorted(self.listed)

    def listed_tensor(self) -> "PartialTensor":
        """Nonsymmetric view holding only the supplied entries."""
        return PartialTensor(self.dims, {index: self.entries[index] for index in self.listed})

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def density(self) -> float:
        n1, n2, n3 = self.dims
        return self.size / (n1 * n2 * n3)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (i, j, k, values) arrays over Omega in lexicographic order."""
        omega = self.omega
        if not omega:
            empty = np.zeros(0, dtype=int)
            return empty, empty, empty, np.zeros(0)
        idx = np.array(omega, dtype=int)
        values = np.array([self.entries[key] for key in omega])
        return idx[:, 0], idx[:, 1], idx[:, 2], values

    def scaled(self, factor: float) -> "PartialTensor":
        return PartialTensor(
            self.dims, {k: v * factor for k, v in self.entries.items()}, self.symmetric, self.listed
        )


@dataclass(frozen=True)
class SliceGroup:
    """Observed (i, j) pairs sharing the third index k."""
    k: int
    members: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AnchorIndex:
    """Observed entry of largest magnitude; fixes the normalization a_i = b_j = 1."""
    i: int
    j: int
    k: int
    value: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)

    @property
    def index(self) -> Index3:
        return (self.i, self.j, self.k)

    def one_based(self) -> Index3:
        return (self.i + 1, self.j + 1, self.k + 1)


@dataclass(frozen=True)
class HigherTensor:
    """Order-4 tensor with sparse observations; the last two modes are flattened on reshape."""
    dims: tuple[int, int, int, int]
    entries: dict[Index4, float] = field(default_factory=dict)
    ordering: str = "col_major"  # "col_major" or "row_major"

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.dims)
        if len(dims) != 4 or any(n < 1 for n in dims):
            raise ValueError(f"dims must be four positive integers, got {self.dims}")
        if self.ordering not in ("col_major", "row_major"):
            raise ValueError(f"Unknown ordering: {self.ordering}")
        object.__setattr__(self, "dims", dims)
        entries: dict[Index4, float] = {}
        for index, value in self.entries.items():
            key = tuple(int(x) for x in index)
            if len(key) != 4 or any(not 0 <= x < n for x, n in zip(key, dims)):
                raise ValueError(f"index {index} out of range for dims {dims}")
            entries[key] = float(value)
        object.__setattr__(self, "entries", entries)

    @property
    def omega(self) -> list[Index4]:
        return sorted(self.entries)


def _to_list(vector: Optional[np.ndarray]) -> Optional[list[float]]:
    return None if vector is None else [float(x) for x in np.asarray(vector)]


@dataclass(frozen=True)
class CompletionResult:
    """Outcome of a completion method."""
    status: str  # completed, no_completion, inconclusive
    method: str  # iterative, nuclear, moment
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    residual: Optional[float] = None
    symmetric: bool = False
    v: Optional[np.ndarray] = None
    tau: Optional[float] = None
    message: str = ""
    level: Optional[int] = None  # moment level that produced the result
    c_determined: Optional[np.ndarray] = None  # c_k pinned by observed data
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    def with_diagnostics(self, **extra: Any) -> "CompletionResult":
        """Return a copy with extra diagnostics merged in."""
        merged = {**self.diagnostics, **extra}
        return replace(self, diagnostics=merged)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        data: dict[str, Any] = {
            "status": self.status,
            "method": self.method,
            "a": _to_list(self.a),
            "b": _to_list(self.b),
            "c": _to_list(self.c),
            "residual": self.residual,
        }
        if self.symmetric:
            data["v"] = _to_list(self.v)
            data["tau"] = self.tau
        if self.level is not None:
            data["level"] = self.level
        if self.message:
            data["message"] = self.message
        return data
