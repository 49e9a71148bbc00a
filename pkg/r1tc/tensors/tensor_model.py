"""Anchor selection, slice grouping and residual evaluation for partial tensors."""

from collections import defaultdict
from itertools import permutations
from typing import Optional

import numpy as np

from r1tc.errors import EmptyTensorError, ZeroTensorError
from r1tc.tensors.models import (
    STATUS_COMPLETED,
    AnchorIndex,
    CompletionResult,
    Index3,
    PartialTensor,
    SliceGroup,
    values_agree,
)


def anchor_index(tensor: PartialTensor) -> AnchorIndex:
    """Pick the observed entry of largest magnitude.

    Ties go to the lexicographically smallest (i, j, k). Symmetric tensors
    choose among their listed indices so the anchor pair is a minor variable.

    Raises:
        EmptyTensorError: no observed entries
        ZeroTensorError: every observed entry is zero
    """
    if not tensor.entries:
        raise EmptyTensorError()

    best: Optional[Index3] = None
    best_abs = -1.0
    for index in tensor.listed_omega:
        magnitude = abs(tensor.entries[index])
        if magnitude > best_abs:
            best, best_abs = index, magnitude

    if best_abs == 0.0:
        raise ZeroTensorError()

    i, j, k = best
    return AnchorIndex(i, j, k, tensor.entries[best])


def resolve_anchor(tensor: PartialTensor, anchor: Optional[Index3] = None) -> AnchorIndex:
    """Return the default anchor, or validate an explicit override.

    Args:
        tensor: Partial tensor
        anchor: Optional 0-based index of an observed nonzero entry (a listed
            one for symmetric tensors)
    """
    if anchor is None:
        return anchor_index(tensor)
    key = tuple(int(x) for x in anchor)
    if key not in tensor.listed:
        raise ValueError(f"anchor {tuple(x + 1 for x in key)} is not an observed entry")
    if tensor.entries[key] == 0.0:
        raise ValueError(f"anchor {tuple(x + 1 for x in key)} has value zero")
    return AnchorIndex(key[0], key[1], key[2], tensor.entries[key])


def slice_groups(tensor: PartialTensor) -> list[SliceGroup]:
    """Group observed entries by third index; members sorted lexicographically."""
    groups: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for i, j, k in tensor.omega:
        groups[k].append((i, j))
    return [SliceGroup(k, tuple(sorted(members))) for k, members in sorted(groups.items())]


def observed_pairs(tensor: PartialTensor) -> list[tuple[int, int]]:
    """Distinct (i, j) pairs of observed entries, sorted."""
    return sorted({(i, j) for i, j, _ in tensor.entries})


def residual(tensor: PartialTensor, a, b, c) -> float:
    """Max over observed entries of |A_ijk - a_i b_j c_k|."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    n1, n2, n3 = tensor.dims
    if a.shape != (n1,) or b.shape != (n2,) or c.shape != (n3,):
        raise ValueError(
            f"factor lengths ({a.size}, {b.size}, {c.size}) do not match dims {tensor.dims}"
        )
    i, j, k, values = tensor.index_arrays()
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - a[i] * b[j] * c[k])))


def zero_completion(tensor: PartialTensor, method: str) -> CompletionResult:
    """Completion of an all-zero observation set by zero factors."""
    n1, n2, n3 = tensor.dims
    zeros = (np.zeros(n1), np.zeros(n2), np.zeros(n3))
    return CompletionResult(
        status=STATUS_COMPLETED,
        method=method,
        a=zeros[0],
        b=zeros[1],
        c=zeros[2],
        residual=0.0,
        symmetric=tensor.symmetric,
        v=np.zeros(n1) if tensor.symmetric else None,
        tau=0.0 if tensor.symmetric else None,
        message="all observed entries are zero",
        c_determined=np.zeros(n3, dtype=bool),
    )


def symmetric_closure(entries: dict[Index3, float]) -> dict[Index3, float]:
    """Close an entry map under index permutations.

    Raises:
        ValueError: a permuted index is already present with a different value
    """
    closed: dict[Index3, float] = {}
    for index, value in entries.items():
        for perm in set(permutations(index)):
            if perm in closed and not values_agree(closed[perm], value):
                raise ValueError(
                    f"symmetry violation: {tuple(x + 1 for x in perm)} has values "
                    f"{closed[perm]} and {value}"
                )
            closed[perm] = value
    return closed
