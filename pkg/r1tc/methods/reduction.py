"""2x2-minor constraint system in the partial matrix entries X_ij.

For a rank-1 tensor A = a (x) b (x) c, every slice B_k = (A_ijk) restricted to
its observed (i, j) pairs is proportional to X = a b^T. Each pair of observed
entries (s, t) in the same slice gives a homogeneous equation

    A_s * X_t - A_t * X_s = 0

and the solution space of the stacked system decides strong completability.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy import linalg

from r1tc.errors import CompletionDeferred
from r1tc.tensors.models import AnchorIndex, Index3, PartialTensor
from r1tc.tensors.tensor_model import observed_pairs, resolve_anchor, slice_groups

logger = logging.getLogger(__name__)

Pair = tuple[int, int]


@dataclass(frozen=True)
class MinorConstraint:
    """coeff_first * X[second] + coeff_second * X[first] = 0 for two pairs of slice k."""
    k: int
    first: Pair
    second: Pair
    coeff_first: float  # A[first, k], multiplies X[second]
    coeff_second: float  # -A[second, k], multiplies X[first]


@dataclass(frozen=True)
class ConstraintSystem:
    """Stacked minor equations over the variables X_ij, (i, j) in the observed pair set."""
    variables: tuple[Pair, ...]
    rows: tuple[MinorConstraint, ...]
    matrix: np.ndarray  # (len(rows), len(variables))
    symmetric: bool = False
    index: dict[Pair, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.index:
            object.__setattr__(self, "index", {p: n for n, p in enumerate(self.variables)})

    def variable(self, pair: Pair) -> int:
        """Column of X_ij; symmetric systems identify (i, j) with (j, i)."""
        return self.index[canonical_pair(pair) if self.symmetric else pair]

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.variables))


@dataclass(frozen=True)
class StrongData:
    """Spanning vector of a one-dimensional minor nullspace, scaled to 1 at the anchor pair."""
    w: dict[Pair, float]
    anchor: AnchorIndex
    system: ConstraintSystem
    nullspace_dim: int = 1


def canonical_pair(pair: Pair) -> Pair:
    i, j = pair
    return (i, j) if i <= j else (j, i)


def build_minors(tensor: PartialTensor) -> ConstraintSystem:
    """All C(m_k, 2) slice-pair minors, s < t in lexicographic member order."""
    variables = tuple(observed_pairs(tensor))
    return _assemble(tensor, variables, symmetric=False)


def build_minors_symmetric(tensor: PartialTensor) -> ConstraintSystem:
    """Minor system over unordered pairs V_ij = V_ji of a symmetric tensor.

    Slices are grouped over the listed entries only; permuted copies added by
    the closure enter residual checks, not minors.
    """
    if not tensor.symmetric:
        raise ValueError("build_minors_symmetric requires a symmetric tensor")
    listed = tensor.listed_tensor()
    variables = tuple(sorted({canonical_pair(p) for p in observed_pairs(listed)}))
    return _assemble(listed, variables, symmetric=True)


def constraint_system(tensor: PartialTensor) -> ConstraintSystem:
    """Minor system matching the tensor's symmetry flag."""
    return build_minors_symmetric(tensor) if tensor.symmetric else build_minors(tensor)


def normalized_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale nonzero rows to unit Euclidean norm."""
    norms = np.linalg.norm(matrix, axis=1)
    scale = np.where(norms > 0.0, norms, 1.0)
    return matrix / scale[:, None]


def nullspace(system: ConstraintSystem, tol: float = 1e-8) -> tuple[np.ndarray, int]:
    """Numerical nullspace of the normalized minor matrix.

    Singular values at or below tol * max(sigma_1, 1) count as zero.

    Returns:
        (basis, dim) with the orthonormal basis vectors as columns
    """
    num_vars = len(system.variables)
    if not system.rows:
        return np.eye(num_vars), num_vars

    _, sigma, vt = linalg.svd(normalized_rows(system.matrix), full_matrices=True)
    cutoff = tol * max(float(sigma[0]) if sigma.size else 0.0, 1.0)
    rank = int(np.sum(sigma > cutoff))
    basis = vt[rank:].T
    logger.debug(f"Minor system {system.shape}: rank {rank}, nullspace dim {num_vars - rank}")
    return basis, num_vars - rank


def strong_data(
    tensor: PartialTensor, tol: float = 1e-8, anchor: Optional[Index3] = None
) -> StrongData:
    """Scale the spanning vector of a one-dimensional nullspace to 1 at the anchor pair.

    Raises:
        CompletionDeferred: "not_strong" (detail = nullspace dim) or "anchor_zero"
    """
    anchor_entry = resolve_anchor(tensor, anchor)
    system = constraint_system(tensor)
    basis, dim = nullspace(system, tol)
    if dim != 1:
        raise CompletionDeferred("not_strong", f"minor nullspace has dimension {dim}", detail=dim)

    vector = basis[:, 0]
    pivot = vector[system.variable(anchor_entry.pair)]
    if abs(pivot) <= tol * float(np.max(np.abs(vector))):
        raise CompletionDeferred("anchor_zero", "spanning vector vanishes at the anchor pair", detail=1)

    scaled = vector / pivot
    w = {pair: float(scaled[n]) for n, pair in enumerate(system.variables)}
    return StrongData(w=w, anchor=anchor_entry, system=system)


def _assemble(tensor: PartialTensor, variables: tuple[Pair, ...], symmetric: bool) -> ConstraintSystem:
    index = {p: n for n, p in enumerate(variables)}
    column = (lambda p: index[canonical_pair(p)]) if symmetric else (lambda p: index[p])

    rows: list[MinorConstraint] = []
    for group in slice_groups(tensor):
        for first, second in combinations(group.members, 2):
            rows.append(MinorConstraint(
                k=group.k,
                first=first,
                second=second,
                coeff_first=tensor.entries[(*first, group.k)],
                coeff_second=-tensor.entries[(*second, group.k)],
            ))

    matrix = np.zeros((len(rows), len(variables)))
    for r, row in enumerate(rows):
        matrix[r, column(row.second)] += row.coeff_first
        matrix[r, column(row.first)] += row.coeff_second

    return ConstraintSystem(variables, tuple(rows), matrix, symmetric=symmetric, index=index)
