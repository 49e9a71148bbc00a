"""SDP problem and solution containers.

Problems are stated over a free vector y:

    minimize    objective . y
    subject to  C_b + sum_i y_i A_{b,i}  is PSD   for every block b
                E y = d

Block coefficients are kept flat, one row per variable holding the row-major
entries of A_{b,i}; the flat matrix may be a dense array or a scipy sparse
matrix (moment matrices are 0/1 patterns).
"""

from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np
from scipy import sparse

from r1tc.errors import SdpDimensionError

STATUS_OPTIMAL = "optimal"
STATUS_PRIMAL_INFEASIBLE = "primal_infeasible"
STATUS_DUAL_INFEASIBLE = "dual_infeasible_or_unbounded"
STATUS_MAX_ITERATIONS = "max_iterations"

# Absolute tolerance for the symmetry check of block matrices
SYMMETRY_ATOL = 1e-12

FlatCoefficients = Union[np.ndarray, sparse.spmatrix]


@dataclass(frozen=True)
class LmiBlock:
    """Affine symmetric matrix map y -> constant + sum_i y_i A_i."""
    constant: np.ndarray  # (s, s)
    coefficients: FlatCoefficients  # (m, s*s), row i = A_i.ravel()

    def __post_init__(self) -> None:
        constant = np.atleast_2d(np.asarray(self.constant, dtype=float))
        object.__setattr__(self, "constant", constant)
        coefficients = self.coefficients
        if sparse.issparse(coefficients):
            coefficients = sparse.csr_matrix(coefficients, dtype=float)
        else:
            coefficients = np.asarray(coefficients, dtype=float)
            if coefficients.ndim == 3:
                coefficients = coefficients.reshape(coefficients.shape[0], -1)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_matrices(cls, constant, matrices) -> "LmiBlock":
        """Build from a constant and a stack of m symmetric (s, s) matrices."""
        stack = np.asarray(matrices, dtype=float)
        return cls(constant, stack.reshape(stack.shape[0], -1))

    @property
    def size(self) -> int:
        return self.constant.shape[0]

    @property
    def num_vars(self) -> int:
        return self.coefficients.shape[0]

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """C + sum_i y_i A_i."""
        flat = np.asarray(self.coefficients.T @ y).ravel()
        return self.constant + flat.reshape(self.size, self.size)

    def coefficient(self, i: int) -> np.ndarray:
        row = self.coefficients[i]
        row = row.toarray() if sparse.issparse(row) else row
        return np.asarray(row, dtype=float).reshape(self.size, self.size)


@dataclass(frozen=True)
class SdpProblem:
    """Block LMI problem with affine equalities."""
    objective: np.ndarray  # (m,)
    blocks: tuple[LmiBlock, ...] = ()
    eq_matrix: Optional[np.ndarray] = None  # (p, m)
    eq_rhs: Optional[np.ndarray] = None  # (p,)

    def __post_init__(self) -> None:
        objective = np.asarray(self.objective, dtype=float).ravel()
        m = objective.size
        eq_matrix = np.zeros((0, m)) if self.eq_matrix is None else np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        if eq_matrix.size == 0:
            eq_matrix = np.zeros((0, m))
        eq_rhs = np.zeros(0) if self.eq_rhs is None else np.asarray(self.eq_rhs, dtype=float).ravel()
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "eq_matrix", eq_matrix)
        object.__setattr__(self, "eq_rhs", eq_rhs)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        self.validate()

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_equalities(self) -> int:
        return self.eq_matrix.shape[0]

    def validate(self) -> None:
        """Check shapes and symmetry.

        Raises:
            SdpDimensionError: inconsistent dimensions or nonsymmetric block data
        """
        m = self.num_vars
        if m == 0 and not self.blocks:
            raise SdpDimensionError("problem has neither variables nor blocks")
        if self.eq_matrix.shape[1] != m:
            raise SdpDimensionError(f"equality matrix has {self.eq_matrix.shape[1]} columns, expected {m}")
        if self.eq_rhs.size != self.eq_matrix.shape[0]:
            raise SdpDimensionError(
                f"equality rhs has length {self.eq_rhs.size}, expected {self.eq_matrix.shape[0]}"
            )
        for number, block in enumerate(self.blocks):
            s = block.size
            if block.constant.shape != (s, s):
                raise SdpDimensionError(f"block {number}: constant is not square")
            if block.coefficients.shape != (m, s * s):
                raise SdpDimensionError(
                    f"block {number}: coefficients have shape {block.coefficients.shape}, expected {(m, s * s)}"
                )
            if np.max(np.abs(block.constant - block.constant.T), initial=0.0) > SYMMETRY_ATOL:
                raise SdpDimensionError(f"block {number}: constant is not symmetric")
            if m == 0 or s == 0:
                continue
            transposed = np.arange(s * s).reshape(s, s).T.ravel()
            gap = block.coefficients - block.coefficients[:, transposed]
            gap = abs(gap).max() if sparse.issparse(gap) else np.max(np.abs(gap))
            if gap > SYMMETRY_ATOL:
                raise SdpDimensionError(f"block {number}: coefficient matrices are not symmetric")

    def block_values(self, y: np.ndarray) -> list[np.ndarray]:
        return [block.evaluate(y) for block in self.blocks]


@dataclass(frozen=True)
class SdpSolution:
    """Solver output; y and block_values are None unless a primal point was produced."""
    status: str
    y: Optional[np.ndarray] = None
    block_values: Optional[list[np.ndarray]] = None
    primal_obj: float = float("nan")
    dual_obj: float = float("nan")
    kkt_residuals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    certificate: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL
