"""Order-4 tensors through a cubic reshape.

A_ijkl = B_ij[m] with the last two modes flattened into m. A cubic completion
B = a (x) b (x) c_hat gives A = a (x) b (x) c (x) d when c_hat, unfolded to an
n3 x n4 matrix, is rank-1 (c d^T).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np
from scipy import linalg

from r1tc.config import DEFAULT_CONFIG, SolverConfig
from r1tc.errors import CompletionDeferred, R1tcError
from r1tc.methods.strong_completion import complete_strong
from r1tc.tensors.models import (
    STATUS_COMPLETED,
    STATUS_INCONCLUSIVE,
    CompletionResult,
    HigherTensor,
    PartialTensor,
)

logger = logging.getLogger(__name__)

FILL_ZERO = "zero_fill"
FILL_COMPLETE = "complete"


@dataclass(frozen=True)
class NotRank1:
    """The third factor does not unfold to a rank-1 matrix."""
    reason: str
    matrix: Optional[np.ndarray] = None  # zero-filled unfolding
    singular_values: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        data: dict[str, Any] = {"reason": self.reason}
        if self.singular_values is not None:
            data["singular_values"] = [float(s) for s in self.singular_values]
        return data


@dataclass(frozen=True)
class Order4Result:
    """Completion of an order-4 tensor; factors are None unless status is completed."""
    status: str
    cubic: CompletionResult
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    residual: Optional[float] = None
    message: str = ""
    failure: Optional[NotRank1] = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    def to_dict(self) -> dict:
        def to_list(vector):
            return None if vector is None else [float(x) for x in vector]

        data: dict[str, Any] = {
            "status": self.status,
            "method": self.cubic.method,
            "a": to_list(self.a),
            "b": to_list(self.b),
            "c": to_list(self.c),
            "d": to_list(self.d),
            "residual": self.residual,
            "cubic": self.cubic.to_dict(),
        }
        if self.message:
            data["message"] = self.message
        if self.failure is not None:
            data["not_rank1"] = self.failure.to_dict()
        return data


def flat_index(k: int, l: int, n3: int, n4: int, ordering: str) -> int:
    """0-based third cubic index of the mode pair (k, l)."""
    if ordering == "row_major":
        return k * n4 + l
    if ordering == "col_major":
        return l * n3 + k
    raise ValueError(f"Unknown ordering: {ordering}")


def reshape_to_cubic(tensor: HigherTensor) -> PartialTensor:
    """Flatten modes 3 and 4 into one mode of length n3 * n4."""
    n1, n2, n3, n4 = tensor.dims
    entries = {
        (i, j, flat_index(k, l, n3, n4, tensor.ordering)): value
        for (i, j, k, l), value in tensor.entries.items()
    }
    return PartialTensor((n1, n2, n3 * n4), entries)


def unfold(c_hat: np.ndarray, n3: int, n4: int, ordering: str) -> np.ndarray:
    """n3 x n4 matrix C with C[k, l] = c_hat[flat_index(k, l)]."""
    c_hat = np.asarray(c_hat, dtype=float)
    if c_hat.size != n3 * n4:
        raise ValueError(f"third factor has length {c_hat.size}, expected {n3 * n4}")
    matrix = np.empty((n3, n4))
    for k in range(n3):
        for l in range(n4):
            matrix[k, l] = c_hat[flat_index(k, l, n3, n4, ordering)]
    return matrix


def unfold_third_factor(
    c_hat: np.ndarray,
    determined: Optional[np.ndarray],
    n3: int,
    n4: int,
    ordering: str = "col_major",
    policy: str = FILL_COMPLETE,
    rank_tol: float = 1e-6,
    tol: float = 1e-6,
) -> Union[tuple[np.ndarray, np.ndarray], NotRank1]:
    """Factor the unfolded third factor as c d^T.

    Args:
        c_hat: Third cubic factor, length n3 * n4
        determined: Entries pinned by data (None: all of them)
        policy: "zero_fill" sets free entries to 0 and tests the SVD;
            "complete" rank-1 completes the determined entries

    Returns:
        (c, d) with d = 1 at the column of the largest determined |C| entry, or NotRank1
    """
    matrix = unfold(c_hat, n3, n4, ordering)
    mask = np.ones((n3, n4), dtype=bool) if determined is None else unfold(determined, n3, n4, ordering) > 0.5
    if not mask.any():
        return NotRank1("no determined entries")

    if policy == FILL_ZERO:
        return _zero_fill(np.where(mask, matrix, 0.0), rank_tol)
    if policy == FILL_COMPLETE:
        return _complete_matrix(matrix, mask, tol)
    raise ValueError(f"Unknown fill policy: {policy}")


def complete_order4(
    tensor: HigherTensor,
    config: Optional[SolverConfig] = None,
    method: str = "auto",
    completer: Optional[Callable[[PartialTensor], CompletionResult]] = None,
) -> Order4Result:
    """Reshape, complete the cubic tensor, then unfold its third factor.

    Args:
        tensor: Order-4 partial tensor
        config: Solver configuration (fill policy and tolerances)
        method: Cubic completion method
        completer: Cubic completion callable; defaults to the pipeline with method
    """
    cfg: SolverConfig = {**DEFAULT_CONFIG, **(config or {})}
    if completer is None:
        from r1tc.pipeline import complete_tensor

        def completer(cubic_tensor: PartialTensor) -> CompletionResult:
            return complete_tensor(cubic_tensor, method=method, config=cfg)

    cubic_tensor = reshape_to_cubic(tensor)
    cubic = completer(cubic_tensor)
    if not cubic.completed:
        return Order4Result(status=cubic.status, cubic=cubic, message=cubic.message)

    n3, n4 = tensor.dims[2], tensor.dims[3]
    unfolded = unfold_third_factor(
        cubic.c,
        cubic.c_determined,
        n3,
        n4,
        ordering=tensor.ordering,
        policy=cfg["fill"],
        rank_tol=cfg["rank_tol"],
        tol=cfg["tol"],
    )
    if isinstance(unfolded, NotRank1):
        logger.info(f"Third factor is not rank-1 after reshaping: {unfolded.reason}")
        return Order4Result(
            status=STATUS_INCONCLUSIVE,
            cubic=cubic,
            message=f"third factor cannot be reshaped to a rank-1 matrix ({unfolded.reason})",
            failure=unfolded,
        )

    c, d = unfolded
    res = order4_residual(tensor, cubic.a, cubic.b, c, d)
    if res > cfg["tol"]:
        return Order4Result(
            status=STATUS_INCONCLUSIVE,
            cubic=cubic,
            message=f"order-4 residual {res:.3g} above tolerance",
            failure=NotRank1("residual"),
        )
    logger.info(f"✅ Order-4 completion via {cubic.method} (residual {res:.2e})")
    return Order4Result(status=STATUS_COMPLETED, cubic=cubic, a=cubic.a, b=cubic.b, c=c, d=d, residual=res)


def order4_residual(tensor: HigherTensor, a, b, c, d) -> float:
    """Max over observed entries of |A_ijkl - a_i b_j c_k d_l|."""
    if not tensor.entries:
        return 0.0
    idx = np.array(tensor.omega, dtype=int)
    values = np.array([tensor.entries[key] for key in tensor.omega])
    a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
    model = a[idx[:, 0]] * b[idx[:, 1]] * c[idx[:, 2]] * d[idx[:, 3]]
    return float(np.max(np.abs(values - model)))


# ─── Unfolding policies ─────────────────────────────────────────────


def _zero_fill(matrix: np.ndarray, rank_tol: float) -> Union[tuple[np.ndarray, np.ndarray], NotRank1]:
    u, sigma, vt = linalg.svd(matrix)
    if sigma[0] == 0.0:
        return np.zeros(matrix.shape[0]), np.zeros(matrix.shape[1])
    if sigma.size > 1 and sigma[1] > rank_tol * sigma[0]:
        return NotRank1("zero-filled unfolding has rank above one", matrix=matrix, singular_values=sigma)

    column = int(np.unravel_index(np.argmax(np.abs(matrix)), matrix.shape)[1])
    d = vt[0] / vt[0, column]
    c = sigma[0] * vt[0, column] * u[:, 0]
    return c, d


def _complete_matrix(matrix: np.ndarray, mask: np.ndarray, tol: float) -> Union[tuple[np.ndarray, np.ndarray], NotRank1]:
    n3, n4 = matrix.shape
    entries = {(k, l, 0): float(matrix[k, l]) for k, l in zip(*np.nonzero(mask))}
    if all(value == 0.0 for value in entries.values()):
        return np.zeros(n3), np.zeros(n4)

    try:
        result = complete_strong(PartialTensor((n3, n4, 1), entries), tol=tol)
    except CompletionDeferred as e:
        return NotRank1(f"determined entries do not fix a rank-1 matrix ({e.reason})", matrix=np.where(mask, matrix, 0.0))
    except R1tcError as e:
        return NotRank1(str(e))

    if not result.completed:
        return NotRank1("determined entries admit no rank-1 matrix", matrix=np.where(mask, matrix, 0.0))
    scale = float(result.c[0])
    return result.a * scale, result.b
