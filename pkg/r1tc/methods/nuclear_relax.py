"""Nuclear-norm relaxation of the rank-1 partial matrix recovery problem.

Minimizing ||X||_* subject to the minor equations and X_anchor = 1 is the SDP

    min  Trace(W1) + Trace(W2)   s.t.  [[W1, X], [X^T, W2]] PSD

(symmetric tensors: min Trace(V) s.t. V PSD). A rank-1 optimum gives the
factors directly; otherwise the spectrum is reported as a rank failure.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import linalg

from r1tc.errors import CompletionDeferred, RankFailure
from r1tc.methods.reduction import ConstraintSystem, build_minors, build_minors_symmetric, canonical_pair, normalized_rows
from r1tc.methods.strong_completion import factor_result, symmetric_result
from r1tc.sdp.dump import write_dump
from r1tc.sdp.models import STATUS_PRIMAL_INFEASIBLE, LmiBlock, SdpProblem, SdpSolution
from r1tc.sdp.solver import solve as sdp_solve
from r1tc.tensors.models import CompletionResult, Index3, PartialTensor
from r1tc.tensors.tensor_model import resolve_anchor

logger = logging.getLogger(__name__)

METHOD = "nuclear"


@dataclass(frozen=True)
class NuclearOutcome:
    """Optimal matrix of the relaxation with its spectrum."""
    X: np.ndarray  # n1 x n2 (symmetric: V, n x n)
    singular_values: np.ndarray  # nonincreasing (symmetric: eigenvalues)
    numerical_rank: int
    factors: Optional[tuple[np.ndarray, ...]] = None  # (a, b) or (v,)
    symmetric: bool = False
    sdp: Optional[SdpSolution] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "numerical_rank": self.numerical_rank,
            "spectrum": [float(x) for x in self.singular_values],
            "matrix": [[float(x) for x in row] for row in self.X],
        }


def numerical_rank(spectrum: np.ndarray, tol_rank: float) -> int:
    """Count of values above tol_rank times the largest one."""
    if spectrum.size == 0 or spectrum[0] <= 0.0:
        return 0
    return int(np.sum(spectrum > tol_rank * spectrum[0]))


def build_nuclear_sdp(tensor: PartialTensor, anchor: Optional[Index3] = None) -> SdpProblem:
    """SDP of the nuclear-norm relaxation (trace minimization for symmetric tensors)."""
    anchor_entry = resolve_anchor(tensor, anchor)
    n1, n2, _ = tensor.dims

    if tensor.symmetric:
        size = n1
        system = build_minors_symmetric(tensor)
        position = lambda pair: canonical_pair(pair)  # noqa: E731
    else:
        size = n1 + n2
        system = build_minors(tensor)
        position = lambda pair: (pair[0], n1 + pair[1])  # noqa: E731

    variables, coefficients = _symmetric_matrix_variables(size)
    index = {pair: n for n, pair in enumerate(variables)}
    objective = np.array([1.0 if p == q else 0.0 for p, q in variables])

    rows, rhs = _minor_equalities(system, index, position)
    anchor_row = np.zeros(len(variables))
    anchor_row[index[position(anchor_entry.pair)]] = 1.0
    rows.append(anchor_row)
    rhs.append(1.0)

    return SdpProblem(
        objective=objective,
        blocks=(LmiBlock(np.zeros((size, size)), coefficients),),
        eq_matrix=np.array(rows),
        eq_rhs=np.array(rhs),
    )


def solve_nuclear(
    tensor: PartialTensor,
    tol_rank: float = 1e-6,
    tol: float = 1e-6,
    anchor: Optional[Index3] = None,
    sdp_options: Optional[dict] = None,
    dump_dir: Optional[Path] = None,
) -> CompletionResult:
    """Complete via the nuclear-norm SDP when its optimum has rank 1.

    Raises:
        RankFailure: optimum of numerical rank above 1 (carries the NuclearOutcome)
        CompletionDeferred: SDP infeasible or not solved, or back-solve rejected
    """
    if tensor.symmetric:
        return solve_nuclear_symmetric(tensor, tol_rank, tol, anchor, sdp_options, dump_dir)

    anchor_entry = resolve_anchor(tensor, anchor)
    solution = _solve_relaxation(tensor, anchor, sdp_options, dump_dir)
    n1 = tensor.dims[0]
    X = solution.block_values[0][:n1, n1:]

    u, sigma, vt = linalg.svd(X)
    rank = numerical_rank(sigma, tol_rank)
    logger.debug(f"Nuclear optimum: sigma {np.array2string(sigma[:4], precision=3)}, rank {rank}")
    if rank != 1:
        raise RankFailure(NuclearOutcome(X=X, singular_values=sigma, numerical_rank=rank, sdp=solution))

    i0 = anchor_entry.i
    a = u[:, 0] / u[i0, 0]
    b = sigma[0] * u[i0, 0] * vt[0]
    outcome = NuclearOutcome(X=X, singular_values=sigma, numerical_rank=1, factors=(a, b), sdp=solution)

    result = factor_result(tensor, a, b, METHOD, tol)
    if result is None:
        raise CompletionDeferred("back_solve_failed", "rank-1 nuclear optimum does not fit the observed slices")
    logger.info(f"✅ Nuclear relaxation returned a rank-1 matrix (residual {result.residual:.2e})")
    return result.with_diagnostics(nuclear=outcome.to_dict(), sdp_iterations=solution.iterations)


def solve_nuclear_symmetric(
    tensor: PartialTensor,
    tol_rank: float = 1e-6,
    tol: float = 1e-6,
    anchor: Optional[Index3] = None,
    sdp_options: Optional[dict] = None,
    dump_dir: Optional[Path] = None,
) -> CompletionResult:
    """Trace minimization over symmetric V; rank-1 V = v v^T gives a = b = c = cbrt(tau) v.

    Raises:
        ValueError: tensor is not symmetric
        RankFailure, CompletionDeferred: as solve_nuclear
    """
    if not tensor.symmetric:
        raise ValueError("solve_nuclear_symmetric requires a symmetric tensor")

    anchor_entry = resolve_anchor(tensor, anchor)
    solution = _solve_relaxation(tensor, anchor, sdp_options, dump_dir)
    V = solution.block_values[0]

    evals, evecs = linalg.eigh(V)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    rank = numerical_rank(evals, tol_rank)
    logger.debug(f"Trace optimum: eigenvalues {np.array2string(evals[:4], precision=3)}, rank {rank}")
    if rank != 1:
        raise RankFailure(NuclearOutcome(X=V, singular_values=evals, numerical_rank=rank, symmetric=True, sdp=solution))

    v = np.sqrt(evals[0]) * evecs[:, 0]
    if v[anchor_entry.i] < 0.0:
        v = -v
    outcome = NuclearOutcome(X=V, singular_values=evals, numerical_rank=1, factors=(v,), symmetric=True, sdp=solution)

    result = symmetric_result(tensor, v, METHOD, tol)
    if result is None:
        raise CompletionDeferred("back_solve_failed", "rank-1 trace optimum does not fit the observed entries")
    logger.info(f"✅ Trace relaxation returned a rank-1 matrix (residual {result.residual:.2e})")
    return result.with_diagnostics(nuclear=outcome.to_dict(), sdp_iterations=solution.iterations)


# ─── Internals ──────────────────────────────────────────────────────


def _solve_relaxation(
    tensor: PartialTensor,
    anchor: Optional[Index3],
    sdp_options: Optional[dict],
    dump_dir: Optional[Path],
) -> SdpSolution:
    problem = build_nuclear_sdp(tensor, anchor)
    if dump_dir is not None:
        write_dump(problem, dump_dir, "nuclear")

    solution = sdp_solve(problem, **(sdp_options or {}))
    if solution.status == STATUS_PRIMAL_INFEASIBLE:
        raise CompletionDeferred("sdp_infeasible", "nuclear relaxation is infeasible", detail=solution.status)
    if not solution.optimal:
        raise CompletionDeferred("sdp_failed", f"SDP status {solution.status}", detail=solution.status)
    return solution


def _symmetric_matrix_variables(size: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Upper-triangle variables of a symmetric matrix with their flat unit coefficients."""
    variables = [(p, q) for p in range(size) for q in range(p, size)]
    coefficients = np.zeros((len(variables), size * size))
    for n, (p, q) in enumerate(variables):
        coefficients[n, p * size + q] = 1.0
        coefficients[n, q * size + p] = 1.0
    return variables, coefficients


def _minor_equalities(system: ConstraintSystem, index: dict, position) -> tuple[list[np.ndarray], list[float]]:
    rows: list[np.ndarray] = []
    if not system.rows:
        return rows, []
    for minor_row in normalized_rows(system.matrix):
        if not np.any(minor_row):
            continue
        row = np.zeros(len(index))
        for column, pair in enumerate(system.variables):
            row[index[position(pair)]] += minor_row[column]
        rows.append(row)
    return rows, [0.0] * len(rows)
