"""Completion of strongly rank-1 completable tensors.

When the minor system has a one-dimensional solution space spanned by w, the
partial matrix X = a b^T is known on every observed pair. Walking the bipartite
graph of observed pairs from the anchor recovers a and b by ratios, and each
slice then pins c_k by least squares.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from r1tc.errors import CompletionDeferred
from r1tc.methods.reduction import Pair, strong_data
from r1tc.tensors.models import (
    STATUS_COMPLETED,
    STATUS_NO_COMPLETION,
    CompletionResult,
    Index3,
    PartialTensor,
)
from r1tc.tensors.tensor_model import residual, slice_groups

logger = logging.getLogger(__name__)

METHOD = "iterative"


@dataclass(frozen=True)
class BipartiteGraph:
    """Rows V1 and columns V2 joined by the observed pairs."""
    left: frozenset[int]
    right: frozenset[int]
    edges: tuple[Pair, ...]

    @classmethod
    def from_pairs(cls, pairs) -> "BipartiteGraph":
        edges = tuple(sorted(set(pairs)))
        return cls(
            left=frozenset(i for i, _ in edges),
            right=frozenset(j for _, j in edges),
            edges=edges,
        )

    def adjacency(self) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
        """Neighbour lists (row -> columns, column -> rows), sorted."""
        rows: dict[int, list[int]] = defaultdict(list)
        cols: dict[int, list[int]] = defaultdict(list)
        for i, j in self.edges:
            rows[i].append(j)
            cols[j].append(i)
        return rows, cols


@dataclass(frozen=True)
class ThirdFactor:
    """Back-solved c with the slices whose value is pinned by data."""
    c: np.ndarray
    determined: np.ndarray  # bool per k


def is_connected(graph: BipartiteGraph) -> bool:
    """Breadth-first reachability from the first edge covers V1 and V2."""
    if not graph.edges:
        return False
    rows, cols = graph.adjacency()
    start = ("a", graph.edges[0][0])
    visited = {start}
    queue = deque([start])
    while queue:
        side, vertex = queue.popleft()
        neighbours = [("b", j) for j in rows[vertex]] if side == "a" else [("a", i) for i in cols[vertex]]
        for node in neighbours:
            if node not in visited:
                visited.add(node)
                queue.append(node)
    return len(visited) == len(graph.left) + len(graph.right)


def iterative_complete(
    w: dict[Pair, float],
    graph: BipartiteGraph,
    anchor: Pair,
    dims: tuple[int, int],
    tol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Assign a and b by ratios along a breadth-first walk from the anchor pair.

    Vertices outside the graph keep the value 0 (they are unconstrained).

    Raises:
        CompletionDeferred: "zero_edge" when a divisor vanishes,
            "disconnected" when some vertex is never reached
    """
    n1, n2 = dims
    a = np.zeros(n1)
    b = np.zeros(n2)
    i0, j0 = anchor
    a[i0] = 1.0
    b[j0] = 1.0

    rows, cols = graph.adjacency()
    seen_a, seen_b = {i0}, {j0}
    queue: deque[tuple[str, int]] = deque([("a", i0), ("b", j0)])
    while queue:
        side, vertex = queue.popleft()
        if side == "a":
            for j in rows[vertex]:
                if j in seen_b:
                    continue
                if abs(a[vertex]) <= tol:
                    raise CompletionDeferred("zero_edge", f"a[{vertex + 1}] vanishes on edge ({vertex + 1}, {j + 1})")
                b[j] = w[(vertex, j)] / a[vertex]
                seen_b.add(j)
                queue.append(("b", j))
        else:
            for i in cols[vertex]:
                if i in seen_a:
                    continue
                if abs(b[vertex]) <= tol:
                    raise CompletionDeferred("zero_edge", f"b[{vertex + 1}] vanishes on edge ({i + 1}, {vertex + 1})")
                a[i] = w[(i, vertex)] / b[vertex]
                seen_a.add(i)
                queue.append(("a", i))

    if len(seen_a) != len(graph.left) or len(seen_b) != len(graph.right):
        raise CompletionDeferred("disconnected", "bipartite graph of observed pairs is disconnected")
    return a, b


def back_solve_c(tensor: PartialTensor, a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> Optional[ThirdFactor]:
    """Least-squares c_k per slice; None when some slice is inconsistent.

    A slice whose coefficients a_i b_j all vanish is free (c_k = 0) if its data vanish too.
    """
    n3 = tensor.dims[2]
    c = np.zeros(n3)
    determined = np.zeros(n3, dtype=bool)

    for group in slice_groups(tensor):
        u = np.array([a[i] * b[j] for i, j in group.members])
        r = np.array([tensor.entries[(i, j, group.k)] for i, j in group.members])
        r_max = float(np.max(np.abs(r)))
        if np.linalg.norm(u) > tol:
            value = float(u @ r) / float(u @ u)
            if np.max(np.abs(r - value * u)) > tol * max(1.0, r_max):
                logger.debug(f"Slice {group.k + 1} inconsistent with the rank-1 pattern")
                return None
            c[group.k] = value
            determined[group.k] = True
        elif r_max > tol:
            logger.debug(f"Slice {group.k + 1} has zero coefficients but nonzero data")
            return None

    return ThirdFactor(c=c, determined=determined)


def back_solve_tau(tensor: PartialTensor, v: np.ndarray, tol: float = 1e-6) -> Optional[float]:
    """Least-squares tau in A_ijk = tau v_i v_j v_k; None when inconsistent."""
    i, j, k, values = tensor.index_arrays()
    u = v[i] * v[j] * v[k]
    r_max = float(np.max(np.abs(values))) if values.size else 0.0
    if np.linalg.norm(u) <= tol:
        return 0.0 if r_max <= tol else None
    tau = float(u @ values) / float(u @ u)
    if np.max(np.abs(values - tau * u)) > tol * max(1.0, r_max):
        return None
    return tau


def factor_result(
    tensor: PartialTensor, a: np.ndarray, b: np.ndarray, method: str, tol: float
) -> Optional[CompletionResult]:
    """Back-solve c for given (a, b) and accept when the residual is within tol."""
    third = back_solve_c(tensor, a, b, tol)
    if third is None:
        return None
    res = residual(tensor, a, b, third.c)
    if res > tol:
        return None
    return CompletionResult(
        status=STATUS_COMPLETED,
        method=method,
        a=a,
        b=b,
        c=third.c,
        residual=res,
        c_determined=third.determined,
    )


def symmetric_result(
    tensor: PartialTensor, v: np.ndarray, method: str, tol: float
) -> Optional[CompletionResult]:
    """Fit tau for a symmetric direction v and set a = b = c = cbrt(tau) v."""
    tau = back_solve_tau(tensor, v, tol)
    if tau is None:
        return None
    factor = np.cbrt(tau) * v
    res = residual(tensor, factor, factor, factor)
    if res > tol:
        return None
    return CompletionResult(
        status=STATUS_COMPLETED,
        method=method,
        a=factor,
        b=factor.copy(),
        c=factor.copy(),
        residual=res,
        symmetric=True,
        v=v,
        tau=tau,
        c_determined=_determined_slices(tensor),
    )


def complete_strong(
    tensor: PartialTensor,
    tol: float = 1e-6,
    nullspace_tol: float = 1e-8,
    anchor: Optional[Index3] = None,
) -> CompletionResult:
    """Strong-completion pipeline: nullspace, graph walk, back-solve.

    Returns:
        CompletionResult with status completed, or no_completion when the unique
        (up to scale) minor solution cannot be a rank-1 completion

    Raises:
        CompletionDeferred: not_strong, anchor_zero, zero_edge, disconnected, back_solve_failed
    """
    data = strong_data(tensor, nullspace_tol, anchor)
    w = dict(data.w)
    if tensor.symmetric:
        w.update({(j, i): value for (i, j), value in data.w.items()})

    graph = BipartiteGraph.from_pairs(w)
    if not is_connected(graph):
        raise CompletionDeferred("disconnected", "bipartite graph of observed pairs is disconnected")

    n1, n2, _ = tensor.dims
    a, b = iterative_complete(w, graph, data.anchor.pair, (n1, n2), tol=nullspace_tol)

    mismatch = max(abs(a[i] * b[j] - value) for (i, j), value in w.items())
    if mismatch > tol:
        return _no_completion(tensor, f"minor solution is not rank-1 (mismatch {mismatch:.3g})")

    if tensor.symmetric:
        result = symmetric_result(tensor, a, METHOD, tol)
        infeasible = result is None and back_solve_tau(tensor, a, tol) is None
    else:
        result = factor_result(tensor, a, b, METHOD, tol)
        infeasible = result is None and back_solve_c(tensor, a, b, tol) is None

    if infeasible:
        return _no_completion(tensor, "slice back-solve is infeasible for the unique minor solution")
    if result is None:
        raise CompletionDeferred("back_solve_failed", "residual above tolerance after back-solve")

    logger.debug(f"Strong completion succeeded, residual {result.residual:.3g}")
    return result


def _no_completion(tensor: PartialTensor, message: str) -> CompletionResult:
    logger.info(f"No rank-1 completion: {message}")
    return CompletionResult(
        status=STATUS_NO_COMPLETION,
        method=METHOD,
        symmetric=tensor.symmetric,
        message=message,
    )


def _determined_slices(tensor: PartialTensor) -> np.ndarray:
    determined = np.zeros(tensor.dims[2], dtype=bool)
    for group in slice_groups(tensor):
        determined[group.k] = True
    return determined
