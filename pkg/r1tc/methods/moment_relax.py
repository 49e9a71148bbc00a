"""Moment hierarchy for rank-1 completion with infeasibility detection.

Fixing a_i = b_j = 1 at the anchor (symmetric tensors: v_i = 1) turns the
slice minors into equations phi(x) = 0 of degree at most two in the remaining n_bar
coordinates. With a generic positive definite F the problem

    min  [a; b]^T F [a; b]   s.t.  phi(x) = 0 for all phi

has a unique minimizer when a completion exists. Level l of the hierarchy
relaxes it to

    min <f, y>   s.t.  M_l[y] PSD,  <phi x^g, y> = 0 for |g| <= 2l - 2,  y_0 = 1

An infeasible level proves there is no completion; a rank-1 truncation M_t[y*]
yields the minimizer from the degree-one moments.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
from scipy import linalg, optimize, sparse

from r1tc.methods.monomials import (
    MonomialBasis,
    Polynomial,
    constant,
    moment_index,
    pairing_row,
    poly_add,
    poly_clean,
    poly_degree,
    poly_derivative,
    poly_evaluate,
    poly_from_quadratic,
    poly_multiply,
    poly_scale,
    variable,
)
from r1tc.methods.reduction import constraint_system
from r1tc.methods.strong_completion import factor_result, symmetric_result
from r1tc.sdp.dump import write_dump
from r1tc.sdp.models import (
    STATUS_MAX_ITERATIONS,
    STATUS_OPTIMAL,
    STATUS_PRIMAL_INFEASIBLE,
    LmiBlock,
    SdpProblem,
)
from r1tc.sdp.solver import solve as sdp_solve
from r1tc.tensors.models import (
    STATUS_INCONCLUSIVE,
    STATUS_NO_COMPLETION,
    AnchorIndex,
    CompletionResult,
    Index3,
    PartialTensor,
)
from r1tc.tensors.tensor_model import resolve_anchor

logger = logging.getLogger(__name__)

METHOD = "moment"
INFEASIBLE_MESSAGE = "certified infeasible (numerical)"

# Residual level under which a solve that hit the iteration limit is still used for extraction
NEAR_OPTIMAL_RESIDUAL = 1e-5
# Fresh objectives tried after a flat level lands on a root that is not a completion
MAX_RESEEDS = 3


@dataclass(frozen=True)
class PolynomialSystem:
    """Quadratic equations and objective in the free coordinates x.

    The full factor vector z is [a; b] (symmetric: v); fixed_position holds
    the coordinate pinned to 1 and free_positions map x onto the rest.
    """
    n_bar: int
    phi: tuple[Polynomial, ...]
    objective_F: np.ndarray
    objective: Polynomial
    dims: tuple[int, int, int]
    anchor: AnchorIndex
    free_positions: tuple[int, ...]
    fixed_positions: tuple[int, ...]
    symmetric: bool = False

    @property
    def inconsistent(self) -> bool:
        """Some equation reduced to a nonzero constant."""
        return any(poly_degree(poly) == 0 for poly in self.phi)

    def assemble(self, x: np.ndarray) -> np.ndarray:
        """Full factor vector z from free coordinates x."""
        z = np.zeros(len(self.free_positions) + len(self.fixed_positions))
        z[list(self.fixed_positions)] = 1.0
        if self.free_positions:
            z[list(self.free_positions)] = np.asarray(x, dtype=float)
        return z

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(a, b) from z; symmetric systems return (v, v)."""
        if self.symmetric:
            return z, z
        n1 = self.dims[0]
        return z[:n1], z[n1:]

    def free_coordinates(self, a: np.ndarray, b: Optional[np.ndarray] = None) -> np.ndarray:
        """Inverse of assemble for factors already normalized at the anchor."""
        z = np.asarray(a, dtype=float) if self.symmetric else np.concatenate([a, b])
        return z[list(self.free_positions)]


@dataclass(frozen=True)
class MomentRelaxation:
    """Level-l relaxation data over the moment vector y."""
    level: int
    basis: MonomialBasis  # N^n_bar_{2l}, indexes y
    moment_index: np.ndarray  # (s, s) positions of alpha + beta
    localizers: np.ndarray  # equality rows <phi x^g, y> = 0
    objective_vector: np.ndarray
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def y_dim(self) -> int:
        return len(self.basis)

    @property
    def moment_size(self) -> int:
        return self.moment_index.shape[0]

    def moment_matrix(self, y: np.ndarray, t: Optional[int] = None) -> np.ndarray:
        """M_t[y] as the leading principal block of M_l[y]."""
        size = self.moment_size if t is None else self.basis.size_up_to(t)
        return np.asarray(y)[self.moment_index[:size, :size]]

    def sdp_problem(self) -> SdpProblem:
        size = self.moment_size
        flat_positions = np.arange(size * size)
        coefficients = sparse.csr_matrix(
            (np.ones(size * size), (self.moment_index.ravel(), flat_positions)),
            shape=(self.y_dim, size * size),
        )
        normalization = np.zeros((1, self.y_dim))
        normalization[0, 0] = 1.0
        eq_matrix = np.vstack([self.localizers, normalization])
        eq_rhs = np.zeros(eq_matrix.shape[0])
        eq_rhs[-1] = 1.0
        return SdpProblem(
            objective=self.objective_vector,
            blocks=(LmiBlock(np.zeros((size, size)), coefficients),),
            eq_matrix=eq_matrix,
            eq_rhs=eq_rhs,
        )


# ─── System construction ───────────────────────────────────────────


def build_system(tensor: PartialTensor, seed: int = 0, anchor: Optional[Index3] = None) -> PolynomialSystem:
    """Minor equations with the anchor coordinates fixed, plus the seeded objective.

    A coordinate shared by the two products of a minor is divided out, which
    turns that minor into a linear equation.

    Args:
        tensor: Partial tensor with a nonzero anchor
        seed: Seed of the standard-normal G in F = G G^T + I
        anchor: Optional 0-based anchor override
    """
    anchor_entry = resolve_anchor(tensor, anchor)
    n1, n2, _ = tensor.dims

    if tensor.symmetric:
        size = n1
        fixed = (anchor_entry.i,)
        a_position = b_position = lambda i: i  # noqa: E731
    else:
        size = n1 + n2
        fixed = (anchor_entry.i, n1 + anchor_entry.j)
        a_position = lambda i: i  # noqa: E731
        b_position = lambda j: n1 + j  # noqa: E731

    free = tuple(p for p in range(size) if p not in fixed)
    n_bar = len(free)
    coordinate = {p: variable(n_bar, n) for n, p in enumerate(free)}
    coordinate.update({p: constant(n_bar) for p in fixed})

    def monomial(factors: tuple[int, ...]) -> Polynomial:
        poly = constant(n_bar)
        for position in factors:
            poly = poly_multiply(poly, coordinate[position])
        return poly

    def positions(pair) -> tuple[int, int]:
        i, j = pair
        return a_position(i), b_position(j)

    phi: list[Polynomial] = []
    seen: set = set()
    for row in constraint_system(tensor).rows:
        first, second = _cancel_shared(positions(row.first), positions(row.second))
        poly = poly_clean(
            poly_add(
                poly_scale(monomial(second), row.coeff_first),
                poly_scale(monomial(first), row.coeff_second),
            ),
            scale=max(abs(row.coeff_first), abs(row.coeff_second)),
        )
        if not poly:
            continue
        poly = _normalize(poly)
        key = tuple(sorted((alpha, round(coef, 12)) for alpha, coef in poly.items()))
        if key in seen:
            continue
        seen.add(key)
        phi.append(poly)

    F = _generic_objective(size, seed)
    objective = _objective_in_free(F, free, fixed)

    logger.debug(f"Polynomial system: n_bar {n_bar}, {len(phi)} equations, seed {seed}")
    return PolynomialSystem(
        n_bar=n_bar,
        phi=tuple(phi),
        objective_F=F,
        objective=objective,
        dims=tensor.dims,
        anchor=anchor_entry,
        free_positions=free,
        fixed_positions=fixed,
        symmetric=tensor.symmetric,
    )


def _cancel_shared(first: tuple[int, ...], second: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Drop one coordinate common to both products.

    A shared factor belongs to an entry that is nonzero whenever the minor is
    nonzero, so it cannot vanish at a completion; keeping it would admit roots
    with that factor at zero.
    """
    for position in first:
        if position in second:
            rest_first, rest_second = list(first), list(second)
            rest_first.remove(position)
            rest_second.remove(position)
            return tuple(rest_first), tuple(rest_second)
    return first, second


def _normalize(poly: Polynomial) -> Polynomial:
    """Unit max-abs coefficient, leading coefficient (in sorted exponent order) positive."""
    largest = max(abs(coef) for coef in poly.values())
    leading = poly[max(poly)]
    sign = 1.0 if leading > 0 else -1.0
    return {alpha: sign * coef / largest for alpha, coef in poly.items()}


def _generic_objective(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((size, size))
    F = G @ G.T + np.eye(size)
    if float(linalg.eigvalsh(F)[0]) <= 0.0:
        raise ValueError("objective matrix is not positive definite")
    return F


def _objective_in_free(F: np.ndarray, free: tuple[int, ...], fixed: tuple[int, ...]) -> Polynomial:
    """z^T F z rewritten in x for z = e + S x."""
    free_list, fixed_list = list(free), list(fixed)
    Q = F[np.ix_(free_list, free_list)]
    g = 2.0 * F[np.ix_(fixed_list, free_list)].sum(axis=0)
    c0 = float(F[np.ix_(fixed_list, fixed_list)].sum())
    return poly_from_quadratic(Q, g, c0)


# ─── Relaxation ─────────────────────────────────────────────────────


def build_relaxation(system: PolynomialSystem, level: int) -> MomentRelaxation:
    """Moment matrix index map, localizer rows and objective of level l.

    Raises:
        ValueError: level below 1
    """
    if level < 1:
        raise ValueError(f"relaxation level must be at least 1, got {level}")

    basis = MonomialBasis(system.n_bar, 2 * level)
    shifts = basis.exponents[: basis.size_up_to(2 * level - 2)]

    rows: list[np.ndarray] = []
    for poly in system.phi:
        for shift in shifts:
            row = np.zeros(len(basis))
            for position, coef in pairing_row(poly, shift, basis).items():
                row[position] = coef
            rows.append(row)
    localizers = np.array(rows) if rows else np.zeros((0, len(basis)))

    objective_vector = np.zeros(len(basis))
    for position, coef in pairing_row(system.objective, (0,) * system.n_bar, basis).items():
        objective_vector[position] = coef

    relaxation = MomentRelaxation(
        level=level,
        basis=basis,
        moment_index=moment_index(basis, level),
        localizers=localizers,
        objective_vector=objective_vector,
    )
    logger.debug(
        f"Level {level}: y_dim {relaxation.y_dim}, moment matrix {relaxation.moment_size}, "
        f"{localizers.shape[0]} localizer rows"
    )
    return relaxation


def build_moment_sdp(system: PolynomialSystem, level: int) -> SdpProblem:
    """SDP of level l: M_l[y] PSD, localizer rows, y_0 = 1, objective <f, y>."""
    return build_relaxation(system, level).sdp_problem()


def flat_truncation_rank1(y: np.ndarray, relaxation: MomentRelaxation, tol_rank: float = 1e-6) -> Optional[int]:
    """Smallest t <= l with numerically rank-1 M_t[y], or None."""
    for t in range(1, relaxation.level + 1):
        evals = linalg.eigvalsh(relaxation.moment_matrix(y, t))
        top = float(evals[-1])
        if top <= 0.0:
            continue
        rank = int(np.sum(evals > tol_rank * top))
        logger.debug(f"M_{t}: top eigenvalue {top:.3e}, numerical rank {rank}")
        if rank == 1:
            return t
    return None


def polish_point(system: PolynomialSystem, x: np.ndarray) -> np.ndarray:
    """Refine x by nonlinear least squares on phi(x) = 0; keeps x when that does not help."""
    x = np.asarray(x, dtype=float)
    if not system.phi or system.n_bar == 0:
        return x

    gradients = [[poly_derivative(poly, var) for var in range(system.n_bar)] for poly in system.phi]

    def equations(point: np.ndarray) -> np.ndarray:
        return np.array([poly_evaluate(poly, point) for poly in system.phi])

    def jacobian(point: np.ndarray) -> np.ndarray:
        return np.array([[poly_evaluate(d, point) for d in row] for row in gradients])

    before = float(np.max(np.abs(equations(x))))
    fit = optimize.least_squares(
        equations, x, jac=jacobian, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200
    )
    after = float(np.max(np.abs(equations(fit.x))))
    logger.debug(f"Polish: max |phi| {before:.2e} -> {after:.2e}")
    return fit.x if after <= before else x


def extract_and_verify(
    y: np.ndarray,
    system: PolynomialSystem,
    tensor: PartialTensor,
    tol: float = 1e-6,
    polish: bool = True,
) -> Optional[CompletionResult]:
    """Read x* from the degree-one moments, reassemble the factors and back-solve.

    Returns:
        Completed result, or None when x* leaves some |phi| above tol or the
        residual exceeds tol
    """
    x = extracted_point(y, system, polish)
    violation = equation_violation(system, x)
    if violation > tol:
        logger.debug(f"Extracted point violates the minor equations (max |phi| {violation:.2e})")
        return None
    z = system.assemble(x)

    if system.symmetric:
        result = symmetric_result(tensor, z, METHOD, tol)
    else:
        a, b = system.split(z)
        result = factor_result(tensor, a, b, METHOD, tol)

    if result is None:
        logger.debug("Extracted point fails the residual test")
        return None
    return result.with_diagnostics(phi_residual=violation)


def extracted_point(y: np.ndarray, system: PolynomialSystem, polish: bool = True) -> np.ndarray:
    """Degree-one moments, optionally polished onto phi = 0."""
    x = np.asarray(y, dtype=float)[1:1 + system.n_bar]
    return polish_point(system, x) if polish else x


def equation_violation(system: PolynomialSystem, x: np.ndarray) -> float:
    """Max |phi(x)| over the minor equations (0 for an empty system)."""
    return max((abs(poly_evaluate(poly, x)) for poly in system.phi), default=0.0)


# ─── Hierarchy ──────────────────────────────────────────────────────


def solve_moment(
    tensor: PartialTensor,
    seed: int = 0,
    max_level: int = 4,
    tol: float = 1e-6,
    rank_tol: float = 1e-6,
    anchor: Optional[Index3] = None,
    sdp_options: Optional[dict] = None,
    polish: bool = True,
    dump_dir: Optional[Path] = None,
    reseeds: int = MAX_RESEEDS,
) -> CompletionResult:
    """Run levels 1..max_level until a verified extraction or an infeasible level.

    A flat level whose minimizer solves every phi but still fails the
    back-solve is a root with some observed product at zero. Higher levels
    return the same root, so the hierarchy restarts with the next seed
    instead, at most reseeds times.

    Returns:
        CompletionResult with status completed, no_completion (infeasible
        level or inconsistent constant equation) or inconclusive
    """
    levels: list[dict[str, Any]] = []
    for attempt in range(reseeds + 1):
        system = build_system(tensor, seed + attempt, anchor)
        if system.inconsistent:
            return _no_completion(tensor, "a minor equation reduces to a nonzero constant", level=None, levels=levels)

        result, spurious = _climb(system, tensor, max_level, tol, rank_tol, sdp_options, polish, dump_dir, levels)
        if result is not None:
            return result
        if not spurious:
            break
        logger.info(f"🔁 Minimizer for seed {seed + attempt} is not a completion, retrying with seed {seed + attempt + 1}")

    logger.info(f"⚠️ Moment hierarchy inconclusive after {max_level} levels")
    return CompletionResult(
        status=STATUS_INCONCLUSIVE,
        method=METHOD,
        symmetric=tensor.symmetric,
        message=f"no verified rank-1 extraction up to level {max_level}",
        diagnostics={"levels": levels},
    )


def _climb(
    system: PolynomialSystem,
    tensor: PartialTensor,
    max_level: int,
    tol: float,
    rank_tol: float,
    sdp_options: Optional[dict],
    polish: bool,
    dump_dir: Optional[Path],
    levels: list[dict[str, Any]],
) -> tuple[Optional[CompletionResult], bool]:
    """One pass over the levels.

    Returns:
        (deciding result or None, whether a flat level found a root that is not a completion)
    """
    for level in range(1, max_level + 1):
        relaxation = build_relaxation(system, level)
        problem = relaxation.sdp_problem()
        if dump_dir is not None:
            write_dump(problem, dump_dir, f"moment-level{level}")

        solution = sdp_solve(problem, **(sdp_options or {}))
        record: dict[str, Any] = {
            "level": level,
            "status": solution.status,
            "iterations": solution.iterations,
            "y_dim": relaxation.y_dim,
        }
        levels.append(record)
        logger.debug(f"Level {level}: SDP {solution.status} after {solution.iterations} iterations")

        if solution.status == STATUS_PRIMAL_INFEASIBLE:
            logger.info(f"🚫 Moment relaxation infeasible at level {level}")
            return _no_completion(tensor, f"{INFEASIBLE_MESSAGE} at level {level}", level=level, levels=levels), False

        if not _usable(solution):
            continue

        t = flat_truncation_rank1(solution.y, relaxation, rank_tol)
        if t is None:
            t = flat_truncation_rank1(solution.y, relaxation, math.sqrt(rank_tol))
            record["loose_rank"] = t is not None
        record["flat_t"] = t
        if t is None:
            continue

        result = extract_and_verify(solution.y, system, tensor, tol, polish)
        record["extracted"] = result is not None
        if result is not None:
            logger.info(f"✅ Moment hierarchy completed at level {level} (residual {result.residual:.2e})")
            return _with_level(result, level, levels), False

        if equation_violation(system, extracted_point(solution.y, system, polish)) <= tol:
            record["spurious_root"] = True
            return None, True
    return None, False


def _usable(solution) -> bool:
    if solution.status == STATUS_OPTIMAL:
        return True
    if solution.status != STATUS_MAX_ITERATIONS or solution.y is None:
        return False
    kkt = solution.kkt_residuals
    return max(kkt.get("lmi_residual", math.inf), kkt.get("multiplier_residual", math.inf)) <= NEAR_OPTIMAL_RESIDUAL


def _with_level(result: CompletionResult, level: int, levels: list[dict[str, Any]]) -> CompletionResult:
    return replace(result, level=level).with_diagnostics(levels=levels)


def _no_completion(tensor: PartialTensor, message: str, level: Optional[int], levels: list) -> CompletionResult:
    return CompletionResult(
        status=STATUS_NO_COMPLETION,
        method=METHOD,
        symmetric=tensor.symmetric,
        message=message,
        level=level,
        diagnostics={"levels": levels},
    )
