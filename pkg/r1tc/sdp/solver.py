"""Dense primal-dual interior-point solver for block LMI problems.

The problem over y (see r1tc.sdp.models) is first reduced to free coordinates
u with y = y0 + P u: the affine equalities are eliminated and P is chosen so
that the LMI map is injective with orthonormal coefficient matrices F_j. The
reduced problem

    minimize  g.u   s.t.  F0 + sum_j u_j F_j  PSD

is the dual form of the standard pair

    (P)  min <F0, X>  s.t.  <F_j, X> = g_j,  X PSD
    (D)  max g.v      s.t.  sum_j v_j F_j + Z = F0,  Z PSD      (u = -v)

which is solved through the homogeneous self-dual embedding with variables
(X, v, Z, tau, kappa). Search directions use Nesterov-Todd scaling and a
Mehrotra predictor-corrector step; the Schur complement is factored by dense
Cholesky. A vanishing tau with a ray certificate reports infeasibility.

An iteration that stops reducing the residuals, or breaks down numerically,
restarts from its current iterate pushed back into the cone interior, with a
growing diagonal shift on the Schur complement.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import linalg

from r1tc.sdp.models import (
    STATUS_DUAL_INFEASIBLE,
    STATUS_MAX_ITERATIONS,
    STATUS_OPTIMAL,
    STATUS_PRIMAL_INFEASIBLE,
    SdpProblem,
    SdpSolution,
)

logger = logging.getLogger(__name__)

# Fraction of the distance to the cone boundary taken by the corrector step
STEP_FRACTION = 0.98
# Relative eigenvalue cut on the Gram matrix of the LMI map
INJECTIVITY_TOL = 1e-12
# Relative singular value cut on the equality system
EQUALITY_RCOND = 1e-10
# Steps shorter than this end the iteration
MIN_STEP = 1e-10
# Iterations allowed without halving the best residual before a restart
STALL_WINDOW = 20
MAX_RESTARTS = 3
# Relative Schur complement shift after the first restart; grows 100x per restart
RESTART_REGULARIZATION = 1e-12
# Residuals within this factor of the tolerances are accepted when the iteration cannot go further
NEAR_OPTIMAL_FACTOR = 10.0


class _Breakdown(Exception):
    """Numerical failure inside an iteration."""


@dataclass
class _Reduced:
    """Problem restated over free coordinates u with y = y0 + basis @ u."""
    y0: np.ndarray
    basis: np.ndarray  # (m, r)
    constants: list[np.ndarray]  # F0 per block, (s, s)
    coefficients: list[np.ndarray]  # F per block, (r, s*s)
    cost: np.ndarray  # g = basis^T c
    offset: float  # c . y0
    drift: float = 0.0  # cost along directions the blocks do not see

    @property
    def num_free(self) -> int:
        return self.cost.size


@dataclass
class _Point:
    X: list[np.ndarray]
    Z: list[np.ndarray]
    v: np.ndarray
    tau: float
    kappa: float


@dataclass
class _Snapshot:
    """Residuals of one iterate."""
    point: _Point
    cx: float
    iteration: int
    pres: float
    dres: float
    gap: float

    @property
    def merit(self) -> float:
        return max(self.pres, self.dres, self.gap)


@dataclass
class _Direction:
    dv: np.ndarray
    dtau: float
    dkappa: float
    dx: list[np.ndarray]  # NT-scaled
    dz: list[np.ndarray]  # NT-scaled


def solve(
    problem: SdpProblem,
    tol_feas: float = 1e-8,
    tol_gap: float = 1e-8,
    max_iter: int = 200,
) -> SdpSolution:
    """Solve an SDP in block LMI form.

    Args:
        problem: Problem over y
        tol_feas: Feasibility tolerance (scaled residuals, block eigenvalues, equalities)
        tol_gap: Relative duality gap tolerance
        max_iter: Iteration limit

    Returns:
        SdpSolution with status optimal, primal_infeasible,
        dual_infeasible_or_unbounded or max_iterations

    Raises:
        SdpDimensionError: inconsistent problem data
    """
    problem.validate()
    logger.debug(
        f"SDP: {problem.num_vars} vars, {problem.num_equalities} equalities, "
        f"blocks {[block.size for block in problem.blocks]}"
    )

    reduced = _reduce(problem, tol_feas)
    if isinstance(reduced, SdpSolution):
        return reduced
    if reduced.drift > tol_feas * max(1.0, float(np.linalg.norm(problem.objective))):
        return _unbounded_unless_infeasible(problem, reduced, tol_feas, tol_gap, max_iter)
    if reduced.num_free == 0:
        return _fixed_point(problem, reduced, tol_feas)

    return _HomogeneousSolver(problem, reduced, tol_feas, tol_gap, max_iter).run()


# ─── Reduction to an injective LMI in free coordinates ─────────────


def _reduce(problem: SdpProblem, tol_feas: float):
    c = problem.objective
    m = problem.num_vars

    if problem.num_equalities:
        y0, null_basis = _eliminate_equalities(problem.eq_matrix, problem.eq_rhs)
        eq_residual = float(np.max(np.abs(problem.eq_matrix @ y0 - problem.eq_rhs)))
        if eq_residual > tol_feas * max(1.0, float(np.max(np.abs(problem.eq_rhs)))):
            logger.debug(f"Equalities inconsistent (residual {eq_residual:.3g})")
            return SdpSolution(
                status=STATUS_PRIMAL_INFEASIBLE,
                certificate={"equality_residual": eq_residual},
                diagnostics={"stage": "equalities"},
            )
    else:
        y0, null_basis = np.zeros(m), np.eye(m)

    lifted = [np.asarray(block.coefficients.T @ null_basis).T for block in problem.blocks]
    num_free = null_basis.shape[1]

    if num_free and lifted:
        gram = sum(lift @ lift.T for lift in lifted)
        evals, evecs = linalg.eigh(gram)
        top = float(evals[-1])
        keep = evals > INJECTIVITY_TOL * top if top > 0.0 else np.zeros(num_free, dtype=bool)
    else:
        evals, evecs = np.ones(num_free), np.eye(num_free)
        keep = np.zeros(num_free, dtype=bool)

    cost_free = null_basis.T @ c
    idle = evecs[:, ~keep]
    drift = float(np.linalg.norm(idle.T @ cost_free)) if idle.size else 0.0

    scale = evecs[:, keep] / np.sqrt(evals[keep])
    basis = null_basis @ scale
    return _Reduced(
        y0=y0,
        basis=basis,
        constants=[block.evaluate(y0) for block in problem.blocks],
        coefficients=[scale.T @ lift for lift in lifted],
        cost=basis.T @ c,
        offset=float(c @ y0),
        drift=drift,
    )


def _eliminate_equalities(eq_matrix: np.ndarray, eq_rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-norm particular solution and orthonormal nullspace basis of E y = d."""
    m = eq_matrix.shape[1]
    norms = np.linalg.norm(eq_matrix, axis=1)
    rows = norms > 0.0
    if not np.any(rows):
        return np.zeros(m), np.eye(m)

    system = eq_matrix[rows] / norms[rows, None]
    rhs = eq_rhs[rows] / norms[rows]
    if system.shape[0] > m:
        q, r = linalg.qr(system, mode="economic")
        system, rhs = r, q.T @ rhs

    y0 = linalg.lstsq(system, rhs, cond=EQUALITY_RCOND)[0]
    null_basis = linalg.null_space(system, rcond=EQUALITY_RCOND)
    return y0, null_basis


def _unbounded_unless_infeasible(
    problem: SdpProblem, reduced: _Reduced, tol_feas: float, tol_gap: float, max_iter: int
) -> SdpSolution:
    """The objective falls along directions the blocks ignore; that is unboundedness only if the blocks can hold."""
    if reduced.num_free == 0:
        feasibility = _fixed_point(problem, reduced, tol_feas)
    else:
        zero_cost = replace(reduced, cost=np.zeros(reduced.num_free), offset=0.0)
        feasibility = _HomogeneousSolver(problem, zero_cost, tol_feas, tol_gap, max_iter).run()

    if feasibility.status != STATUS_OPTIMAL:
        return feasibility
    logger.debug(f"Objective decreases along a direction free of constraints ({reduced.drift:.3g})")
    return SdpSolution(
        status=STATUS_DUAL_INFEASIBLE,
        certificate={"free_direction_cost": reduced.drift},
        diagnostics={"stage": "reduction"},
    )


def _fixed_point(problem: SdpProblem, reduced: _Reduced, tol_feas: float) -> SdpSolution:
    """Equalities pin y completely; only block feasibility remains to be checked."""
    y = reduced.y0
    values = problem.block_values(y)
    min_eig = min((float(linalg.eigvalsh(v)[0]) for v in values if v.size), default=math.inf)
    objective = float(problem.objective @ y)
    if min_eig < -tol_feas:
        return SdpSolution(
            status=STATUS_PRIMAL_INFEASIBLE,
            certificate={"min_eigenvalue": min_eig},
            diagnostics={"stage": "fixed_point"},
        )
    return SdpSolution(
        status=STATUS_OPTIMAL,
        y=y,
        block_values=values,
        primal_obj=objective,
        dual_obj=objective,
        kkt_residuals={"min_eigenvalue": min_eig, "equality_residual": _equality_residual(problem, y), "gap": 0.0},
    )


def _equality_residual(problem: SdpProblem, y: np.ndarray) -> float:
    if not problem.num_equalities:
        return 0.0
    return float(np.max(np.abs(problem.eq_matrix @ y - problem.eq_rhs)))


# ─── Homogeneous self-dual iterations ──────────────────────────────


class _HomogeneousSolver:
    """Mehrotra predictor-corrector on the homogeneous self-dual embedding."""

    def __init__(self, problem: SdpProblem, reduced: _Reduced, tol_feas: float, tol_gap: float, max_iter: int):
        self.problem = problem
        self.reduced = reduced
        self.tol_feas = tol_feas
        self.tol_gap = tol_gap
        self.max_iter = max_iter
        self.regularization = 0.0
        self.restarts = 0

        self.C = reduced.constants
        self.F = reduced.coefficients
        self.b = reduced.cost
        self.sizes = [const.shape[0] for const in self.C]
        self.nu = sum(self.sizes)
        self.norm_b = float(np.linalg.norm(self.b))
        self.norm_c = math.sqrt(sum(float(np.vdot(const, const)) for const in self.C))

    # Linear maps of the reduced problem

    def _apply(self, mats: list[np.ndarray]) -> np.ndarray:
        """A(X)_j = sum_b <F_bj, X_b>."""
        return sum(F @ M.ravel() for F, M in zip(self.F, mats))

    def _adjoint(self, v: np.ndarray) -> list[np.ndarray]:
        """A*(v)_b = sum_j v_j F_bj."""
        return [(v @ F).reshape(s, s) for F, s in zip(self.F, self.sizes)]

    @staticmethod
    def _inner(left: list[np.ndarray], right: list[np.ndarray]) -> float:
        return sum(float(np.vdot(a, b)) for a, b in zip(left, right))

    def _mu(self, point: _Point) -> float:
        return (self._inner(point.X, point.Z) + point.tau * point.kappa) / (self.nu + 1)

    def run(self) -> SdpSolution:
        point = _Point(
            X=[np.eye(s) for s in self.sizes],
            Z=[np.eye(s) for s in self.sizes],
            v=np.zeros(self.reduced.num_free),
            tau=1.0,
            kappa=1.0,
        )
        best: Optional[_Snapshot] = None
        mark_merit = mark_mu = math.inf
        mark_iteration = 0
        alpha = 0.0

        for iteration in range(1, self.max_iter + 1):
            X, Z, v, tau, kappa = point.X, point.Z, point.v, point.tau, point.kappa
            AX = self._apply(X)
            rp = AX - self.b * tau
            rd = [Av + Zb - Cb * tau for Av, Zb, Cb in zip(self._adjoint(v), Z, self.C)]
            cx = self._inner(self.C, X)
            bv = float(self.b @ v)
            rg = cx - bv + kappa
            mu = self._mu(point)

            pres = float(np.linalg.norm(rp)) / tau / (1.0 + self.norm_b)
            dres = math.sqrt(self._inner(rd, rd)) / tau / (1.0 + self.norm_c)
            value = self.reduced.offset - bv / tau
            gap = abs(cx - bv) / tau / (1.0 + abs(value))
            logger.debug(
                f"iter {iteration:3d}  pres {pres:.2e}  dres {dres:.2e}  gap {gap:.2e}  "
                f"mu {mu:.2e}  tau {tau:.2e}  kappa {kappa:.2e}  step {alpha:.3f}"
            )

            snapshot = _Snapshot(point, cx, iteration, pres, dres, gap)
            if best is None or snapshot.merit < best.merit:
                best = snapshot
            if snapshot.merit < 0.5 * mark_merit or mu < 0.5 * mark_mu:
                mark_merit, mark_mu, mark_iteration = snapshot.merit, mu, iteration

            if pres <= self.tol_feas and dres <= self.tol_feas and gap <= self.tol_gap:
                solution = self._finish(STATUS_OPTIMAL, snapshot)
                if self._meets_tolerances(solution):
                    return solution

            certificate = self._certificates(X, AX, cx, rd, tau, bv)
            if certificate is not None:
                status, quality = certificate
                logger.debug(f"Infeasibility detected at iteration {iteration}: {status}")
                return SdpSolution(
                    status=status,
                    iterations=iteration,
                    certificate=quality,
                    kkt_residuals={"multiplier_residual": pres, "lmi_residual": dres, "gap": gap},
                    diagnostics={"tau": tau, "kappa": kappa, "restarts": self.restarts},
                )

            if iteration - mark_iteration < STALL_WINDOW:
                try:
                    point, alpha = self._step(point, rp, rd, rg, mu)
                    continue
                except _Breakdown as e:
                    reason = str(e)
            else:
                reason = f"no progress in {STALL_WINDOW} iterations"

            if self._near_optimal(best) or self.restarts == MAX_RESTARTS:
                return self._conclude(best, reason)
            self.restarts += 1
            self.regularization = RESTART_REGULARIZATION * 100.0 ** (self.restarts - 1)
            logger.debug(f"SDP restart {self.restarts} at iteration {iteration}: {reason}")
            point = self._recenter(point)
            mark_merit = mark_mu = math.inf
            mark_iteration = iteration
            alpha = 0.0

        return self._conclude(best, "iteration limit")

    def _near_optimal(self, snapshot: _Snapshot) -> bool:
        return (
            snapshot.pres <= NEAR_OPTIMAL_FACTOR * self.tol_feas
            and snapshot.dres <= NEAR_OPTIMAL_FACTOR * self.tol_feas
            and snapshot.gap <= NEAR_OPTIMAL_FACTOR * self.tol_gap
        )

    def _meets_tolerances(self, solution: SdpSolution, factor: float = 1.0) -> bool:
        kkt = solution.kkt_residuals
        rhs_scale = max(1.0, float(np.max(np.abs(self.problem.eq_rhs)))) if self.problem.num_equalities else 1.0
        tol = factor * self.tol_feas
        return kkt["min_eigenvalue"] >= -tol and kkt["equality_residual"] <= tol * rhs_scale

    def _conclude(self, best: _Snapshot, reason: str) -> SdpSolution:
        """Best iterate once the iteration cannot continue: optimal when near the tolerances."""
        diagnostics = {"stopped": reason, "restarts": self.restarts}
        if self._near_optimal(best):
            solution = self._finish(STATUS_OPTIMAL, best, diagnostics={**diagnostics, "near_optimal": True})
            if self._meets_tolerances(solution, NEAR_OPTIMAL_FACTOR):
                logger.debug(f"Accepting near-optimal iterate {best.iteration} ({reason})")
                return solution
        logger.warning(f"SDP solver stopped without convergence: {reason}")
        return self._finish(STATUS_MAX_ITERATIONS, best, diagnostics=diagnostics)

    def _recenter(self, point: _Point) -> _Point:
        """Shift X and Z by sqrt(mu) I so every eigenvalue pair is again bounded away from zero."""
        shift = math.sqrt(max(self._mu(point), np.finfo(float).eps))
        return _Point(
            X=[x + shift * np.eye(s) for x, s in zip(point.X, self.sizes)],
            Z=[z + shift * np.eye(s) for z, s in zip(point.Z, self.sizes)],
            v=point.v.copy(),
            tau=point.tau,
            kappa=max(point.kappa, shift / point.tau),
        )

    def _certificates(self, X, AX, cx, rd, tau, bv) -> Optional[tuple[str, dict[str, float]]]:
        if cx < 0.0:
            ray_residual = float(np.linalg.norm(AX)) / -cx
            if ray_residual <= self.tol_feas:
                trace = sum(float(np.trace(x)) for x in X)
                return STATUS_PRIMAL_INFEASIBLE, {
                    "ray_objective": -cx / trace,
                    "ray_residual": ray_residual,
                }
        if bv > 0.0:
            slack = [r + Cb * tau for r, Cb in zip(rd, self.C)]
            ray_residual = math.sqrt(self._inner(slack, slack)) / bv
            if ray_residual <= self.tol_feas:
                return STATUS_DUAL_INFEASIBLE, {"ray_objective": bv, "ray_residual": ray_residual}
        return None

    def _step(self, point: _Point, rp, rd, rg, mu) -> tuple[_Point, float]:
        X, Z, v, tau, kappa = point.X, point.Z, point.v, point.tau, point.kappa
        scalings = [_nt_scaling(Xb, Zb) for Xb, Zb in zip(X, Z)]

        Ft, Ct, Rdt = [], [], []
        for (G, _), F, Cb, rdb, s in zip(scalings, self.F, self.C, rd, self.sizes):
            stack = F.reshape(-1, s, s)
            Ft.append((G.T @ stack @ G).reshape(F.shape[0], -1))
            Ct.append(G.T @ Cb @ G)
            Rdt.append(G.T @ rdb @ G)

        schur = sum(f @ f.T for f in Ft)
        q = sum(f @ ct.ravel() for f, ct in zip(Ft, Ct))
        factor = _factor_schur(schur, self.regularization)
        w = linalg.cho_solve(factor, q)
        wb = linalg.cho_solve(factor, self.b)
        v2 = w + wb
        qb = q - self.b
        # (q - b).v2 - <Ct, Ct> - kappa/tau, written as a negative sum of squares
        projection = [ct - (w @ f).reshape(s, s) for ct, f, s in zip(Ct, Ft, self.sizes)]
        denominator = -self._inner(projection, projection) - float(self.b @ wb) - kappa / tau
        if not denominator < 0.0:
            raise _Breakdown("embedding pivot is not negative")

        def direction(eta: float, rtil: list[np.ndarray], rtau: float) -> _Direction:
            T = [rt + eta * rdt for rt, rdt in zip(rtil, Rdt)]
            h1 = -eta * rp - sum(f @ t.ravel() for f, t in zip(Ft, T))
            h2 = -eta * rg - sum(float(np.vdot(ct, t)) for ct, t in zip(Ct, T)) - rtau / tau
            v1 = linalg.cho_solve(factor, h1)
            dtau = (h2 - float(qb @ v1)) / denominator
            dv = v1 + dtau * v2
            dkappa = (rtau - kappa * dtau) / tau
            dx = [t + (dv @ f).reshape(s, s) - dtau * ct for t, f, ct, s in zip(T, Ft, Ct, self.sizes)]
            dz = [rt - d for rt, d in zip(rtil, dx)]
            return _Direction(dv, dtau, dkappa, dx, dz)

        lams = [lam for _, lam in scalings]

        # Predictor
        affine = direction(1.0, [-np.diag(lam) for lam in lams], -tau * kappa)
        alpha_aff = min(1.0, _max_step(lams, affine, tau, kappa))
        mu_aff = (
            sum(
                float(np.vdot(np.diag(lam) + alpha_aff * dx, np.diag(lam) + alpha_aff * dz))
                for lam, dx, dz in zip(lams, affine.dx, affine.dz)
            )
            + (tau + alpha_aff * affine.dtau) * (kappa + alpha_aff * affine.dkappa)
        ) / (self.nu + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # Corrector
        rtil = []
        for lam, dx, dz in zip(lams, affine.dx, affine.dz):
            jordan = 0.5 * (dx @ dz + dz @ dx)
            rhs = sigma * mu * np.eye(lam.size) - np.diag(lam * lam) - jordan
            rtil.append(2.0 * rhs / (lam[:, None] + lam[None, :]))
        rtau = sigma * mu - tau * kappa - affine.dtau * affine.dkappa
        eta = 1.0 - sigma
        step = direction(eta, rtil, rtau)

        alpha = min(1.0, STEP_FRACTION * _max_step(lams, step, tau, kappa))
        if not alpha > MIN_STEP:
            raise _Breakdown(f"step length {alpha:.2e}")

        X_new, Z_new = [], []
        for (G, _), Xb, Zb, dx, F, Cb, rdb, s in zip(scalings, X, Z, step.dx, self.F, self.C, rd, self.sizes):
            dZ = -eta * rdb - (step.dv @ F).reshape(s, s) + Cb * step.dtau
            X_next = Xb + alpha * (G @ dx @ G.T)
            Z_next = Zb + alpha * dZ
            X_new.append(0.5 * (X_next + X_next.T))
            Z_new.append(0.5 * (Z_next + Z_next.T))

        moved = _Point(
            X=X_new,
            Z=Z_new,
            v=v + alpha * step.dv,
            tau=tau + alpha * step.dtau,
            kappa=kappa + alpha * step.dkappa,
        )
        return moved, alpha

    def _finish(self, status: str, snapshot: _Snapshot, diagnostics: Optional[dict] = None) -> SdpSolution:
        u = -snapshot.point.v / snapshot.point.tau
        y = self.reduced.y0 + self.reduced.basis @ u
        values = self.problem.block_values(y)
        min_eig = min((float(linalg.eigvalsh(val)[0]) for val in values if val.size), default=math.inf)
        return SdpSolution(
            status=status,
            y=y,
            block_values=values,
            primal_obj=float(self.problem.objective @ y),
            dual_obj=self.reduced.offset - snapshot.cx / snapshot.point.tau,
            kkt_residuals={
                "lmi_residual": snapshot.dres,
                "multiplier_residual": snapshot.pres,
                "gap": snapshot.gap,
                "min_eigenvalue": min_eig,
                "equality_residual": _equality_residual(self.problem, y),
            },
            iterations=snapshot.iteration,
            diagnostics=diagnostics or {},
        )


# ─── Scaling and step helpers ──────────────────────────────────────


def _psd_factor(matrix: np.ndarray) -> np.ndarray:
    """Lower factor L with L L^T = matrix; eigen-decomposition when Cholesky fails."""
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        evals, evecs = linalg.eigh(matrix)
        floor = np.finfo(float).eps * max(float(evals[-1]), 1.0)
        return evecs * np.sqrt(np.maximum(evals, floor))


def _nt_scaling(X: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """G and lambda with G^-1 X G^-T = G^T Z G = diag(lambda)."""
    Lx = _psd_factor(X)
    Lz = _psd_factor(Z)
    _, lam, vt = linalg.svd(Lz.T @ Lx)
    if not np.all(lam > 0.0):
        raise _Breakdown("scaling point left the cone interior")
    G = (Lx @ vt.T) / np.sqrt(lam)[None, :]
    return G, lam


def _factor_schur(schur: np.ndarray, regularization: float = 0.0):
    scale = max(1.0, float(np.max(np.diag(schur))))
    if regularization > 0.0:
        schur = schur + regularization * scale * np.eye(schur.shape[0])
    try:
        return linalg.cho_factor(schur, lower=True)
    except linalg.LinAlgError:
        pass
    shift = max(1e-12, 100.0 * regularization) * scale
    try:
        return linalg.cho_factor(schur + shift * np.eye(schur.shape[0]), lower=True)
    except linalg.LinAlgError:
        raise _Breakdown("Schur complement is not positive definite") from None


def _max_step(lams: list[np.ndarray], direction: _Direction, tau: float, kappa: float) -> float:
    """Largest alpha keeping the scaled iterates in the cone."""
    limit = math.inf
    for lam, dx, dz in zip(lams, direction.dx, direction.dz):
        inv_root = 1.0 / np.sqrt(lam)
        for d in (dx, dz):
            scaled = d * inv_root[:, None] * inv_root[None, :]
            smallest = float(linalg.eigvalsh(0.5 * (scaled + scaled.T), subset_by_index=[0, 0])[0])
            if smallest < 0.0:
                limit = min(limit, -1.0 / smallest)
    if direction.dtau < 0.0:
        limit = min(limit, -tau / direction.dtau)
    if direction.dkappa < 0.0:
        limit = min(limit, -kappa / direction.dkappa)
    return limit
