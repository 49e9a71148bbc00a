"""Seeded experiment trials: success rates, densities and timings.

Trial t of a run uses seed + t for both its factors and its index set, so
trials are independent and can run in worker processes in any order.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import repeat
from typing import Any, Optional, Sequence

import numpy as np

from r1tc.config import DEFAULT_CONFIG, EXPERIMENT_MODES, SWEEP_SUCCESS_TARGET, SolverConfig
from r1tc.errors import R1tcError
from r1tc.experiments.generators import gen_instance, gen_rank1, gen_strong_instance
from r1tc.pipeline import complete_tensor
from r1tc.tensors.models import PartialTensor
from r1tc.tensors.tensor_model import residual

logger = logging.getLogger(__name__)

MODE_METHODS = {
    "nuclear": "nuclear",
    "nuclear_symmetric": "nuclear",
    "iterative_strong": "iterative",
    "moment": "moment",
}

STATUS_ERROR = "error"


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: trials of a method on random n x n x n instances."""
    mode: str
    n: int
    density: Optional[float] = None
    strong: bool = False
    trials: int = 20
    seed: int = 0
    workers: int = 1
    solver: SolverConfig = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in EXPERIMENT_MODES:
            raise ValueError(f"Unknown experiment mode: {self.mode}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not self.uses_strong_instances:
            if self.density is None or not 0.0 < self.density <= 1.0:
                raise ValueError(f"density must lie in (0, 1], got {self.density}")
        elif self.n < 2:
            raise ValueError("strong instances need n >= 2")

    @property
    def uses_strong_instances(self) -> bool:
        return self.strong or self.mode == "iterative_strong"

    @property
    def symmetric(self) -> bool:
        return self.mode == "nuclear_symmetric"

    @property
    def tol(self) -> float:
        return self.solver.get("tol", DEFAULT_CONFIG["tol"])


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one trial; success is audited from the residual, not trusted from the status."""
    index: int
    seed: int
    observed: int
    status: str
    method: str
    residual: Optional[float]
    success: bool
    time: float
    message: str = ""


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregate over the trials of one configuration."""
    config: ExperimentConfig
    trials: tuple[TrialOutcome, ...]

    @property
    def success_rate(self) -> float:
        return sum(t.success for t in self.trials) / len(self.trials)

    @property
    def mean_time(self) -> float:
        return sum(t.time for t in self.trials) / len(self.trials)

    @property
    def mean_observed(self) -> float:
        return sum(t.observed for t in self.trials) / len(self.trials)

    @property
    def den(self) -> float:
        """|Omega| / n^3, averaged over trials."""
        return self.mean_observed / self.config.n ** 3

    @property
    def rho(self) -> float:
        """Oversampling rate |Omega| / (3n - 1), averaged over trials."""
        return self.mean_observed / (3 * self.config.n - 1)

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        config = asdict(self.config)
        trials = [asdict(t) for t in self.trials]
        if not include_timing:
            for trial in trials:
                trial.pop("time")
        data: dict[str, Any] = {
            "config": config,
            "den": self.den,
            "rho": self.rho,
            "success_rate": self.success_rate,
            "trials": trials,
        }
        if include_timing:
            data["mean_time"] = self.mean_time
        return data


def build_trial_tensor(cfg: ExperimentConfig, index: int) -> PartialTensor:
    """Instance of trial index (seed = cfg.seed + index)."""
    seed = cfg.seed + index
    if cfg.uses_strong_instances:
        return gen_strong_instance(cfg.n, seed, gen_rank1(cfg.n, cfg.n, cfg.n, seed))
    tensor, _ = gen_instance(cfg.n, cfg.density, seed, symmetric=cfg.symmetric)
    return tensor


def _run_trial(cfg: ExperimentConfig, index: int) -> TrialOutcome:
    """Top-level so worker processes can pickle it."""
    seed = cfg.seed + index
    tensor = build_trial_tensor(cfg, index)
    method = MODE_METHODS[cfg.mode]

    start = time.perf_counter()
    try:
        result = complete_tensor(tensor, method=method, config=cfg.solver)
    except (R1tcError, np.linalg.LinAlgError, ValueError) as e:
        elapsed = time.perf_counter() - start
        logger.warning(f"Trial {index} (seed {seed}) failed: {type(e).__name__}: {e}")
        return TrialOutcome(index, seed, tensor.size, STATUS_ERROR, method, None, False, elapsed, str(e))
    elapsed = time.perf_counter() - start

    audited = residual(tensor, result.a, result.b, result.c) if result.completed else None
    success = audited is not None and audited <= cfg.tol
    if result.completed and not success:
        logger.warning(f"Trial {index}: reported completion fails the residual audit ({audited:.3g})")
    logger.debug(f"Trial {index} (seed {seed}): {result.status} in {elapsed:.3f}s")
    return TrialOutcome(index, seed, tensor.size, result.status, result.method, audited, success, elapsed, result.message)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run all trials, in worker processes when cfg.workers > 1."""
    logger.info(
        f"🧪 Experiment {cfg.mode}: n={cfg.n}, "
        f"{'strong instances' if cfg.uses_strong_instances else f'density {cfg.density}'}, {cfg.trials} trials"
    )
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_trial, repeat(cfg), range(cfg.trials)))
    else:
        outcomes = [_run_trial(cfg, index) for index in range(cfg.trials)]

    report = ExperimentReport(cfg, tuple(sorted(outcomes, key=lambda t: t.index)))
    logger.info(f"Success rate {report.success_rate:.0%}, mean time {report.mean_time:.3f}s")
    return report


def density_sweep(
    cfg: ExperimentConfig,
    densities: Sequence[float],
    target: float = SWEEP_SUCCESS_TARGET,
) -> tuple[list[ExperimentReport], Optional[float]]:
    """Run cfg at each density (ascending) and find the minimum density reaching target.

    Returns:
        (reports, minimum density with success rate >= target, or None)
    """
    if cfg.uses_strong_instances:
        raise ValueError("density sweeps need random index sets, not strong instances")

    reports = [run_experiment(replace(cfg, density=d)) for d in sorted(densities)]
    minimum = next((r.config.density for r in reports if r.success_rate >= target - 1e-12), None)
    if minimum is None:
        logger.info(f"No density reached a success rate of {target:.0%}")
    else:
        logger.info(f"Minimum density for {target:.0%} success: {minimum:.0%}")
    return reports, minimum


def parse_densities(text: str) -> list[float]:
    """Comma-separated densities such as "0.2,0.3" or "20%,30%"."""
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        values.append(float(token[:-1]) / 100.0 if token.endswith("%") else float(token))
    if not values or any(not 0.0 < v <= 1.0 or math.isnan(v) for v in values):
        raise ValueError(f"invalid density list: {text}")
    return values
