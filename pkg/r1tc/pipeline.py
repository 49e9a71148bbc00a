"""Main pipeline choosing and chaining the completion methods."""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Optional, Union

from r1tc.config import DEFAULT_CONFIG, METHODS, SolverConfig
from r1tc.errors import CompletionDeferred, RankFailure, ZeroTensorError
from r1tc.methods.higher_order import Order4Result, complete_order4
from r1tc.methods.moment_relax import solve_moment
from r1tc.methods.nuclear_relax import solve_nuclear
from r1tc.methods.reduction import constraint_system, nullspace
from r1tc.methods.strong_completion import BipartiteGraph, complete_strong, is_connected
from r1tc.tensors.models import STATUS_INCONCLUSIVE, CompletionResult, HigherTensor, Index3, PartialTensor
from r1tc.tensors.tensor_io import load_tensor_file
from r1tc.tensors.tensor_model import anchor_index, resolve_anchor, zero_completion

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckReport:
    """Structural facts behind the strong-completability verdict."""
    dims: tuple[int, int, int]
    symmetric: bool
    observed: int
    pairs: int
    minor_rows: int
    nullspace_dim: int
    connected: bool
    strong: bool
    anchor: Optional[Index3]  # 1-based
    density: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# ──────────────────────────────────────────────────────
# Shared helpers
# ──────────────────────────────────────────────────────

def _merged(config: Optional[SolverConfig]) -> SolverConfig:
    return {**DEFAULT_CONFIG, **(config or {})}  # type: ignore[return-value]


def _sdp_options(cfg: SolverConfig) -> dict[str, Any]:
    return {"tol_feas": cfg["sdp_tol_feas"], "tol_gap": cfg["sdp_tol_gap"], "max_iter": cfg["sdp_max_iter"]}


def _dump_dir(cfg: SolverConfig) -> Optional[Path]:
    return Path(cfg["dump_dir"]) if cfg.get("dump_dir") else None


def _run_iterative(tensor: PartialTensor, cfg: SolverConfig, anchor: Optional[Index3]) -> CompletionResult:
    return complete_strong(tensor, tol=cfg["tol"], nullspace_tol=cfg["nullspace_tol"], anchor=anchor)


def _run_nuclear(tensor: PartialTensor, cfg: SolverConfig, anchor: Optional[Index3]) -> CompletionResult:
    return solve_nuclear(
        tensor,
        tol_rank=cfg["rank_tol"],
        tol=cfg["tol"],
        anchor=anchor,
        sdp_options=_sdp_options(cfg),
        dump_dir=_dump_dir(cfg),
    )


def _run_moment(tensor: PartialTensor, cfg: SolverConfig, anchor: Optional[Index3]) -> CompletionResult:
    return solve_moment(
        tensor,
        seed=cfg["seed"],
        max_level=cfg["max_level"],
        tol=cfg["tol"],
        rank_tol=cfg["rank_tol"],
        anchor=anchor,
        sdp_options=_sdp_options(cfg),
        polish=cfg["polish"],
        dump_dir=_dump_dir(cfg),
        reseeds=cfg["reseeds"],
    )


_RUNNERS = {"iterative": _run_iterative, "nuclear": _run_nuclear, "moment": _run_moment}


def _deferral_record(method: str, error: CompletionDeferred) -> dict[str, Any]:
    record: dict[str, Any] = {"method": method, "reason": error.reason, "message": str(error)}
    if isinstance(error, RankFailure):
        record["numerical_rank"] = error.outcome.numerical_rank
        record["spectrum"] = [float(s) for s in error.outcome.singular_values]
    elif error.detail is not None:
        record["detail"] = error.detail
    return record


# ──────────────────────────────────────────────────────
# Pipeline commands
# ──────────────────────────────────────────────────────

def complete_tensor(
    tensor: PartialTensor,
    method: str = "auto",
    config: Optional[SolverConfig] = None,
    anchor: Optional[Index3] = None,
) -> CompletionResult:
    """Complete a cubic partial tensor.

    Method auto tries the iterative strong path, then the nuclear relaxation,
    then the moment hierarchy, stopping at the first decisive answer. A single
    method reports a deferral as an inconclusive result.

    Args:
        tensor: Partial tensor
        method: auto, iterative, nuclear or moment
        config: Solver configuration (missing keys take defaults)
        anchor: Optional 0-based anchor override

    Returns:
        CompletionResult; diagnostics["attempts"] lists the deferred methods

    Raises:
        EmptyTensorError: no observed entries
        ValueError: unknown method or invalid anchor
    """
    if method not in METHODS:
        raise ValueError(f"Unknown method: {method}")
    cfg = _merged(config)

    try:
        resolve_anchor(tensor, anchor)
    except ZeroTensorError:
        logger.info("All observed entries are zero; returning zero factors")
        return zero_completion(tensor, "iterative" if method == "auto" else method)

    chain = ["iterative", "nuclear", "moment"] if method == "auto" else [method]
    attempts: list[dict[str, Any]] = []

    for name in chain:
        logger.debug(f"Trying method {name}")
        try:
            result = _RUNNERS[name](tensor, cfg, anchor)
        except CompletionDeferred as e:
            logger.info(f"↪️ {name} deferred: {e}")
            attempts.append(_deferral_record(name, e))
            continue
        return result.with_diagnostics(attempts=attempts) if attempts else result

    last = attempts[-1]
    return CompletionResult(
        status=STATUS_INCONCLUSIVE,
        method=method,
        symmetric=tensor.symmetric,
        message=last["message"],
        diagnostics={"attempts": attempts},
    )


def check_tensor(
    tensor: PartialTensor, nullspace_tol: float = 1e-8, anchor: Optional[Index3] = None
) -> CheckReport:
    """Minor-system size, nullspace dimension and graph connectivity of a partial tensor."""
    system = constraint_system(tensor)
    _, dim = nullspace(system, nullspace_tol)

    pairs = list(system.variables)
    if tensor.symmetric:
        pairs = sorted(set(pairs) | {(j, i) for i, j in pairs})
    connected = is_connected(BipartiteGraph.from_pairs(pairs))

    try:
        anchor_entry = resolve_anchor(tensor, anchor) if anchor is not None else anchor_index(tensor)
        anchor_one_based: Optional[Index3] = anchor_entry.one_based()
    except ZeroTensorError:
        anchor_one_based = None

    return CheckReport(
        dims=tensor.dims,
        symmetric=tensor.symmetric,
        observed=tensor.size,
        pairs=len(system.variables),
        minor_rows=system.shape[0],
        nullspace_dim=dim,
        connected=connected,
        strong=dim == 1 and connected,
        anchor=anchor_one_based,
        density=tensor.density,
    )


def complete_file(
    path: Path,
    method: str = "auto",
    config: Optional[SolverConfig] = None,
    symmetric: bool = False,
    anchor: Optional[Index3] = None,
) -> Union[CompletionResult, Order4Result]:
    """Load a tensor file and complete it; order-4 files go through the cubic reshape."""
    cfg = _merged(config)
    tensor = load_tensor_file(path, symmetric=symmetric, ordering=cfg["ordering"])
    logger.info(f"Loaded {path} ({len(tensor.entries)} observed entries)")

    if isinstance(tensor, HigherTensor):
        if anchor is not None:
            raise ValueError("--anchor applies to cubic tensors only")
        return complete_order4(tensor, cfg, method=method)

    result = complete_tensor(tensor, method=method, config=cfg, anchor=anchor)
    if result.completed:
        logger.info(f"✅ Completed with method {result.method} (residual {result.residual:.2e})")
    return result

