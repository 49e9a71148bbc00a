"""CLI interface for r1tc."""

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from r1tc import __version__
from r1tc.config import (
    EXIT_ERROR,
    EXIT_INCONCLUSIVE,
    EXIT_NO_COMPLETION,
    EXIT_OK,
    EXPERIMENT_MODES,
    METHODS,
    load_config,
)
from r1tc.tensors.models import STATUS_COMPLETED, STATUS_NO_COMPLETION

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format="%(levelname)s: %(message)s",
)
logger = logging.getLogger(__name__)

ORDERING_CHOICES = {"row": "row_major", "col": "col_major", "row_major": "row_major", "col_major": "col_major"}
FILL_CHOICES = {"zero": "zero_fill", "zero_fill": "zero_fill", "complete": "complete"}
EXIT_CODES = {STATUS_COMPLETED: EXIT_OK, STATUS_NO_COMPLETION: EXIT_NO_COMPLETION}


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="YAML file with solver settings",
)
@click.pass_context
def cli(ctx, verbose, config_path):
    """Rank-1 completion of partially observed tensors."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config_path"] = config_path
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--method", "-m", type=click.Choice(METHODS), default="auto", help="Completion method (default: auto)")
@click.option("--symmetric", is_flag=True, help="Treat the tensor as symmetric")
@click.option("--tol", type=float, default=None, help="Residual tolerance (default: 1e-6)")
@click.option("--rank-tol", type=float, default=None, help="Numerical rank threshold (default: 1e-6)")
@click.option("--max-level", type=int, default=None, help="Highest moment relaxation level (default: 4)")
@click.option("--seed", type=int, default=None, help="Seed of the moment objective (default: 0)")
@click.option("--out", type=click.Choice(["text", "json"]), default="text", help="Output format")
@click.option("--ordering", type=click.Choice(sorted(ORDERING_CHOICES)), default=None,
              help="Flattening of order-4 modes (default: col)")
@click.option("--fill", type=click.Choice(sorted(FILL_CHOICES)), default=None,
              help="Free third-factor entries of order-4 tensors (default: complete)")
@click.option("--anchor", type=str, default=None, help="Anchor entry i,j,k (1-based)")
@click.option("--dump-sdp", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Write every SDP built to this directory")
@click.pass_context
def complete(ctx, path: Path, method: str, symmetric: bool, tol, rank_tol, max_level, seed, out: str,
             ordering, fill, anchor, dump_sdp):
    """Find a rank-1 completion of a partial tensor.

    PATH: Tensor file ("dims n1 n2 n3 [symmetric]" header, "i j k value" lines)
    """
    verbose = ctx.obj.get("verbose", False)

    # Import here to avoid slow startup for --help
    from r1tc.pipeline import complete_file

    try:
        config = load_config(ctx.obj.get("config_path"), {
            "tol": tol,
            "rank_tol": rank_tol,
            "max_level": max_level,
            "seed": seed,
            "ordering": ORDERING_CHOICES.get(ordering) if ordering else None,
            "fill": FILL_CHOICES.get(fill) if fill else None,
            "dump_dir": str(dump_sdp) if dump_sdp else None,
        })
        result = complete_file(path, method, config, symmetric=symmetric, anchor=_parse_anchor(anchor))
    except Exception as e:
        logger.error(f"Complete failed: {e}")
        if verbose:
            raise
        sys.exit(EXIT_ERROR)

    if out == "json":
        click.echo(json.dumps(result.to_dict(), indent=2))
    else:
        click.echo(_format_result(result))
    sys.exit(EXIT_CODES.get(result.status, EXIT_INCONCLUSIVE))


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--symmetric", is_flag=True, help="Treat the tensor as symmetric")
@click.option("--out", type=click.Choice(["text", "json"]), default="text", help="Output format")
@click.pass_context
def check(ctx, path: Path, symmetric: bool, out: str):
    """Report the minor system and strong completability of a cubic tensor.

    PATH: Tensor file
    """
    verbose = ctx.obj.get("verbose", False)

    from r1tc.pipeline import check_tensor
    from r1tc.tensors.models import PartialTensor
    from r1tc.tensors.tensor_io import load_tensor_file

    try:
        config = load_config(ctx.obj.get("config_path"))
        tensor = load_tensor_file(path, symmetric=symmetric)
        if not isinstance(tensor, PartialTensor):
            raise ValueError("check applies to cubic tensors only")
        report = check_tensor(tensor, nullspace_tol=config["nullspace_tol"])
    except Exception as e:
        logger.error(f"Check failed: {e}")
        if verbose:
            raise
        sys.exit(EXIT_ERROR)

    if out == "json":
        click.echo(json.dumps(report.to_dict(), indent=2))
        return

    n1, n2, n3 = report.dims
    lines = [
        f"dims: {n1} x {n2} x {n3}{' (symmetric)' if report.symmetric else ''}",
        f"observed entries: {report.observed} (density {report.density:.2%})",
        f"observed pairs (i, j): {report.pairs}",
        f"minor system: {report.minor_rows} x {report.pairs}",
        f"nullspace dimension: {report.nullspace_dim}",
        f"bipartite graph connected: {'yes' if report.connected else 'no'}",
        f"anchor: {report.anchor if report.anchor else 'none (all observed entries are zero)'}",
        f"strongly rank-1 completable: {'yes' if report.strong else 'no'}",
    ]
    click.echo("\n".join(lines))


@cli.command()
@click.option("--mode", type=click.Choice(EXPERIMENT_MODES), required=True, help="Method under test")
@click.option("--n", "n", type=int, required=True, help="Tensor dimension n1 = n2 = n3")
@click.option("--density", type=float, default=None, help="Fraction of observed entries")
@click.option("--strong", is_flag=True, help="Use strongly rank-1 completable instances")
@click.option("--sweep", type=str, default=None, help="Comma-separated densities, e.g. 0.3,0.35,0.4")
@click.option("--trials", type=int, default=20, help="Instances per configuration (default: 20)")
@click.option("--seed", type=int, default=0, help="Base seed; trial t uses seed + t")
@click.option("--tol", type=float, default=None, help="Residual tolerance for success (default: 1e-6)")
@click.option("--workers", type=int, default=1, help="Worker processes (default: 1)")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write a Markdown report to this file")
@click.option("--out", type=click.Choice(["text", "json"]), default="text", help="Output format")
@click.pass_context
def experiment(ctx, mode, n, density, strong, sweep, trials, seed, tol, workers, report_path, out):
    """Run seeded random trials of a method and report its success rate."""
    verbose = ctx.obj.get("verbose", False)

    from r1tc.experiments.report_generator import write_experiment_report
    from r1tc.experiments.runner import ExperimentConfig, density_sweep, parse_densities, run_experiment

    if sweep and strong:
        logger.error("--sweep needs random index sets and cannot be combined with --strong")
        sys.exit(EXIT_ERROR)

    try:
        solver = load_config(ctx.obj.get("config_path"), {"tol": tol})
        densities = parse_densities(sweep) if sweep else None
        cfg = ExperimentConfig(
            mode=mode,
            n=n,
            density=densities[0] if densities else density,
            strong=strong,
            trials=trials,
            seed=seed,
            workers=workers,
            solver=solver,
        )
        if densities:
            reports, minimum = density_sweep(cfg, densities)
            report = next((r for r in reports if r.config.density == minimum), reports[-1])
        else:
            reports, minimum = None, None
            report = run_experiment(cfg)
        if report_path:
            write_experiment_report(report_path, report, reports, minimum)
    except Exception as e:
        logger.error(f"Experiment failed: {e}")
        if verbose:
            raise
        sys.exit(EXIT_ERROR)

    if out == "json":
        data = report.to_dict()
        if reports:
            data["sweep"] = [
                {"density": r.config.density, "success_rate": r.success_rate, "den": r.den,
                 "rho": r.rho, "mean_time": r.mean_time}
                for r in reports
            ]
            data["minimum_density"] = minimum
        click.echo(json.dumps(data, indent=2))
        return

    if reports:
        for r in reports:
            click.echo(f"density {r.config.density:.0%}: success {r.success_rate:.0%}, "
                       f"den {r.den:.2%}, rho {r.rho:.2f}, mean time {r.mean_time:.3f}s")
        if minimum is None:
            click.echo("minimum density for 90% success: not reached")
        else:
            click.echo(f"minimum density for 90% success: {minimum:.0%}")
    else:
        click.echo(f"mode {mode}, n = {n}: success rate {report.success_rate:.0%} over {trials} trials")
        click.echo(f"den {report.den:.2%}, rho {report.rho:.2f}, mean time {report.mean_time:.3f}s")


def _parse_anchor(text: Optional[str]) -> Optional[tuple[int, int, int]]:
    """"i,j,k" (1-based) to a 0-based index."""
    if not text:
        return None
    try:
        values = tuple(int(part) - 1 for part in text.split(","))
    except ValueError:
        raise click.BadParameter(f"anchor must be i,j,k, got '{text}'") from None
    if len(values) != 3 or min(values) < 0:
        raise click.BadParameter(f"anchor must be three positive indices, got '{text}'")
    return values


def _format_result(result) -> str:
    """Human-readable summary of a CompletionResult or Order4Result."""
    from r1tc.utils.markdown_utils import format_vector

    lines = [f"status: {result.status}"]
    method = result.cubic.method if hasattr(result, "cubic") else result.method
    lines.append(f"method: {method}")

    if result.status == STATUS_NO_COMPLETION and method == "moment":
        lines.append("certified infeasible (numerical)")

    if result.status == STATUS_COMPLETED:
        for name in ("a", "b", "c", "d"):
            vector = getattr(result, name, None)
            if vector is not None:
                lines.append(f"{name} = {format_vector(vector)}")
        if getattr(result, "symmetric", False) and result.v is not None:
            lines.append(f"v = {format_vector(result.v)}")
            lines.append(f"tau = {result.tau:.6g}")
        lines.append(f"residual: {result.residual:.3e}")
        if getattr(result, "level", None):
            lines.append(f"moment level: {result.level}")

    if result.message:
        lines.append(f"message: {result.message}")

    for attempt in result.diagnostics.get("attempts", []):
        line = f"deferred {attempt['method']}: {attempt['reason']}"
        if "numerical_rank" in attempt:
            spectrum = ", ".join(f"{s:.3g}" for s in attempt["spectrum"][:6])
            line += f" (numerical rank {attempt['numerical_rank']}, spectrum {spectrum})"
        lines.append(line)
    return "\n".join(lines)


if __name__ == "__main__":
    cli()
