"""Markdown reports for experiment runs and density sweeps."""

import logging
from pathlib import Path
from typing import Optional, Sequence

from r1tc.experiments.runner import ExperimentReport
from r1tc.utils.file_utils import REPORT_SUFFIXES, write_text
from r1tc.utils.markdown_utils import create_table, get_timestamp, render_frontmatter

logger = logging.getLogger(__name__)


def render_experiment_report(
    report: ExperimentReport,
    sweep: Optional[Sequence[ExperimentReport]] = None,
    minimum_density: Optional[float] = None,
) -> str:
    """Render a run (and optionally its density sweep) as Markdown with YAML frontmatter.

    Args:
        report: Report of the run shown in the per-trial table
        sweep: All reports of a density sweep, in density order
        minimum_density: Smallest swept density reaching the success target

    Returns:
        Markdown document
    """
    cfg = report.config
    metadata = {
        "title": f"Rank-1 completion experiment ({cfg.mode}, n={cfg.n})",
        "type": "experiment",
        "generated_at": get_timestamp(),
        "mode": cfg.mode,
        "n": cfg.n,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "instances": "strong" if cfg.uses_strong_instances else "random",
        "density": cfg.density,
        "den": round(report.den, 6),
        "rho": round(report.rho, 6),
        "success_rate": report.success_rate,
        "mean_time": round(report.mean_time, 6),
    }
    if minimum_density is not None:
        metadata["minimum_density"] = minimum_density

    content = [render_frontmatter(metadata)]
    content.append(f"# Experiment: {cfg.mode}, n = {cfg.n}\n")
    content.append(f"**Trials:** {cfg.trials}\n")
    content.append(f"**Success rate:** {report.success_rate:.0%}\n")
    content.append(f"**den:** {report.den:.2%}  **rho:** {report.rho:.2f}\n")
    content.append(f"**Mean time:** {report.mean_time:.3f} s\n\n")

    if sweep:
        content.append("## 📈 Density Sweep\n\n")
        rows = [
            [f"{r.config.density:.0%}", r.den, r.rho, f"{r.success_rate:.0%}", r.mean_time]
            for r in sweep
        ]
        content.append(create_table(["Density", "den", "rho", "Success", "Mean time (s)"], rows))
        content.append("\n\n")
        if minimum_density is None:
            content.append("No swept density reached the success target.\n\n")
        else:
            content.append(f"Minimum density reaching the success target: **{minimum_density:.0%}**\n\n")

    content.append("## 🧪 Trials\n\n")
    trial_rows = [
        [t.index, t.seed, t.observed, t.status, "" if t.residual is None else t.residual, t.time]
        for t in report.trials
    ]
    content.append(create_table(["Trial", "Seed", "Observed", "Status", "Residual", "Time (s)"], trial_rows))
    content.append("\n")
    return "\n".join(content)


def write_experiment_report(
    path: Path,
    report: ExperimentReport,
    sweep: Optional[Sequence[ExperimentReport]] = None,
    minimum_density: Optional[float] = None,
) -> Path:
    """Write the Markdown report; a path without a Markdown suffix gets ".md" appended."""
    path = Path(path)
    if path.suffix.lower() not in REPORT_SUFFIXES:
        path = path.with_name(path.name + ".md")
    write_text(path, render_experiment_report(report, sweep, minimum_density))
    logger.info(f"📝 Experiment report written to {path}")
    return path
