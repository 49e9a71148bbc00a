"""Plain-text dump of SDP problems for cross-checking against external solvers.

Layout (all matrices row-major, one matrix row per line):

    vars <m>
    equalities <p>
    blocks <s_1> <s_2> ...
    objective
    <m values>
    block <b> constant
    <s_b rows>
    block <b> coefficient <i>
    <s_b rows>
    equality <r>
    <m coefficients> | <rhs>

Zero coefficient matrices are skipped. The format is for debugging only.
"""

import logging
from pathlib import Path
from typing import Iterator

import numpy as np

from r1tc.sdp.models import SdpProblem
from r1tc.utils.file_utils import content_digest, write_text

logger = logging.getLogger(__name__)


def dump_problem(problem: SdpProblem) -> str:
    """Render a problem in the plain-text block format."""
    return "\n".join(_dump_lines(problem)) + "\n"


def write_dump(problem: SdpProblem, directory: Path, name: str) -> Path:
    """Write a dump named <name>-<digest>.sdp into directory."""
    text = dump_problem(problem)
    path = Path(directory) / f"{name}-{content_digest(text)}.sdp"
    write_text(path, text)
    logger.info(f"📝 Dumped SDP problem to {path}")
    return path


def _dump_lines(problem: SdpProblem) -> Iterator[str]:
    yield f"vars {problem.num_vars}"
    yield f"equalities {problem.num_equalities}"
    yield "blocks " + " ".join(str(block.size) for block in problem.blocks)
    yield "objective"
    yield _row(problem.objective)

    for number, block in enumerate(problem.blocks, start=1):
        yield f"block {number} constant"
        yield from (_row(row) for row in block.constant)
        for i in range(problem.num_vars):
            matrix = block.coefficient(i)
            if not np.any(matrix):
                continue
            yield f"block {number} coefficient {i + 1}"
            yield from (_row(row) for row in matrix)

    for r, (row, rhs) in enumerate(zip(problem.eq_matrix, problem.eq_rhs), start=1):
        yield f"equality {r}"
        yield f"{_row(row)} | {float(rhs)!r}"


def _row(values) -> str:
    return " ".join(f"{float(x)!r}" for x in values)
