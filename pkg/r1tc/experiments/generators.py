"""Random rank-1 instances for experiments.

Factor entries have magnitude uniform on [0.1, 1] and a random sign. Each
generator draws from numpy's default_rng seeded with (seed, stream) so that
factors and index sets of one trial are independent but reproducible.
"""

import logging
import math
from dataclasses import dataclass
from itertools import permutations, product
from typing import Optional

import numpy as np

from r1tc.methods.reduction import constraint_system, nullspace
from r1tc.tensors.models import Index3, PartialTensor

logger = logging.getLogger(__name__)

# Smallest factor magnitude drawn by gen_rank1
MAGNITUDE_FLOOR = 0.1

FACTOR_STREAM = 0
OMEGA_STREAM = 1
STRONG_STREAM = 2


@dataclass(frozen=True)
class RankOneFactors:
    """Generating factors of a rank-1 tensor."""
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    symmetric: bool = False

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.a.size, self.b.size, self.c.size)

    def value(self, index: Index3) -> float:
        i, j, k = index
        return float(self.a[i] * self.b[j] * self.c[k])

    def sample(self, omega: list[Index3]) -> PartialTensor:
        """Partial tensor observed on omega."""
        return PartialTensor(self.dims, {index: self.value(index) for index in omega}, symmetric=self.symmetric)


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng((int(seed), int(stream)))


def _factor(rng: np.random.Generator, n: int) -> np.ndarray:
    magnitude = rng.uniform(MAGNITUDE_FLOOR, 1.0, size=n)
    sign = rng.choice([-1.0, 1.0], size=n)
    return magnitude * sign


def gen_rank1(n1: int, n2: int, n3: int, seed: int, symmetric: bool = False) -> RankOneFactors:
    """Seeded factors; symmetric tensors share a single v."""
    if min(n1, n2, n3) < 1:
        raise ValueError(f"dims must be positive, got {(n1, n2, n3)}")
    rng = rng_for(seed, FACTOR_STREAM)
    if symmetric:
        if len({n1, n2, n3}) != 1:
            raise ValueError("symmetric factors need equal dims")
        v = _factor(rng, n1)
        return RankOneFactors(v, v.copy(), v.copy(), symmetric=True)
    return RankOneFactors(_factor(rng, n1), _factor(rng, n2), _factor(rng, n3))


def omega_size(dims: tuple[int, int, int], density: float) -> int:
    """ceil(density * n1 n2 n3), robust to float noise in the product."""
    total = dims[0] * dims[1] * dims[2]
    return min(total, math.ceil(round(density * total, 9)))


def gen_omega(dims: tuple[int, int, int], density: float, seed: int, symmetric: bool = False) -> list[Index3]:
    """Uniform index set of ceil(density * n1 n2 n3) triples.

    Symmetric mode draws unordered triples and closes them under permutation,
    stopping once the closed set reaches the target size.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = rng_for(seed, OMEGA_STREAM)
    target = omega_size(dims, density)

    if not symmetric:
        universe = list(product(*(range(n) for n in dims)))
        chosen = rng.choice(len(universe), size=target, replace=False)
        return sorted(universe[c] for c in chosen)

    n = dims[0]
    if len(set(dims)) != 1:
        raise ValueError("symmetric index sets need equal dims")
    unordered = [(i, j, k) for i in range(n) for j in range(i, n) for k in range(j, n)]
    order = rng.permutation(len(unordered))
    omega: set[Index3] = set()
    for position in order:
        if len(omega) >= target:
            break
        omega.update(permutations(unordered[position]))
    return sorted(omega)


def gen_instance(
    n: int, density: float, seed: int, symmetric: bool = False
) -> tuple[PartialTensor, RankOneFactors]:
    """Random rank-1 n x n x n tensor observed on a random index set."""
    factors = gen_rank1(n, n, n, seed, symmetric)
    omega = gen_omega((n, n, n), density, seed, symmetric)
    return factors.sample(omega), factors


def strong_pairs(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Two interleaved chains of edges covering all rows and columns."""
    rows = rng.permutation(n)
    cols = rng.permutation(n)
    pairs = [(int(rows[0]), int(cols[0]))]
    for step in range(1, n):
        pairs.append((int(rows[step]), int(cols[step - 1])))
        pairs.append((int(rows[step - 1]), int(cols[step])))
    return pairs


def gen_strong_instance(
    n: int, seed: int, factors: Optional[RankOneFactors] = None, tol: float = 1e-8
) -> PartialTensor:
    """Strongly rank-1 completable instance over a connected chain graph.

    Each chain pair gets one random slice; further triples over the same pairs
    are added until the minor nullspace is one-dimensional.
    """
    if n < 2:
        raise ValueError(f"strong instances need n >= 2, got {n}")
    rng = rng_for(seed, STRONG_STREAM)
    factors = factors or gen_rank1(n, n, n, seed)
    pairs = strong_pairs(n, rng)

    omega = {(i, j, int(rng.integers(n))) for i, j in pairs}
    tensor = factors.sample(sorted(omega))
    _, dim = nullspace(constraint_system(tensor), tol)

    while dim > 1 and len(omega) < len(pairs) * n:
        i, j = pairs[int(rng.integers(len(pairs)))]
        free_slices = [k for k in range(n) if (i, j, k) not in omega]
        if not free_slices:
            continue
        omega.add((i, j, int(rng.choice(free_slices))))
        tensor = factors.sample(sorted(omega))
        _, dim = nullspace(constraint_system(tensor), tol)

    logger.debug(f"Strong instance n={n}: {len(omega)} entries over {len(pairs)} pairs")
    return tensor
