"""Monomial bases in graded lexicographic order and sparse polynomials.

A polynomial is a dict from exponent tuples to coefficients. Bases list the
exponents of degree <= d degree by degree; inside a degree the order is the
one of combinations_with_replacement, so for two variables the degree-2 part
reads x1^2, x1 x2, x2^2.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Iterable, Optional

import numpy as np

Exponent = tuple[int, ...]
Polynomial = dict[Exponent, float]


@dataclass(frozen=True)
class MonomialBasis:
    """Exponents of N^n_d in graded lexicographic order with a reverse lookup."""
    num_vars: int
    degree: int
    exponents: tuple[Exponent, ...] = field(default=(), repr=False)
    index: dict[Exponent, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.num_vars < 0 or self.degree < 0:
            raise ValueError(f"invalid basis ({self.num_vars} vars, degree {self.degree})")
        if not self.exponents:
            object.__setattr__(self, "exponents", _grlex(self.num_vars, self.degree))
        object.__setattr__(self, "index", {alpha: n for n, alpha in enumerate(self.exponents)})

    def __len__(self) -> int:
        return len(self.exponents)

    def position(self, alpha: Exponent) -> int:
        return self.index[alpha]

    def size_up_to(self, degree: int) -> int:
        """Length of the leading part of degree <= degree."""
        return comb(self.num_vars + degree, degree)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Vector of x^alpha over the basis."""
        x = np.asarray(x, dtype=float)
        if self.num_vars == 0:
            return np.ones(len(self))
        powers = np.array(self.exponents, dtype=int)
        return np.prod(x[None, :] ** powers, axis=1)


@lru_cache(maxsize=32)
def _grlex(num_vars: int, degree: int) -> tuple[Exponent, ...]:
    exponents: list[Exponent] = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(num_vars), d):
            alpha = [0] * num_vars
            for var in combo:
                alpha[var] += 1
            exponents.append(tuple(alpha))
    return tuple(exponents)


def moment_index(basis: MonomialBasis, half_degree: int) -> np.ndarray:
    """Positions in basis of alpha + beta for alpha, beta of degree <= half_degree.

    Raises:
        ValueError: basis degree below 2 * half_degree
    """
    if basis.degree < 2 * half_degree:
        raise ValueError(f"basis of degree {basis.degree} cannot index M_{half_degree}")
    rows = basis.exponents[: basis.size_up_to(half_degree)]
    size = len(rows)
    index = np.empty((size, size), dtype=int)
    for p, alpha in enumerate(rows):
        for q in range(p, size):
            position = basis.index[add_exponents(alpha, rows[q])]
            index[p, q] = index[q, p] = position
    return index


# ─── Polynomial arithmetic ─────────────────────────────────────────


def add_exponents(alpha: Exponent, beta: Exponent) -> Exponent:
    return tuple(a + b for a, b in zip(alpha, beta))


def unit_exponent(num_vars: int, var: int) -> Exponent:
    alpha = [0] * num_vars
    alpha[var] = 1
    return tuple(alpha)


def constant(num_vars: int, value: float = 1.0) -> Polynomial:
    return {(0,) * num_vars: float(value)}


def variable(num_vars: int, var: int) -> Polynomial:
    return {unit_exponent(num_vars, var): 1.0}


def poly_add(*polys: Polynomial) -> Polynomial:
    total: Polynomial = {}
    for poly in polys:
        for alpha, coef in poly.items():
            total[alpha] = total.get(alpha, 0.0) + coef
    return total


def poly_scale(poly: Polynomial, factor: float) -> Polynomial:
    return {alpha: factor * coef for alpha, coef in poly.items()}


def poly_multiply(left: Polynomial, right: Polynomial) -> Polynomial:
    product: Polynomial = {}
    for alpha, a in left.items():
        for beta, b in right.items():
            gamma = add_exponents(alpha, beta)
            product[gamma] = product.get(gamma, 0.0) + a * b
    return product


def poly_clean(poly: Polynomial, rtol: float = 1e-12, scale: Optional[float] = None) -> Polynomial:
    """Drop coefficients below rtol * scale (default: the largest magnitude)."""
    if not poly:
        return {}
    if scale is None:
        scale = max(abs(coef) for coef in poly.values())
    return {alpha: coef for alpha, coef in poly.items() if abs(coef) > rtol * scale}


def poly_degree(poly: Polynomial) -> int:
    """Total degree; -1 for the zero polynomial."""
    return max((sum(alpha) for alpha, coef in poly.items() if coef != 0.0), default=-1)


def poly_evaluate(poly: Polynomial, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    total = 0.0
    for alpha, coef in poly.items():
        total += coef * float(np.prod(x ** np.array(alpha, dtype=int))) if alpha else coef
    return total


def poly_derivative(poly: Polynomial, var: int) -> Polynomial:
    derivative: Polynomial = {}
    for alpha, coef in poly.items():
        power = alpha[var]
        if power == 0:
            continue
        lowered = alpha[:var] + (power - 1,) + alpha[var + 1:]
        derivative[lowered] = derivative.get(lowered, 0.0) + power * coef
    return derivative


def pairing_row(poly: Polynomial, shift: Exponent, basis: MonomialBasis) -> dict[int, float]:
    """Coefficients of <poly * x^shift, y> as a sparse row over basis positions."""
    row: dict[int, float] = {}
    for alpha, coef in poly.items():
        position = basis.index[add_exponents(alpha, shift)]
        row[position] = row.get(position, 0.0) + coef
    return row


def poly_from_quadratic(Q: np.ndarray, g: np.ndarray, c0: float) -> Polynomial:
    """Polynomial x^T Q x + g^T x + c0."""
    n = len(g)
    poly: Polynomial = constant(n, c0)
    for i in range(n):
        if g[i]:
            poly[unit_exponent(n, i)] = float(g[i])
        for j in range(i, n):
            coef = Q[i, i] if i == j else Q[i, j] + Q[j, i]
            if coef:
                poly[add_exponents(unit_exponent(n, i), unit_exponent(n, j))] = float(coef)
    return poly


def basis_size(num_vars: int, degree: int) -> int:
    return comb(num_vars + degree, degree)


def monomial_moments(points: Iterable[np.ndarray], basis: MonomialBasis, weights=None) -> np.ndarray:
    """Moment vector of a finite atomic measure."""
    points = [np.asarray(p, dtype=float) for p in points]
    weights = np.full(len(points), 1.0 / len(points)) if weights is None else np.asarray(weights, dtype=float)
    return sum(w * basis.evaluate(p) for w, p in zip(weights, points))
