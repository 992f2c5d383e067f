"""Finite-difference oracle for Taylor coefficients.

Derivatives are taken with tensor-product central differences and refined
by Ridders' polynomial extrapolation, evaluating expressions pointwise. No
jet arithmetic is involved, so the results serve as an independent check of
the jet engine and of everything computed from it.
"""

import logging
import math
from itertools import product
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from models.geometry import BasePoint
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.exprlang import VARIABLES, Expr, evaluate
from webgeom.jets import multi_indices, n_coeffs

logger = logging.getLogger(__name__)

# Step reduction factor, tableau size and early-exit factor of the extrapolation
CON = 1.4
CON2 = CON * CON
NTAB = 10
SAFE = 2.0
MAX_STEP = 0.5

ScalarFunction = Callable[[np.ndarray], float]


def central_difference(func: ScalarFunction, x: np.ndarray, alpha: Sequence[int], h: float) -> float:
    """Mixed central difference ∂^α f(x) with step h in every variable.

    The k-th difference in one variable samples x + (k/2 − r)h for r = 0..k,
    so the error expansion has even powers of h only.
    """
    stencils = []
    for k in alpha:
        stencils.append([((-1) ** r * math.comb(k, r), (k / 2.0 - r) * h) for r in range(k + 1)])

    total = 0.0
    for combo in product(*stencils):
        weight = 1.0
        shift = np.zeros(len(alpha))
        for v, (w, offset) in enumerate(combo):
            weight *= w
            shift[v] = offset
        total += weight * func(x + shift)
    return total / h ** sum(alpha)


def ridders_derivative(
    func: ScalarFunction,
    x: np.ndarray,
    alpha: Sequence[int],
    h: float
) -> Tuple[float, float]:
    """Ridders extrapolation of a mixed central difference.

    Args:
        func: Scalar function of the coordinate vector
        x: Evaluation point
        alpha: Derivative multi-index
        h: Initial step; it should be a length over which func changes noticeably

    Returns:
        (derivative, error estimate)
    """
    if h == 0.0:
        raise ValueError("h must be nonzero")
    if sum(alpha) == 0:
        return float(func(x)), 0.0

    hh = h
    table = {(0, 0): central_difference(func, x, alpha, hh)}
    err = math.inf
    result = table[0, 0]
    for i in range(1, NTAB):
        hh /= CON
        table[0, i] = central_difference(func, x, alpha, hh)
        fac = CON2
        for j in range(1, i + 1):
            table[j, i] = (table[j - 1, i] * fac - table[j - 1, i - 1]) / (fac - 1.0)
            fac *= CON2
            errt = max(abs(table[j, i] - table[j - 1, i]), abs(table[j, i] - table[j - 1, i - 1]))
            if errt <= err:
                err = errt
                result = table[j, i]
        if abs(table[i, i] - table[i - 1, i - 1]) >= SAFE * err:
            break
    return float(result), float(err)


def initial_step(degree: int, step: float) -> float:
    """Starting step for a derivative of the given total degree."""
    return min(MAX_STEP, step * 10.0 ** (degree - 1))


def expression_function(expr: Expr) -> ScalarFunction:
    """Pointwise evaluator of an expression over (x1, x2, y1, y2)."""
    def func(coords: np.ndarray) -> float:
        return evaluate(expr, dict(zip(VARIABLES, (float(c) for c in coords))))
    return func


def oracle_coefficients(
    func: ScalarFunction,
    point: BasePoint,
    order: int,
    step: float = 1e-3
) -> Tuple[np.ndarray, np.ndarray]:
    """Taylor coefficients ∂^α f / α! by finite differences.

    Returns:
        (coefficients, error estimates), both in jet coefficient order
    """
    x = np.array(point.as_tuple(), dtype=float)
    coeffs = np.zeros(n_coeffs(order))
    errors = np.zeros(n_coeffs(order))
    for idx, alpha in enumerate(multi_indices(order)):
        derivative, err = ridders_derivative(func, x, alpha, initial_step(sum(alpha), step))
        factorial = float(np.prod([math.factorial(k) for k in alpha]))
        coeffs[idx] = derivative / factorial
        errors[idx] = err / factorial
    return coeffs, errors


def oracle_jet(
    expr: Expr,
    point: BasePoint,
    order: int,
    config: Optional[AnalysisConfig] = None
) -> np.ndarray:
    """Finite-difference stand-in for ``jet_lift(expr, point, order).coeffs``.

    Raises:
        SingularEvaluationError: If the expression cannot be evaluated near the point
    """
    config = config or get_default_config()
    coeffs, errors = oracle_coefficients(expression_function(expr), point, order, config.oracle_step)
    logger.debug(f"Oracle jet at ({point}), order {order}: max error estimate {errors.max():.2e}")
    return coeffs
