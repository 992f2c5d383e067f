"""Truncated Taylor (jet) arithmetic in the four base variables.

A jet of order k stores the Taylor coefficients ``c[α] = ∂^α g / α!`` of a
scalar g at the base point for every multi-index |α| ≤ k, densely, in a fixed
enumeration sorted by total degree. Because of that ordering, truncating to a
lower order is a prefix slice.

Two layers are provided:

* ``Jet``: a scalar jet with operator overloading, used to lift expressions.
* jet arrays: numpy arrays whose last axis holds the coefficients. They carry
  the tensor algebra of the coframe computations. ``jet_einsum`` contracts
  tensor indices while multiplying the series.

Variable slots are ordered (x1, x2, y1, y2).
"""

import logging
import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from models.geometry import BasePoint
from webgeom.base.errors import SingularEvaluationError, SingularMatrixError
from webgeom.exprlang import BinOp, Call, Expr, Neg, Num, Pow, Var, VARIABLES, to_text

logger = logging.getLogger(__name__)

NVARS = 4
MAX_ORDER = 8

MultiIndex = Tuple[int, int, int, int]


@lru_cache(maxsize=None)
def multi_indices(order: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices of total degree ≤ order, sorted by degree then lexicographically."""
    result: List[MultiIndex] = []
    for degree in range(order + 1):
        block = []
        for combo in combinations_with_replacement(range(NVARS), degree):
            alpha = [0] * NVARS
            for var in combo:
                alpha[var] += 1
            block.append(tuple(alpha))
        result.extend(sorted(block, reverse=True))
    return tuple(result)


def n_coeffs(order: int) -> int:
    """Number of coefficients of a jet of the given order."""
    return math.comb(order + NVARS, NVARS)


_ORDER_BY_SIZE: Dict[int, int] = {n_coeffs(k): k for k in range(MAX_ORDER + 1)}


@lru_cache(maxsize=None)
def index_of(order: int) -> Dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(multi_indices(order))}


def order_of(arr: np.ndarray) -> int:
    """Truncation order of a jet array, read from the length of its last axis."""
    try:
        return _ORDER_BY_SIZE[arr.shape[-1]]
    except (KeyError, IndexError):
        raise ValueError(f"array of shape {arr.shape} is not a jet array") from None


@lru_cache(maxsize=None)
def product_tensor(order: int) -> np.ndarray:
    """Bilinear table T with T[a, b, c] = 1 iff α_a + α_b = α_c."""
    basis = multi_indices(order)
    lookup = index_of(order)
    size = len(basis)
    table = np.zeros((size, size, size))
    for a, alpha in enumerate(basis):
        for b, beta in enumerate(basis):
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            c = lookup.get(gamma)
            if c is not None:
                table[a, b, c] = 1.0
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def derivative_matrix(var: int, order: int) -> np.ndarray:
    """Matrix mapping order-k coefficients of g to order-(k-1) coefficients of ∂g/∂var."""
    lower = multi_indices(order - 1)
    lookup = index_of(order)
    matrix = np.zeros((n_coeffs(order), len(lower)))
    for j, beta in enumerate(lower):
        alpha = list(beta)
        alpha[var] += 1
        matrix[lookup[tuple(alpha)], j] = beta[var] + 1
    matrix.setflags(write=False)
    return matrix


def truncate(arr: np.ndarray, order: int) -> np.ndarray:
    """Drop coefficients above the given order."""
    return arr[..., :n_coeffs(order)]


def common_order(*arrays: np.ndarray) -> int:
    return min(order_of(a) for a in arrays)


def jet_add(*arrays: np.ndarray) -> np.ndarray:
    """Sum of jet arrays, truncated to their lowest order."""
    order = common_order(*arrays)
    total = truncate(arrays[0], order).copy()
    for arr in arrays[1:]:
        total = total + truncate(arr, order)
    return total


def jet_sub(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    order = common_order(x, y)
    return truncate(x, order) - truncate(y, order)


def jet_einsum(subscripts: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Contract two jet arrays over tensor indices, multiplying their series.

    Subscripts name tensor axes only (lowercase letters), e.g. ``"ij,jk->ik"``;
    the coefficient axes are handled internally.
    """
    inputs, output = subscripts.split("->")
    sx, sy = inputs.split(",")
    order = common_order(x, y)
    return np.einsum(
        f"{sx}A,{sy}B,ABC->{output}C",
        truncate(x, order), truncate(y, order), product_tensor(order),
        optimize=True,
    )


def jet_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise product of broadcastable jet arrays."""
    order = common_order(x, y)
    return np.einsum(
        "...A,...B,ABC->...C",
        truncate(x, order), truncate(y, order), product_tensor(order),
        optimize=True,
    )


def jet_derivative(arr: np.ndarray, var: int) -> np.ndarray:
    """Partial derivative along base variable ``var``; the order drops by one."""
    return arr @ derivative_matrix(var, order_of(arr))


def jet_gradient(arr: np.ndarray) -> np.ndarray:
    """Stack of the four partial derivatives on a new axis before the coefficients."""
    return np.stack([jet_derivative(arr, v) for v in range(NVARS)], axis=-2)


def constant_array(values: np.ndarray, order: int) -> np.ndarray:
    """Embed numeric values as constant jets."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(values.shape + (n_coeffs(order),))
    out[..., 0] = values
    return out


def _series(coeffs: np.ndarray, taylor: Sequence[float]) -> np.ndarray:
    """Compose a scalar jet with a univariate series Σ taylor[k] h^k around its value."""
    order = order_of(coeffs)
    h = coeffs.copy()
    h[0] = 0.0
    result = np.zeros_like(coeffs)
    result[0] = taylor[0]
    power = np.zeros_like(coeffs)
    power[0] = 1.0
    for k in range(1, order + 1):
        power = jet_mul(power, h)
        result = result + taylor[k] * power
    return result


class Jet:
    """Scalar truncated Taylor series at a base point."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)
        order_of(self.coeffs)

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        return cls(constant_array(value, order))

    @classmethod
    def variable(cls, var: int, value: float, order: int) -> "Jet":
        coeffs = constant_array(value, order)
        if order >= 1:
            alpha = [0] * NVARS
            alpha[var] = 1
            coeffs[index_of(order)[tuple(alpha)]] = 1.0
        return cls(coeffs)

    @property
    def order(self) -> int:
        return order_of(self.coeffs)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, alpha: MultiIndex) -> float:
        """Taylor coefficient ∂^α g / α!."""
        return float(self.coeffs[index_of(self.order)[tuple(alpha)]])

    def partial(self, alpha: MultiIndex) -> float:
        """Partial derivative ∂^α g at the base point."""
        factor = math.prod(math.factorial(a) for a in alpha)
        return factor * self.coefficient(alpha)

    def truncate(self, order: int) -> "Jet":
        return Jet(truncate(self.coeffs, order))

    def derivative(self, var: int) -> "Jet":
        return Jet(jet_derivative(self.coeffs, var))

    @staticmethod
    def _coerce(other, order: int) -> np.ndarray:
        if isinstance(other, Jet):
            return other.coeffs
        return constant_array(float(other), order)

    def __add__(self, other) -> "Jet":
        return Jet(jet_add(self.coeffs, self._coerce(other, self.order)))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return Jet(jet_sub(self.coeffs, self._coerce(other, self.order)))

    def __rsub__(self, other) -> "Jet":
        return Jet(jet_sub(self._coerce(other, self.order), self.coeffs))

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs)

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return Jet(jet_mul(self.coeffs, other.coeffs))
        return Jet(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coeffs / float(other))

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * float(other)

    def __pow__(self, exponent: int) -> "Jet":
        if exponent < 0:
            return self.reciprocal() ** (-exponent)
        result = Jet.constant(1.0, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def reciprocal(self, pivot_tol: float = 0.0) -> "Jet":
        u0 = self.value
        if abs(u0) <= pivot_tol or u0 == 0.0:
            raise SingularEvaluationError(f"division by {u0!r}", {"value": u0})
        taylor = [(-1.0) ** k / u0 ** (k + 1) for k in range(self.order + 1)]
        return Jet(_series(self.coeffs, taylor))

    def exp(self) -> "Jet":
        e0 = math.exp(self.value)
        return Jet(_series(self.coeffs, [e0 / math.factorial(k) for k in range(self.order + 1)]))

    def log(self) -> "Jet":
        u0 = self.value
        if u0 <= 0.0:
            raise SingularEvaluationError(f"log of non-positive value {u0!r}", {"value": u0})
        taylor = [math.log(u0)] + [(-1.0) ** (k + 1) / (k * u0 ** k) for k in range(1, self.order + 1)]
        return Jet(_series(self.coeffs, taylor))

    def sin(self) -> "Jet":
        u0 = self.value
        taylor = [math.sin(u0 + k * math.pi / 2) / math.factorial(k) for k in range(self.order + 1)]
        return Jet(_series(self.coeffs, taylor))

    def cos(self) -> "Jet":
        u0 = self.value
        taylor = [math.cos(u0 + k * math.pi / 2) / math.factorial(k) for k in range(self.order + 1)]
        return Jet(_series(self.coeffs, taylor))

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, value={self.value!r})"


_FUNCTIONS: Dict[str, Callable[[Jet], Jet]] = {
    "sin": Jet.sin,
    "cos": Jet.cos,
    "exp": Jet.exp,
    "log": Jet.log,
}


def jet_lift(expr: Expr, point: BasePoint, order: int, pivot_tol: float = 1e-12) -> Jet:
    """Lift an expression to its Taylor jet at a point.

    Args:
        expr: Expression AST
        point: Base point
        order: Truncation order
        pivot_tol: Smallest admissible divisor magnitude

    Returns:
        Jet with the Taylor coefficients of ``expr`` at ``point``

    Raises:
        SingularEvaluationError: Division by ~0 or log of a non-positive value,
            with the offending subexpression in the details
    """
    coords = dict(zip(VARIABLES, point.as_tuple()))

    def lift(node: Expr) -> Jet:
        if isinstance(node, Num):
            return Jet.constant(float(node.value), order)
        if isinstance(node, Var):
            return Jet.variable(VARIABLES.index(node.name), coords[node.name], order)
        if isinstance(node, Neg):
            return -lift(node.operand)
        if isinstance(node, Pow):
            base = lift(node.base)
            if node.exponent < 0:
                base = _guarded_reciprocal(base, node, pivot_tol)
                return base ** (-node.exponent)
            return base ** node.exponent
        if isinstance(node, Call):
            arg = lift(node.arg)
            if node.func == "log" and arg.value <= 0.0:
                raise SingularEvaluationError(
                    f"log of non-positive value {arg.value!r} in {to_text(node)}",
                    {"subexpression": to_text(node), "value": arg.value}
                )
            return _FUNCTIONS[node.func](arg)
        assert isinstance(node, BinOp)
        left = lift(node.left)
        right = lift(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left * _guarded_reciprocal(right, node, pivot_tol)

    return lift(expr)


def _guarded_reciprocal(jet: Jet, node: Expr, pivot_tol: float) -> Jet:
    if abs(jet.value) < pivot_tol:
        raise SingularEvaluationError(
            f"division by ~0 ({jet.value!r}) in {to_text(node)}",
            {"subexpression": to_text(node), "value": jet.value}
        )
    return jet.reciprocal()


def jet_reciprocal_array(arr: np.ndarray) -> np.ndarray:
    """Reciprocal of a scalar jet array (shape ``(n_coeffs,)``)."""
    return Jet(arr).reciprocal().coeffs


def jet_invert_2x2(matrix: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray:
    """Invert a 2×2 matrix of jets.

    Args:
        matrix: Jet array of shape (2, 2, n_coeffs)
        pivot_tol: Smallest admissible determinant value

    Returns:
        Jet array of the inverse, same shape

    Raises:
        SingularMatrixError: If the determinant value is below ``pivot_tol``
    """
    det = jet_sub(jet_mul(matrix[0, 0], matrix[1, 1]), jet_mul(matrix[0, 1], matrix[1, 0]))
    if abs(det[0]) < pivot_tol:
        raise SingularMatrixError(
            f"determinant value {det[0]!r} below tolerance {pivot_tol}",
            {"determinant": float(det[0])}
        )
    inv_det = jet_reciprocal_array(det)
    adjugate = np.stack([
        np.stack([matrix[1, 1], -matrix[0, 1]]),
        np.stack([-matrix[1, 0], matrix[0, 0]]),
    ])
    return jet_mul(adjugate, inv_det)


def block_diagonal(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """4×4 jet array with two 2×2 jet blocks on the diagonal."""
    order = common_order(upper, lower)
    out = np.zeros((4, 4, n_coeffs(order)))
    out[:2, :2] = truncate(upper, order)
    out[2:, 2:] = truncate(lower, order)
    return out


def values(arr: np.ndarray) -> np.ndarray:
    """Value coefficients of a jet array."""
    return np.array(arr[..., 0])
