"""Web-adapted coframe and Chern connection at a point.

For a web z = f(x, y) the coframe is ω₁ⁱ = Λⁱ_j dxʲ, ω₂ⁱ = Μⁱ_j dyʲ with
Λ = ∂f/∂x and Μ = ∂f/∂y, so ω₁ + ω₂ = dz and ω₃ = −dz closes the web
relation. All 1-forms are stored by their coefficients in the basis
(ω₁¹, ω₁², ω₂¹, ω₂²), indexed 0..3, and every 2-form by its antisymmetric
coefficient matrix F with form ½ F[f,e] ω^f ∧ ω^e.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from models.geometry import BasePoint
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.base.errors import (
    ChernInconsistencyError,
    NotAWebAtPointError,
    SingularMatrixError,
)
from webgeom.exprlang import WebDefinition
from webgeom.jets import (
    block_diagonal,
    jet_add,
    jet_derivative,
    jet_einsum,
    jet_gradient,
    jet_invert_2x2,
    jet_lift,
    jet_mul,
    jet_sub,
    n_coeffs,
    order_of,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoframeJet:
    """Jet-valued Jacobians of f at a base point.

    Attributes:
        lam: Λ = ∂f/∂x as a (2, 2) jet array
        mu: Μ = ∂f/∂y as a (2, 2) jet array
        lam_inv: Λ⁻¹
        mu_inv: Μ⁻¹
        base: Base point
        f: Jets of (f¹, f²), shape (2, n_coeffs)
        name: Optional web name
    """
    lam: np.ndarray
    mu: np.ndarray
    lam_inv: np.ndarray
    mu_inv: np.ndarray
    base: BasePoint
    f: np.ndarray
    name: Optional[str] = None

    @property
    def frame_inverse(self) -> np.ndarray:
        """E⁻¹ with dX^a = Σ_f E⁻¹[a, f] ω^f for X = (x1, x2, y1, y2)."""
        return block_diagonal(self.lam_inv, self.mu_inv)


@dataclass(frozen=True)
class ChernData:
    """Chern connection of the web at a point.

    Attributes:
        gamma: γⁱ_jk, shape (2, 2, 2, n)
        delta: δⁱ_jk, shape (2, 2, 2, n)
        a: Torsion covector (a₁, a₂), shape (2, n)
        conn: Connection form coefficients ωⁱ_j = conn[i, j, e] ω^e, shape (2, 2, 4, n)
        structure: dω^g as antisymmetric matrices, shape (4, 4, 4, n)
        coframe: Coframe the data was solved from
        residuals: Structure-equation residuals at value level
    """
    gamma: np.ndarray
    delta: np.ndarray
    a: np.ndarray
    conn: np.ndarray
    structure: np.ndarray
    coframe: CoframeJet
    residuals: Dict[str, float] = field(default_factory=dict)


def build_coframe(
    web: WebDefinition,
    point: BasePoint,
    config: Optional[AnalysisConfig] = None
) -> CoframeJet:
    """Lift f to jets at the point and build the adapted coframe.

    Args:
        web: Parsed web definition
        point: Base point
        config: Analysis configuration (default if omitted)

    Returns:
        CoframeJet with Λ, Μ and their inverses

    Raises:
        SingularEvaluationError: If f cannot be lifted at the point
        NotAWebAtPointError: If det Λ or det Μ vanishes at the point
    """
    config = config or get_default_config()
    f = np.stack([
        jet_lift(expr, point, config.jet_order, config.tol_pivot).coeffs
        for expr in web.components
    ])
    return build_coframe_from_jets(f, point, config, web.name)


def build_coframe_from_jets(
    f: np.ndarray,
    point: BasePoint,
    config: Optional[AnalysisConfig] = None,
    name: Optional[str] = None
) -> CoframeJet:
    """Build the coframe from precomputed jets of (f¹, f²).

    The jets may come from the expression lift or from the finite-difference
    oracle.
    """
    config = config or get_default_config()
    lam = np.stack([np.stack([jet_derivative(f[i], j) for j in (0, 1)]) for i in (0, 1)])
    mu = np.stack([np.stack([jet_derivative(f[i], 2 + j) for j in (0, 1)]) for i in (0, 1)])

    inverses = []
    for label, matrix in (("x", lam), ("y", mu)):
        try:
            inverses.append(jet_invert_2x2(matrix, config.tol_pivot))
        except SingularMatrixError as e:
            raise NotAWebAtPointError(
                f"det ∂f/∂{label} = {e.details.get('determinant')!r} at ({point}); "
                f"the foliations are not in general position",
                {"point": point.as_list(), "block": label, **e.details}
            ) from e

    logger.debug(f"Coframe built at ({point}), jet order {order_of(f)}")
    return CoframeJet(lam, mu, inverses[0], inverses[1], point, f, name)


def frame_derivative(arr: np.ndarray, coframe: CoframeJet) -> np.ndarray:
    """Frame derivatives D_f g with dg = Σ_f D_f g ω^f.

    Args:
        arr: Jet array of shape (..., n)
        coframe: Coframe

    Returns:
        Jet array of shape (..., 4, n') one order lower
    """
    return jet_einsum("...a,af->...f", jet_gradient(arr), coframe.frame_inverse)


def basis_differentials(coframe: CoframeJet) -> np.ndarray:
    """Exterior derivatives of the four basis forms in the ω-basis.

    Returns:
        Array S of shape (4, 4, 4, n) with dω^g = ½ S[g, f, e] ω^f ∧ ω^e
    """
    # dω₁ⁱ = Σ_j dΛⁱ_j ∧ dxʲ and dxʲ = (Λ⁻¹)ʲ_m ω₁ᵐ; likewise for ω₂.
    c1 = jet_einsum("ijf,jm->ifm", frame_derivative(coframe.lam, coframe), coframe.lam_inv)
    c2 = jet_einsum("ijf,jm->ifm", frame_derivative(coframe.mu, coframe), coframe.mu_inv)
    raw = np.zeros((4, 4, 4, c1.shape[-1]))
    raw[0:2, :, 0:2] = c1
    raw[2:4, :, 2:4] = c2
    return raw - raw.swapaxes(1, 2)


def exterior_derivative(coeffs: np.ndarray, coframe: CoframeJet, structure: np.ndarray) -> np.ndarray:
    """Exterior derivative of 1-forms given by their ω-basis coefficients.

    Args:
        coeffs: Jet array of shape (..., 4, n)
        coframe: Coframe
        structure: Basis differentials from ``basis_differentials``

    Returns:
        Antisymmetric 2-form matrices, shape (..., 4, 4, n')
    """
    grad = frame_derivative(coeffs, coframe)
    # grad[..., e, f] = D_f c_e
    mixed = grad.swapaxes(-3, -2) - grad
    return jet_add(mixed, jet_einsum("...g,gfe->...fe", coeffs, structure))


def wedge(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Wedge product of 1-forms as antisymmetric coefficient matrices."""
    outer = jet_einsum("...f,...e->...fe", u, v)
    return outer - outer.swapaxes(-3, -2)


def unit_forms(order: int) -> np.ndarray:
    """Coefficient jets of the basis forms ω^0..ω^3 themselves."""
    units = np.zeros((4, 4, n_coeffs(order)))
    for g in range(4):
        units[g, g, 0] = 1.0
    return units


def torsion_tensor(a: np.ndarray) -> np.ndarray:
    """Torsion tensor aⁱ_jk = ½(a_j δⁱ_k − a_k δⁱ_j) from the covector values."""
    eye = np.eye(2)
    return 0.5 * (np.einsum("j,ik->ijk", a, eye) - np.einsum("k,ij->ijk", a, eye))


def _torsion_design() -> np.ndarray:
    # Rows (form, i, f, e) for (f, e) in {(0,1), (1,0)}: torsion entry a_f δ_ei − a_e δ_fi,
    # with opposite sign for the ω₂ family.
    rows = []
    for sign in (1.0, -1.0):
        for i in (0, 1):
            for f, e in ((0, 1), (1, 0)):
                row = np.zeros(2)
                row[f] += sign * (e == i)
                row[e] -= sign * (f == i)
                rows.append(row)
    return np.array(rows)


_TORSION_DESIGN = _torsion_design()


def _torsion_forms(a: np.ndarray, units: np.ndarray, offset: int) -> np.ndarray:
    """Σ_j a_j ω^(offset+j) ∧ ω^(offset+i) for i = 0, 1."""
    return np.stack([
        sum(wedge(jet_mul(a[j], units[offset + j]), units[offset + i]) for j in (0, 1))
        for i in (0, 1)
    ])


def _max_abs(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def solve_chern(coframe: CoframeJet, config: Optional[AnalysisConfig] = None) -> ChernData:
    """Solve the structure equations for the Chern connection and torsion covector.

    Args:
        coframe: Adapted coframe
        config: Analysis configuration (default if omitted)

    Returns:
        ChernData with γ, δ, a and structure-equation residuals

    Raises:
        ChernInconsistencyError: If the torsion part is not a covector or a
            pure part that must vanish does not
    """
    config = config or get_default_config()
    structure = basis_differentials(coframe)

    # Mixed parts: dω₁ⁱ ∋ δⁱ_jk ω₁ʲ∧ω₂ᵏ and dω₂ⁱ ∋ γⁱ_jk ω₂ʲ∧ω₁ᵏ.
    delta = np.array(structure[0:2, 0:2, 2:4])
    gamma = -np.array(structure[2:4, 0:2, 2:4]).swapaxes(1, 2)
    conn = np.concatenate([gamma, delta], axis=2)

    order = order_of(structure)
    units = unit_forms(order)
    wedge1 = np.stack([sum(wedge(units[j], conn[i, j]) for j in (0, 1)) for i in (0, 1)])
    wedge2 = np.stack([sum(wedge(units[2 + j], conn[i, j]) for j in (0, 1)) for i in (0, 1)])

    rhs = []
    for block, wedges, offset in ((structure[0:2], wedge1, 0), (structure[2:4], wedge2, 2)):
        for i in (0, 1):
            for f, e in ((0, 1), (1, 0)):
                rhs.append(block[i, offset + f, offset + e] - wedges[i, offset + f, offset + e])
    rhs = np.array(rhs)

    a, *_ = np.linalg.lstsq(_TORSION_DESIGN, rhs, rcond=None)
    a_first, *_ = np.linalg.lstsq(_TORSION_DESIGN[:4], rhs[:4], rcond=None)
    a_second, *_ = np.linalg.lstsq(_TORSION_DESIGN[4:], rhs[4:], rcond=None)

    torsion1 = _torsion_forms(a, units, 0)
    torsion2 = _torsion_forms(a, units, 2)
    residual1 = jet_sub(jet_sub(structure[0:2], wedge1), torsion1)
    residual2 = jet_add(jet_sub(structure[2:4], wedge2), torsion2)

    scale = 1.0 + _max_abs(structure[..., 0])
    tol = config.tol_connection * scale
    residuals = {
        "structure_first": _max_abs(residual1[..., 0]),
        "structure_second": _max_abs(residual2[..., 0]),
        "torsion_covector": _max_abs((rhs - _TORSION_DESIGN @ a)[..., 0]),
        "a_consistency": _max_abs((a_first - a_second)[..., 0]),
        "pure_second_in_first": _max_abs(structure[0:2, 2, 3, 0]),
        "pure_first_in_second": _max_abs(structure[2:4, 0, 1, 0]),
    }

    failed = {name: value for name, value in residuals.items() if value >= tol}
    if failed:
        raise ChernInconsistencyError(
            f"structure equations violated at ({coframe.base}): "
            + ", ".join(f"{name}={value:.3e}" for name, value in failed.items())
            + f" (tolerance {tol:.3e})",
            {"residuals": residuals, "tolerance": tol}
        )

    logger.info(
        f"Chern connection solved at ({coframe.base}); a = "
        f"({a[0, 0]:.6g}, {a[1, 0]:.6g}), max residual {max(residuals.values()):.2e}"
    )
    return ChernData(
        gamma=gamma,
        delta=delta,
        a=a,
        conn=conn,
        structure=structure,
        coframe=coframe,
        residuals=residuals,
    )
