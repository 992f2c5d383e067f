"""Classification conditions of a web at a point.

Everything here works on numeric WebTensors. The transversal a-distribution
Δ is a₁ω¹ + a₂ω² = 0 on both families; it is undefined where a vanishes.
Frame changes are constant matrices A with rows (a₁, a₂) and (c₁, c₂):
new forms ω^{I} = A[I, i] ωⁱ, covectors transform with A⁻¹ and vectors with A.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from models.reports import (
    ClassificationReport,
    FrameChangeReport,
    GeodesicParallelResult,
    HexagonalityResult,
    IntegrabilityResult,
    PrincipalBivectorResult,
)
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.base.errors import (
    DegenerateFrameChangeError,
    DistributionUndefinedError,
    PreconditionNotMetError,
)
from webgeom.prolong import WebTensors, symmetric_part
from webgeom.webframe import ChernData, torsion_tensor

logger = logging.getLogger(__name__)

# Specialized frame tolerance on |a₂'| relative to |a|
SPECIALIZED_TOL = 1e-12

FRAME_DEPENDENT_FIELDS = [
    "a",
    "delta_integrable.residual_p",
    "delta_integrable.residual_q",
    "geodesicly_parallel.residuals",
    "subwebs_hexagonal.b1",
    "subwebs_hexagonal.b2",
    "subwebs_hexagonal.subweb_curvature",
    "C_coeffs",
    "C_coeffs_consistent",
    "frame_change",
    "tensors",
]


class FrameSpecialization(str, Enum):
    """Which coordinate distribution Δ is made to coincide with."""
    A2_ZERO = "a2_zero"                # ω¹ = 0
    A1_ZERO = "a1_zero"                # ω² = 0
    A1_EQ_A2 = "a1_eq_a2"              # ω¹ + ω² = 0
    A1_EQ_MINUS_A2 = "a1_eq_minus_a2"  # ω¹ − ω² = 0


@dataclass(frozen=True)
class FrameChange:
    """Constant frame change ω^{I} = A[I, i] ωⁱ."""
    A: np.ndarray

    @property
    def D(self) -> float:
        return float(self.A[0, 0] * self.A[1, 1] - self.A[0, 1] * self.A[1, 0])

    @property
    def Ainv(self) -> np.ndarray:
        (a1, a2), (c1, c2) = self.A
        return np.array([[c2, -a2], [-c1, a1]]) / self.D

    @classmethod
    def from_rows(
        cls,
        row1: Sequence[float],
        row2: Sequence[float],
        pivot_tol: float = 1e-12
    ) -> "FrameChange":
        """Build a frame change from its two rows.

        Raises:
            DegenerateFrameChangeError: If |det A| is below ``pivot_tol`` relative
                to the row magnitudes
        """
        A = np.array([list(row1), list(row2)], dtype=float)
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        scale = max(1.0, float(np.max(np.abs(A)))) ** 2
        if abs(det) < pivot_tol * scale:
            raise DegenerateFrameChangeError(
                f"frame change with rows {A[0].tolist()}, {A[1].tolist()} has determinant {det!r}",
                {"A": A.tolist(), "D": float(det)}
            )
        return cls(A)

    @classmethod
    def identity(cls) -> "FrameChange":
        return cls(np.eye(2))

    @classmethod
    def default_for(
        cls,
        a: Sequence[float],
        row2: Optional[Sequence[float]] = None,
        pivot_tol: float = 1e-12
    ) -> "FrameChange":
        """Frame change with row 1 = a and row 2 = c, by default c = (−a₂, a₁)."""
        a1, a2 = float(a[0]), float(a[1])
        return cls.from_rows((a1, a2), row2 if row2 is not None else (-a2, a1), pivot_tol)

    @classmethod
    def for_specialization(
        cls,
        a: Sequence[float],
        specialization: FrameSpecialization = FrameSpecialization.A2_ZERO,
        row2: Optional[Sequence[float]] = None,
        pivot_tol: float = 1e-12
    ) -> "FrameChange":
        """Frame change making Δ one of the four coordinate distributions.

        ``row2`` only applies to the default specialization.
        """
        a_vec = np.array([float(a[0]), float(a[1])])
        w = np.array([-a_vec[1], a_vec[0]])
        if specialization == FrameSpecialization.A2_ZERO:
            return cls.default_for(a_vec, row2, pivot_tol)
        if specialization == FrameSpecialization.A1_ZERO:
            return cls.from_rows(w, a_vec, pivot_tol)
        if specialization == FrameSpecialization.A1_EQ_A2:
            return cls.from_rows(0.5 * (a_vec + w), 0.5 * (a_vec - w), pivot_tol)
        return cls.from_rows(0.5 * (a_vec + w), 0.5 * (w - a_vec), pivot_tol)

    def to_report(self) -> FrameChangeReport:
        return FrameChangeReport(A=self.A.tolist(), D=self.D)


def _norm(a: np.ndarray) -> float:
    return float(np.hypot(a[0], a[1]))


def _passes(residual: float, monomials: Sequence[float], tol: float) -> bool:
    scale = max((abs(m) for m in monomials), default=0.0)
    return abs(residual) < tol * (1.0 + scale)


def _require_distribution(t: WebTensors, config: AnalysisConfig) -> Tuple[float, float]:
    if _norm(t.a) < config.tol_classify:
        raise DistributionUndefinedError(
            f"a = ({t.a[0]:.3e}, {t.a[1]:.3e}) vanishes at ({t.base}); "
            f"the web is isoclinicly geodesic there",
            {"a": t.a.tolist(), "tolerance": config.tol_classify}
        )
    return float(t.a[0]), float(t.a[1])


def transform_connection(omega: np.ndarray, frame: FrameChange) -> np.ndarray:
    """Carry connection coefficients omega[i, j, e] through a constant frame change.

    ω' = A ω A⁻¹, with the 1-form coefficients re-expressed in the new basis.
    """
    Ainv = frame.Ainv
    basis = np.zeros((4, 4))
    basis[0:2, 0:2] = Ainv
    basis[2:4, 2:4] = Ainv
    return np.einsum("Ii,ije,jJ,eE->IJE", frame.A, omega, Ainv, basis)


def transform_tensors(t: WebTensors, frame: FrameChange, frame_tag: str = "transformed") -> WebTensors:
    """Apply a constant frame change to a, p, q, b and the connection.

    Prolongations are not transformed; they are marked stale.
    """
    A, Ainv = frame.A, frame.Ainv
    return t.replace(
        a=np.einsum("j,jJ->J", t.a, Ainv),
        p=np.einsum("jk,jJ,kK->JK", t.p, Ainv, Ainv),
        q=np.einsum("jk,jJ,kK->JK", t.q, Ainv, Ainv),
        b=np.einsum("Ii,jJ,kK,lL,ijkl->IJKL", A, Ainv, Ainv, Ainv, t.b),
        omega=transform_connection(t.omega, frame),
        frame_tag=frame_tag,
        prolongations_stale=True,
    )


def specialize_frame(
    t: WebTensors,
    row2: Optional[Sequence[float]] = None,
    specialization: FrameSpecialization = FrameSpecialization.A2_ZERO,
    config: Optional[AnalysisConfig] = None
) -> Tuple[FrameChange, WebTensors]:
    """Pass to a frame in which Δ is a coordinate distribution.

    With the default specialization the first row of A is a itself, which
    forces a' = (1, 0).

    Args:
        t: Tensors in the pipeline frame
        row2: Second row (c₁, c₂); default (−a₂, a₁)
        specialization: Target distribution
        config: Analysis configuration (default if omitted)

    Returns:
        (frame change, tensors tagged "specialized")

    Raises:
        DistributionUndefinedError: If a vanishes
        DegenerateFrameChangeError: If the chosen second row makes D vanish
    """
    config = config or get_default_config()
    _require_distribution(t, config)
    frame = FrameChange.for_specialization(t.a, specialization, row2, config.tol_pivot)
    specialized = transform_tensors(t, frame, frame_tag="specialized")
    logger.debug(f"Specialized frame ({specialization.value}): D = {frame.D:.6g}, a' = {specialized.a.tolist()}")
    return frame, specialized


def check_integrability(t: WebTensors, config: Optional[AnalysisConfig] = None) -> IntegrabilityResult:
    """Integrability of Δ.

    Residuals a₂²p₁₁ − a₁a₂(p₁₂ + p₂₁) + a₁²p₂₂ and the same with q must vanish.
    """
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    flags = []
    residuals = []
    for m in (t.p, t.q):
        monomials = (a2 * a2 * m[0, 0], -a1 * a2 * m[0, 1], -a1 * a2 * m[1, 0], a1 * a1 * m[1, 1])
        residual = float(sum(monomials))
        residuals.append(residual)
        flags.append(_passes(residual, monomials, config.tol_classify))
    return IntegrabilityResult(flag=all(flags), residual_p=residuals[0], residual_q=residuals[1])


def check_geodesic_parallel(t: WebTensors, config: Optional[AnalysisConfig] = None) -> GeodesicParallelResult:
    """Geodesic parallelism of the integral surfaces of Δ in every bundle connection."""
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    residuals = []
    flags = []
    for m in (t.p, t.q):
        for left, right in ((a2 * m[0, 1], a1 * m[1, 1]), (a1 * m[1, 0], a2 * m[0, 0])):
            residual = float(left - right)
            residuals.append(residual)
            flags.append(_passes(residual, (left, right), config.tol_classify))
    flag = all(flags)

    implies = True
    if flag:
        implies = check_integrability(t, config).flag
        if not implies:
            logger.warning(
                f"Geodesic parallelism holds but Δ integrability fails at ({t.base}); "
                f"residuals are near the threshold"
            )
    return GeodesicParallelResult(flag=flag, residuals=residuals, implies_integrable=implies)


def hexagonality_contraction(
    t: WebTensors,
    frame: Optional[FrameChange] = None,
    config: Optional[AnalysisConfig] = None
) -> Tuple[float, float]:
    """Contractions (b¹, b²) of the curvature with the Δ bivector.

    bⁱ = (1/D³)(−bⁱ₁₁₁a₂³ + 3bⁱ₍₁₁₂₎a₂²a₁ − 3bⁱ₍₁₂₂₎a₂a₁² + bⁱ₂₂₂a₁³)
    """
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    frame = frame or FrameChange.default_for(t.a, config.frame_row2, config.tol_pivot)
    s = symmetric_part(t.b)
    d3 = frame.D ** 3
    contraction = (
        -s[:, 0, 0, 0] * a2 ** 3
        + 3.0 * s[:, 0, 0, 1] * a2 ** 2 * a1
        - 3.0 * s[:, 0, 1, 1] * a2 * a1 ** 2
        + s[:, 1, 1, 1] * a1 ** 3
    ) / d3
    return float(contraction[0]), float(contraction[1])


def check_hexagonal(
    t: WebTensors,
    config: Optional[AnalysisConfig] = None,
    frame: Optional[FrameChange] = None,
    theorem_mode: bool = False
) -> HexagonalityResult:
    """Hexagonality of the three-subwebs cut on the integral surfaces of Δ.

    Args:
        t: Tensors in the pipeline frame
        config: Analysis configuration (default if omitted)
        frame: Frame change with first row a (default from the configuration)
        theorem_mode: Require Δ to be integrable

    Returns:
        HexagonalityResult; ``theorem_applies`` is False when Δ is not integrable

    Raises:
        PreconditionNotMetError: In theorem mode when Δ is not integrable
    """
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    frame = frame or FrameChange.default_for(t.a, config.frame_row2, config.tol_pivot)
    integrable = check_integrability(t, config).flag
    if theorem_mode and not integrable:
        raise PreconditionNotMetError(
            f"Δ is not integrable at ({t.base}); hexagonality of cut subwebs is undefined",
            {"point": t.base.as_list()}
        )

    b1, b2 = hexagonality_contraction(t, frame, config)
    s = symmetric_part(t.b)
    magnitude = max(abs(a1), abs(a2)) ** 3 * float(np.max(np.abs(s))) / abs(frame.D) ** 3 if s.size else 0.0
    scale = (3.0 * magnitude,)
    flag = _passes(b1, scale, config.tol_classify) and _passes(b2, scale, config.tol_classify)

    # In the frame with rows (a, c), b'^1_222 = a_i bⁱ and b'^2_222 = c_i bⁱ.
    specialized = transform_tensors(t, frame, frame_tag="specialized")
    first = float(specialized.b[0, 1, 1, 1])
    curvature = float(specialized.b[1, 1, 1, 1])
    row_scale = (3.0 * magnitude * float(np.max(np.abs(frame.A))),)
    cross = (_passes(first, row_scale, config.tol_classify)
             and _passes(curvature, row_scale, config.tol_classify)) == flag
    if not cross:
        logger.warning(f"Hexagonality verdict differs between frames at ({t.base}); values are near the threshold")

    return HexagonalityResult(
        flag=flag,
        b1=b1,
        b2=b2,
        theorem_applies=integrable,
        subweb_curvature=curvature,
        cross_check=cross,
    )


class ConformalPolynomial(NamedTuple):
    """Coefficients (C₄, C₃, C₂, C₁, C₀) of the relative conformal curvature."""
    printed: Tuple[float, float, float, float, float]
    consistent: Tuple[float, float, float, float, float]


def _symmetric_components(t: WebTensors) -> dict:
    s = symmetric_part(t.b)
    return {
        "s1_111": s[0, 0, 0, 0], "s1_112": s[0, 0, 0, 1], "s1_122": s[0, 0, 1, 1], "s1_222": s[0, 1, 1, 1],
        "s2_111": s[1, 0, 0, 0], "s2_112": s[1, 0, 0, 1], "s2_122": s[1, 0, 1, 1], "s2_222": s[1, 1, 1, 1],
    }


def conformal_curvature_poly(t: WebTensors) -> ConformalPolynomial:
    """Relative conformal curvature C(t) of the transversal bivectors.

    ``printed`` follows the published coefficient list; ``consistent`` is the
    quartic whose value at a₂/a₁ reproduces the invariant b.
    """
    c = _symmetric_components(t)
    printed = (
        c["s2_111"],
        -(3.0 * c["s2_112"] - c["s1_111"]),
        3.0 * (c["s2_122"] - 3.0 * c["s1_112"]),
        -(3.0 * c["s2_222"] - 3.0 * c["s1_122"]),
        -c["s1_222"],
    )
    consistent = (
        c["s2_111"],
        -(3.0 * c["s2_112"] - c["s1_111"]),
        3.0 * (c["s2_122"] - c["s1_112"]),
        -(c["s2_222"] - 3.0 * c["s1_122"]),
        -c["s1_222"],
    )
    return ConformalPolynomial(
        printed=tuple(float(v) for v in printed),
        consistent=tuple(float(v) for v in consistent),
    )


def evaluate_quartic(coeffs: Sequence[float], x: float) -> float:
    """C₄x⁴ + C₃x³ + C₂x² + C₁x + C₀."""
    return float(np.polyval(list(coeffs), x))


def invariant_b(
    t: WebTensors,
    frame: Optional[FrameChange] = None,
    config: Optional[AnalysisConfig] = None
) -> float:
    """Absolute invariant b = a_i bⁱ; it vanishes iff Δ is a principal bivector."""
    config = config or get_default_config()
    b1, b2 = hexagonality_contraction(t, frame, config)
    return float(t.a[0] * b1 + t.a[1] * b2)


def invariant_b_expansion(t: WebTensors, frame: FrameChange) -> float:
    """b written out in the symmetric curvature components."""
    a1, a2 = float(t.a[0]), float(t.a[1])
    c = _symmetric_components(t)
    bracket = (
        c["s2_111"] * a2 ** 4
        - (3.0 * c["s2_112"] - c["s1_111"]) * a2 ** 3 * a1
        + 3.0 * (c["s2_122"] - c["s1_112"]) * a2 ** 2 * a1 ** 2
        - (c["s2_222"] - 3.0 * c["s1_122"]) * a2 * a1 ** 3
        - c["s1_222"] * a1 ** 4
    )
    return float(-bracket / frame.D ** 3)


def check_principal_bivector(
    t: WebTensors,
    config: Optional[AnalysisConfig] = None,
    frame: Optional[FrameChange] = None
) -> PrincipalBivectorResult:
    """Whether Δ is one of the principal bivectors, with the b–C(t) relation."""
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    frame = frame or FrameChange.default_for(t.a, config.frame_row2, config.tol_pivot)
    value = invariant_b(t, frame, config)
    expansion = invariant_b_expansion(t, frame)

    s = symmetric_part(t.b)
    magnitude = 4.0 * max(abs(a1), abs(a2)) ** 4 * float(np.max(np.abs(s))) / abs(frame.D) ** 3
    flag = _passes(value, (magnitude,), config.tol_classify)

    relation = None
    relation_printed = None
    if abs(a1) >= config.tol_classify * max(1.0, abs(a2)):
        poly = conformal_curvature_poly(t)
        factor = a1 ** 4 / frame.D ** 3
        relation = float(value + factor * evaluate_quartic(poly.consistent, a2 / a1))
        relation_printed = float(value + factor * evaluate_quartic(poly.printed, a2 / a1))

    return PrincipalBivectorResult(
        flag=flag,
        invariant_b=value,
        expansion_residual=float(value - expansion),
        relation_residual=relation,
        relation_residual_printed=relation_printed,
    )


def bundle_connection(
    source: Union[ChernData, WebTensors],
    p: float,
    q: float
) -> np.ndarray:
    """Connection θⁱ_j = ωⁱ_j + aⁱ_jk(p ω₁ᵏ + q ω₂ᵏ) of the bundle at the point.

    Args:
        source: Chern data or tensors supplying ω and a
        p: First bundle parameter
        q: Second bundle parameter

    Returns:
        Coefficients theta[i, j, e] on the basis (ω₁¹, ω₁², ω₂¹, ω₂²)
    """
    if isinstance(source, ChernData):
        omega, a = source.conn[..., 0], source.a[..., 0]
    else:
        omega, a = source.omega, source.a
    torsion = torsion_tensor(np.asarray(a, dtype=float))
    correction = np.concatenate([p * torsion, q * torsion], axis=2)
    return np.asarray(omega, dtype=float) + correction


def check_totally_geodesic(t: WebTensors, config: Optional[AnalysisConfig] = None) -> bool:
    """Whether the integral surfaces of Δ are totally geodesic in every bundle connection.

    Needs a specialized frame. The restriction of ω¹₂ to Δ has coefficients
    −p₂₂/a₁ and −q₂₂/a₁ there.

    Raises:
        DistributionUndefinedError: If a vanishes
        PreconditionNotMetError: If a₂ does not vanish
    """
    config = config or get_default_config()
    a1, a2 = _require_distribution(t, config)
    if abs(a2) > SPECIALIZED_TOL * _norm(t.a):
        raise PreconditionNotMetError(
            f"frame is not specialized: a₂ = {a2!r}",
            {"a": t.a.tolist(), "frame_tag": t.frame_tag}
        )
    # In this frame the integrability residuals reduce to a₁²p₂₂ and a₁²q₂₂.
    return all(
        _passes(a1 * a1 * m[1, 1], (a1 * a1 * m[1, 1],), config.tol_classify)
        for m in (t.p, t.q)
    )


def classify(
    t: WebTensors,
    config: Optional[AnalysisConfig] = None,
    include_tensors: bool = False
) -> ClassificationReport:
    """Evaluate every classification condition and assemble the report.

    Args:
        t: Tensors in the pipeline frame
        config: Analysis configuration (default if omitted)
        include_tensors: Attach the raw tensors of both frames

    Returns:
        ClassificationReport
    """
    config = config or get_default_config()
    poly = conformal_curvature_poly(t)
    isoclinic = _norm(t.a) < config.tol_classify

    report = ClassificationReport(
        web=t.name,
        point=t.base.as_list(),
        frame_tag=t.frame_tag,
        tolerances=config.tolerances(),
        a=t.a.tolist(),
        isoclinicly_geodesic=isoclinic,
        C_coeffs=list(poly.printed),
        C_coeffs_consistent=list(poly.consistent),
        frame_dependent=list(FRAME_DEPENDENT_FIELDS),
    )
    blocks = {"pipeline": _tensor_block(t)}

    if not isoclinic:
        frame, specialized = specialize_frame(t, config.frame_row2, config=config)
        report.delta_integrable = check_integrability(t, config)
        report.geodesicly_parallel = check_geodesic_parallel(t, config)
        report.totally_geodesic = check_totally_geodesic(specialized, config)
        report.subwebs_hexagonal = check_hexagonal(t, config, frame)
        report.principal_bivector = check_principal_bivector(t, config, frame)
        report.relation58_residual = report.principal_bivector.relation_residual
        report.frame_change = frame.to_report()
        blocks["specialized"] = _tensor_block(specialized)

        if report.totally_geodesic != report.delta_integrable.flag:
            logger.warning(f"Total geodesy and Δ integrability disagree at ({t.base})")

    if include_tensors:
        report.tensors = blocks

    logger.info(
        f"Classified {t.name or 'web'} at ({t.base}): isoclinic={isoclinic}, "
        f"integrable={report.delta_integrable.flag if report.delta_integrable else None}, "
        f"principal={report.principal_bivector.flag if report.principal_bivector else None}"
    )
    return report


def _tensor_block(t: WebTensors) -> dict:
    block = {"frame_tag": t.frame_tag, "prolongations_stale": t.prolongations_stale}
    block.update(t.to_dict())
    block["omega"] = t.omega.tolist()
    return block


def brute_force_transform(b: np.ndarray, frame: FrameChange) -> np.ndarray:
    """Curvature transformation by explicit index loops."""
    A, Ainv = frame.A, frame.Ainv
    out = np.zeros((2, 2, 2, 2))
    for I in range(2):
        for J in range(2):
            for K in range(2):
                for L in range(2):
                    total = 0.0
                    for i in range(2):
                        for j in range(2):
                            for k in range(2):
                                for l in range(2):
                                    total += A[I, i] * Ainv[j, J] * Ainv[k, K] * Ainv[l, L] * b[i, j, k, l]
                    out[I, J, K, L] = total
    return out


def flagged_conditions(report: ClassificationReport) -> List[str]:
    """Names of the conditions that hold in a classification report."""
    held = []
    if report.isoclinicly_geodesic:
        held.append("isoclinicly_geodesic")
    for name in ("delta_integrable", "geodesicly_parallel", "subwebs_hexagonal", "principal_bivector"):
        result = getattr(report, name)
        if result is not None and result.flag:
            held.append(name)
    if report.totally_geodesic:
        held.append("totally_geodesic")
    return held
