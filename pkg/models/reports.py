"""Report models produced by the analysis and verification pipelines.

Field order is the serialization order of the JSON reports.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ResidualFamily(BaseModel):
    """Maximum residual of one identity family."""
    name: str = Field(description="Family identifier, e.g. curvature_p")
    description: str = Field(default="", description="Relation checked")
    max_residual: Optional[float] = Field(default=None, description="Largest absolute residual, None if skipped")
    tolerance: float = Field(description="Pass threshold")
    passed: bool = Field(description="Whether the residual is below tolerance")
    skipped: bool = Field(default=False, description="Family not evaluated in this frame")


class IdentityReport(BaseModel):
    """Residuals of the identity systems satisfied by the web tensors."""
    frame_tag: str = Field(description="Frame the tensors are expressed in")
    families: List[ResidualFamily] = Field(default_factory=list, description="Per-family residuals")
    checks_performed: int = Field(default=0, description="Families evaluated")
    checks_passed: int = Field(default=0, description="Families below tolerance")
    is_valid: bool = Field(default=True, description="All evaluated families passed")

    def family(self, name: str) -> ResidualFamily:
        for item in self.families:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def flagged(self) -> List[str]:
        return [f.name for f in self.families if not f.skipped and not f.passed]


class IntegrabilityResult(BaseModel):
    """Integrability test of the transversal a-distribution."""
    flag: bool = Field(description="Δ is integrable")
    residual_p: float = Field(description="a₂²p₁₁ − 2a₁a₂p₍₁₂₎ + a₁²p₂₂")
    residual_q: float = Field(description="a₂²q₁₁ − 2a₁a₂q₍₁₂₎ + a₁²q₂₂")


class GeodesicParallelResult(BaseModel):
    """Geodesic parallelism of the integral surfaces of Δ."""
    flag: bool = Field(description="All four conditions hold")
    residuals: List[float] = Field(description="a₂p₁₂ − a₁p₂₂, a₁p₂₁ − a₂p₁₁ and the same with q")
    implies_integrable: bool = Field(description="Integrability verdict agrees with the implication")


class HexagonalityResult(BaseModel):
    """Hexagonality of the webs cut on the integral surfaces of Δ."""
    flag: bool = Field(description="b¹ = b² = 0 within tolerance")
    b1: float = Field(description="Contraction b¹")
    b2: float = Field(description="Contraction b²")
    theorem_applies: bool = Field(description="Δ is integrable, so the verdict is about cut subwebs")
    subweb_curvature: float = Field(description="K = b²₂₂₂ in the specialized frame")
    cross_check: bool = Field(description="Specialized-frame components agree with the flag")


class PrincipalBivectorResult(BaseModel):
    """Invariant b and the principal-bivector test for Δ."""
    flag: bool = Field(description="|b| below threshold")
    invariant_b: float = Field(description="b = a_i bⁱ")
    expansion_residual: float = Field(description="b minus its expansion in symmetric components")
    relation_residual: Optional[float] = Field(
        default=None, description="b + (a₁⁴/D³) C(a₂/a₁) with the consistent quartic; None if a₁ ≈ 0"
    )
    relation_residual_printed: Optional[float] = Field(
        default=None, description="Same relation with the printed quartic coefficients"
    )


class FrameChangeReport(BaseModel):
    A: List[List[float]] = Field(description="Rows (a₁, a₂) and (c₁, c₂)")
    D: float = Field(description="det A")


class ClassificationReport(BaseModel):
    """Classification of a web at a point."""
    web: Optional[str] = Field(default=None, description="Web name")
    definition: Optional[str] = Field(default=None, description="Web definition as the parser reads it back")
    point: List[float] = Field(description="Base point (x1, x2, y1, y2)")
    frame_tag: str = Field(default="pipeline", description="Frame of the tensor-valued fields")
    tolerances: Dict[str, float] = Field(description="Tolerances in effect")
    a: List[float] = Field(description="Torsion covector (frame-dependent)")
    isoclinicly_geodesic: bool = Field(description="a = 0")
    delta_integrable: Optional[IntegrabilityResult] = Field(default=None, description="Δ integrability")
    totally_geodesic: Optional[bool] = Field(default=None, description="ω¹₂ restricted to Δ vanishes")
    geodesicly_parallel: Optional[GeodesicParallelResult] = Field(default=None, description="Geodesic parallelism")
    subwebs_hexagonal: Optional[HexagonalityResult] = Field(default=None, description="Hexagonality of cut subwebs")
    principal_bivector: Optional[PrincipalBivectorResult] = Field(default=None, description="Δ principal")
    C_coeffs: List[float] = Field(description="C₄..C₀ of the printed quartic")
    C_coeffs_consistent: List[float] = Field(description="C₄..C₀ of the quartic matching invariant b")
    relation58_residual: Optional[float] = Field(default=None, description="b + (a₁⁴/D³) C(a₂/a₁)")
    frame_change: Optional[FrameChangeReport] = Field(default=None, description="Specializing frame change")
    frame_dependent: List[str] = Field(default_factory=list, description="Fields whose values depend on the frame")
    tensors: Optional[Dict[str, object]] = Field(default=None, description="Raw tensors on request")


class CharacterTable(BaseModel):
    """Cartan characters and solution count for an existence scenario."""
    scenario: str = Field(description="Scenario identifier")
    q: int = Field(description="Number of unknown 1-forms")
    s1: int = Field(description="First character")
    s2: int = Field(description="Second character")
    s3: int = Field(description="Third character")
    Q: int = Field(description="s1 + 2 s2 + 3 s3")
    N: int = Field(description="Dimension of admissible third-order coefficients")
    N_pfaffian: int = Field(description="Part of N carried by prolongations of p and q")
    N_curvature: int = Field(description="Part of N carried by prolongations of b")
    involutive: bool = Field(description="Q == N")
    stated_N: Optional[int] = Field(default=None, description="Published N for the scenario")
    stated_partition: Optional[List[int]] = Field(default=None, description="Pfaffian + curvature split as printed")
    hard: bool = Field(default=True, description="Verdict is part of the exit status")
    notes: List[str] = Field(default_factory=list, description="Footnotes")


class VerificationReport(BaseModel):
    """Result of the full verification battery.

    Attributes:
        is_valid: Overall status
        families: Residual families in evaluation order
        checks_performed: Number of checks performed
        checks_passed: Number of checks that passed
        injected: Corruptions applied before checking
        errors: Failure messages
    """
    web: Optional[str] = Field(default=None, description="Web name")
    point: List[float] = Field(description="Base point")
    is_valid: bool = Field(..., description="Whether all checks passed")
    families: List[ResidualFamily] = Field(default_factory=list, description="Residual families")
    checks_performed: int = Field(default=0, description="Total checks performed")
    checks_passed: int = Field(default=0, description="Checks passed")
    injected: List[str] = Field(default_factory=list, description="Applied tensor corruptions")
    errors: List[str] = Field(default_factory=list, description="Failure messages")
