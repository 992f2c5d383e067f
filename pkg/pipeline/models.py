"""State model for the analysis workflow."""

from typing import List, Optional, TypedDict

from models.geometry import BasePoint
from models.reports import ClassificationReport, VerificationReport
from webgeom.base.analysis_config import AnalysisConfig
from webgeom.base.errors import WebGeometryError
from webgeom.exprlang import WebDefinition
from webgeom.prolong import WebTensors
from webgeom.webframe import ChernData, CoframeJet


class AnalysisState(TypedDict, total=False):
    """State for the analysis workflow."""

    # Input
    web_text: str  # Definition file contents, parsed when web is absent
    web: WebDefinition
    point_text: str  # "v1,v2,v3,v4", parsed when point is absent
    point: BasePoint
    config: AnalysisConfig
    mode: str  # "classify" or "verify"
    use_oracle: bool  # Finite-difference jets instead of the jet lift
    include_tensors: bool
    seeds: int
    injections: List[str]

    # Intermediate data
    coframe: CoframeJet
    chern: ChernData
    tensors: WebTensors

    # Output
    report: ClassificationReport
    verification: VerificationReport
    error: Optional[WebGeometryError]
    errors: List[str]
    exit_code: int
