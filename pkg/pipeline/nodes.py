"""Node functions for the analysis workflow.

Each node returns a partial state update. Geometry errors are caught and
stored in the state so that the graph can stop at the failing step.
"""

import logging
from typing import Any, Dict

import numpy as np

from pipeline.models import AnalysisState
from webgeom.base.analysis_config import get_default_config
from webgeom.base.common_nodes import create_error_response, log_node_execution
from webgeom.base.errors import WebGeometryError
from webgeom.exprlang import parse_point, parse_web, web_to_text
from webgeom.invariants import classify
from webgeom.oracle import oracle_jet
from webgeom.prolong import compute_tensors
from webgeom.verifier import WebVerifier
from webgeom.webframe import build_coframe, build_coframe_from_jets, solve_chern

logger = logging.getLogger(__name__)


@log_node_execution
def parse_inputs(state: AnalysisState) -> Dict[str, Any]:
    """Parse the web definition and the point when given as text."""
    try:
        update: Dict[str, Any] = {}
        if state.get("web") is None:
            update["web"] = parse_web(state["web_text"])
        if state.get("point") is None:
            update["point"] = parse_point(state["point_text"])
        return update
    except WebGeometryError as e:
        return create_error_response(state, e)


@log_node_execution
def build_frame(state: AnalysisState) -> Dict[str, Any]:
    """Lift f to jets and build the adapted coframe."""
    config = state.get("config") or get_default_config()
    web, point = state["web"], state["point"]
    try:
        if state.get("use_oracle"):
            logger.info(f"Building coframe from finite-difference jets (step {config.oracle_step})")
            f = np.stack([oracle_jet(expr, point, config.jet_order, config) for expr in web.components])
            coframe = build_coframe_from_jets(f, point, config, web.name)
        else:
            coframe = build_coframe(web, point, config)
        return {"coframe": coframe}
    except WebGeometryError as e:
        return create_error_response(state, e)


@log_node_execution
def solve_connection(state: AnalysisState) -> Dict[str, Any]:
    """Solve the structure equations for the Chern connection."""
    try:
        return {"chern": solve_chern(state["coframe"], state.get("config"))}
    except WebGeometryError as e:
        return create_error_response(state, e)


@log_node_execution
def compute_web_tensors(state: AnalysisState) -> Dict[str, Any]:
    """Curvature, p, q and the prolongations at the point."""
    try:
        return {"tensors": compute_tensors(state["chern"], state.get("config"))}
    except WebGeometryError as e:
        return create_error_response(state, e)


@log_node_execution
def classify_web(state: AnalysisState) -> Dict[str, Any]:
    """Evaluate the classification conditions."""
    try:
        report = classify(state["tensors"], state.get("config"), state.get("include_tensors", False))
        if state.get("web") is not None:
            report.definition = web_to_text(state["web"])
        return {"report": report, "exit_code": 0}
    except WebGeometryError as e:
        return create_error_response(state, e)


@log_node_execution
def verify_web(state: AnalysisState) -> Dict[str, Any]:
    """Run the verification battery."""
    try:
        verifier = WebVerifier(state.get("config"))
        verification = verifier.verify(
            state["chern"],
            state["tensors"],
            seeds=state.get("seeds", 0),
            injections=state.get("injections", []),
        )
        return {"verification": verification, "exit_code": 0 if verification.is_valid else 1}
    except WebGeometryError as e:
        return create_error_response(state, e)
