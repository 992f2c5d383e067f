"""LangGraph workflow for web analysis."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

from langgraph.graph import END, StateGraph

from models.geometry import BasePoint
from pipeline import nodes
from pipeline.models import AnalysisState
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.exprlang import WebDefinition

logger = logging.getLogger(__name__)

_STEPS = ("parse_inputs", "build_frame", "solve_connection", "compute_tensors")


def create_analysis_workflow():
    """
    Create the analysis workflow graph.

    The graph runs parse → coframe → Chern connection → tensors and then
    either classifies the web or runs the verification battery, depending
    on ``state["mode"]``. Any step that records an error ends the run.

    Returns:
        Compiled LangGraph workflow
    """
    workflow = StateGraph(AnalysisState)

    workflow.add_node("parse_inputs", nodes.parse_inputs)
    workflow.add_node("build_frame", nodes.build_frame)
    workflow.add_node("solve_connection", nodes.solve_connection)
    workflow.add_node("compute_tensors", nodes.compute_web_tensors)
    workflow.add_node("classify", nodes.classify_web)
    workflow.add_node("verify", nodes.verify_web)

    def continue_unless_failed(next_step: str):
        def route(state: AnalysisState) -> str:
            if state.get("error") is not None:
                logger.info(f"[route] error recorded, skipping {next_step}")
                return "end"
            return next_step
        return route

    def route_after_tensors(state: AnalysisState) -> str:
        if state.get("error") is not None:
            return "end"
        return "verify" if state.get("mode") == "verify" else "classify"

    workflow.set_entry_point("parse_inputs")
    for current, following in zip(_STEPS, _STEPS[1:]):
        workflow.add_conditional_edges(
            current,
            continue_unless_failed(following),
            {following: following, "end": END}
        )
    workflow.add_conditional_edges(
        "compute_tensors",
        route_after_tensors,
        {"classify": "classify", "verify": "verify", "end": END}
    )
    workflow.add_edge("classify", END)
    workflow.add_edge("verify", END)

    compiled_workflow = workflow.compile()

    logger.info("Analysis workflow created successfully")

    return compiled_workflow


_workflow = None


def get_workflow():
    """Compiled workflow shared by all runs; compiled graphs are reentrant."""
    global _workflow
    if _workflow is None:
        _workflow = create_analysis_workflow()
    return _workflow


def run_analysis(
    web: Optional[WebDefinition],
    point: Optional[BasePoint],
    config: Optional[AnalysisConfig] = None,
    **options: Any
) -> Dict[str, Any]:
    """Run the workflow for one point.

    Args:
        web: Parsed web definition, or None with ``web_text`` in the options
        point: Base point, or None with ``point_text`` in the options
        config: Analysis configuration (default if omitted)
        **options: Further state entries (mode, seeds, injections, include_tensors, use_oracle)

    Returns:
        Final workflow state
    """
    state: AnalysisState = {
        "config": config or get_default_config(),
        "errors": [],
        "error": None,
        "exit_code": 0,
    }
    if web is not None:
        state["web"] = web
    if point is not None:
        state["point"] = point
    state.update(options)
    return get_workflow().invoke(state)


def run_batch(
    web: WebDefinition,
    points: Sequence[BasePoint],
    config: Optional[AnalysisConfig] = None,
    max_workers: Optional[int] = None,
    **options: Any
) -> List[Dict[str, Any]]:
    """Run the workflow for many points concurrently.

    Results are returned in the order of ``points``.
    """
    config = config or get_default_config()
    workers = max(1, min(max_workers or config.max_workers, len(points) or 1))
    logger.info(f"Running batch of {len(points)} points with {workers} workers")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_analysis, web, point, config, **options) for point in points]
        results = [future.result() for future in futures]

    failed = sum(1 for r in results if r.get("error") is not None)
    if failed:
        logger.warning(f"{failed} of {len(points)} points failed")
    return results
