"""LangGraph analysis pipeline: parse, coframe, Chern connection, tensors, verdicts."""

from pipeline.workflow import create_analysis_workflow, run_analysis, run_batch

__all__ = ["create_analysis_workflow", "run_analysis", "run_batch"]
