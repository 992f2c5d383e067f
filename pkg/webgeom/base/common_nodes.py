"""Helpers shared by the nodes of the analysis workflow.

Every node is wrapped in ``log_node_execution`` and reports failures through
``create_error_response`` instead of raising, so the graph can route to END
with the error kept in the state.
"""

import logging
import time
from functools import wraps
from typing import Any, Callable, Dict, Mapping

from webgeom.base.errors import WebGeometryError

logger = logging.getLogger(__name__)

NodeFunction = Callable[[Dict[str, Any]], Dict[str, Any]]


def _where(state: Mapping[str, Any]) -> str:
    web = state.get("web")
    point = state.get("point")
    name = getattr(web, "name", None) or "web"
    return f"{name} at ({point})" if point is not None else name


def log_node_execution(func: NodeFunction) -> NodeFunction:
    """Decorator to log node execution with timing.

    Args:
        func: Node function to wrap

    Returns:
        Wrapped function that logs start, completion and failure
    """
    @wraps(func)
    def wrapper(state: Dict[str, Any]) -> Dict[str, Any]:
        node = func.__name__
        started = time.perf_counter()
        logger.info(f"[Node] Starting: {node} for {_where(state)}")
        try:
            update = func(state)
        except Exception as e:
            logger.error(f"[Node] Failed: {node} ({time.perf_counter() - started:.3f}s) - {e}")
            raise
        elapsed = time.perf_counter() - started
        if update.get("error") is not None:
            logger.warning(f"[Node] Stopped: {node} ({elapsed:.3f}s) - {update['error']}")
        else:
            logger.info(f"[Node] Completed: {node} ({elapsed:.3f}s)")
        return update

    return wrapper


def create_error_response(state: Mapping[str, Any], error: WebGeometryError) -> Dict[str, Any]:
    """State update recording ``error``; the workflow ends after it.

    Args:
        state: Current state
        error: Error raised inside a node

    Returns:
        Update with ``error``, the appended ``errors`` list and ``exit_code``
    """
    return {
        "error": error,
        "errors": [*state.get("errors", []), str(error)],
        "exit_code": error.exit_code,
    }
