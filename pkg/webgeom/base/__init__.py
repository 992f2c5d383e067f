"""Base utilities shared by the analysis modules."""

from webgeom.base.errors import WebErrorCode, WebGeometryError
from webgeom.base.analysis_config import (
    AnalysisConfig,
    OutputFormat,
    get_default_config,
    set_default_config,
    load_config_from_yaml,
)

__all__ = [
    "WebErrorCode",
    "WebGeometryError",
    "AnalysisConfig",
    "OutputFormat",
    "get_default_config",
    "set_default_config",
    "load_config_from_yaml",
]
