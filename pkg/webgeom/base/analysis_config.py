"""Analysis configuration.

This module provides the tolerances and pipeline settings shared by every
analysis step, with loading from YAML and a process-wide default.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from webgeom.base.errors import ConfigError

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    """Report output formats."""
    JSON = "json"
    TEXT = "text"


@dataclass
class AnalysisConfig:
    """Configuration for a web analysis run.

    Attributes:
        tol_connection: Residual tolerance for the structure equations
        tol_identity: Residual tolerance for the identity systems
        tol_classify: Threshold factor for classification verdicts
        tol_pivot: Smallest admissible determinant or pivot magnitude
        jet_order: Truncation order of the Taylor jets
        frame_row2: Optional second row (c1, c2) of the specializing frame change
        output: Report output format
        max_workers: Thread pool size for batch mode
        oracle_step: Base step of the finite-difference oracle
    """
    tol_connection: float = 1e-9
    tol_identity: float = 1e-8
    tol_classify: float = 1e-7
    tol_pivot: float = 1e-12
    jet_order: int = 4
    frame_row2: Optional[Tuple[float, float]] = None
    output: OutputFormat = OutputFormat.TEXT
    max_workers: int = 4
    oracle_step: float = 1e-3

    def validate(self) -> "AnalysisConfig":
        """Check invariants of the configuration.

        Returns:
            The configuration itself

        Raises:
            ConfigError: If a tolerance is not positive or the jet order is too low
        """
        for name in ("tol_connection", "tol_identity", "tol_classify", "tol_pivot", "oracle_step"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}", {"field": name})
        if self.jet_order < 4:
            raise ConfigError(
                f"jet_order must be at least 4 for the full pipeline, got {self.jet_order}",
                {"field": "jet_order"}
            )
        if self.max_workers < 1:
            raise ConfigError(f"max_workers must be at least 1, got {self.max_workers}")
        if self.frame_row2 is not None and len(self.frame_row2) != 2:
            raise ConfigError("frame_row2 must have two entries", {"field": "frame_row2"})
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "tol_connection": self.tol_connection,
            "tol_identity": self.tol_identity,
            "tol_classify": self.tol_classify,
            "tol_pivot": self.tol_pivot,
            "jet_order": self.jet_order,
            "frame_row2": list(self.frame_row2) if self.frame_row2 is not None else None,
            "output": self.output.value,
            "max_workers": self.max_workers,
            "oracle_step": self.oracle_step,
        }

    def tolerances(self) -> Dict[str, float]:
        """Tolerances echoed into every report."""
        return {
            "tol_connection": self.tol_connection,
            "tol_identity": self.tol_identity,
            "tol_classify": self.tol_classify,
            "tol_pivot": self.tol_pivot,
        }


def load_config_from_yaml(yaml_path: str) -> AnalysisConfig:
    """Load analysis configuration from YAML file.

    Args:
        yaml_path: Path to YAML configuration file

    Returns:
        AnalysisConfig instance
    """
    import yaml

    path = Path(yaml_path)
    if not path.exists():
        logger.warning(f"Config file not found: {yaml_path}, using defaults")
        return AnalysisConfig()

    with open(path, 'r') as f:
        data = yaml.safe_load(f) or {}

    tolerances = data.get("tolerances", {})
    frame = data.get("frame", {})
    row2 = frame.get("row2")

    try:
        config = AnalysisConfig(
            tol_connection=float(tolerances.get("connection", 1e-9)),
            tol_identity=float(tolerances.get("identity", 1e-8)),
            tol_classify=float(tolerances.get("classify", 1e-7)),
            tol_pivot=float(tolerances.get("pivot", 1e-12)),
            jet_order=int(data.get("jet_order", 4)),
            frame_row2=(float(row2[0]), float(row2[1])) if row2 else None,
            output=OutputFormat(data.get("output", "text")),
            max_workers=int(data.get("max_workers", 4)),
            oracle_step=float(data.get("oracle_step", 1e-3)),
        )
    except (TypeError, ValueError, IndexError) as e:
        raise ConfigError(f"Invalid configuration in {yaml_path}: {e}") from e

    logger.info(f"Loaded analysis config from {yaml_path}")
    return config.validate()


# Global default configuration instance
_default_config: Optional[AnalysisConfig] = None


def get_default_config() -> AnalysisConfig:
    """Get the default analysis configuration.

    Returns:
        Default AnalysisConfig instance
    """
    global _default_config
    if _default_config is None:
        _default_config = AnalysisConfig()
    return _default_config


def set_default_config(config: AnalysisConfig) -> None:
    """Set the default analysis configuration.

    Args:
        config: Configuration to set as default
    """
    global _default_config
    _default_config = config.validate()
    logger.info("Updated default analysis configuration")
