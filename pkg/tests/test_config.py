import logging
import math

import numpy as np
import pytest

from models.reports import ResidualFamily
from ui.serialization import dumps, format_float, to_plain
from webgeom.base.analysis_config import (
    AnalysisConfig,
    OutputFormat,
    get_default_config,
    load_config_from_yaml,
    set_default_config,
)
from webgeom.base.errors import ConfigError, WebErrorCode, WebGeometryError, exit_code_for
from webgeom.base.shared_utils import load_config, setup_logging

from tests.conftest import ROOT


def test_shipped_yaml_matches_defaults():
    config = load_config_from_yaml(str(ROOT / "config" / "analysis_config.yaml"))
    assert config == AnalysisConfig()


def test_yaml_overrides(tmp_path):
    path = tmp_path / "analysis.yaml"
    path.write_text(
        "tolerances:\n  classify: 1.0e-5\n"
        "frame:\n  row2: [0.0, 2.0]\n"
        "output: json\nmax_workers: 2\n",
        encoding="utf-8",
    )
    config = load_config_from_yaml(str(path))
    assert config.tol_classify == 1e-5
    assert config.tol_connection == 1e-9
    assert config.frame_row2 == (0.0, 2.0)
    assert config.output is OutputFormat.JSON
    assert config.max_workers == 2


def test_missing_yaml_gives_defaults(tmp_path):
    assert load_config_from_yaml(str(tmp_path / "absent.yaml")) == AnalysisConfig()


@pytest.mark.parametrize("text", [
    "output: xml\n",
    "tolerances:\n  identity: -1\n",
    "jet_order: 3\n",
    "max_workers: 0\n",
    "tolerances:\n  classify: lots\n",
])
def test_invalid_yaml(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_config_from_yaml(str(path))
    assert info.value.exit_code == 64


def test_default_config_is_replaceable():
    original = get_default_config()
    try:
        set_default_config(AnalysisConfig(tol_classify=1e-4))
        assert get_default_config().tol_classify == 1e-4
        with pytest.raises(ConfigError):
            set_default_config(AnalysisConfig(tol_pivot=0.0))
    finally:
        set_default_config(original)


def test_environment_settings(monkeypatch):
    monkeypatch.setenv("WEBGEOM_LOG_LEVEL", "debug")
    monkeypatch.setenv("WEBGEOM_MAX_WORKERS", "8")
    settings = load_config()
    assert settings["log_level"] == logging.DEBUG
    assert settings["max_workers"] == 8

    monkeypatch.setenv("WEBGEOM_LOG_LEVEL", "chatty")
    with pytest.raises(ValueError):
        load_config()

    monkeypatch.setenv("WEBGEOM_LOG_LEVEL", "info")
    monkeypatch.setenv("WEBGEOM_MAX_WORKERS", "many")
    with pytest.raises(ValueError, match="WEBGEOM_MAX_WORKERS"):
        load_config()


def test_setup_logging_is_idempotent():
    logger = setup_logging("webgeom.test_logging", logging.INFO)
    again = setup_logging("webgeom.test_logging", logging.DEBUG)
    assert again is logger
    assert len(logger.handlers) == 1
    assert logger.handlers[0].level == logging.DEBUG
    assert not logger.propagate


def test_error_message_and_exit_codes():
    error = WebGeometryError("boom", code=WebErrorCode.SINGULAR_MATRIX)
    assert str(error) == "[SINGULAR_MATRIX] boom"
    assert error.exit_code == 2
    assert exit_code_for(WebErrorCode.CHERN_INCONSISTENCY) == 1
    assert exit_code_for(WebErrorCode.ARITY_ERROR) == 3


def test_float_formatting():
    assert format_float(-0.0) == "0"
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(math.nan) == "null"
    assert format_float(-math.inf) == "null"


def test_dumps_layout():
    family = ResidualFamily(name="curvature_p", max_residual=np.float64(0.5), tolerance=1e-8, passed=False)
    text = dumps({"families": [family], "a": np.array([1.0, -0.0])})
    assert text.endswith("}\n")
    assert '"a": [1, 0]' in text
    assert '"max_residual": 0.5' in text
    assert text.index('"name"') < text.index('"tolerance"')
    assert to_plain((np.int64(3), None)) == [3, None]
